//! Deterministic float and table formatting for the CLI outputs.

/// Format one float for CSV output. Machine mode prints 17 significant
/// digits (lossless round-trip); human mode rounds to 4 significant digits.
pub fn fmt_float(x: f64, human: bool) -> String {
    if human {
        fmt_sig(x, 4)
    } else {
        format!("{x:.16e}")
    }
}

/// Optional float: absent values become empty CSV cells.
pub fn fmt_opt(x: Option<f64>, human: bool) -> String {
    x.map(|v| fmt_float(v, human)).unwrap_or_default()
}

fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..=12).contains(&exp) {
        return format!("{:.*e}", sig - 1, x);
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}
