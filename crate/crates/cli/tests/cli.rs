//! End-to-end tests driving the `affinity` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_affinity"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_refs(dir: &Path) -> PathBuf {
    let path = dir.join("refs.jsonl");
    fs::write(
        &path,
        concat!(
            "{\"id\":\"gov\",\"class\":\"government\",\"text\":\"Budget budget growth growth growth. Economy economy stable plan plan. Budget growth economy confidence plan.\"}\n",
            "{\"id\":\"opp1\",\"class\":\"opposition\",\"text\":\"Scandal scandal resign resign resign. Failure failure crisis crisis blame. Scandal resign failure crisis blame.\"}\n",
            "{\"id\":\"opp2\",\"class\":\"opposition\",\"text\":\"Resign resign scandal blame blame. Crisis crisis failure failure failure.\"}\n",
        ),
    )
    .unwrap();
    path
}

fn write_docs(dir: &Path) -> PathBuf {
    let path = dir.join("docs.jsonl");
    fs::write(
        &path,
        concat!(
            "{\"id\":\"d-gov\",\"text\":\"Budget budget growth growth growth. Economy economy stable plan plan.\"}\n",
            "{\"id\":\"d-mixed\",\"text\":\"Budget growth scandal resign. Economy crisis blame plan.\"}\n",
            "{\"id\":\"d-opp\",\"text\":\"Scandal scandal resign resign. Failure crisis crisis blame.\"}\n",
            "{\"id\":\"d-empty\",\"text\":\"zzz qqq xxx\"}\n",
        ),
    )
    .unwrap();
    path
}

fn fit_model(dir: &Path) -> PathBuf {
    let refs = write_refs(dir);
    let model = dir.join("model.json");
    let out = run(&[
        "fit",
        "--refs",
        refs.to_str().unwrap(),
        "--min-count",
        "2",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_success(&out);
    model
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .unwrap();
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn fit_reports_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let refs = write_refs(dir.path());
    let m1 = dir.path().join("m1.json");
    let m2 = dir.path().join("m2.json");
    let out = run(&[
        "fit",
        "--refs",
        refs.to_str().unwrap(),
        "--out",
        m1.to_str().unwrap(),
    ]);
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("vocabulary:"), "stdout: {stdout}");
    assert!(stdout.contains("class government:"));
    assert!(stdout.contains("class opposition:"));

    let out = run(&[
        "fit",
        "--refs",
        refs.to_str().unwrap(),
        "--out",
        m2.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap());

    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&m1).unwrap()).unwrap();
    assert_eq!(parsed["alpha"], 0.5);
    let rows = parsed["probs"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let sum: f64 = row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fit_min_count_drops_singletons() {
    let dir = TempDir::new().unwrap();
    let refs = write_refs(dir.path());
    let vocab_size = |min_count: &str| -> usize {
        let model = dir.path().join(format!("m{min_count}.json"));
        let out = run(&[
            "fit",
            "--refs",
            refs.to_str().unwrap(),
            "--min-count",
            min_count,
            "--out",
            model.to_str().unwrap(),
        ]);
        assert_success(&out);
        let parsed: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
        parsed["vocabulary"].as_array().unwrap().len()
    };
    // "stable" and "confidence" appear once; min_count 2 drops them.
    assert_eq!(vocab_size("1"), vocab_size("2") + 2);
}

#[test]
fn fit_requires_two_classes() {
    let dir = TempDir::new().unwrap();
    let refs = dir.path().join("refs.jsonl");
    fs::write(
        &refs,
        "{\"id\":\"a\",\"class\":\"only\",\"text\":\"one two three two one\"}\n",
    )
    .unwrap();
    let out = run(&[
        "fit",
        "--refs",
        refs.to_str().unwrap(),
        "--out",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_missing_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "fit",
        "--refs",
        dir.path().join("nope.jsonl").to_str().unwrap(),
        "--out",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_empty_vocabulary_exits_2() {
    let dir = TempDir::new().unwrap();
    let refs = dir.path().join("refs.jsonl");
    // every type is a hapax, so min-count 2 leaves nothing
    fs::write(
        &refs,
        concat!(
            "{\"id\":\"a\",\"class\":\"x\",\"text\":\"alpha beta gamma\"}\n",
            "{\"id\":\"b\",\"class\":\"y\",\"text\":\"delta epsilon zeta\"}\n",
        ),
    )
    .unwrap();
    let out = run(&[
        "fit",
        "--refs",
        refs.to_str().unwrap(),
        "--out",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scale_recovers_reference_alignment() {
    let dir = TempDir::new().unwrap();
    let model = fit_model(dir.path());
    let docs = write_docs(dir.path());
    let fits = dir.path().join("fits.csv");
    let out = run(&[
        "scale",
        "--model",
        model.to_str().unwrap(),
        "--docs",
        docs.to_str().unwrap(),
        "--out",
        fits.to_str().unwrap(),
    ]);
    assert_success(&out);

    let rows = read_csv(&fits);
    assert_eq!(
        rows[0],
        vec![
            "id",
            "theta_government",
            "theta_opposition",
            "beta_1",
            "loglik",
            "iterations",
            "converged",
            "se_government",
            "se_opposition"
        ]
    );
    assert_eq!(rows.len(), 5);

    let theta = |row: &[String], col: usize| row[col].parse::<f64>().unwrap();
    // d-gov matches the government reference text
    assert_eq!(rows[1][0], "d-gov");
    assert!(theta(&rows[1], 1) > 0.9, "gov doc: {}", rows[1][1]);
    // d-opp leans opposition
    assert!(theta(&rows[3], 2) > 0.9, "opp doc: {}", rows[3][2]);
    // document with no in-vocabulary tokens sits at the center under the penalty
    assert_eq!(rows[4][0], "d-empty");
    assert!((theta(&rows[4], 1) - 0.5).abs() < 1e-12);
    assert!((theta(&rows[4], 2) - 0.5).abs() < 1e-12);
    // all converged
    assert!(rows[1..].iter().all(|r| r[6] == "true"));

    // byte-identical on re-run
    let first = fs::read(&fits).unwrap();
    let out = run(&[
        "scale",
        "--model",
        model.to_str().unwrap(),
        "--docs",
        docs.to_str().unwrap(),
        "--out",
        fits.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert_eq!(first, fs::read(&fits).unwrap());
}

#[test]
fn scale_flags_empty_documents_at_lambda_zero() {
    let dir = TempDir::new().unwrap();
    let model = fit_model(dir.path());
    let docs = write_docs(dir.path());
    let fits = dir.path().join("fits.csv");
    let out = run(&[
        "scale",
        "--model",
        model.to_str().unwrap(),
        "--docs",
        docs.to_str().unwrap(),
        "--lambda",
        "0",
        "--out",
        fits.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("d-empty"));
    let rows = read_csv(&fits);
    let empty_row = rows.iter().find(|r| r[0] == "d-empty").unwrap();
    assert!(
        empty_row[1..].iter().all(|c| c.is_empty()),
        "flagged row must carry no fabricated numbers: {empty_row:?}"
    );
}

#[test]
fn scale_nonconvergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let model = fit_model(dir.path());
    let docs = write_docs(dir.path());
    let fits = dir.path().join("fits.csv");
    let out = run(&[
        "scale",
        "--model",
        model.to_str().unwrap(),
        "--docs",
        docs.to_str().unwrap(),
        "--max-iter",
        "1",
        "--out",
        fits.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
    // the output is still written, with convergence honestly recorded
    let rows = read_csv(&fits);
    assert!(rows[1..].iter().any(|r| r[6] == "false"));
}

#[test]
fn scale_json_output_parses() {
    let dir = TempDir::new().unwrap();
    let model = fit_model(dir.path());
    let docs = write_docs(dir.path());
    let fits = dir.path().join("fits.json");
    let out = run(&[
        "scale",
        "--model",
        model.to_str().unwrap(),
        "--docs",
        docs.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        fits.to_str().unwrap(),
    ]);
    assert_success(&out);
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&fits).unwrap()).unwrap();
    let arr = parsed.as_array().unwrap();
    assert_eq!(arr.len(), 4);
    assert!(arr[0]["theta"]["government"].as_f64().unwrap() > 0.9);
    assert!(arr[0]["converged"].as_bool().unwrap());
}

#[test]
fn influence_tables_and_x100() {
    let dir = TempDir::new().unwrap();
    let model = fit_model(dir.path());
    let docs = write_docs(dir.path());
    let entries = dir.path().join("inf.csv");
    let summary = dir.path().join("summary.csv");
    let out = run(&[
        "influence",
        "--model",
        model.to_str().unwrap(),
        "--docs",
        docs.to_str().unwrap(),
        "--out-entries",
        entries.to_str().unwrap(),
        "--out-summary",
        summary.to_str().unwrap(),
    ]);
    assert_success(&out);

    let entry_rows = read_csv(&entries);
    assert_eq!(entry_rows[0], vec!["doc_id", "word", "count", "d", "direction"]);
    assert!(entry_rows.len() > 1);
    let summary_rows = read_csv(&summary);
    assert_eq!(
        summary_rows[0],
        vec!["word", "direction", "n_docs", "median_d", "max_d"]
    );
    // summary ordering: direction, then median descending, then word
    for pair in summary_rows[1..].windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let med = |r: &[String]| r[3].parse::<f64>().unwrap();
        assert!(
            a[1] < b[1] || (a[1] == b[1] && (med(a) > med(b) || (med(a) == med(b) && a[0] <= b[0]))),
            "ordering violated: {a:?} then {b:?}"
        );
    }

    // x100 scales the influence columns by exactly 100
    let entries100 = dir.path().join("inf100.csv");
    let summary100 = dir.path().join("summary100.csv");
    let out = run(&[
        "influence",
        "--model",
        model.to_str().unwrap(),
        "--docs",
        docs.to_str().unwrap(),
        "--out-entries",
        entries100.to_str().unwrap(),
        "--out-summary",
        summary100.to_str().unwrap(),
        "--x100",
    ]);
    assert_success(&out);
    let scaled_rows = read_csv(&entries100);
    for (plain, scaled) in entry_rows[1..].iter().zip(&scaled_rows[1..]) {
        let d: f64 = plain[3].parse().unwrap();
        let d100: f64 = scaled[3].parse().unwrap();
        assert!((d100 - 100.0 * d).abs() <= 1e-12 * (1.0 + d100.abs()));
    }
}

#[test]
fn bootstrap_is_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let refs = write_refs(dir.path());
    let docs = write_docs(dir.path());
    let boot = dir.path().join("boot.csv");
    let reps = dir.path().join("reps.csv");
    let args = |out: &Path, dump: &Path| {
        vec![
            "bootstrap".to_string(),
            "--refs".into(),
            refs.to_str().unwrap().into(),
            "--docs".into(),
            docs.to_str().unwrap().into(),
            "--b".into(),
            "25".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
            "--dump-replicates".into(),
            dump.to_str().unwrap().into(),
        ]
    };
    let out = bin().args(args(&boot, &reps)).output().unwrap();
    assert_success(&out);
    let first = fs::read(&boot).unwrap();
    let first_reps = fs::read(&reps).unwrap();

    let out = bin().args(args(&boot, &reps)).output().unwrap();
    assert_success(&out);
    assert_eq!(first, fs::read(&boot).unwrap());
    assert_eq!(first_reps, fs::read(&reps).unwrap());

    let rows = read_csv(&boot);
    assert_eq!(
        rows[0],
        vec!["doc_id", "class", "theta_hat", "boot_se", "wald_se", "ratio", "b_converged", "seed"]
    );
    // one row per (document, class); per-document seeds advance from the base
    assert_eq!(rows.len(), 1 + 4 * 2);
    assert_eq!(rows[1][7], "42");
    assert_eq!(rows[3][7], "43");
    let reps_rows = read_csv(&reps);
    assert_eq!(reps_rows.len(), 1 + 4 * 25);

    // output is independent of the rayon thread count
    for threads in ["1", "4"] {
        let out = bin()
            .args(args(&boot, &reps))
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert_success(&out);
        assert_eq!(first, fs::read(&boot).unwrap(), "threads = {threads}");
        assert_eq!(first_reps, fs::read(&reps).unwrap(), "threads = {threads}");
    }
}

#[test]
fn compare_emits_columns_and_correlations() {
    let dir = TempDir::new().unwrap();
    let model = fit_model(dir.path());
    let docs = write_docs(dir.path());
    let dict = dir.path().join("dict.json");
    fs::write(
        &dict,
        "{\"positive\":[\"budget\",\"growth\",\"economy\",\"plan\"],\"negative\":[\"scandal\",\"resign\",\"crisis\",\"blame\"]}",
    )
    .unwrap();
    let cmp = dir.path().join("compare.csv");
    let corr = dir.path().join("corr.json");
    let out = run(&[
        "compare",
        "--model",
        model.to_str().unwrap(),
        "--docs",
        docs.to_str().unwrap(),
        "--dictionary",
        dict.to_str().unwrap(),
        "--out",
        cmp.to_str().unwrap(),
        "--out-corr",
        corr.to_str().unwrap(),
    ]);
    assert_success(&out);

    let rows = read_csv(&cmp);
    assert_eq!(
        rows[0],
        vec![
            "doc_id",
            "affinity_theta1",
            "nb_logodds",
            "dict_score",
            "wordscore_raw",
            "wordscore_mv",
            "maxmargin"
        ]
    );
    // the government-aligned document scores positive on the dictionary
    let gov_row = rows.iter().find(|r| r[0] == "d-gov").unwrap();
    assert!(gov_row[3].parse::<f64>().unwrap() > 0.9);

    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&corr).unwrap()).unwrap();
    assert_eq!(parsed["methods"].as_array().unwrap().len(), 6);
    // affinity_theta1 and nb_logodds strongly agree on this corpus
    let m = parsed["pearson"].as_array().unwrap();
    let c01 = m[0].as_array().unwrap()[1].as_f64().unwrap();
    assert!(c01 > 0.9, "affinity vs NB correlation: {c01}");
}

#[test]
fn compare_degenerate_model_reports_undefined_correlations() {
    let dir = TempDir::new().unwrap();
    // both classes estimated from the same text: p1 = p2 exactly
    let refs = dir.path().join("refs.jsonl");
    fs::write(
        &refs,
        concat!(
            "{\"id\":\"a\",\"class\":\"x\",\"text\":\"alpha alpha beta beta gamma gamma\"}\n",
            "{\"id\":\"b\",\"class\":\"y\",\"text\":\"alpha alpha beta beta gamma gamma\"}\n",
        ),
    )
    .unwrap();
    let model = dir.path().join("model.json");
    let out = run(&[
        "fit",
        "--refs",
        refs.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_success(&out);

    let docs = dir.path().join("docs.jsonl");
    fs::write(
        &docs,
        concat!(
            "{\"id\":\"d1\",\"text\":\"alpha beta\"}\n",
            "{\"id\":\"d2\",\"text\":\"gamma gamma alpha\"}\n",
            "{\"id\":\"d3\",\"text\":\"beta\"}\n",
        ),
    )
    .unwrap();
    let cmp = dir.path().join("cmp.csv");
    let corr = dir.path().join("corr.json");
    let out = run(&[
        "compare",
        "--model",
        model.to_str().unwrap(),
        "--docs",
        docs.to_str().unwrap(),
        "--out",
        cmp.to_str().unwrap(),
        "--out-corr",
        corr.to_str().unwrap(),
    ]);
    assert_success(&out);

    let rows = read_csv(&cmp);
    for row in &rows[1..] {
        assert_eq!(row[1], "5.0000000000000000e-1", "affinity pinned to center");
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0, "NB log-odds zero");
        assert!(row[5].is_empty(), "rescaled wordscore undefined");
    }
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&corr).unwrap()).unwrap();
    let m = parsed["pearson"].as_array().unwrap();
    assert!(m[0].as_array().unwrap()[1].is_null(), "constant columns have no correlation");
    assert!(m[0].as_array().unwrap()[0].is_null(), "diagonal undefined for constant column");
}

#[test]
fn no_stopwords_flag_keeps_function_words() {
    let dir = TempDir::new().unwrap();
    let refs = dir.path().join("refs.jsonl");
    fs::write(
        &refs,
        concat!(
            "{\"id\":\"a\",\"class\":\"x\",\"text\":\"the budget the budget the\"}\n",
            "{\"id\":\"b\",\"class\":\"y\",\"text\":\"the scandal the scandal the\"}\n",
        ),
    )
    .unwrap();
    let vocab_of = |extra: &[&str]| -> Vec<String> {
        let model = dir.path().join("m.json");
        let mut args = vec![
            "fit",
            "--refs",
            refs.to_str().unwrap(),
            "--out",
            model.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_success(&out);
        let parsed: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
        parsed["vocabulary"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect()
    };
    let default_vocab = vocab_of(&[]);
    assert_eq!(default_vocab, vec!["budget", "scandal"]);
    let full_vocab = vocab_of(&["--no-stopwords"]);
    assert_eq!(full_vocab, vec!["budget", "scandal", "the"]);
}
