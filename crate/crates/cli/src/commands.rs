//! The five pipeline commands: fit, scale, influence, bootstrap, compare.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use affinity_core::affinity::{
    estimate_affinity, AffinityFit, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use affinity_core::baselines::{
    dictionary_score, maxmargin_score, naive_bayes_logodds, wordscore_text, DictionaryScorer,
};
use affinity_core::bootstrap::bootstrap_affinity;
use affinity_core::corpus::{
    build_vocabulary, count_tokens, parse_stopwords, CountVector, Document, TokenizerOptions,
    Vocabulary, SNOWBALL_ENGLISH,
};
use affinity_core::diagnostics::{aggregate_influence, influence, InfluenceEntry};
use affinity_core::io::{
    group_by_class, read_corpus_file, read_dictionary_file, read_model_file, write_model_file,
};
use affinity_core::reference::{estimate_reference, ReferenceModel};
use affinity_core::Error as CoreError;
use rayon::prelude::*;

use crate::output::{fmt_float, fmt_opt};
use crate::{
    BootstrapArgs, CompareArgs, FitArgs, InfluenceArgs, OutputFormat, ScaleArgs, VocabOpts,
};

/// Command failures, split by the exit code they map to: 2 for input or
/// validation problems, 3 for numerical failures.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SingularInformation
            | CoreError::FitNotConverged
            | CoreError::BoundaryFit
            | CoreError::InsufficientConvergedReplicates { .. } => Self::Numeric(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Input(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn resolve_stopwords(opts: &VocabOpts) -> CliResult<HashSet<String>> {
    if opts.no_stopwords {
        return Ok(HashSet::new());
    }
    match &opts.stopwords {
        Some(path) => Ok(parse_stopwords(&std::fs::read_to_string(path)?)),
        None => Ok(parse_stopwords(SNOWBALL_ENGLISH)),
    }
}

fn read_labeled_refs(path: &Path) -> CliResult<BTreeMap<String, Vec<Document>>> {
    let entries = read_corpus_file(path, &TokenizerOptions::default())?;
    let groups = group_by_class(entries)?;
    Ok(groups)
}

fn class_counts(
    groups: &BTreeMap<String, Vec<Document>>,
    vocab: &Vocabulary,
) -> BTreeMap<String, Vec<CountVector>> {
    groups
        .iter()
        .map(|(label, docs)| {
            (
                label.clone(),
                docs.iter().map(|d| count_tokens(d, vocab)).collect(),
            )
        })
        .collect()
}

pub fn fit(args: FitArgs) -> CliResult<()> {
    let groups = read_labeled_refs(&args.refs)?;
    let stops = resolve_stopwords(&args.vocab)?;
    let all_docs: Vec<Document> = groups.values().flatten().cloned().collect();
    let vocab = build_vocabulary(&all_docs, args.vocab.min_count, &stops)?;
    let counts = class_counts(&groups, &vocab);
    let model = estimate_reference(&counts, &vocab, args.alpha)?;
    write_model_file(&model, &args.out)?;

    println!("vocabulary: {} types", vocab.len());
    for (label, texts) in &counts {
        let total: u64 = texts.iter().map(|x| x.total()).sum();
        println!("class {label}: {} texts, {total} in-vocabulary tokens", texts.len());
    }
    println!("model written to {}", args.out.display());
    Ok(())
}

enum ScaleRow {
    Fitted(String, AffinityFit),
    Skipped(String, String),
}

fn fit_documents(
    model: &ReferenceModel,
    docs: &[Document],
    lambda: f64,
    max_iter: usize,
) -> Vec<ScaleRow> {
    docs.par_iter()
        .map(|doc| {
            let x = count_tokens(doc, model.vocab());
            if x.is_zero() && lambda == 0.0 {
                return ScaleRow::Skipped(
                    doc.id().to_string(),
                    "no in-vocabulary tokens with lambda = 0".into(),
                );
            }
            match estimate_affinity(model, &x, lambda, DEFAULT_TOL, max_iter) {
                Ok(fit) => ScaleRow::Fitted(doc.id().to_string(), fit),
                Err(e) => ScaleRow::Skipped(doc.id().to_string(), e.to_string()),
            }
        })
        .collect()
}

fn write_fits_csv(
    path: &Path,
    model: &ReferenceModel,
    rows: &[ScaleRow],
    human: bool,
) -> CliResult<()> {
    let labels = model.class_labels();
    let k = labels.len();
    let mut header = vec!["id".to_string()];
    header.extend(labels.iter().map(|l| format!("theta_{l}")));
    header.extend((1..k).map(|j| format!("beta_{j}")));
    header.extend(["loglik", "iterations", "converged"].map(String::from));
    header.extend(labels.iter().map(|l| format!("se_{l}")));

    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&header)?;
    for row in rows {
        match row {
            ScaleRow::Fitted(id, fit) => {
                let mut record = vec![id.clone()];
                record.extend(fit.theta.iter().map(|t| fmt_float(*t, human)));
                record.extend(fit.beta.iter().map(|b| fmt_float(*b, human)));
                record.push(fmt_float(fit.loglik, human));
                record.push(fit.iterations.to_string());
                record.push(fit.converged.to_string());
                match &fit.wald_se_theta {
                    Some(se) => record.extend(se.iter().map(|s| fmt_float(*s, human))),
                    None => record.extend(std::iter::repeat_n(String::new(), k)),
                }
                w.write_record(&record)?;
            }
            ScaleRow::Skipped(id, _) => {
                let mut record = vec![id.clone()];
                record.extend(std::iter::repeat_n(String::new(), 2 * k + (k - 1) + 3));
                w.write_record(&record)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_fits_json(path: &Path, model: &ReferenceModel, rows: &[ScaleRow]) -> CliResult<()> {
    use serde_json::{json, Value};
    let labels = model.class_labels();
    let values: Vec<Value> = rows
        .iter()
        .map(|row| match row {
            ScaleRow::Fitted(id, fit) => {
                let theta: BTreeMap<&str, f64> = labels
                    .iter()
                    .map(String::as_str)
                    .zip(fit.theta.iter().copied())
                    .collect();
                let se: Option<BTreeMap<&str, f64>> = fit.wald_se_theta.as_ref().map(|se| {
                    labels
                        .iter()
                        .map(String::as_str)
                        .zip(se.iter().copied())
                        .collect()
                });
                json!({
                    "id": id,
                    "theta": theta,
                    "beta": fit.beta,
                    "loglik": fit.loglik,
                    "iterations": fit.iterations,
                    "converged": fit.converged,
                    "wald_se": se,
                })
            }
            ScaleRow::Skipped(id, note) => json!({ "id": id, "skipped": note }),
        })
        .collect();
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &values)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn check_convergence(rows: &[ScaleRow]) -> CliResult<()> {
    let failed: Vec<&str> = rows
        .iter()
        .filter_map(|r| match r {
            ScaleRow::Fitted(id, fit) if !fit.converged => Some(id.as_str()),
            _ => None,
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "{} document(s) did not converge: {}",
            failed.len(),
            failed.join(", ")
        )))
    }
}

pub fn scale(args: ScaleArgs) -> CliResult<()> {
    let model = read_model_file(&args.model)?;
    let entries = read_corpus_file(&args.docs, &TokenizerOptions::default())?;
    let docs: Vec<Document> = entries.into_iter().map(|e| e.document).collect();
    let rows = fit_documents(&model, &docs, args.lambda, args.max_iter);
    for row in &rows {
        if let ScaleRow::Skipped(id, note) = row {
            eprintln!("warning: skipped '{id}': {note}");
        }
    }
    match args.format {
        OutputFormat::Csv => write_fits_csv(&args.out, &model, &rows, args.human)?,
        OutputFormat::Json => write_fits_json(&args.out, &model, &rows)?,
    }
    check_convergence(&rows)
}

pub fn influence_cmd(args: InfluenceArgs) -> CliResult<()> {
    let model = read_model_file(&args.model)?;
    let entries = read_corpus_file(&args.docs, &TokenizerOptions::default())?;
    let docs: Vec<Document> = entries.into_iter().map(|e| e.document).collect();

    let per_doc: Vec<Result<Vec<InfluenceEntry>, (String, CoreError)>> = docs
        .par_iter()
        .map(|doc| {
            let x = count_tokens(doc, model.vocab());
            let fit = estimate_affinity(&model, &x, args.lambda, DEFAULT_TOL, DEFAULT_MAX_ITER)
                .map_err(|e| (doc.id().to_string(), e))?;
            influence(&model, &x, &fit, args.lambda).map_err(|e| (doc.id().to_string(), e))
        })
        .collect();

    let mut all = Vec::new();
    let mut nonconverged = Vec::new();
    for result in per_doc {
        match result {
            Ok(entries) => all.extend(entries),
            Err((id, CoreError::FitNotConverged)) => nonconverged.push(id),
            Err((id, e)) => eprintln!("warning: skipped '{id}': {e}"),
        }
    }

    let scale_by = if args.x100 { 100.0 } else { 1.0 };
    let mut w = csv::Writer::from_path(&args.out_entries)?;
    w.write_record(["doc_id", "word", "count", "d", "direction"])?;
    for e in &all {
        w.write_record([
            e.doc_id.as_str(),
            e.word.as_str(),
            &e.x_v.to_string(),
            &fmt_float(e.d * scale_by, args.human),
            e.direction.as_str(),
        ])?;
    }
    w.flush()?;

    let summaries = aggregate_influence(&all);
    let mut w = csv::Writer::from_path(&args.out_summary)?;
    w.write_record(["word", "direction", "n_docs", "median_d", "max_d"])?;
    for s in &summaries {
        w.write_record([
            s.word.as_str(),
            s.direction.as_str(),
            &s.n_docs.to_string(),
            &fmt_float(s.median_d * scale_by, args.human),
            &fmt_float(s.max_d * scale_by, args.human),
        ])?;
    }
    w.flush()?;

    if nonconverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "{} document(s) did not converge: {}",
            nonconverged.len(),
            nonconverged.join(", ")
        )))
    }
}

pub fn bootstrap_cmd(args: BootstrapArgs) -> CliResult<()> {
    let groups = read_labeled_refs(&args.refs)?;
    let stops = resolve_stopwords(&args.vocab)?;
    let all_refs: Vec<Document> = groups.values().flatten().cloned().collect();
    let vocab = build_vocabulary(&all_refs, args.vocab.min_count, &stops)?;
    let entries = read_corpus_file(&args.docs, &TokenizerOptions::default())?;
    let docs: Vec<Document> = entries.into_iter().map(|e| e.document).collect();

    let model = estimate_reference(&class_counts(&groups, &vocab), &vocab, args.alpha)?;
    let labels = model.class_labels().to_vec();

    let mut w = csv::Writer::from_path(&args.out)?;
    w.write_record([
        "doc_id",
        "class",
        "theta_hat",
        "boot_se",
        "wald_se",
        "ratio",
        "b_converged",
        "seed",
    ])?;
    let mut dump = match &args.dump_replicates {
        Some(path) => {
            let mut dw = csv::Writer::from_path(path)?;
            let mut header = vec!["doc_id".to_string(), "replicate".to_string(), "converged".to_string()];
            header.extend(labels.iter().map(|l| format!("theta_{l}")));
            dw.write_record(&header)?;
            Some(dw)
        }
        None => None,
    };

    for (i, doc) in docs.iter().enumerate() {
        // Per-document seeds keep replicate streams distinct across documents
        // while staying reproducible.
        let doc_seed = args.seed.wrapping_add(i as u64);
        let result = bootstrap_affinity(
            &groups, doc, &vocab, args.alpha, args.lambda, args.b, doc_seed,
        )?;
        for (c, label) in labels.iter().enumerate() {
            w.write_record([
                result.doc_id.as_str(),
                label.as_str(),
                &fmt_float(result.theta_hat[c], args.human),
                &fmt_float(result.se_theta[c], args.human),
                &fmt_opt(result.wald_se_theta.as_ref().map(|se| se[c]), args.human),
                &fmt_opt(result.ratio.as_ref().map(|r| r[c]), args.human),
                &result.n_converged.to_string(),
                &result.seed.to_string(),
            ])?;
        }
        if let Some(dw) = dump.as_mut() {
            for (r, rep) in result.replicates.iter().enumerate() {
                let mut record = vec![
                    result.doc_id.clone(),
                    r.to_string(),
                    rep.is_some().to_string(),
                ];
                match rep {
                    Some(theta) => {
                        record.extend(theta.iter().map(|t| fmt_float(*t, args.human)))
                    }
                    None => record.extend(std::iter::repeat_n(String::new(), labels.len())),
                }
                dw.write_record(&record)?;
            }
        }
    }
    w.flush()?;
    if let Some(mut dw) = dump {
        dw.flush()?;
    }
    Ok(())
}

const COMPARE_METHODS: [&str; 6] = [
    "affinity_theta1",
    "nb_logodds",
    "dict_score",
    "wordscore_raw",
    "wordscore_mv",
    "maxmargin",
];

fn pearson_opt(xs: &[Option<f64>], ys: &[Option<f64>]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter_map(|(x, y)| x.zip(*y))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

pub fn compare(args: CompareArgs) -> CliResult<()> {
    let model = read_model_file(&args.model)?;
    if model.k() != 2 {
        return Err(CliError::Input(format!(
            "compare requires a two-class model, got {} classes",
            model.k()
        )));
    }
    let scorer: Option<DictionaryScorer> = match &args.dictionary {
        Some(path) => Some(read_dictionary_file(path)?),
        None => None,
    };
    let entries = read_corpus_file(&args.docs, &TokenizerOptions::default())?;
    let docs: Vec<Document> = entries.into_iter().map(|e| e.document).collect();

    struct CompareRow {
        id: String,
        cols: [Option<f64>; 6],
    }

    let rows: Vec<CompareRow> = docs
        .par_iter()
        .map(|doc| {
            let x = count_tokens(doc, model.vocab());
            let affinity = if x.is_zero() && args.lambda == 0.0 {
                None
            } else {
                estimate_affinity(&model, &x, args.lambda, DEFAULT_TOL, DEFAULT_MAX_ITER)
                    .ok()
                    .filter(|f| f.converged)
                    .map(|f| f.theta[0])
            };
            let nb = naive_bayes_logodds(&model, &x).ok();
            let dict = scorer
                .as_ref()
                .and_then(|s| dictionary_score(s, &x, model.vocab()).ok());
            let (ws_raw, ws_mv) = match wordscore_text(&model, &x) {
                Ok(ws) => (Some(ws.raw), ws.rescaled),
                Err(_) => (None, None),
            };
            let mm = maxmargin_score(&model, &x).ok();
            CompareRow {
                id: doc.id().to_string(),
                cols: [affinity, nb, dict, ws_raw, ws_mv, mm],
            }
        })
        .collect();

    let mut w = csv::Writer::from_path(&args.out)?;
    let mut header = vec!["doc_id"];
    header.extend(COMPARE_METHODS);
    w.write_record(&header)?;
    for row in &rows {
        let mut record = vec![row.id.clone()];
        record.extend(row.cols.iter().map(|c| fmt_opt(*c, args.human)));
        w.write_record(&record)?;
    }
    w.flush()?;

    if let Some(corr_path) = &args.out_corr {
        let columns: Vec<Vec<Option<f64>>> = (0..6)
            .map(|j| rows.iter().map(|r| r.cols[j]).collect())
            .collect();
        let matrix: Vec<Vec<Option<f64>>> = (0..6)
            .map(|i| {
                (0..6)
                    .map(|j| {
                        if i == j {
                            // Defined exactly when the column has variance.
                            pearson_opt(&columns[i], &columns[j]).map(|_| 1.0)
                        } else {
                            pearson_opt(&columns[i], &columns[j])
                        }
                    })
                    .collect()
            })
            .collect();
        let payload = serde_json::json!({
            "methods": COMPARE_METHODS,
            "pearson": matrix,
            "documents": rows.len(),
        });
        let mut out = BufWriter::new(File::create(corr_path)?);
        serde_json::to_writer_pretty(&mut out, &payload)?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    Ok(())
}
