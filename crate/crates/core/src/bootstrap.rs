//! Sentence-level block bootstrap for affinity standard errors.
//!
//! Each replicate resamples whole sentences (with replacement, preserving
//! sentence counts) from every reference text and from the scaled document,
//! re-estimates the reference distributions from the resampled references,
//! and refits the affinity — so the resulting standard errors carry both the
//! reference-estimation uncertainty and the within-sentence word dependence
//! that the likelihood-based (Wald) errors ignore.
//!
//! Replicate `i` draws from a dedicated ChaCha stream derived from
//! `(seed, i)`, so results are bit-identical regardless of execution order or
//! thread count.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::affinity::{estimate_affinity, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::corpus::{count_tokens, CountVector, Document, Vocabulary};
use crate::error::{Error, Result};
use crate::reference::estimate_reference;

/// Default number of bootstrap replicates.
pub const DEFAULT_REPLICATES: usize = 100;

/// Bootstrap output for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub doc_id: String,
    /// Affinity estimate from the original (unresampled) data.
    pub theta_hat: Vec<f64>,
    /// One theta draw per replicate; `None` where the replicate fit failed
    /// to converge.
    pub replicates: Vec<Option<Vec<f64>>>,
    /// Componentwise sample standard deviation over converged replicates
    /// (divisor B - 1).
    pub se_theta: Vec<f64>,
    /// Wald standard errors of the original fit, when available.
    pub wald_se_theta: Option<Vec<f64>>,
    /// Componentwise bootstrap/Wald ratio, when Wald errors exist.
    pub ratio: Option<Vec<f64>>,
    pub n_converged: usize,
    pub seed: u64,
    pub b: usize,
}

/// Resample a document at the sentence level: the same number of sentences,
/// each drawn uniformly with replacement; token order within sentences is
/// preserved.
pub fn resample_document<R: Rng + ?Sized>(doc: &Document, rng: &mut R) -> Document {
    let sentences = doc.sentences();
    let resampled: Vec<Vec<String>> = (0..sentences.len())
        .map(|_| sentences[rng.random_range(0..sentences.len())].clone())
        .collect();
    Document::new(doc.id(), resampled).expect("resample of a valid document is valid")
}

/// Sample standard deviation with divisor n-1, computed around the first
/// value so that identical inputs give exactly zero.
fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    debug_assert!(n >= 2);
    let shift = values[0];
    let devs: Vec<f64> = values.iter().map(|v| v - shift).collect();
    let mean = devs.iter().sum::<f64>() / n as f64;
    let ss: f64 = devs.iter().map(|d| (d - mean) * (d - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

fn rng_for_replicate(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Run the sentence-level block bootstrap for one document against labeled
/// reference documents.
///
/// The vocabulary stays fixed across replicates (type selection is not
/// re-run), references are re-estimated per replicate with the same `alpha`,
/// and each replicate fit uses the same `lambda`, treating the resampled
/// reference estimates as fixed. Replicates run in parallel; output is
/// independent of the degree of parallelism.
pub fn bootstrap_affinity(
    reference_docs: &BTreeMap<String, Vec<Document>>,
    doc: &Document,
    vocab: &Vocabulary,
    alpha: f64,
    lambda: f64,
    b: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if b < 2 {
        return Err(Error::TooFewReplicates(b));
    }

    // Original fit: the point estimate the bootstrap quantifies.
    let groups: BTreeMap<String, Vec<CountVector>> = reference_docs
        .iter()
        .map(|(label, docs)| {
            (
                label.clone(),
                docs.iter().map(|d| count_tokens(d, vocab)).collect(),
            )
        })
        .collect();
    let model = estimate_reference(&groups, vocab, alpha)?;
    let x = count_tokens(doc, vocab);
    let base = estimate_affinity(&model, &x, lambda, DEFAULT_TOL, DEFAULT_MAX_ITER)?;

    let replicates: Vec<Option<Vec<f64>>> = (0..b)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for_replicate(seed, i);
            // Fixed consumption order: reference classes in label order,
            // documents in input order, then the scaled document.
            let boot_groups: BTreeMap<String, Vec<CountVector>> = reference_docs
                .iter()
                .map(|(label, docs)| {
                    (
                        label.clone(),
                        docs.iter()
                            .map(|d| count_tokens(&resample_document(d, &mut rng), vocab))
                            .collect(),
                    )
                })
                .collect();
            let boot_doc = resample_document(doc, &mut rng);
            let boot_x = count_tokens(&boot_doc, vocab);
            let boot_model = match estimate_reference(&boot_groups, vocab, alpha) {
                Ok(m) => m,
                Err(_) => return None,
            };
            match estimate_affinity(&boot_model, &boot_x, lambda, DEFAULT_TOL, DEFAULT_MAX_ITER) {
                Ok(fit) if fit.converged => Some(fit.theta),
                _ => None,
            }
        })
        .collect();

    let converged: Vec<&Vec<f64>> = replicates.iter().flatten().collect();
    let n_converged = converged.len();
    if n_converged < 2 {
        return Err(Error::InsufficientConvergedReplicates {
            converged: n_converged,
            total: b,
        });
    }
    let k = model.k();
    let se_theta: Vec<f64> = (0..k)
        .map(|c| {
            let comp: Vec<f64> = converged.iter().map(|t| t[c]).collect();
            sample_std(&comp)
        })
        .collect();
    let ratio = base.wald_se_theta.as_ref().map(|wald| {
        se_theta
            .iter()
            .zip(wald)
            .map(|(s, w)| s / w)
            .collect::<Vec<f64>>()
    });

    Ok(BootstrapResult {
        doc_id: doc.id().to_string(),
        theta_hat: base.theta,
        replicates,
        se_theta,
        wald_se_theta: base.wald_se_theta,
        ratio,
        n_converged,
        seed,
        b,
    })
}
