//! Word-level influence on fitted affinities, per-word aggregation for
//! vocabulary screening, and the keyness G-squared comparison of two corpora.
//!
//! Influence follows the deletion idea: set one word's count to zero and ask
//! how far the affinity estimate would move. Refitting per word is avoided by
//! a one-step Newton approximation built from a rank-one downdate of the
//! observed information, so a whole corpus-by-vocabulary influence table is
//! cheap to compute.

use nalgebra::DVector;

use crate::affinity::{
    contrast_basis, estimate_affinity, observed_information, AffinityFit, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use crate::corpus::{CountVector, Vocabulary};
use crate::error::{Error, Result};
use crate::reference::ReferenceModel;

/// Chi-squared(1) critical value at the 0.05 level, used by the keyness
/// screen.
pub const CHI2_1_CRIT_05: f64 = 3.841;

/// Influence of one word on one document's fit.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceEntry {
    pub doc_id: String,
    pub word: String,
    /// Half the 1-norm of the approximate change in theta from deleting the
    /// word: the total probability mass that would shift.
    pub d: f64,
    /// Class the word's presence pushes the fit toward (the component of
    /// theta that drops the most if the word is deleted).
    pub direction: String,
    /// The word's count in the document.
    pub x_v: u64,
    /// Estimated change `theta_hat - theta_hat_(v)` from deleting the word;
    /// sums to zero because the contrast columns do.
    pub delta_theta: Vec<f64>,
    /// Set when the rank-one downdate lost definiteness and the entry was
    /// computed by an exact refit instead.
    pub flagged: bool,
}

/// Corpus-level summary of one word's influence.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceSummary {
    pub word: String,
    /// Majority direction over the documents the word influenced.
    pub direction: String,
    /// Number of documents with nonzero influence.
    pub n_docs: usize,
    /// Median influence over those documents.
    pub median_d: f64,
    pub max_d: f64,
}

/// Per-word influence of every observed word on one document's fitted
/// affinities, via the one-step approximation
///
/// ```text
/// delta_theta ~= (1/x_v - h~' h)^{-1} C h~,   h = C' Q e_v,  h~ = H^{-1} h
/// ```
///
/// with `H` the penalized observed information at the estimate. Entries where
/// the downdate denominator is not positive fall back to an exact refit and
/// are flagged.
pub fn influence(
    model: &ReferenceModel,
    x: &CountVector,
    fit: &AffinityFit,
    lambda: f64,
) -> Result<Vec<InfluenceEntry>> {
    if !fit.converged {
        return Err(Error::FitNotConverged);
    }
    if fit.theta.iter().any(|&t| t <= 0.0) {
        return Err(Error::BoundaryFit);
    }
    let k = model.k();
    let basis = contrast_basis(k)?;
    let h_matrix = observed_information(model, x, &fit.beta, lambda)?;
    let chol = h_matrix.cholesky().ok_or(Error::SingularInformation)?;
    let mu = model.mixture(&fit.theta)?;
    let vocab = model.vocab();

    let mut entries = Vec::new();
    for (v, count) in x.iter() {
        let pcol = DVector::from_fn(k, |i, _| model.prob(i, v));
        let h_v = (basis.contrast().transpose() * &pcol) / mu[v];
        let h_tilde = chol.solve(&h_v);
        let denom = 1.0 / count as f64 - h_tilde.dot(&h_v);
        let (delta_theta, flagged) = if denom > 0.0 {
            let delta = basis.contrast() * &h_tilde / denom;
            (delta.iter().copied().collect::<Vec<f64>>(), false)
        } else {
            // Downdate lost definiteness; use the exact refit it approximates.
            let delta = influence_exact(model, x, vocab.type_at(v), lambda)?;
            (delta, true)
        };
        let d = 0.5 * delta_theta.iter().map(|t| t.abs()).sum::<f64>();
        let direction = delta_theta
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite influence"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        entries.push(InfluenceEntry {
            doc_id: x.doc_id().to_string(),
            word: vocab.type_at(v).to_string(),
            d,
            direction: model.class_labels()[direction].clone(),
            x_v: count,
            delta_theta,
            flagged,
        });
    }
    Ok(entries)
}

/// Exact deletion effect `theta_hat - theta_hat_(v)`: refit with the word's
/// count set to zero. The quantity the one-step approximation estimates.
pub fn influence_exact(
    model: &ReferenceModel,
    x: &CountVector,
    word: &str,
    lambda: f64,
) -> Result<Vec<f64>> {
    let v = model
        .vocab()
        .index_of(word)
        .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
    if x.count(v) == 0 {
        return Err(Error::WordNotObserved(word.to_string()));
    }
    let full = estimate_affinity(model, x, lambda, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let reduced_counts = x.without(v);
    let reduced = estimate_affinity(model, &reduced_counts, lambda, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    Ok(full
        .theta
        .iter()
        .zip(&reduced.theta)
        .map(|(a, b)| a - b)
        .collect())
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Aggregate per-(document, word) influence entries into per-word summaries:
/// document count, median and maximum influence over the documents where the
/// word had any effect, and the majority direction. Ordered by direction,
/// then median influence descending, then word.
pub fn aggregate_influence(entries: &[InfluenceEntry]) -> Vec<InfluenceSummary> {
    use std::collections::BTreeMap;
    let mut by_word: BTreeMap<&str, Vec<&InfluenceEntry>> = BTreeMap::new();
    for e in entries {
        if e.d > 0.0 {
            by_word.entry(&e.word).or_default().push(e);
        }
    }
    let mut summaries: Vec<InfluenceSummary> = by_word
        .into_iter()
        .map(|(word, group)| {
            let mut ds: Vec<f64> = group.iter().map(|e| e.d).collect();
            ds.sort_by(|a, b| a.partial_cmp(b).expect("finite influence"));
            let mut dir_counts: BTreeMap<&str, usize> = BTreeMap::new();
            for e in &group {
                *dir_counts.entry(&e.direction).or_insert(0) += 1;
            }
            let direction = dir_counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(dir, _)| dir.to_string())
                .expect("nonempty group");
            InfluenceSummary {
                word: word.to_string(),
                direction,
                n_docs: group.len(),
                median_d: median(&ds),
                max_d: *ds.last().expect("nonempty group"),
            }
        })
        .collect();
    summaries.sort_by(|a, b| {
        a.direction
            .cmp(&b.direction)
            .then(b.median_d.partial_cmp(&a.median_d).expect("finite median"))
            .then(a.word.cmp(&b.word))
    });
    summaries
}

/// Which corpus uses a word at the higher rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeynessDirection {
    CorpusA,
    CorpusB,
    Balanced,
}

/// Keyness record for one word type.
#[derive(Debug, Clone, PartialEq)]
pub struct KeynessRecord {
    pub word: String,
    pub g2: f64,
    pub direction: KeynessDirection,
    pub significant_at_05: bool,
}

fn g2_term(observed: f64, expected: f64) -> f64 {
    if observed > 0.0 {
        observed * (observed / expected).ln()
    } else {
        0.0
    }
}

/// Per-word log-likelihood-ratio comparison of usage rates in two corpora:
/// the 2x2 table (word vs rest) x (corpus A vs corpus B) with expected counts
/// from the margins, `G2 = 2 sum O ln(O/E)`. Zero cells contribute zero;
/// significance is against the chi-squared(1) 0.05 critical value.
pub fn keyness_g2(
    counts_a: &CountVector,
    counts_b: &CountVector,
    vocab: &Vocabulary,
) -> Result<Vec<KeynessRecord>> {
    if counts_a.is_zero() || counts_b.is_zero() {
        return Err(Error::EmptyDocumentCounts);
    }
    let n_a = counts_a.total();
    let n_b = counts_b.total();
    let n = (n_a + n_b) as f64;
    let mut records = Vec::with_capacity(vocab.len());
    for v in 0..vocab.len() {
        let a = counts_a.count(v);
        let b = counts_b.count(v);
        let word = vocab.type_at(v).to_string();
        if a == 0 && b == 0 {
            records.push(KeynessRecord {
                word,
                g2: 0.0,
                direction: KeynessDirection::Balanced,
                significant_at_05: false,
            });
            continue;
        }
        let row1 = (a + b) as f64;
        let row2 = n - row1;
        let (ca, cb) = (n_a as f64, n_b as f64);
        let g2 = 2.0
            * (g2_term(a as f64, row1 * ca / n)
                + g2_term(b as f64, row1 * cb / n)
                + g2_term((n_a - a) as f64, row2 * ca / n)
                + g2_term((n_b - b) as f64, row2 * cb / n));
        // Rate comparison a/n_a vs b/n_b by exact cross-multiplication.
        let lhs = a as u128 * n_b as u128;
        let rhs = b as u128 * n_a as u128;
        let direction = match lhs.cmp(&rhs) {
            std::cmp::Ordering::Greater => KeynessDirection::CorpusA,
            std::cmp::Ordering::Less => KeynessDirection::CorpusB,
            std::cmp::Ordering::Equal => KeynessDirection::Balanced,
        };
        records.push(KeynessRecord {
            word,
            g2,
            direction,
            significant_at_05: g2 > CHI2_1_CRIT_05,
        });
    }
    Ok(records)
}
