//! Synthetic data generation for simulation studies, calibration checks, and
//! benchmarks.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};

use crate::corpus::{CountVector, Document, Vocabulary};
use crate::error::Result;

/// A zero-padded `w000`-style vocabulary of the given size. Padding keeps the
/// lexicographic order equal to the numeric order.
pub fn numbered_vocabulary(size: usize) -> Result<Vocabulary> {
    let width = size.max(2).ilog10() as usize + 1;
    Vocabulary::new((0..size).map(|i| format!("w{i:0width$}")))
}

/// Draw a point from the interior of the probability simplex via normalized
/// Gamma draws (a symmetric Dirichlet with the given concentration).
pub fn sample_simplex<R: Rng + ?Sized>(dim: usize, concentration: f64, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut draws: Vec<f64> = (0..dim)
        .map(|_| gamma.sample(rng).max(f64::MIN_POSITIVE))
        .collect();
    let sum: f64 = draws.iter().sum();
    for d in &mut draws {
        *d /= sum;
    }
    draws
}

/// Multinomial counts via the conditional-binomial decomposition: exact,
/// O(dim), and deterministic given the generator state.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], n: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut mass_left = 1.0f64;
    for (c, &p) in counts.iter_mut().zip(probs) {
        if remaining == 0 {
            break;
        }
        let cond = (p / mass_left).clamp(0.0, 1.0);
        *c = if cond >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, cond)
                .expect("probability in range")
                .sample(rng)
        };
        remaining -= *c;
        mass_left = (mass_left - p).max(0.0);
    }
    if remaining > 0 {
        // Leftover mass from rounding; give it to the last category.
        if let Some(last) = counts.last_mut() {
            *last += remaining;
        }
    }
    counts
}

/// Convex combination of reference rows: the token distribution of a speaker
/// with affinities `theta`.
pub fn mixture_row(rows: &[Vec<f64>], theta: &[f64]) -> Vec<f64> {
    assert_eq!(rows.len(), theta.len());
    let v = rows[0].len();
    let mut mu = vec![0.0; v];
    for (t, row) in theta.iter().zip(rows) {
        for (m, p) in mu.iter_mut().zip(row) {
            *m += t * p;
        }
    }
    mu
}

/// Generate a document of `n_sentences` sentences, each with
/// `tokens_per_sentence` tokens drawn independently from `probs` over `vocab`.
pub fn sample_document<R: Rng + ?Sized>(
    id: impl Into<String>,
    vocab: &Vocabulary,
    probs: &[f64],
    n_sentences: usize,
    tokens_per_sentence: usize,
    rng: &mut R,
) -> Document {
    assert_eq!(vocab.len(), probs.len());
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let sentences: Vec<Vec<String>> = (0..n_sentences.max(1))
        .map(|_| {
            (0..tokens_per_sentence)
                .map(|_| {
                    let u: f64 = rng.random::<f64>() * acc;
                    let idx = cdf.partition_point(|&c| c < u).min(vocab.len() - 1);
                    vocab.type_at(idx).to_string()
                })
                .collect()
        })
        .collect();
    Document::new(id, sentences).expect("generated document is valid")
}

/// Counts drawn from the mixture `theta' P`: one simulated document of
/// length `n` as a bag of words.
pub fn sample_mixture_counts<R: Rng + ?Sized>(
    doc_id: impl Into<String>,
    rows: &[Vec<f64>],
    theta: &[f64],
    n: u64,
    rng: &mut R,
) -> CountVector {
    let mu = mixture_row(rows, theta);
    CountVector::from_dense(doc_id, &sample_counts(&mu, n, rng))
}
