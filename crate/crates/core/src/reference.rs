//! Reference class distributions estimated by Lidstone (add-alpha) smoothing.

use std::collections::BTreeMap;

use crate::corpus::{CountVector, Vocabulary};
use crate::error::{Error, Result};

/// Default smoothing constant (the Jeffreys choice).
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Per-class smoothed word distributions over a shared vocabulary.
///
/// Row `k` holds `p_k`, the probability of each word type given class `k`.
/// With `alpha > 0` every entry is strictly positive, which keeps the mixture
/// likelihood finite for any document.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceModel {
    vocab: Vocabulary,
    class_labels: Vec<String>,
    probs: Vec<Vec<f64>>,
    alpha: f64,
}

/// Compensated (Kahan) sum; keeps long row sums accurate to a few ulps.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

impl ReferenceModel {
    /// Assemble a model from parts, validating the invariants: at least two
    /// classes, rows of vocabulary length summing to one within 1e-12, and
    /// strictly positive entries whenever `alpha > 0`.
    pub fn from_parts(
        vocab: Vocabulary,
        class_labels: Vec<String>,
        probs: Vec<Vec<f64>>,
        alpha: f64,
    ) -> Result<Self> {
        if class_labels.len() < 2 {
            return Err(Error::TooFewClasses {
                expected: 2,
                got: class_labels.len(),
            });
        }
        if probs.len() != class_labels.len() {
            return Err(Error::InvalidModel(format!(
                "{} probability rows for {} class labels",
                probs.len(),
                class_labels.len()
            )));
        }
        {
            let mut sorted = class_labels.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != class_labels.len() {
                return Err(Error::InvalidModel("duplicate class labels".into()));
            }
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidAlpha(alpha));
        }
        for (k, row) in probs.iter().enumerate() {
            if row.len() != vocab.len() {
                return Err(Error::InvalidModel(format!(
                    "row {} has {} entries for a vocabulary of {}",
                    k,
                    row.len(),
                    vocab.len()
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidModel(format!(
                    "row {k} contains a negative or non-finite probability"
                )));
            }
            if alpha > 0.0 && row.iter().any(|&p| p <= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "row {k} has a zero entry despite alpha > 0"
                )));
            }
            let sum = kahan_sum(row.iter().copied());
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidModel(format!(
                    "row {k} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self {
            vocab,
            class_labels,
            probs,
            alpha,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    /// Number of classes K.
    pub fn k(&self) -> usize {
        self.class_labels.len()
    }

    /// Vocabulary size V.
    pub fn v(&self) -> usize {
        self.vocab.len()
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn row(&self, class: usize) -> &[f64] {
        &self.probs[class]
    }

    pub fn prob(&self, class: usize, word: usize) -> f64 {
        self.probs[class][word]
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Mixture distribution `theta' P` over the vocabulary.
    pub fn mixture(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                got: theta.len(),
            });
        }
        let mut mu = vec![0.0; self.v()];
        for (t, row) in theta.iter().zip(&self.probs) {
            for (m, p) in mu.iter_mut().zip(row) {
                *m += t * p;
            }
        }
        Ok(mu)
    }
}

/// Estimate per-class reference distributions by pooling each class's texts
/// and applying add-alpha smoothing:
///
/// ```text
/// p_kv = (alpha + sum_j x_jv) / (V * alpha + sum_j n_j)
/// ```
///
/// Class labels are ordered as in the input map (sorted). With `alpha = 0`
/// every class must contain at least one in-vocabulary token.
pub fn estimate_reference(
    groups: &BTreeMap<String, Vec<CountVector>>,
    vocab: &Vocabulary,
    alpha: f64,
) -> Result<ReferenceModel> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    if groups.len() < 2 {
        return Err(Error::TooFewClasses {
            expected: 2,
            got: groups.len(),
        });
    }
    let v = vocab.len();
    let mut class_labels = Vec::with_capacity(groups.len());
    let mut probs = Vec::with_capacity(groups.len());
    for (label, texts) in groups {
        if texts.is_empty() {
            return Err(Error::EmptyClass(label.clone()));
        }
        let mut pooled = vec![0u64; v];
        let mut n_total = 0u64;
        for x in texts {
            for (idx, c) in x.iter() {
                pooled[idx] += c;
            }
            n_total += x.total();
        }
        if alpha == 0.0 && n_total == 0 {
            return Err(Error::UnsmoothedEmptyClass(label.clone()));
        }
        let denom = v as f64 * alpha + n_total as f64;
        let row: Vec<f64> = pooled
            .iter()
            .map(|&c| (alpha + c as f64) / denom)
            .collect();
        class_labels.push(label.clone());
        probs.push(row);
    }
    ReferenceModel::from_parts(vocab.clone(), class_labels, probs, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vocab(n: usize) -> Vocabulary {
        Vocabulary::new((0..n).map(|i| format!("w{i:03}"))).unwrap()
    }

    fn groups(entries: Vec<(&str, Vec<CountVector>)>) -> BTreeMap<String, Vec<CountVector>> {
        entries
            .into_iter()
            .map(|(l, v)| (l.to_string(), v))
            .collect()
    }

    #[test]
    fn unsmoothed_estimate_is_empirical_frequency() {
        let vb = vocab(3);
        let g = groups(vec![
            ("a", vec![CountVector::from_dense("t1", &[2, 1, 1])]),
            ("b", vec![CountVector::from_dense("t2", &[1, 1, 1])]),
        ]);
        let m = estimate_reference(&g, &vb, 0.0).unwrap();
        assert_eq!(m.row(0), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn smoothed_estimate_matches_hand_evaluation() {
        let vb = vocab(2);
        let g = groups(vec![
            ("a", vec![CountVector::from_dense("t1", &[1, 0])]),
            ("b", vec![CountVector::from_dense("t2", &[0, 1])]),
        ]);
        let m = estimate_reference(&g, &vb, 0.5).unwrap();
        // (0.5 + 1) / (2*0.5 + 1) = 0.75 and (0.5 + 0) / 2 = 0.25
        assert_eq!(m.row(0), &[0.75, 0.25]);
    }

    #[test]
    fn pooling_two_texts_averages_counts() {
        let vb = vocab(2);
        let g = groups(vec![
            (
                "a",
                vec![
                    CountVector::from_dense("t1", &[1, 0]),
                    CountVector::from_dense("t2", &[0, 1]),
                ],
            ),
            ("b", vec![CountVector::from_dense("t3", &[1, 1])]),
        ]);
        let m = estimate_reference(&g, &vb, 0.0).unwrap();
        assert_eq!(m.row(0), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_empty_class_and_negative_alpha() {
        let vb = vocab(2);
        let g = groups(vec![
            ("a", vec![]),
            ("b", vec![CountVector::from_dense("t", &[1, 1])]),
        ]);
        assert!(matches!(
            estimate_reference(&g, &vb, 0.5),
            Err(Error::EmptyClass(_))
        ));

        let g = groups(vec![
            ("a", vec![CountVector::from_dense("t", &[1, 0])]),
            ("b", vec![CountVector::from_dense("t", &[1, 1])]),
        ]);
        assert!(matches!(
            estimate_reference(&g, &vb, -0.25),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn alpha_zero_with_empty_class_tokens_is_an_error() {
        let vb = vocab(2);
        let g = groups(vec![
            ("a", vec![CountVector::from_dense("t", &[0, 0])]),
            ("b", vec![CountVector::from_dense("t", &[1, 1])]),
        ]);
        assert!(matches!(
            estimate_reference(&g, &vb, 0.0),
            Err(Error::UnsmoothedEmptyClass(_))
        ));
    }

    proptest! {
        // Rows are stochastic for arbitrary counts and alpha.
        #[test]
        fn rows_sum_to_one(
            counts_a in proptest::collection::vec(0u64..50, 8),
            counts_b in proptest::collection::vec(0u64..50, 8),
            alpha in 0.01f64..5.0,
        ) {
            let vb = vocab(8);
            let g = groups(vec![
                ("a", vec![CountVector::from_dense("t1", &counts_a)]),
                ("b", vec![CountVector::from_dense("t2", &counts_b)]),
            ]);
            let m = estimate_reference(&g, &vb, alpha).unwrap();
            for k in 0..2 {
                let sum = kahan_sum(m.row(k).iter().copied());
                prop_assert!((sum - 1.0).abs() <= 1e-12);
            }
        }

        // Estimating from m texts equals estimating from their concatenation.
        #[test]
        fn pooling_invariance(
            counts in proptest::collection::vec(proptest::collection::vec(0u64..20, 6), 1..4),
            alpha in 0.0f64..2.0,
        ) {
            let vb = vocab(6);
            let mut pooled = vec![0u64; 6];
            for c in &counts {
                for (p, x) in pooled.iter_mut().zip(c) {
                    *p += x;
                }
            }
            prop_assume!(alpha > 0.0 || pooled.iter().sum::<u64>() > 0);

            let split: Vec<CountVector> = counts
                .iter()
                .enumerate()
                .map(|(i, c)| CountVector::from_dense(format!("t{i}"), c))
                .collect();
            let other = vec![CountVector::from_dense("o", &[1, 1, 1, 1, 1, 1])];
            let g1 = groups(vec![("a", split), ("b", other.clone())]);
            let g2 = groups(vec![
                ("a", vec![CountVector::from_dense("t", &pooled)]),
                ("b", other),
            ]);
            let m1 = estimate_reference(&g1, &vb, alpha).unwrap();
            let m2 = estimate_reference(&g2, &vb, alpha).unwrap();
            prop_assert_eq!(m1.row(0), m2.row(0));
        }

        // As alpha shrinks with all counts positive, the estimate approaches
        // the empirical frequencies.
        #[test]
        fn small_alpha_approaches_empirical(
            counts in proptest::collection::vec(1u64..30, 5),
        ) {
            let vb = vocab(5);
            let n: u64 = counts.iter().sum();
            let g = groups(vec![
                ("a", vec![CountVector::from_dense("t", &counts)]),
                ("b", vec![CountVector::from_dense("t", &counts)]),
            ]);
            let m = estimate_reference(&g, &vb, 1e-9).unwrap();
            for (p, &c) in m.row(0).iter().zip(&counts) {
                assert_relative_eq!(*p, c as f64 / n as f64, epsilon = 1e-9);
            }
        }
    }
}
