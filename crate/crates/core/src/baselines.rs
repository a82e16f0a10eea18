//! Comparator scalers sharing the same smoothed reference model as the
//! affinity estimator: Naive Bayes log-odds, dictionary rates, wordscores
//! (raw and rescaled), and the closed-form separable-case max-margin score.

use std::collections::BTreeMap;

use crate::corpus::{CountVector, Vocabulary};
use crate::error::{Error, Result};
use crate::reference::{kahan_sum, ReferenceModel};

fn require_two_classes(model: &ReferenceModel) -> Result<()> {
    if model.k() != 2 {
        return Err(Error::TwoClassesRequired(model.k()));
    }
    Ok(())
}

fn require_nonempty(x: &CountVector) -> Result<()> {
    if x.is_zero() {
        return Err(Error::EmptyDocumentCounts);
    }
    Ok(())
}

/// Naive Bayes log-odds that the document belongs to class 1:
/// `eta(x) = sum_v x_v log(p_1v / p_2v)`. Linear in the counts, so the
/// magnitude grows without bound in document length.
pub fn naive_bayes_logodds(model: &ReferenceModel, x: &CountVector) -> Result<f64> {
    require_two_classes(model)?;
    Ok(x.iter()
        .map(|(v, c)| c as f64 * (model.prob(0, v) / model.prob(1, v)).ln())
        .sum())
}

/// Word orientations in [-1, +1]; +/-1 for the two polar lists in the simple
/// dictionary form.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryScorer {
    scores: BTreeMap<String, f64>,
}

impl DictionaryScorer {
    /// Build from two disjoint polar word lists: `positive` scores +1,
    /// `negative` scores -1.
    pub fn from_polar_lists<S: AsRef<str>>(positive: &[S], negative: &[S]) -> Result<Self> {
        let mut scores = BTreeMap::new();
        for w in positive {
            scores.insert(w.as_ref().to_string(), 1.0);
        }
        for w in negative {
            let key = w.as_ref().to_string();
            if scores.contains_key(&key) {
                return Err(Error::OverlappingDictionary(key));
            }
            scores.insert(key, -1.0);
        }
        Ok(Self { scores })
    }

    /// Arbitrary graded scores clamped to the documented range.
    pub fn from_scores(scores: BTreeMap<String, f64>) -> Self {
        let scores = scores
            .into_iter()
            .map(|(w, s)| (w, s.clamp(-1.0, 1.0)))
            .collect();
        Self { scores }
    }

    pub fn score_of(&self, word: &str) -> f64 {
        self.scores.get(word).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Dictionary scaling `t(x) = (1/n) sum_v x_v s_v`: the difference in
/// occurrence rates between the two polar lists. Stays in [-1, +1].
pub fn dictionary_score(
    scorer: &DictionaryScorer,
    x: &CountVector,
    vocab: &Vocabulary,
) -> Result<f64> {
    require_nonempty(x)?;
    let total = x.total() as f64;
    Ok(x.iter()
        .map(|(v, c)| c as f64 * scorer.score_of(vocab.type_at(v)))
        .sum::<f64>()
        / total)
}

/// Per-type wordscores `s_v = (p_2v - p_1v) / (p_1v + p_2v)`, each in
/// [-1, +1]; -1 for types seen only in class 1, +1 for types seen only in
/// class 2.
pub fn wordscore_vector(model: &ReferenceModel) -> Result<Vec<f64>> {
    require_two_classes(model)?;
    Ok((0..model.v())
        .map(|v| {
            let p1 = model.prob(0, v);
            let p2 = model.prob(1, v);
            let denom = p1 + p2;
            if denom > 0.0 {
                (p2 - p1) / denom
            } else {
                0.0
            }
        })
        .collect())
}

/// Raw and rescaled text scores for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct WordscoreText {
    /// Average wordscore of the document's tokens.
    pub raw: f64,
    /// Raw score divided by the class-2 average `t2`, anchoring average
    /// reference texts at -1 and +1. `None` when the model is degenerate
    /// (p1 = p2 gives t2 = 0 and nothing to anchor).
    pub rescaled: Option<f64>,
}

/// Average wordscore of the document plus its rescaled version.
pub fn wordscore_text(model: &ReferenceModel, x: &CountVector) -> Result<WordscoreText> {
    require_two_classes(model)?;
    require_nonempty(x)?;
    let scores = wordscore_vector(model)?;
    let raw = x
        .iter()
        .map(|(v, c)| c as f64 * scores[v])
        .sum::<f64>()
        / x.total() as f64;
    let t2 = kahan_sum(scores.iter().zip(model.row(1)).map(|(s, p)| s * p));
    debug_assert!(
        {
            let t1 = kahan_sum(scores.iter().zip(model.row(0)).map(|(s, p)| s * p));
            (t1 + t2).abs() <= 1e-12
        },
        "reference text scores must be antisymmetric"
    );
    let rescaled = if t2.abs() > 1e-14 { Some(raw / t2) } else { None };
    Ok(WordscoreText { raw, rescaled })
}

/// Class-2 average text score `t2 = sum_v s_v p_2v` (and `t1 = -t2`).
pub fn wordscore_reference_score(model: &ReferenceModel) -> Result<f64> {
    let scores = wordscore_vector(model)?;
    Ok(kahan_sum(
        scores.iter().zip(model.row(1)).map(|(s, p)| s * p),
    ))
}

/// The separable-case maximum-margin predictor
/// `(p2 - p1)' (x/n - (p1 + p2)/2)`: the linear classifier through the
/// midpoint of the two reference distributions, up to the regularization-
/// dependent scale a trained classifier would choose. Positive favors
/// class 2.
pub fn maxmargin_score(model: &ReferenceModel, x: &CountVector) -> Result<f64> {
    require_two_classes(model)?;
    require_nonempty(x)?;
    let slope = x
        .iter()
        .map(|(v, c)| c as f64 * (model.prob(1, v) - model.prob(0, v)))
        .sum::<f64>()
        / x.total() as f64;
    let offset = kahan_sum(
        model
            .row(0)
            .iter()
            .zip(model.row(1))
            .map(|(&p1, &p2)| (p2 - p1) * (p1 + p2)),
    );
    Ok(slope - 0.5 * offset)
}
