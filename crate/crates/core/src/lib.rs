//! Scale documents on a continuum between reference classes.
//!
//! Given a handful of archetype texts for each of K classes, this crate
//! estimates, for any other document, the proportion of it generated in each
//! class's "mode" — a supervised multinomial mixture fit by penalized Newton
//! maximum likelihood. Around the estimator it provides the preprocessing
//! pipeline (sentence-aware tokenization, vocabulary selection, counting),
//! word-level influence diagnostics, a sentence-level block bootstrap for
//! uncertainty, and the classical comparator scalers (Naive Bayes log-odds,
//! dictionary rates, wordscores, max-margin).
//!
//! The typical flow:
//!
//! ```
//! use std::collections::{BTreeMap, HashSet};
//! use affinity_core::corpus::{build_vocabulary, count_tokens, tokenize, TokenizerOptions};
//! use affinity_core::reference::estimate_reference;
//! use affinity_core::affinity::{estimate_affinity, DEFAULT_LAMBDA, DEFAULT_MAX_ITER, DEFAULT_TOL};
//!
//! let opts = TokenizerOptions::default();
//! let gov = tokenize("gov", "We support the motion. Confidence is deserved.", &opts);
//! let opp = tokenize("opp", "We oppose the motion. The scandals are disqualifying.", &opts);
//! let vocab = build_vocabulary(&[gov.clone(), opp.clone()], 1, &HashSet::new()).unwrap();
//! let groups: BTreeMap<String, Vec<_>> = [
//!     ("government".to_string(), vec![count_tokens(&gov, &vocab)]),
//!     ("opposition".to_string(), vec![count_tokens(&opp, &vocab)]),
//! ].into_iter().collect();
//! let model = estimate_reference(&groups, &vocab, 0.5).unwrap();
//!
//! let doc = tokenize("d1", "We support the motion despite the scandals.", &opts);
//! let fit = estimate_affinity(&model, &count_tokens(&doc, &vocab),
//!                             DEFAULT_LAMBDA, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
//! assert!(fit.converged);
//! assert!((fit.theta.iter().sum::<f64>() - 1.0).abs() < 1e-10);
//! ```

pub mod affinity;
pub mod baselines;
pub mod bootstrap;
pub mod corpus;
pub mod diagnostics;
mod error;
pub mod io;
pub mod reference;
pub mod synth;

pub use affinity::{estimate_affinity, AffinityFit, ContrastBasis};
pub use baselines::DictionaryScorer;
pub use bootstrap::{bootstrap_affinity, BootstrapResult};
pub use corpus::{CountVector, Document, TokenizerOptions, Vocabulary};
pub use diagnostics::{InfluenceEntry, InfluenceSummary};
pub use error::{Error, Result};
pub use reference::ReferenceModel;
