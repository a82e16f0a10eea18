//! Shared fixtures for the benchmark targets: synthetic reference models,
//! documents, and corpora of controlled size.

use std::collections::BTreeMap;

use affinity_core::corpus::{CountVector, Document, Vocabulary};
use affinity_core::reference::ReferenceModel;
use affinity_core::synth;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct ScalingFixture {
    pub model: ReferenceModel,
    pub docs: Vec<CountVector>,
}

/// A two-class model over `v` types plus `n_docs` mixture documents of
/// `tokens` tokens each.
pub fn scaling_fixture(v: usize, n_docs: usize, tokens: u64, seed: u64) -> ScalingFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = synth::numbered_vocabulary(v).unwrap();
    let rows = vec![
        synth::sample_simplex(v, 1.0, &mut rng),
        synth::sample_simplex(v, 1.0, &mut rng),
    ];
    let model = ReferenceModel::from_parts(
        vocab,
        vec!["c0".into(), "c1".into()],
        rows.clone(),
        0.0,
    )
    .unwrap();
    let docs = (0..n_docs)
        .map(|i| {
            let theta1 = 0.2 + 0.6 * i as f64 / n_docs.max(2) as f64;
            synth::sample_mixture_counts(
                format!("d{i}"),
                &rows,
                &[theta1, 1.0 - theta1],
                tokens,
                &mut rng,
            )
        })
        .collect();
    ScalingFixture { model, docs }
}

pub struct BootstrapFixture {
    pub refs: BTreeMap<String, Vec<Document>>,
    pub doc: Document,
    pub vocab: Vocabulary,
}

/// Sentence-structured corpus sized for bootstrap benchmarks.
pub fn bootstrap_fixture(v: usize, ref_sentences: usize, doc_sentences: usize, seed: u64) -> BootstrapFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = synth::numbered_vocabulary(v).unwrap();
    let p1 = synth::sample_simplex(v, 1.0, &mut rng);
    let p2 = synth::sample_simplex(v, 1.0, &mut rng);
    let refs: BTreeMap<String, Vec<Document>> = [
        (
            "c0".to_string(),
            vec![synth::sample_document("r0", &vocab, &p1, ref_sentences, 9, &mut rng)],
        ),
        (
            "c1".to_string(),
            vec![synth::sample_document("r1", &vocab, &p2, ref_sentences, 9, &mut rng)],
        ),
    ]
    .into_iter()
    .collect();
    let mu = synth::mixture_row(&[p1, p2], &[0.45, 0.55]);
    let doc = synth::sample_document("d", &vocab, &mu, doc_sentences, 9, &mut rng);
    BootstrapFixture { refs, doc, vocab }
}
