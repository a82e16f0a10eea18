//! Sentence-segmented tokenization, vocabulary construction, and token counting.
//!
//! Sentences are the resampling unit for the block bootstrap, so documents keep
//! their sentence structure rather than collapsing straight to a bag of words.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};

/// Settings for [`tokenize`].
#[derive(Debug, Clone, Default)]
pub struct TokenizerOptions {
    /// Sentences with fewer tokens than this are merged into the following
    /// sentence (the last one merges backwards). Zero disables merging.
    pub min_sentence_tokens: usize,
    /// Lowercased abbreviations (without the period, e.g. "mr") whose trailing
    /// period does not end a sentence. Empty by default: "Mr. Haughey" splits.
    pub abbreviations: BTreeSet<String>,
}

/// A document as an ordered list of sentences, each an ordered token list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    id: String,
    sentences: Vec<Vec<String>>,
}

impl Document {
    /// Build a document from pre-tokenized sentences, validating invariants:
    /// nonempty id, at least one sentence, no empty tokens.
    pub fn new(id: impl Into<String>, sentences: Vec<Vec<String>>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidDocument {
                id,
                reason: "document id is empty".into(),
            });
        }
        if sentences.is_empty() {
            return Err(Error::InvalidDocument {
                id,
                reason: "document has no sentences".into(),
            });
        }
        if sentences.iter().flatten().any(|t| t.is_empty()) {
            return Err(Error::InvalidDocument {
                id,
                reason: "document contains an empty token".into(),
            });
        }
        Ok(Self { id, sentences })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    /// All tokens in reading order, ignoring sentence boundaries.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

/// Ordered set of word types with stable lexicographic indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    types: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Build from any collection of types; duplicates collapse, order is
    /// lexicographic so matrix layouts are reproducible.
    pub fn new(types: impl IntoIterator<Item = String>) -> Result<Self> {
        let set: BTreeSet<String> = types.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let types: Vec<String> = set.into_iter().collect();
        let index = types
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self { types, index })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn index_of(&self, word_type: &str) -> Option<usize> {
        self.index.get(word_type).copied()
    }

    pub fn type_at(&self, index: usize) -> &str {
        &self.types[index]
    }
}

/// Sparse in-vocabulary token counts for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    doc_id: String,
    counts: BTreeMap<usize, u64>,
    total: u64,
}

impl CountVector {
    /// Build from (type index, count) pairs. Zero counts are dropped;
    /// duplicate indices accumulate.
    pub fn from_pairs(doc_id: impl Into<String>, pairs: impl IntoIterator<Item = (usize, u64)>) -> Self {
        let mut counts = BTreeMap::new();
        for (v, c) in pairs {
            if c > 0 {
                *counts.entry(v).or_insert(0) += c;
            }
        }
        let total = counts.values().sum();
        Self {
            doc_id: doc_id.into(),
            counts,
            total,
        }
    }

    /// Build from a dense count slice indexed by vocabulary position.
    pub fn from_dense(doc_id: impl Into<String>, counts: &[u64]) -> Self {
        Self::from_pairs(
            doc_id,
            counts.iter().enumerate().map(|(v, &c)| (v, c)),
        )
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    /// Count for one type index (zero when absent).
    pub fn count(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    /// Iterate stored (index, count) pairs in index order; all counts > 0.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&v, &c)| (v, c))
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_zero(&self) -> bool {
        self.total == 0
    }

    /// Copy with the count for `index` removed; `doc_id` is preserved.
    pub fn without(&self, index: usize) -> Self {
        let mut counts = self.counts.clone();
        counts.remove(&index);
        let total = counts.values().sum();
        Self {
            doc_id: self.doc_id.clone(),
            counts,
            total,
        }
    }

    /// Copy with every count multiplied by `factor` (zero factor empties it).
    pub fn scaled(&self, factor: u64) -> Self {
        Self::from_pairs(
            self.doc_id.clone(),
            self.counts.iter().map(|(&v, &c)| (v, c * factor)),
        )
    }
}

fn is_sentence_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn keep_internal(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}' || c == '-'
}

/// Normalize one whitespace-delimited raw token: lowercase, strip leading and
/// trailing non-alphanumeric characters, drop internal characters other than
/// alphanumerics, apostrophes, and hyphens. Returns None when nothing is left.
fn clean_token(raw: &str) -> Option<String> {
    let lowered = raw.to_lowercase();
    let trimmed = lowered
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .trim_end_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        return None;
    }
    let cleaned: String = trimmed.chars().filter(|&c| keep_internal(c)).collect();
    if cleaned.is_empty() {
        None
    } else {
        Some(cleaned)
    }
}

/// Split raw text into sentence strings on terminal punctuation (., !, ?)
/// followed by whitespace. A period after a known abbreviation does not split.
fn split_sentences(raw_text: &str, abbreviations: &BTreeSet<String>) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut chars = raw_text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if is_sentence_terminal(c) && chars.peek().is_some_and(|n| n.is_whitespace()) {
            if c == '.' && !abbreviations.is_empty() {
                let word: String = current
                    .trim_end_matches('.')
                    .split_whitespace()
                    .next_back()
                    .unwrap_or("")
                    .to_lowercase();
                if abbreviations.contains(&word) {
                    continue;
                }
            }
            sentences.push(std::mem::take(&mut current));
        }
    }
    if !current.trim().is_empty() {
        sentences.push(current);
    }
    sentences
}

/// Turn raw text into a sentence-segmented, tokenized document.
///
/// Sentences split on terminal punctuation followed by whitespace; tokens are
/// lowercased with surrounding punctuation stripped (internal apostrophes and
/// hyphens survive, so "ireland's" stays one type). Empty input yields a
/// single empty sentence. Deterministic: equal input and options give equal
/// output.
pub fn tokenize(id: impl Into<String>, raw_text: &str, options: &TokenizerOptions) -> Document {
    let mut sentences: Vec<Vec<String>> = split_sentences(raw_text, &options.abbreviations)
        .iter()
        .map(|s| s.split_whitespace().filter_map(clean_token).collect())
        .collect();

    if options.min_sentence_tokens > 0 && sentences.len() > 1 {
        let mut merged: Vec<Vec<String>> = Vec::with_capacity(sentences.len());
        let mut carry: Vec<String> = Vec::new();
        for mut sentence in sentences.drain(..) {
            if !carry.is_empty() {
                let mut joined = std::mem::take(&mut carry);
                joined.append(&mut sentence);
                sentence = joined;
            }
            if sentence.len() < options.min_sentence_tokens {
                carry = sentence;
            } else {
                merged.push(sentence);
            }
        }
        if !carry.is_empty() {
            // Trailing short sentence folds back into the previous one.
            match merged.last_mut() {
                Some(last) => last.append(&mut carry),
                None => merged.push(carry),
            }
        }
        sentences = merged;
    }

    if sentences.is_empty() {
        sentences.push(Vec::new());
    }
    Document {
        id: id.into(),
        sentences,
    }
}

/// Build the modeling vocabulary from reference documents: keep types whose
/// total count is at least `min_count` and which are not stop words; order is
/// lexicographic. Independent of document order.
pub fn build_vocabulary(
    reference_docs: &[Document],
    min_count: u64,
    stopwords: &HashSet<String>,
) -> Result<Vocabulary> {
    if min_count < 1 {
        return Err(Error::InvalidMinCount(min_count as usize));
    }
    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in reference_docs {
        for token in doc.tokens() {
            *totals.entry(token).or_insert(0) += 1;
        }
    }
    let types: Vec<String> = totals
        .into_iter()
        .filter(|&(t, c)| c >= min_count && !stopwords.contains(t))
        .map(|(t, _)| t.to_string())
        .collect();
    if types.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Vocabulary::new(types)
}

/// Count in-vocabulary tokens; out-of-vocabulary tokens are ignored and do
/// not contribute to the total.
pub fn count_tokens(doc: &Document, vocab: &Vocabulary) -> CountVector {
    CountVector::from_pairs(
        doc.id(),
        doc.tokens()
            .filter_map(|t| vocab.index_of(t))
            .map(|v| (v, 1)),
    )
}

/// The bundled Snowball English stop word list, in [`parse_stopwords`]
/// format. The default filter for vocabulary construction.
pub const SNOWBALL_ENGLISH: &str = include_str!("../data/snowball_english.txt");

/// Parse a stop-word list: one type per line, `#` starts a comment line,
/// blank lines ignored. Entries are lowercased to match tokenizer output.
pub fn parse_stopwords(contents: &str) -> HashSet<String> {
    contents
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}
