//! File formats: JSONL corpora, the reference-model JSON, dictionary files.
//!
//! Model JSON uses serde_json's shortest-round-trip float encoding, so a
//! written model reads back with bit-identical probability rows.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::DictionaryScorer;
use crate::corpus::{tokenize, Document, TokenizerOptions, Vocabulary};
use crate::error::{Error, Result};
use crate::reference::ReferenceModel;

/// One JSONL corpus line: an id plus either raw `text` (to be tokenized) or
/// pre-tokenized `sentences`. Reference corpora also carry a `class` label.
#[derive(Debug, Deserialize)]
struct CorpusRecord {
    id: String,
    #[serde(default)]
    class: Option<String>,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    sentences: Option<Vec<Vec<String>>>,
}

/// A parsed corpus document with its optional class label.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub document: Document,
    pub class: Option<String>,
}

/// Read a JSONL corpus. Each line must carry exactly one of `text` or
/// `sentences`; raw text is tokenized with `options`.
pub fn read_corpus(reader: impl Read, options: &TokenizerOptions) -> Result<Vec<CorpusEntry>> {
    let reader = BufReader::new(reader);
    let mut entries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord =
            serde_json::from_str(&line).map_err(|e| Error::InvalidRecord {
                line: lineno,
                reason: e.to_string(),
            })?;
        if record.id.is_empty() {
            return Err(Error::InvalidRecord {
                line: lineno,
                reason: "empty id".into(),
            });
        }
        let document = match (record.text, record.sentences) {
            (Some(text), None) => tokenize(record.id, &text, options),
            (None, Some(sentences)) => {
                Document::new(record.id, sentences).map_err(|e| Error::InvalidRecord {
                    line: lineno,
                    reason: e.to_string(),
                })?
            }
            _ => {
                return Err(Error::InvalidRecord {
                    line: lineno,
                    reason: "need exactly one of 'text' or 'sentences'".into(),
                })
            }
        };
        entries.push(CorpusEntry {
            document,
            class: record.class,
        });
    }
    Ok(entries)
}

/// Read a JSONL corpus from a path.
pub fn read_corpus_file(path: impl AsRef<Path>, options: &TokenizerOptions) -> Result<Vec<CorpusEntry>> {
    read_corpus(File::open(path)?, options)
}

/// Group reference entries by class label, requiring a label on every entry.
pub fn group_by_class(entries: Vec<CorpusEntry>) -> Result<BTreeMap<String, Vec<Document>>> {
    let mut groups: BTreeMap<String, Vec<Document>> = BTreeMap::new();
    for entry in entries {
        let class = entry.class.ok_or_else(|| Error::InvalidDocument {
            id: entry.document.id().to_string(),
            reason: "reference document is missing its class label".into(),
        })?;
        groups.entry(class).or_default().push(entry.document);
    }
    Ok(groups)
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    vocabulary: Vec<String>,
    class_labels: Vec<String>,
    alpha: f64,
    probs: Vec<Vec<f64>>,
}

/// Write a reference model as JSON.
pub fn write_model(model: &ReferenceModel, writer: impl Write) -> Result<()> {
    let file = ModelFile {
        vocabulary: model.vocab().types().to_vec(),
        class_labels: model.class_labels().to_vec(),
        alpha: model.alpha(),
        probs: model.probs().to_vec(),
    };
    let mut writer = BufWriter::new(writer);
    serde_json::to_writer(&mut writer, &file)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

pub fn write_model_file(model: &ReferenceModel, path: impl AsRef<Path>) -> Result<()> {
    write_model(model, File::create(path)?)
}

/// Read a reference model from JSON, re-validating all invariants.
pub fn read_model(reader: impl Read) -> Result<ReferenceModel> {
    let file: ModelFile = serde_json::from_reader(BufReader::new(reader))?;
    let vocab = Vocabulary::new(file.vocabulary.iter().cloned())?;
    if vocab.types() != file.vocabulary.as_slice() {
        return Err(Error::InvalidModel(
            "vocabulary is not sorted or contains duplicates".into(),
        ));
    }
    ReferenceModel::from_parts(vocab, file.class_labels, file.probs, file.alpha)
}

pub fn read_model_file(path: impl AsRef<Path>) -> Result<ReferenceModel> {
    read_model(File::open(path)?)
}

#[derive(Debug, Deserialize)]
struct DictionaryFile {
    positive: Vec<String>,
    negative: Vec<String>,
}

/// Read a two-list dictionary: `{"positive": [...], "negative": [...]}`,
/// mapping the lists to scores +1 and -1.
pub fn read_dictionary(reader: impl Read) -> Result<DictionaryScorer> {
    let file: DictionaryFile = serde_json::from_reader(BufReader::new(reader))?;
    DictionaryScorer::from_polar_lists(&file.positive, &file.negative)
}

pub fn read_dictionary_file(path: impl AsRef<Path>) -> Result<DictionaryScorer> {
    read_dictionary(File::open(path)?)
}
