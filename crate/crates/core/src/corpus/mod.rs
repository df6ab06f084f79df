//! Clickstream corpora: vocabulary, streams, file I/O, and the length/start
//! statistics and split machinery used by generation and evaluation.
//!
//! A clickstream file holds one stream per line, item labels separated by a
//! single ASCII space. Blank lines and lines starting with `#` are skipped.

pub(crate) mod dist;
mod split;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use dist::{EmpiricalLengths, LengthDistribution, StartDistribution};
pub use split::{horizontal_split, make_folds, vertical_split, FoldPlan};

/// Dense item identifier in `[0, N)`.
pub type ItemId = u32;

/// Bijection between item labels and dense ids, fixed at ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    labels: Vec<String>,
    index: HashMap<String, ItemId>,
}

fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() || label.chars().any(char::is_whitespace) {
        return Err(Error::InvalidLabel(label.to_string()));
    }
    Ok(())
}

impl Vocabulary {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary {
            labels: Vec::new(),
            index: HashMap::new(),
        };
        for label in labels {
            let label = label.into();
            validate_label(&label)?;
            if vocab.index.contains_key(&label) {
                return Err(Error::invalid(format!("duplicate label `{label}`")));
            }
            vocab.push(label);
        }
        if vocab.is_empty() {
            return Err(Error::invalid("vocabulary must contain at least one label"));
        }
        Ok(vocab)
    }

    /// Synthetic labels `0..n`, handy for tests and programmatic corpora.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    fn push(&mut self, label: String) -> ItemId {
        let id = self.labels.len() as ItemId;
        self.index.insert(label.clone(), id);
        self.labels.push(label);
        id
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn id(&self, label: &str) -> Option<ItemId> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: ItemId) -> &str {
        &self.labels[id as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// One label per line; the line number is the id.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for label in &self.labels {
            out.push_str(label);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut vocab = Vocabulary {
            labels: Vec::new(),
            index: HashMap::new(),
        };
        for (lineno, line) in text.lines().enumerate() {
            let label = line.strip_suffix('\r').unwrap_or(line);
            validate_label(label).map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
            if vocab.index.contains_key(label) {
                return Err(Error::parse(path, lineno + 1, format!("duplicate label `{label}`")));
            }
            vocab.push(label.to_string());
        }
        if vocab.is_empty() {
            return Err(Error::parse(path, 1, "empty vocabulary"));
        }
        Ok(vocab)
    }
}

/// An ordered, nonempty sequence of item ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clickstream {
    items: Vec<ItemId>,
}

impl Clickstream {
    pub fn new(items: Vec<ItemId>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::invalid("a clickstream needs at least one item"));
        }
        Ok(Clickstream { items })
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn first(&self) -> ItemId {
        self.items[0]
    }

    pub fn into_items(self) -> Vec<ItemId> {
        self.items
    }
}

/// A list of clickstreams over a shared vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickstreamSet {
    streams: Vec<Clickstream>,
    vocab: Arc<Vocabulary>,
}

impl ClickstreamSet {
    pub fn new(vocab: Arc<Vocabulary>, streams: Vec<Clickstream>) -> Result<Self> {
        let n = vocab.len();
        for stream in &streams {
            if let Some(&id) = stream.items().iter().find(|&&id| id as usize >= n) {
                return Err(Error::ItemOutOfRange { id: id as usize, n });
            }
        }
        Ok(ClickstreamSet { streams, vocab })
    }

    /// Builds a set from raw id sequences.
    pub fn from_ids(vocab: Arc<Vocabulary>, streams: Vec<Vec<ItemId>>) -> Result<Self> {
        let streams = streams
            .into_iter()
            .map(Clickstream::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(vocab, streams)
    }

    pub(crate) fn with_streams(&self, streams: Vec<Clickstream>) -> Self {
        ClickstreamSet {
            streams,
            vocab: Arc::clone(&self.vocab),
        }
    }

    pub fn streams(&self) -> &[Clickstream] {
        &self.streams
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn item_count(&self) -> usize {
        self.vocab.len()
    }

    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    /// Streams at the given indices, in the order given.
    pub fn subset(&self, indices: &[usize]) -> Self {
        self.with_streams(indices.iter().map(|&i| self.streams[i].clone()).collect())
    }

    pub fn empirical_lengths(&self) -> Result<LengthDistribution> {
        empirical_length_distribution(self)
    }

    pub fn empirical_starts(&self) -> Result<StartDistribution> {
        empirical_start_distribution(self)
    }

    /// Serializes in the clickstream file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for stream in &self.streams {
            for (i, &id) in stream.items().iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{}", self.vocab.label(id));
            }
            out.push('\n');
        }
        out
    }
}

enum VocabMode<'a> {
    Grow(Vocabulary),
    Fixed(&'a Arc<Vocabulary>),
}

fn parse_streams(text: &str, path: &Path, mut vocab: VocabMode<'_>) -> Result<ClickstreamSet> {
    let mut streams = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut items = Vec::new();
        for token in line.split(' ') {
            if token.is_empty() {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    "empty label (labels must be separated by exactly one space)",
                ));
            }
            if token.chars().any(char::is_whitespace) {
                return Err(Error::parse(path, lineno + 1, format!("label `{token}` contains whitespace")));
            }
            let id = match &mut vocab {
                VocabMode::Grow(v) => match v.id(token) {
                    Some(id) => id,
                    None => v.push(token.to_string()),
                },
                VocabMode::Fixed(v) => v.id(token).ok_or_else(|| {
                    Error::parse(path, lineno + 1, format!("unknown item label `{token}`"))
                })?,
            };
            items.push(id);
        }
        streams.push(Clickstream { items });
    }
    if streams.is_empty() {
        return Err(Error::EmptyCorpus(path.to_path_buf()));
    }
    let vocab = match vocab {
        VocabMode::Grow(v) => Arc::new(v),
        VocabMode::Fixed(v) => Arc::clone(v),
    };
    Ok(ClickstreamSet { streams, vocab })
}

/// Parses clickstream text, building the vocabulary in first-occurrence order.
pub fn parse_clickstreams(text: &str, source: impl AsRef<Path>) -> Result<ClickstreamSet> {
    parse_streams(
        text,
        source.as_ref(),
        VocabMode::Grow(Vocabulary {
            labels: Vec::new(),
            index: HashMap::new(),
        }),
    )
}

/// Parses clickstream text against an existing vocabulary; unseen labels are errors.
pub fn parse_clickstreams_with_vocab(
    text: &str,
    source: impl AsRef<Path>,
    vocab: &Arc<Vocabulary>,
) -> Result<ClickstreamSet> {
    parse_streams(text, source.as_ref(), VocabMode::Fixed(vocab))
}

pub fn load_clickstreams(path: impl AsRef<Path>) -> Result<ClickstreamSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_clickstreams(&text, path)
}

pub fn load_clickstreams_with_vocab(
    path: impl AsRef<Path>,
    vocab: &Arc<Vocabulary>,
) -> Result<ClickstreamSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_clickstreams_with_vocab(&text, path, vocab)
}

pub fn save_clickstreams(set: &ClickstreamSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, set.to_text()).map_err(|e| Error::io(path, e))
}

/// Histogram of observed stream lengths.
pub fn empirical_length_distribution(set: &ClickstreamSet) -> Result<LengthDistribution> {
    if set.is_empty() {
        return Err(Error::invalid("empty clickstream set"));
    }
    let mut counts: std::collections::BTreeMap<u32, u64> = std::collections::BTreeMap::new();
    for s in set.streams() {
        *counts.entry(s.len() as u32).or_default() += 1;
    }
    let (lengths, weights): (Vec<u32>, Vec<f64>) =
        counts.into_iter().map(|(l, c)| (l, c as f64)).unzip();
    Ok(LengthDistribution::Empirical(EmpiricalLengths::new(lengths, weights)?))
}

/// Fraction of streams starting with each item.
pub fn empirical_start_distribution(set: &ClickstreamSet) -> Result<StartDistribution> {
    if set.is_empty() {
        return Err(Error::invalid("empty clickstream set"));
    }
    let mut counts = vec![0.0f64; set.item_count()];
    for s in set.streams() {
        counts[s.first() as usize] += 1.0;
    }
    StartDistribution::from_weights(counts)
}
