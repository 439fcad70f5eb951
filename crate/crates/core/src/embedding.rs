//! Word vectors and the similarity measures used to pick virtual edges.
//!
//! Two sources are supported. A static table holds one vector per stem and is
//! read from the word2vec text format (`V d` header, then `token x1 .. xd`).
//! A contextual set holds one vector per token occurrence and is read from
//! JSON lines with `doc_id`, `sentence_index`, `token_index`, `stem` and
//! `vector`; occurrences are grouped per document.
//!
//! Every mode reduces to a dot product between per-stem prepared vectors:
//!
//! * `static`: the unit-normalized table vector;
//! * `bert_sim1`: the unit-normalized mean of the occurrence vectors;
//! * `bert_sim2`: the mean of the unit-normalized occurrence vectors, since
//!   the mean of all pairwise cosines factors as `mean(û_k) · mean(v̂_l)`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Stem;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("vector lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("cosine similarity is undefined for a zero-norm vector")]
    ZeroNorm,
    #[error("no vector for `{0}`")]
    Missing(Stem),
    #[error("similarity mode `{mode}` cannot be used with a {source_kind} embedding source")]
    ModeMismatch {
        mode: SimilarityMode,
        source_kind: &'static str,
    },
    #[error("embedding table has no vector with nonzero norm")]
    AllZero,
    #[error("unknown similarity mode `{0}` (expected static, bert-sim1 or bert-sim2)")]
    UnknownMode(String),
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::LengthMismatch(u.len(), v.len()));
    }
    let denom = norm(u) * norm(v);
    if denom == 0.0 || !denom.is_finite() {
        return Err(EmbeddingError::ZeroNorm);
    }
    Ok((dot(u, v) / denom).clamp(-1.0, 1.0))
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

fn mean(vectors: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    for v in vectors {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    let n = vectors.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticEmbeddingTable {
    dimension: usize,
    entries: HashMap<Stem, Vec<f64>>,
}

impl StaticEmbeddingTable {
    pub fn new(dimension: usize, entries: HashMap<Stem, Vec<f64>>) -> Result<Self, EmbeddingError> {
        for v in entries.values() {
            if v.len() != dimension {
                return Err(EmbeddingError::LengthMismatch(v.len(), dimension));
            }
        }
        if !entries.values().any(|v| norm(v) > 0.0) {
            return Err(EmbeddingError::AllZero);
        }
        Ok(StaticEmbeddingTable { dimension, entries })
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let file = File::open(path).map_err(|source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read(file, path)
    }

    pub fn read<R: Read>(reader: R, origin: &Path) -> Result<Self, EmbeddingError> {
        let format_err = |line: usize, message: String| EmbeddingError::Format {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = BufReader::new(reader).lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|source| EmbeddingError::Io {
                path: origin.to_path_buf(),
                source,
            })?,
            None => return Err(format_err(1, "missing `V d` header".into())),
        };
        let mut fields = header.split_whitespace();
        let (vocab, dimension) = match (fields.next(), fields.next(), fields.next()) {
            (Some(v), Some(d), None) => (
                v.parse::<usize>()
                    .map_err(|e| format_err(1, format!("bad vocabulary size: {e}")))?,
                d.parse::<usize>()
                    .map_err(|e| format_err(1, format!("bad dimension: {e}")))?,
            ),
            _ => return Err(format_err(1, "header must be `V d`".into())),
        };
        if dimension == 0 {
            return Err(format_err(1, "dimension must be positive".into()));
        }

        let mut entries = HashMap::with_capacity(vocab);
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.map_err(|source| EmbeddingError::Io {
                path: origin.to_path_buf(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().unwrap_or_default();
            let vector = fields
                .map(|f| {
                    f.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| format_err(lineno, format!("bad component `{f}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if vector.len() != dimension {
                return Err(format_err(
                    lineno,
                    format!("expected {dimension} components, found {}", vector.len()),
                ));
            }
            if entries.insert(Stem::new(token), vector).is_some() {
                return Err(format_err(lineno, format!("duplicate token `{token}`")));
            }
        }
        if entries.len() != vocab {
            return Err(format_err(
                1,
                format!("header declares {vocab} vectors, file has {}", entries.len()),
            ));
        }
        Self::new(dimension, entries)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, stem: &str) -> Option<&[f64]> {
        self.entries.get(stem).map(Vec::as_slice)
    }
}

/// One contextual vector record as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccurrenceRecord {
    pub doc_id: String,
    pub sentence_index: usize,
    pub token_index: usize,
    pub stem: String,
    pub vector: Vec<f64>,
}

/// Per-occurrence vectors of the stems of one document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContextualEmbeddingSet {
    dimension: usize,
    occurrences: HashMap<Stem, Vec<Vec<f64>>>,
}

impl ContextualEmbeddingSet {
    pub fn new(dimension: usize) -> Self {
        ContextualEmbeddingSet {
            dimension,
            occurrences: HashMap::new(),
        }
    }

    pub fn push(&mut self, stem: Stem, vector: Vec<f64>) -> Result<(), EmbeddingError> {
        if vector.len() != self.dimension {
            return Err(EmbeddingError::LengthMismatch(vector.len(), self.dimension));
        }
        self.occurrences.entry(stem).or_default().push(vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn occurrences(&self, stem: &str) -> Option<&[Vec<f64>]> {
        self.occurrences.get(stem).map(Vec::as_slice)
    }

    /// Number of stored occurrences of `stem` (0 when absent).
    pub fn frequency(&self, stem: &str) -> usize {
        self.occurrences.get(stem).map_or(0, Vec::len)
    }

    pub fn stems(&self) -> impl Iterator<Item = &Stem> + '_ {
        self.occurrences.keys()
    }
}

/// Contextual vectors for a whole corpus, keyed by document id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContextualCorpus {
    dimension: usize,
    documents: BTreeMap<String, ContextualEmbeddingSet>,
}

impl ContextualCorpus {
    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let file = File::open(path).map_err(|source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read(file, path)
    }

    pub fn read<R: Read>(reader: R, origin: &Path) -> Result<Self, EmbeddingError> {
        let mut corpus = ContextualCorpus::default();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let lineno = idx + 1;
            let format_err = |message: String| EmbeddingError::Format {
                path: origin.to_path_buf(),
                line: lineno,
                message,
            };
            let line = line.map_err(|source| EmbeddingError::Io {
                path: origin.to_path_buf(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: OccurrenceRecord =
                serde_json::from_str(&line).map_err(|e| format_err(e.to_string()))?;
            if record.vector.is_empty() {
                return Err(format_err("empty vector".into()));
            }
            if record.vector.iter().any(|x| !x.is_finite()) {
                return Err(format_err("non-finite vector component".into()));
            }
            if corpus.dimension == 0 {
                corpus.dimension = record.vector.len();
            } else if record.vector.len() != corpus.dimension {
                return Err(format_err(format!(
                    "expected {} components, found {}",
                    corpus.dimension,
                    record.vector.len()
                )));
            }
            let dimension = corpus.dimension;
            corpus
                .documents
                .entry(record.doc_id)
                .or_insert_with(|| ContextualEmbeddingSet::new(dimension))
                .push(Stem::new(record.stem), record.vector)?;
        }
        Ok(corpus)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn document(&self, doc_id: &str) -> Option<&ContextualEmbeddingSet> {
        self.documents.get(doc_id)
    }

    pub fn insert(&mut self, doc_id: impl Into<String>, set: ContextualEmbeddingSet) {
        if self.dimension == 0 {
            self.dimension = set.dimension;
        }
        self.documents.insert(doc_id.into(), set);
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SimilarityMode {
    #[serde(rename = "static")]
    Static,
    #[serde(rename = "bert-sim1")]
    BertSim1,
    #[serde(rename = "bert-sim2")]
    BertSim2,
}

impl SimilarityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityMode::Static => "static",
            SimilarityMode::BertSim1 => "bert-sim1",
            SimilarityMode::BertSim2 => "bert-sim2",
        }
    }
}

impl fmt::Display for SimilarityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimilarityMode {
    type Err = EmbeddingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(SimilarityMode::Static),
            "bert-sim1" | "bert_sim1" => Ok(SimilarityMode::BertSim1),
            "bert-sim2" | "bert_sim2" => Ok(SimilarityMode::BertSim2),
            other => Err(EmbeddingError::UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum EmbeddingSource<'a> {
    Static(&'a StaticEmbeddingTable),
    Contextual(&'a ContextualEmbeddingSet),
}

impl EmbeddingSource<'_> {
    fn kind(&self) -> &'static str {
        match self {
            EmbeddingSource::Static(_) => "static",
            EmbeddingSource::Contextual(_) => "contextual",
        }
    }

    fn check_mode(&self, mode: SimilarityMode) -> Result<(), EmbeddingError> {
        match (self, mode) {
            (EmbeddingSource::Static(_), SimilarityMode::Static)
            | (EmbeddingSource::Contextual(_), SimilarityMode::BertSim1 | SimilarityMode::BertSim2) => {
                Ok(())
            }
            _ => Err(EmbeddingError::ModeMismatch {
                mode,
                source_kind: self.kind(),
            }),
        }
    }

    /// The per-stem vector whose dot products give the similarity in `mode`.
    fn prepared(&self, stem: &str, mode: SimilarityMode) -> Result<Vec<f64>, EmbeddingError> {
        let missing = || EmbeddingError::Missing(Stem::new(stem));
        match (self, mode) {
            (EmbeddingSource::Static(table), SimilarityMode::Static) => {
                unit(table.get(stem).ok_or_else(missing)?).ok_or(EmbeddingError::ZeroNorm)
            }
            (EmbeddingSource::Contextual(set), SimilarityMode::BertSim1) => {
                let occ = set.occurrences(stem).ok_or_else(missing)?;
                unit(&mean(occ, set.dimension())).ok_or(EmbeddingError::ZeroNorm)
            }
            (EmbeddingSource::Contextual(set), SimilarityMode::BertSim2) => {
                let occ = set.occurrences(stem).ok_or_else(missing)?;
                let units = occ
                    .iter()
                    .map(|v| unit(v).ok_or(EmbeddingError::ZeroNorm))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(mean(&units, set.dimension()))
            }
            _ => Err(EmbeddingError::ModeMismatch {
                mode,
                source_kind: self.kind(),
            }),
        }
    }
}

/// Similarity of two stems under `mode`.
///
/// `bert_sim2` is the mean of all `f_a · f_b` pairwise occurrence cosines; it
/// is evaluated through the factored form described in the module docs.
pub fn similarity(
    a: &str,
    b: &str,
    source: EmbeddingSource<'_>,
    mode: SimilarityMode,
) -> Result<f64, EmbeddingError> {
    source.check_mode(mode)?;
    let u = source.prepared(a, mode)?;
    let v = source.prepared(b, mode)?;
    Ok(dot(&u, &v).clamp(-1.0, 1.0))
}

/// Unordered stem pair with `first <= second`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StemPair {
    pub first: Stem,
    pub second: Stem,
}

impl StemPair {
    pub fn new(a: Stem, b: Stem) -> Self {
        if a <= b {
            StemPair { first: a, second: b }
        } else {
            StemPair { first: b, second: a }
        }
    }
}

/// Precomputed per-stem vectors for many similarity queries over one source.
#[derive(Debug, Clone)]
pub struct SimilarityIndex {
    mode: SimilarityMode,
    prepared: HashMap<Stem, Vec<f64>>,
    unavailable: HashSet<Stem>,
}

impl SimilarityIndex {
    /// Prepares vectors for `stems`. Stems without a usable vector (absent or
    /// zero norm) are remembered and later excluded from every pair.
    pub fn new<'s>(
        source: EmbeddingSource<'_>,
        mode: SimilarityMode,
        stems: impl IntoIterator<Item = &'s Stem>,
    ) -> Result<Self, EmbeddingError> {
        source.check_mode(mode)?;
        let mut prepared = HashMap::new();
        let mut unavailable = HashSet::new();
        for stem in stems {
            match source.prepared(stem.as_str(), mode) {
                Ok(v) => {
                    prepared.insert(stem.clone(), v);
                }
                Err(EmbeddingError::Missing(_) | EmbeddingError::ZeroNorm) => {
                    unavailable.insert(stem.clone());
                }
                Err(e) => return Err(e),
            }
        }
        Ok(SimilarityIndex {
            mode,
            prepared,
            unavailable,
        })
    }

    pub fn mode(&self) -> SimilarityMode {
        self.mode
    }

    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        let u = self.prepared.get(a)?;
        let v = self.prepared.get(b)?;
        Some(dot(u, v).clamp(-1.0, 1.0))
    }

    /// Stems that had no usable vector.
    pub fn unavailable(&self) -> &HashSet<Stem> {
        &self.unavailable
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedPairs {
    /// Highest similarity first; ties by ascending pair.
    pub pairs: Vec<(StemPair, f64)>,
    /// Candidates dropped because a stem had no usable vector.
    pub skipped: usize,
}

fn by_similarity_then_pair(a: &(StemPair, f64), b: &(StemPair, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// The `count` most similar candidate pairs, best first.
pub fn top_similar_pairs<'p>(
    candidates: impl IntoIterator<Item = &'p StemPair>,
    count: usize,
    index: &SimilarityIndex,
) -> RankedPairs {
    let mut skipped = 0;
    let mut scored = Vec::new();
    for pair in candidates {
        match index.similarity(pair.first.as_str(), pair.second.as_str()) {
            Some(sim) => scored.push((pair.clone(), sim)),
            None => skipped += 1,
        }
    }
    if count == 0 {
        return RankedPairs {
            pairs: Vec::new(),
            skipped,
        };
    }
    if count < scored.len() {
        scored.select_nth_unstable_by(count - 1, by_similarity_then_pair);
        scored.truncate(count);
    } else if count > scored.len() {
        log::info!(
            "requested {count} similar pairs, only {} eligible ({skipped} skipped for missing vectors)",
            scored.len()
        );
    }
    scored.sort_by(by_similarity_then_pair);
    RankedPairs {
        pairs: scored,
        skipped,
    }
}
