//! Corpus loading and the text pre-processing pipeline.
//!
//! A corpus is a line-delimited JSON file, one document per line:
//!
//! ```text
//! {"id": "doc-1", "text": "Complex networks are ...", "keywords": ["complex networks", "text"]}
//! ```
//!
//! Pre-processing splits the text into sentences on `.`, `!` and `?`, tokenizes
//! each sentence on whitespace, drops punctuation, numbers and stopwords, and
//! stems what is left. Gold keyphrases go through the same token filter and are
//! collapsed into a set of unigram stems.

use std::borrow::Borrow;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rust_stemmers::Algorithm;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Upper bound on repeated stemmer passes when settling a word on its fixed point.
const MAX_STEM_PASSES: usize = 8;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: duplicate document id `{id}`")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error("unknown corpus format `{0}` (expected `jsonl`)")]
    UnknownFormat(String),
    #[error("unknown stemmer `{0}` (expected `porter` or `none`)")]
    UnknownStemmer(String),
}

/// A normalized word form: the stemmer's output for a lowercase token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Stem(String);

impl Stem {
    /// Wraps an already-normalized value. No stemming is applied.
    pub fn new(value: impl Into<String>) -> Self {
        Stem(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Stem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Stem {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Stem {
    fn from(value: &str) -> Self {
        Stem::new(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    #[serde(rename = "keywords")]
    pub gold_keyphrases: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One JSON object per line with `id`, `text` and `keywords`.
    JsonLines,
}

impl FromStr for CorpusFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" | "json-lines" | "ndjson" => Ok(CorpusFormat::JsonLines),
            other => Err(CorpusError::UnknownFormat(other.to_string())),
        }
    }
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<RawDocument>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        CorpusFormat::JsonLines => read_jsonl(BufReader::new(file), path),
    }
}

/// Parses JSON-lines corpus records from any reader. `origin` is only used in
/// error messages.
pub fn read_jsonl<R: Read>(reader: R, origin: &Path) -> Result<Vec<RawDocument>, CorpusError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Record {
        id: String,
        text: String,
        keywords: Vec<String>,
    }

    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record =
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                path: origin.to_path_buf(),
                line: lineno,
                message: e.to_string(),
            })?;
        if record.text.trim().is_empty() {
            return Err(CorpusError::Malformed {
                path: origin.to_path_buf(),
                line: lineno,
                message: "empty text".to_string(),
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId {
                path: origin.to_path_buf(),
                line: lineno,
                id: record.id,
            });
        }
        docs.push(RawDocument {
            id: record.id,
            text: record.text,
            gold_keyphrases: record.keywords,
        });
    }
    Ok(docs)
}

fn is_sentence_delimiter(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits text after every run of `.`, `!` or `?`. Segments are trimmed and
/// blank ones are dropped.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !is_sentence_delimiter(c) {
            continue;
        }
        let mut end = i + c.len_utf8();
        while let Some(&(j, next)) = chars.peek() {
            if !is_sentence_delimiter(next) {
                break;
            }
            end = j + next.len_utf8();
            chars.next();
        }
        push_segment(&mut out, &text[start..end]);
        start = end;
    }
    push_segment(&mut out, &text[start..]);
    out
}

fn push_segment(out: &mut Vec<String>, segment: &str) {
    let trimmed = segment.trim();
    if !trimmed.is_empty() {
        out.push(trimmed.to_string());
    }
}

/// Lowercased word candidates of a text fragment: whitespace split, outer
/// punctuation stripped, pure-punctuation and pure-numeric tokens dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().filter_map(normalize_token).collect()
}

fn normalize_token(raw: &str) -> Option<String> {
    let core = raw.trim_matches(|c: char| !c.is_alphanumeric());
    if core.is_empty() || is_numeric(core) {
        return None;
    }
    Some(core.to_lowercase())
}

fn is_numeric(token: &str) -> bool {
    token.chars().any(|c| c.is_numeric())
        && token
            .chars()
            .all(|c| c.is_numeric() || matches!(c, '.' | ',' | '-' | '/' | '%'))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordSet {
    words: HashSet<String>,
}

impl StopwordSet {
    /// The English list shipped in `data/stopwords_en.txt`.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// One word per line; blank lines and `#` comments are ignored. Words are lowercased.
    pub fn parse(contents: &str) -> Self {
        let words = contents
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopwordSet { words }
    }

    pub fn from_file(path: &Path) -> Result<Self, CorpusError> {
        let contents = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(&contents))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopwordSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopwordSet {
            words: iter.into_iter().map(|w| w.into().to_lowercase()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StemmerId {
    /// Snowball English (Porter2).
    Porter,
    /// Identity; tokens are used as-is.
    None,
}

impl StemmerId {
    pub fn as_str(self) -> &'static str {
        match self {
            StemmerId::Porter => "porter",
            StemmerId::None => "none",
        }
    }
}

impl FromStr for StemmerId {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "porter" | "porter2" | "snowball-english" => Ok(StemmerId::Porter),
            "none" | "identity" => Ok(StemmerId::None),
            other => Err(CorpusError::UnknownStemmer(other.to_string())),
        }
    }
}

impl fmt::Display for StemmerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub struct Stemmer {
    id: StemmerId,
    inner: Option<rust_stemmers::Stemmer>,
}

impl Stemmer {
    pub fn new(id: StemmerId) -> Self {
        let inner = match id {
            StemmerId::Porter => Some(rust_stemmers::Stemmer::create(Algorithm::English)),
            StemmerId::None => None,
        };
        Stemmer { id, inner }
    }

    pub fn id(&self) -> StemmerId {
        self.id
    }

    /// Stems a lowercase token. The stemmer is re-applied until its output stops
    /// changing, so `stem(stem(x)) == stem(x)` holds for every input.
    pub fn stem(&self, token: &str) -> Stem {
        let Some(inner) = &self.inner else {
            return Stem::new(token);
        };
        let mut current = inner.stem(token).into_owned();
        for _ in 0..MAX_STEM_PASSES {
            let next = inner.stem(&current);
            if next == current {
                break;
            }
            current = next.into_owned();
        }
        Stem(current)
    }
}

impl fmt::Debug for Stemmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stemmer").field("id", &self.id).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub stem: Stem,
    /// Lowercased surface form before stemming.
    pub surface: String,
    /// Index of the word in the whitespace split of its sentence.
    pub word_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn stems(&self) -> impl Iterator<Item = &Stem> + '_ {
        self.tokens.iter().map(|t| &t.stem)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentStats {
    /// Tokens after filtering.
    pub tokens: usize,
    pub sentences: usize,
    /// Distinct stems.
    pub vocabulary: usize,
    /// Distinct gold stems.
    pub references: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedDocument {
    pub id: String,
    /// Sentences that kept at least one token.
    pub sentences: Vec<Sentence>,
    pub gold_stems: BTreeSet<Stem>,
    pub stats: DocumentStats,
}

impl ProcessedDocument {
    pub fn vocabulary(&self) -> BTreeSet<&Stem> {
        self.sentences.iter().flat_map(Sentence::stems).collect()
    }

    pub fn stem_sentences(&self) -> Vec<Vec<Stem>> {
        self.sentences
            .iter()
            .map(|s| s.stems().cloned().collect())
            .collect()
    }
}

/// Why a document cannot be evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Unusable {
    #[error("document `{0}` has no tokens left after pre-processing")]
    NoTokens(String),
    #[error("document `{0}` has no gold stems left after pre-processing")]
    NoGoldStems(String),
}

impl Unusable {
    pub fn document_id(&self) -> &str {
        match self {
            Unusable::NoTokens(id) | Unusable::NoGoldStems(id) => id,
        }
    }
}

/// Token filter shared by document text and gold keyphrases.
pub struct Pipeline<'a> {
    pub stopwords: &'a StopwordSet,
    pub stemmer: &'a Stemmer,
}

impl Pipeline<'_> {
    fn tokens(&self, sentence: &str) -> Vec<Token> {
        sentence
            .split_whitespace()
            .enumerate()
            .filter_map(|(word_index, raw)| {
                let surface = normalize_token(raw)?;
                if self.stopwords.contains(&surface) {
                    return None;
                }
                let stem = self.stemmer.stem(&surface);
                if stem.as_str().is_empty() || self.stopwords.contains(stem.as_str()) {
                    return None;
                }
                Some(Token {
                    stem,
                    surface,
                    word_index,
                })
            })
            .collect()
    }

    pub fn gold_stems<S: AsRef<str>>(&self, keyphrases: &[S]) -> BTreeSet<Stem> {
        keyphrases
            .iter()
            .flat_map(|phrase| self.tokens(phrase.as_ref()))
            .map(|t| t.stem)
            .collect()
    }

    pub fn process(&self, doc: &RawDocument) -> Result<ProcessedDocument, Unusable> {
        let sentences: Vec<Sentence> = segment_sentences(&doc.text)
            .into_iter()
            .filter_map(|text| {
                let tokens = self.tokens(&text);
                (!tokens.is_empty()).then_some(Sentence { text, tokens })
            })
            .collect();
        if sentences.is_empty() {
            return Err(Unusable::NoTokens(doc.id.clone()));
        }
        let gold_stems = self.gold_stems(&doc.gold_keyphrases);
        if gold_stems.is_empty() {
            return Err(Unusable::NoGoldStems(doc.id.clone()));
        }
        let tokens = sentences.iter().map(|s| s.tokens.len()).sum();
        let vocabulary = sentences
            .iter()
            .flat_map(Sentence::stems)
            .collect::<HashSet<_>>()
            .len();
        let stats = DocumentStats {
            tokens,
            sentences: sentences.len(),
            vocabulary,
            references: gold_stems.len(),
        };
        Ok(ProcessedDocument {
            id: doc.id.clone(),
            sentences,
            gold_stems,
            stats,
        })
    }
}

pub fn preprocess(
    doc: &RawDocument,
    stopwords: &StopwordSet,
    stemmer: &Stemmer,
) -> Result<ProcessedDocument, Unusable> {
    Pipeline { stopwords, stemmer }.process(doc)
}

/// Output of [`preprocess_corpus`]: usable documents in input order plus the rejects.
#[derive(Debug, Clone, Default)]
pub struct ProcessedCorpus {
    pub documents: Vec<ProcessedDocument>,
    pub unusable: Vec<Unusable>,
}

/// Pre-processes documents in parallel, keeping input order.
pub fn preprocess_corpus(
    docs: &[RawDocument],
    stopwords: &StopwordSet,
    stemmer: &Stemmer,
) -> ProcessedCorpus {
    use rayon::prelude::*;

    let results: Vec<_> = docs
        .par_iter()
        .map(|d| preprocess(d, stopwords, stemmer))
        .collect();
    let mut out = ProcessedCorpus::default();
    for result in results {
        match result {
            Ok(doc) => out.documents.push(doc),
            Err(reason) => {
                log::warn!("{reason}; excluded from evaluation");
                out.unusable.push(reason);
            }
        }
    }
    out
}

/// Corpus-level averages: |D|, <W>, <U>, <S>, <K>.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub mean_tokens: f64,
    pub mean_vocabulary: f64,
    pub mean_sentences: f64,
    pub mean_references: f64,
}

impl CorpusStats {
    pub fn from_documents(docs: &[ProcessedDocument]) -> Self {
        let n = docs.len();
        let mean = |f: fn(&DocumentStats) -> usize| {
            if n == 0 {
                0.0
            } else {
                docs.iter().map(|d| f(&d.stats) as f64).sum::<f64>() / n as f64
            }
        };
        CorpusStats {
            documents: n,
            mean_tokens: mean(|s| s.tokens),
            mean_vocabulary: mean(|s| s.vocabulary),
            mean_sentences: mean(|s| s.sentences),
            mean_references: mean(|s| s.references),
        }
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "|D|    {}", self.documents)?;
        writeln!(f, "<W>    {:.2}", self.mean_tokens)?;
        writeln!(f, "<U>    {:.2}", self.mean_vocabulary)?;
        writeln!(f, "<S>    {:.2}", self.mean_sentences)?;
        write!(f, "<K>    {:.2}", self.mean_references)
    }
}
