//! Loading the corpus, stopwords and embedding sources named on the command
//! line, plus the content hashes used for cache keys and the run manifest.

use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use kwgraph::corpus::ProcessedCorpus;
use kwgraph::evaluation::{EmbeddingConfig, EmbeddingData};
use kwgraph::{
    load_corpus, preprocess_corpus, ContextualCorpus, CorpusFormat, SimilarityMode, StaticEmbeddingTable, Stemmer,
    StemmerId, StopwordSet,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Usage;

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Corpus file, one JSON record `{id, text, keywords}` per line
    #[arg(long)]
    pub corpus: PathBuf,
    /// Stopword list, one word per line (default: built-in English list)
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Stemmer: porter or none
    #[arg(long, default_value = "porter")]
    pub stemmer: StemmerId,
}

#[derive(Debug, Clone, Args)]
pub struct EmbeddingArgs {
    /// Embedding file, as PATH or NAME=PATH; repeat for several sources
    #[arg(long = "embeddings", value_name = "[NAME=]PATH")]
    pub embeddings: Vec<String>,
    /// How vectors turn into word similarity
    #[arg(long, default_value = "static")]
    pub embedding_mode: SimilarityMode,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut hasher = Sha256::new();
    io::copy(&mut file, &mut hasher).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(hex::encode(hasher.finalize()))
}

/// Pre-processed corpus together with what identifies it.
pub struct LoadedCorpus {
    pub processed: ProcessedCorpus,
    pub fingerprint: CorpusFingerprint,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusFingerprint {
    pub corpus: PathBuf,
    pub corpus_sha256: String,
    pub stopwords: Option<PathBuf>,
    /// `builtin` for the default list.
    pub stopwords_sha256: String,
    pub stemmer: &'static str,
}

impl CorpusArgs {
    pub fn load(&self) -> Result<LoadedCorpus> {
        let stopwords = match &self.stopwords {
            Some(path) => StopwordSet::from_file(path)?,
            None => StopwordSet::english(),
        };
        let stopwords_sha256 = match &self.stopwords {
            Some(path) => sha256_file(path)?,
            None => "builtin".to_string(),
        };
        let raw = load_corpus(&self.corpus, CorpusFormat::JsonLines)?;
        let processed = preprocess_corpus(&raw, &stopwords, &Stemmer::new(self.stemmer));
        log::info!(
            "{} documents read, {} usable",
            raw.len(),
            processed.documents.len()
        );
        Ok(LoadedCorpus {
            processed,
            fingerprint: CorpusFingerprint {
                corpus: self.corpus.clone(),
                corpus_sha256: sha256_file(&self.corpus)?,
                stopwords: self.stopwords.clone(),
                stopwords_sha256,
                stemmer: self.stemmer.as_str(),
            },
        })
    }
}

/// One loaded embedding source and what identifies it.
pub struct LoadedEmbedding {
    pub config: EmbeddingConfig,
    pub fingerprint: EmbeddingFingerprint,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingFingerprint {
    pub name: String,
    pub path: PathBuf,
    pub mode: String,
    pub sha256: String,
}

fn split_spec(spec: &str) -> Result<(String, PathBuf)> {
    let (name, path) = match spec.split_once('=') {
        Some((name, path)) => (name.to_string(), PathBuf::from(path)),
        None => {
            let path = PathBuf::from(spec);
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (name, path)
        }
    };
    if name.is_empty() || name == kwgraph::evaluation::NO_EMBEDDING {
        bail!(Usage(format!("`{spec}` does not give a usable embedding name")));
    }
    Ok((name, path))
}

impl EmbeddingArgs {
    pub fn load(&self) -> Result<Vec<LoadedEmbedding>> {
        let mut out: Vec<LoadedEmbedding> = Vec::new();
        for spec in &self.embeddings {
            let (name, path) = split_spec(spec)?;
            if out.iter().any(|e| e.config.name == name) {
                bail!(Usage(format!("embedding name `{name}` given twice")));
            }
            let data = match self.embedding_mode {
                SimilarityMode::Static => EmbeddingData::Static(StaticEmbeddingTable::load(&path)?),
                SimilarityMode::BertSim1 | SimilarityMode::BertSim2 => {
                    EmbeddingData::Contextual(ContextualCorpus::load(&path)?)
                }
            };
            out.push(LoadedEmbedding {
                fingerprint: EmbeddingFingerprint {
                    name: name.clone(),
                    sha256: sha256_file(&path)?,
                    path,
                    mode: self.embedding_mode.to_string(),
                },
                config: EmbeddingConfig {
                    name,
                    mode: self.embedding_mode,
                    data,
                },
            });
        }
        Ok(out)
    }

    /// At most one source, for commands that build a single graph per document.
    pub fn load_single(&self) -> Result<Option<LoadedEmbedding>> {
        if self.embeddings.len() > 1 {
            bail!(Usage("this command takes at most one --embeddings".into()));
        }
        Ok(self.load()?.pop())
    }
}

/// File name for a document id: `[A-Za-z0-9_-]` and inner dots stay, every
/// other byte becomes `%XX`.
pub fn document_file_name(id: &str, extension: &str) -> String {
    let mut out = String::with_capacity(id.len() + extension.len() + 1);
    for (i, b) in id.bytes().enumerate() {
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || (b == b'.' && i > 0) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out.push('.');
    out.push_str(extension);
    out
}
