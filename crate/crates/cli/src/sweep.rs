//! Sweep driver with a per-cell result cache.
//!
//! Every cell's accuracy is stored under `<out>/cache/<key>.json`, where the
//! key hashes the corpus, stopwords, stemmer, the embedding file and mode, the
//! cell parameters and the program version. Cells are computed in chunks of
//! one `(embedding, window)` each and cached as soon as the chunk finishes, so
//! an interrupted run resumes from the last complete chunk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kwgraph::evaluation::{
    assemble_records, sweep_accuracies, CellAccuracy, CellKey, CellResult, EmbeddingConfig, SweepOptions,
    SweepOutcome,
};
use kwgraph::{ProcessedDocument, SweepGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::inputs::{CorpusFingerprint, EmbeddingFingerprint};

#[derive(Serialize)]
struct KeyMaterial<'a> {
    version: &'static str,
    corpus_sha256: &'a str,
    stopwords_sha256: &'a str,
    stemmer: &'a str,
    embedding: Option<(&'a str, &'a str)>,
    measure: &'a str,
    window: usize,
    fraction_bits: u64,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    key: CellKey,
    result: CellAccuracy,
}

pub struct CellCache {
    dir: PathBuf,
    corpus: CorpusFingerprint,
    embeddings: BTreeMap<String, EmbeddingFingerprint>,
}

impl CellCache {
    pub fn new(dir: PathBuf, corpus: CorpusFingerprint, embeddings: &[EmbeddingFingerprint]) -> Self {
        CellCache {
            dir,
            corpus,
            embeddings: embeddings.iter().map(|e| (e.name.clone(), e.clone())).collect(),
        }
    }

    fn key(&self, cell: &CellKey) -> String {
        let material = KeyMaterial {
            version: env!("CARGO_PKG_VERSION"),
            corpus_sha256: &self.corpus.corpus_sha256,
            stopwords_sha256: &self.corpus.stopwords_sha256,
            stemmer: self.corpus.stemmer,
            embedding: self
                .embeddings
                .get(&cell.embedding)
                .map(|e| (e.sha256.as_str(), e.mode.as_str())),
            measure: cell.measure.as_str(),
            window: cell.window,
            fraction_bits: cell.fraction.to_bits(),
        };
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&material).expect("key material serializes"));
        hasher.update(cell.embedding.as_bytes());
        hex::encode(hasher.finalize())
    }

    fn path(&self, cell: &CellKey) -> PathBuf {
        self.dir.join(format!("{}.json", self.key(cell)))
    }

    fn get(&self, cell: &CellKey) -> Option<CellAccuracy> {
        let path = self.path(cell);
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<CacheEntry>(&text) {
            Ok(entry) if entry.key == *cell => Some(entry.result),
            _ => {
                log::warn!("ignoring unreadable cache entry {}", path.display());
                None
            }
        }
    }

    fn put(&self, cell: &CellKey, result: CellAccuracy) -> Result<()> {
        let path = self.path(cell);
        let tmp = path.with_extension("json.tmp");
        let entry = CacheEntry {
            key: cell.clone(),
            result,
        };
        fs::write(&tmp, serde_json::to_vec(&entry)?).with_context(|| format!("cannot write {}", tmp.display()))?;
        fs::rename(&tmp, &path).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

pub struct CachedRun {
    pub outcome: SweepOutcome,
    pub hits: usize,
    pub computed: usize,
}

/// Evaluates every cell of `grid`, reading and filling `cache`.
pub fn run_cached(
    corpus: &[ProcessedDocument],
    grid: &SweepGrid,
    sources: &[EmbeddingConfig],
    options: &SweepOptions,
    cache: &CellCache,
) -> Result<CachedRun> {
    fs::create_dir_all(&cache.dir).with_context(|| format!("cannot create {}", cache.dir.display()))?;
    let cells = grid.cells();
    let mut results: Vec<Option<CellResult>> = vec![None; cells.len()];
    let mut pending: BTreeMap<(&str, usize), Vec<usize>> = BTreeMap::new();
    let mut hits = 0;
    for (i, cell) in cells.iter().enumerate() {
        match cache.get(cell) {
            Some(acc) => {
                hits += 1;
                results[i] = Some(CellResult {
                    key: cell.clone(),
                    outcome: Ok(acc),
                });
            }
            None => pending.entry((cell.embedding.as_str(), cell.window)).or_default().push(i),
        }
    }

    let mut computed = 0;
    let chunks = pending.len();
    for (n, ((embedding, window), indices)) in pending.into_iter().enumerate() {
        log::info!("chunk {}/{chunks}: embedding {embedding}, w = {window}, {} cells", n + 1, indices.len());
        let chunk: Vec<CellKey> = indices.iter().map(|&i| cells[i].clone()).collect();
        for (i, result) in indices.into_iter().zip(sweep_accuracies(corpus, &chunk, sources, options)) {
            if let Ok(acc) = &result.outcome {
                cache.put(&result.key, *acc)?;
            }
            computed += 1;
            results[i] = Some(result);
        }
    }

    let results: Vec<CellResult> = results.into_iter().map(|r| r.expect("every cell resolved")).collect();
    Ok(CachedRun {
        outcome: assemble_records(&results),
        hits,
        computed,
    })
}

pub fn cache_dir(out: &Path) -> PathBuf {
    out.join("cache")
}
