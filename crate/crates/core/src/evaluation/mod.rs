//! Keyword selection, scoring against gold stems, and parameter sweeps.

mod report;
mod sweep;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::{CentralityVector, MeasureId};
use crate::corpus::Stem;

pub use report::{best_per_measure, format_fraction, format_gain, render_table, write_results};
pub use sweep::{
    assemble_records, document_graph, run_sweep, sweep_accuracies, CellAccuracy, CellKey, CellResult, EmbeddingConfig,
    EmbeddingData, SweepGrid, SweepOptions, SweepOutcome, NO_EMBEDDING,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("gold stem set is empty")]
    EmptyGold,
    #[error("keyword count must be at least 1")]
    ZeroKeywords,
    #[error("invalid sweep grid: {0}")]
    Grid(String),
    #[error("{id}: {message}")]
    Document { id: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordSet {
    pub document: String,
    pub measure: MeasureId,
    /// Best first.
    pub stems: Vec<Stem>,
}

/// The `count` best-ranked stems (descending score, ties by stem). Returns
/// every node when the graph has fewer than `count`.
pub fn extract_keywords(
    document: &str,
    scores: &CentralityVector,
    count: usize,
) -> Result<KeywordSet, EvalError> {
    if count == 0 {
        return Err(EvalError::ZeroKeywords);
    }
    let stems = scores
        .ranked_stems()
        .into_iter()
        .take(count)
        .cloned()
        .collect::<Vec<_>>();
    if stems.len() < count {
        log::debug!(
            "{document}: graph has {} nodes, fewer than the {count} requested keywords",
            stems.len()
        );
    }
    Ok(KeywordSet {
        document: document.to_string(),
        measure: scores.measure,
        stems,
    })
}

/// `|extracted ∩ gold| / |gold|`.
pub fn accuracy(extracted: &[Stem], gold: &BTreeSet<Stem>) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let hits = extracted
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|s| gold.contains(*s))
        .count();
    Ok(hits as f64 / gold.len() as f64)
}

/// Relative gain over a baseline; `None` when the baseline is not positive.
pub fn relative_gain(acc: f64, baseline: f64) -> Option<f64> {
    (baseline > 0.0).then(|| (acc - baseline) / baseline)
}

/// `(Γ1, Γ2)`: gains over the `(P = 0, w = 1)` and `(P = 0, same w)` baselines.
pub fn gains(acc: f64, acc_traditional: f64, acc_same_window: f64) -> (Option<f64>, Option<f64>) {
    (
        relative_gain(acc, acc_traditional),
        relative_gain(acc, acc_same_window),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub measure: MeasureId,
    pub window: usize,
    #[serde(rename = "P")]
    pub fraction: f64,
    pub embedding: String,
    pub accuracy: f64,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub documents: usize,
}

impl fmt::Display for EvalRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} w={} P={} {} Acc={:.4} Γ1={} Γ2={} (n={})",
            self.measure,
            self.window,
            format_fraction(self.fraction),
            self.embedding,
            self.accuracy,
            format_gain(self.gamma1),
            format_gain(self.gamma2),
            self.documents
        )
    }
}
