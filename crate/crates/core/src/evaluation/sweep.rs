//! Parameter sweeps over window length, virtual-edge fraction, embedding
//! configuration and measure.
//!
//! Work is organized per document: for each window the co-occurrence graph is
//! built once, the similarity ranking of candidate pairs is computed once per
//! embedding configuration (for the largest fraction requested), and every
//! fraction takes a prefix of that ranking. Graphs that end up with the same
//! number of virtual edges share their scores.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{accuracy, extract_keywords, gains, EvalError, EvalRecord};
use crate::centrality::{compute, CentralityParams, MeasureId};
use crate::corpus::ProcessedDocument;
use crate::embedding::{
    ContextualCorpus, ContextualEmbeddingSet, EmbeddingError, EmbeddingSource, RankedPairs,
    SimilarityIndex, SimilarityMode, StaticEmbeddingTable,
};
use crate::network::{
    build_cooccurrence, enrich, enrich_with_ranked, rank_virtual_candidates, virtual_edge_target,
    EnrichReport, WordGraph, MAX_WINDOW,
};

/// Descriptor for grids that never add virtual edges.
pub const NO_EMBEDDING: &str = "none";

#[derive(Debug, Clone)]
pub enum EmbeddingData {
    Static(StaticEmbeddingTable),
    Contextual(ContextualCorpus),
}

/// A named embedding source plus the similarity mode applied to it.
#[derive(Debug, Clone)]
pub struct EmbeddingConfig {
    pub name: String,
    pub mode: SimilarityMode,
    pub data: EmbeddingData,
}

impl EmbeddingConfig {
    /// Similarity index over the nodes of `graph`. Contextual sources use the
    /// vectors recorded for `doc`; a document without any gets an empty set.
    pub fn similarity_index(
        &self,
        doc: &ProcessedDocument,
        graph: &WordGraph,
    ) -> Result<SimilarityIndex, EmbeddingError> {
        let empty;
        let source = match &self.data {
            EmbeddingData::Static(table) => EmbeddingSource::Static(table),
            EmbeddingData::Contextual(corpus) => match corpus.document(&doc.id) {
                Some(set) => EmbeddingSource::Contextual(set),
                None => {
                    empty = ContextualEmbeddingSet::new(corpus.dimension());
                    EmbeddingSource::Contextual(&empty)
                }
            },
        };
        SimilarityIndex::new(source, self.mode, graph.nodes())
    }

    fn index_for(&self, doc: &ProcessedDocument, graph: &WordGraph) -> Result<SimilarityIndex, String> {
        self.similarity_index(doc, graph).map_err(|e| e.to_string())
    }
}

/// The graph a sweep cell `(w, P, embedding)` evaluates for `doc`. `source`
/// may be `None` only when `fraction` adds no virtual edges.
pub fn document_graph(
    doc: &ProcessedDocument,
    window: usize,
    fraction: f64,
    source: Option<&EmbeddingConfig>,
) -> Result<(WordGraph, EnrichReport), EvalError> {
    let fail = |message: String| EvalError::Document {
        id: doc.id.clone(),
        message,
    };
    let base = build_cooccurrence(doc, window).map_err(|e| fail(e.to_string()))?;
    if virtual_edge_target(fraction, base.cooccurrence_edge_count()) == 0 {
        return Ok((base, EnrichReport::default()));
    }
    let config = source.ok_or_else(|| fail(format!("P = {fraction} needs an embedding source")))?;
    let index = config.index_for(doc, &base).map_err(fail)?;
    enrich(&base, fraction, &index, &config.name).map_err(|e| fail(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub windows: Vec<usize>,
    pub fractions: Vec<f64>,
    /// Names of [`EmbeddingConfig`]s, or [`NO_EMBEDDING`].
    pub embeddings: Vec<String>,
    pub measures: Vec<MeasureId>,
}

impl SweepGrid {
    /// Checks the axes and that every cell has its `(P = 0, w = 1)` and
    /// `(P = 0, same w)` baselines.
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::Grid(m.to_string()));
        if self.windows.is_empty()
            || self.fractions.is_empty()
            || self.embeddings.is_empty()
            || self.measures.is_empty()
        {
            return bad("every axis needs at least one value");
        }
        if let Some(w) = self.windows.iter().find(|w| !(1..=MAX_WINDOW).contains(*w)) {
            return Err(EvalError::Grid(format!("window {w} outside 1..={MAX_WINDOW}")));
        }
        if let Some(p) = self.fractions.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(EvalError::Grid(format!("fraction {p} outside [0, 1]")));
        }
        if !self.windows.contains(&1) {
            return bad("window 1 is required as the Γ1 baseline");
        }
        if !self.fractions.contains(&0.0) {
            return bad("fraction 0 is required as the Γ baseline");
        }
        Ok(())
    }

    /// Cells in output order: embedding, measure, window, fraction.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for embedding in &self.embeddings {
            for &measure in &self.measures {
                for &window in &self.windows {
                    for &fraction in &self.fractions {
                        out.push(CellKey {
                            measure,
                            window,
                            fraction,
                            embedding: embedding.clone(),
                        });
                    }
                }
            }
        }
        out
    }
}

/// One `(measure, w, P, embedding)` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub measure: MeasureId,
    pub window: usize,
    #[serde(rename = "P")]
    pub fraction: f64,
    pub embedding: String,
}

impl CellKey {
    fn baseline(&self, window: usize) -> CellKey {
        CellKey {
            measure: self.measure,
            window,
            fraction: 0.0,
            embedding: self.embedding.clone(),
        }
    }

    fn lookup_key(&self) -> (MeasureId, usize, u64, &str) {
        (self.measure, self.window, self.fraction.to_bits(), &self.embedding)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellAccuracy {
    /// Mean per-document accuracy.
    pub accuracy: f64,
    pub documents: usize,
    /// Documents whose graph had fewer nodes than gold stems.
    pub short_documents: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub key: CellKey,
    pub outcome: Result<CellAccuracy, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    pub centrality: CentralityParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<EvalRecord>,
    /// Cells that could not be evaluated, with the reason.
    pub failures: Vec<(CellKey, String)>,
}

#[derive(Clone, Copy, PartialEq)]
struct Fraction(f64);

impl Eq for Fraction {}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// cells grouped as window → embedding → fraction → measure → cell indices
type Plan<'a> = BTreeMap<usize, BTreeMap<&'a str, BTreeMap<Fraction, BTreeMap<MeasureId, Vec<usize>>>>>;

fn plan(cells: &[CellKey]) -> Plan<'_> {
    let mut plan: Plan<'_> = BTreeMap::new();
    for (i, cell) in cells.iter().enumerate() {
        plan.entry(cell.window)
            .or_default()
            .entry(cell.embedding.as_str())
            .or_default()
            .entry(Fraction(cell.fraction))
            .or_default()
            .entry(cell.measure)
            .or_default()
            .push(i);
    }
    plan
}

/// Per-document outcome for one cell: accuracy and whether the graph was
/// smaller than the gold set.
type DocScore = Result<(f64, bool), String>;

fn score_graph(
    doc: &ProcessedDocument,
    graph: &WordGraph,
    measure: MeasureId,
    params: &CentralityParams,
) -> DocScore {
    let scores = compute(graph, measure, params).map_err(|e| format!("{}: {e}", doc.id))?;
    let n = doc.gold_stems.len();
    let keywords = extract_keywords(&doc.id, &scores, n).map_err(|e| e.to_string())?;
    let acc = accuracy(&keywords.stems, &doc.gold_stems).map_err(|e| e.to_string())?;
    Ok((acc, graph.node_count() < n))
}

fn evaluate_document(
    doc: &ProcessedDocument,
    cells: &[CellKey],
    plan: &Plan<'_>,
    sources: &HashMap<&str, &EmbeddingConfig>,
    params: &CentralityParams,
) -> Vec<Option<DocScore>> {
    let mut out: Vec<Option<DocScore>> = vec![None; cells.len()];
    for (&window, by_embedding) in plan {
        let base = match build_cooccurrence(doc, window) {
            Ok(g) => g,
            Err(e) => {
                let msg = format!("{}: {e}", doc.id);
                for by_fraction in by_embedding.values() {
                    for idx in by_fraction.values().flat_map(|m| m.values()).flatten() {
                        out[*idx] = Some(Err(msg.clone()));
                    }
                }
                continue;
            }
        };
        let edges = base.cooccurrence_edge_count();
        // Scores of the co-occurrence-only graph are shared by every embedding.
        let mut plain: HashMap<MeasureId, DocScore> = HashMap::new();

        for (&embedding, by_fraction) in by_embedding {
            let largest = by_fraction.keys().next_back().map_or(0.0, |f| f.0);
            let limit = virtual_edge_target(largest, edges);
            let ranked: Result<RankedPairs, String> = if limit == 0 {
                Ok(RankedPairs::default())
            } else {
                match sources.get(embedding) {
                    Some(config) => config
                        .index_for(doc, &base)
                        .map(|index| rank_virtual_candidates(&base, &index, limit)),
                    None => Err(format!("no embedding source named `{embedding}`")),
                }
            };
            // Keyed by the number of virtual edges actually added.
            let mut enriched: HashMap<(usize, MeasureId), DocScore> = HashMap::new();

            for (&Fraction(fraction), by_measure) in by_fraction {
                let requested = virtual_edge_target(fraction, edges);
                let graph = if requested == 0 {
                    None
                } else {
                    match &ranked {
                        Ok(ranked) => match enrich_with_ranked(&base, fraction, ranked, embedding) {
                            Ok((g, _)) => Some(Ok(g)),
                            Err(e) => Some(Err(format!("{}: {e}", doc.id))),
                        },
                        Err(e) => Some(Err(e.clone())),
                    }
                };
                for (&measure, indices) in by_measure {
                    let score = match &graph {
                        None => plain
                            .entry(measure)
                            .or_insert_with(|| score_graph(doc, &base, measure, params))
                            .clone(),
                        Some(Ok(g)) => {
                            let added = g.virtual_edge_count();
                            if added == 0 {
                                plain
                                    .entry(measure)
                                    .or_insert_with(|| score_graph(doc, &base, measure, params))
                                    .clone()
                            } else {
                                enriched
                                    .entry((added, measure))
                                    .or_insert_with(|| score_graph(doc, g, measure, params))
                                    .clone()
                            }
                        }
                        Some(Err(e)) => Err(e.clone()),
                    };
                    for &i in indices {
                        out[i] = Some(score.clone());
                    }
                }
            }
        }
    }
    out
}

/// Mean accuracy of every cell over `corpus`. Documents are processed in
/// parallel; per-cell means are reduced in corpus order.
pub fn sweep_accuracies(
    corpus: &[ProcessedDocument],
    cells: &[CellKey],
    sources: &[EmbeddingConfig],
    options: &SweepOptions,
) -> Vec<CellResult> {
    let plan = plan(cells);
    let by_name: HashMap<&str, &EmbeddingConfig> =
        sources.iter().map(|s| (s.name.as_str(), s)).collect();
    let per_doc: Vec<Vec<Option<DocScore>>> = corpus
        .par_iter()
        .map(|doc| evaluate_document(doc, cells, &plan, &by_name, &options.centrality))
        .collect();

    cells
        .iter()
        .enumerate()
        .map(|(i, key)| {
            let outcome = if corpus.is_empty() {
                Err("no usable documents".to_string())
            } else {
                let mut total = 0.0;
                let mut short = 0;
                let mut failure = None;
                for doc_scores in &per_doc {
                    match doc_scores[i].as_ref().expect("every cell is planned") {
                        Ok((acc, is_short)) => {
                            total += acc;
                            short += usize::from(*is_short);
                        }
                        Err(e) => {
                            failure = Some(e.clone());
                            break;
                        }
                    }
                }
                match failure {
                    Some(e) => Err(e),
                    None => Ok(CellAccuracy {
                        accuracy: total / corpus.len() as f64,
                        documents: corpus.len(),
                        short_documents: short,
                    }),
                }
            };
            CellResult {
                key: key.clone(),
                outcome,
            }
        })
        .collect()
}

/// Turns cell accuracies into records with Γ1 and Γ2 filled from the
/// matching baselines. Failed cells are returned separately; a record whose
/// baseline failed gets an undefined gain.
pub fn assemble_records(results: &[CellResult]) -> SweepOutcome {
    let accuracies: HashMap<_, f64> = results
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|a| (r.key.lookup_key(), a.accuracy)))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for result in results {
        match &result.outcome {
            Ok(cell) => {
                let key = &result.key;
                let traditional = accuracies.get(&key.baseline(1).lookup_key()).copied();
                let same_window = accuracies.get(&key.baseline(key.window).lookup_key()).copied();
                let (g1, g2) = gains(
                    cell.accuracy,
                    traditional.unwrap_or(0.0),
                    same_window.unwrap_or(0.0),
                );
                records.push(EvalRecord {
                    measure: key.measure,
                    window: key.window,
                    fraction: key.fraction,
                    embedding: key.embedding.clone(),
                    accuracy: cell.accuracy,
                    gamma1: g1,
                    gamma2: g2,
                    documents: cell.documents,
                });
            }
            Err(e) => failures.push((result.key.clone(), e.clone())),
        }
    }
    SweepOutcome { records, failures }
}

/// Validates `grid` and evaluates all of its cells.
pub fn run_sweep(
    corpus: &[ProcessedDocument],
    grid: &SweepGrid,
    sources: &[EmbeddingConfig],
    options: &SweepOptions,
) -> Result<SweepOutcome, EvalError> {
    grid.validate()?;
    let needs_vectors = grid.fractions.iter().any(|&p| p > 0.0);
    if needs_vectors {
        let known: BTreeSet<&str> = sources.iter().map(|s| s.name.as_str()).collect();
        if let Some(missing) = grid.embeddings.iter().find(|e| !known.contains(e.as_str())) {
            return Err(EvalError::Grid(format!(
                "no embedding source named `{missing}` for fractions above 0"
            )));
        }
    }
    let cells = grid.cells();
    let results = sweep_accuracies(corpus, &cells, sources, options);
    Ok(assemble_records(&results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{preprocess, RawDocument, Stemmer, StemmerId, StopwordSet};

    fn corpus() -> Vec<ProcessedDocument> {
        let stop = StopwordSet::english();
        let stemmer = Stemmer::new(StemmerId::Porter);
        [
            ("a", "Graph networks rank words. Words in networks link graph nodes.", vec!["graph", "networks"]),
            ("b", "Keyword extraction uses centrality. Centrality ranks keyword candidates!", vec!["keyword extraction"]),
        ]
        .into_iter()
        .map(|(id, text, kw)| {
            let raw = RawDocument {
                id: id.into(),
                text: text.into(),
                gold_keyphrases: kw.into_iter().map(String::from).collect(),
            };
            preprocess(&raw, &stop, &stemmer).unwrap()
        })
        .collect()
    }

    fn grid(windows: &[usize], fractions: &[f64], measures: &[MeasureId]) -> SweepGrid {
        SweepGrid {
            windows: windows.to_vec(),
            fractions: fractions.to_vec(),
            embeddings: vec![NO_EMBEDDING.to_string()],
            measures: measures.to_vec(),
        }
    }

    #[test]
    fn single_cell_is_its_own_baseline() {
        let out = run_sweep(&corpus(), &grid(&[1], &[0.0], &[MeasureId::Degree]), &[], &SweepOptions::default())
            .unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].gamma1, Some(0.0));
        assert_eq!(out.records[0].gamma2, Some(0.0));
        assert_eq!(out.records[0].documents, 2);
    }

    #[test]
    fn grid_requires_baselines() {
        let opts = SweepOptions::default();
        assert!(matches!(
            run_sweep(&corpus(), &grid(&[2], &[0.0], &[MeasureId::Degree]), &[], &opts),
            Err(EvalError::Grid(_))
        ));
        assert!(matches!(
            run_sweep(&corpus(), &grid(&[1], &[0.1], &[MeasureId::Degree]), &[], &opts),
            Err(EvalError::Grid(_))
        ));
        assert!(matches!(
            run_sweep(&corpus(), &grid(&[1], &[0.0, 0.1], &[MeasureId::Degree]), &[], &opts),
            Err(EvalError::Grid(_))
        ));
        assert!(matches!(
            run_sweep(&corpus(), &grid(&[1, 4], &[0.0], &[MeasureId::Degree]), &[], &opts),
            Err(EvalError::Grid(_))
        ));
    }

    #[test]
    fn record_count_is_grid_size() {
        let g = grid(&[1, 2, 3], &[0.0], &MeasureId::ALL);
        let out = run_sweep(&corpus(), &g, &[], &SweepOptions::default()).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        assert_eq!(out.records.len(), 3 * 12);
    }

    #[test]
    fn cell_accuracy_is_the_document_mean() {
        let docs = corpus();
        let cells = grid(&[1], &[0.0], &[MeasureId::Degree]).cells();
        let both = sweep_accuracies(&docs, &cells, &[], &SweepOptions::default());
        let each: Vec<f64> = docs
            .iter()
            .map(|d| {
                sweep_accuracies(std::slice::from_ref(d), &cells, &[], &SweepOptions::default())[0]
                    .outcome
                    .as_ref()
                    .unwrap()
                    .accuracy
            })
            .collect();
        let mean = both[0].outcome.as_ref().unwrap().accuracy;
        assert!((mean - (each[0] + each[1]) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_corpus_fails_every_cell() {
        let cells = grid(&[1], &[0.0], &[MeasureId::Degree]).cells();
        let results = sweep_accuracies(&[], &cells, &[], &SweepOptions::default());
        assert!(results[0].outcome.is_err());
    }

    #[test]
    fn document_graph_matches_sweep_cells() {
        let docs = corpus();
        let vocab: std::collections::BTreeSet<_> = docs.iter().flat_map(|d| d.vocabulary()).cloned().collect();
        let entries = vocab
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), vec![(i as f64).sin(), (i as f64).cos(), 0.3]))
            .collect();
        let source = EmbeddingConfig {
            name: "toy".into(),
            mode: SimilarityMode::Static,
            data: EmbeddingData::Static(StaticEmbeddingTable::new(3, entries).unwrap()),
        };
        let grid = SweepGrid {
            windows: vec![1, 2],
            fractions: vec![0.0, 0.3, 1.0],
            embeddings: vec!["toy".into()],
            measures: vec![MeasureId::PageRankWeighted],
        };
        let out = run_sweep(&docs, &grid, std::slice::from_ref(&source), &SweepOptions::default()).unwrap();
        let params = CentralityParams::default();
        for record in &out.records {
            let total: f64 = docs
                .iter()
                .map(|d| {
                    let (g, _) = document_graph(d, record.window, record.fraction, Some(&source)).unwrap();
                    let scores = compute(&g, record.measure, &params).unwrap();
                    let kw = extract_keywords(&d.id, &scores, d.gold_stems.len()).unwrap();
                    accuracy(&kw.stems, &d.gold_stems).unwrap()
                })
                .sum();
            assert_eq!(record.accuracy, total / docs.len() as f64, "{record}");
        }
        assert!(document_graph(&docs[0], 1, 0.5, None).is_err());
        assert!(document_graph(&docs[0], 1, 0.0, None).is_ok());
    }
}
