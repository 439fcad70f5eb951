//! Node-ranking measures over a [`WordGraph`].
//!
//! Every measure is a pure function of the graph. Weighted variants read the
//! edge weights; unweighted variants treat every edge as weight 1. Path-based
//! measures use `1 / weight` as the length of an edge.

mod accessibility;
mod eigenvector;
mod pagerank;
mod paths;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Stem;
use crate::network::WordGraph;

pub use accessibility::{accessibility, walk_distribution, AccessibilityLevel};
pub use eigenvector::{eigenvector, EigenvectorParams};
pub use pagerank::{pagerank, PageRankParams};
pub use paths::{betweenness, closeness};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CentralityError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("graph has no edges")]
    NoEdges,
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{measure}: {source}")]
    Measure {
        measure: MeasureId,
        #[source]
        source: Box<CentralityError>,
    },
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),
}

/// The twelve ranking measures. `_w` marks a weighted variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureId {
    #[serde(rename = "k")]
    Degree,
    #[serde(rename = "s")]
    Strength,
    #[serde(rename = "pi")]
    PageRank,
    #[serde(rename = "pi_w")]
    PageRankWeighted,
    #[serde(rename = "EV")]
    Eigenvector,
    #[serde(rename = "EV_w")]
    EigenvectorWeighted,
    #[serde(rename = "B")]
    Betweenness,
    #[serde(rename = "B_w")]
    BetweennessWeighted,
    #[serde(rename = "C")]
    Closeness,
    #[serde(rename = "C_w")]
    ClosenessWeighted,
    #[serde(rename = "A1")]
    Accessibility1,
    #[serde(rename = "A2")]
    Accessibility2,
}

impl MeasureId {
    pub const ALL: [MeasureId; 12] = [
        MeasureId::Degree,
        MeasureId::Strength,
        MeasureId::PageRank,
        MeasureId::PageRankWeighted,
        MeasureId::Eigenvector,
        MeasureId::EigenvectorWeighted,
        MeasureId::Betweenness,
        MeasureId::BetweennessWeighted,
        MeasureId::Closeness,
        MeasureId::ClosenessWeighted,
        MeasureId::Accessibility1,
        MeasureId::Accessibility2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureId::Degree => "k",
            MeasureId::Strength => "s",
            MeasureId::PageRank => "pi",
            MeasureId::PageRankWeighted => "pi_w",
            MeasureId::Eigenvector => "EV",
            MeasureId::EigenvectorWeighted => "EV_w",
            MeasureId::Betweenness => "B",
            MeasureId::BetweennessWeighted => "B_w",
            MeasureId::Closeness => "C",
            MeasureId::ClosenessWeighted => "C_w",
            MeasureId::Accessibility1 => "A1",
            MeasureId::Accessibility2 => "A2",
        }
    }

    pub fn is_weighted(self) -> bool {
        matches!(
            self,
            MeasureId::Strength
                | MeasureId::PageRankWeighted
                | MeasureId::EigenvectorWeighted
                | MeasureId::BetweennessWeighted
                | MeasureId::ClosenessWeighted
        )
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureId {
    type Err = CentralityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| CentralityError::UnknownMeasure(s.to_string()))
    }
}

/// The graph configuration a score vector was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEcho {
    pub window: usize,
    pub virtual_fraction: f64,
    pub embedding: Option<String>,
}

impl GraphEcho {
    fn of(graph: &WordGraph) -> Self {
        GraphEcho {
            window: graph.window(),
            virtual_fraction: graph.virtual_fraction(),
            embedding: graph.embedding().map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityVector {
    pub measure: MeasureId,
    /// One `(stem, score)` per graph node, in node order.
    pub scores: Vec<(Stem, f64)>,
    pub config: GraphEcho,
}

impl CentralityVector {
    pub fn new(measure: MeasureId, graph: &WordGraph, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), graph.node_count());
        debug_assert!(values.iter().all(|v| v.is_finite()), "{measure} produced a non-finite score");
        CentralityVector {
            measure,
            scores: graph.nodes().iter().cloned().zip(values).collect(),
            config: GraphEcho::of(graph),
        }
    }

    pub fn get(&self, stem: &str) -> Option<f64> {
        self.scores
            .iter()
            .find(|(s, _)| s.as_str() == stem)
            .map(|&(_, v)| v)
    }

    pub fn values(&self) -> Vec<f64> {
        self.scores.iter().map(|&(_, v)| v).collect()
    }

    /// Indices into `scores`, best first: descending score, then ascending stem.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| rank_order(&self.scores[a], &self.scores[b]));
        order
    }

    /// Stems best first.
    pub fn ranked_stems(&self) -> Vec<&Stem> {
        self.ranking().into_iter().map(|i| &self.scores[i].0).collect()
    }
}

/// Descending score, then ascending stem.
pub fn rank_order(a: &(Stem, f64), b: &(Stem, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

fn require_nodes(graph: &WordGraph) -> Result<(), CentralityError> {
    if graph.node_count() == 0 {
        Err(CentralityError::EmptyGraph)
    } else {
        Ok(())
    }
}

/// Number of incident edges, whatever their kind.
pub fn degree(graph: &WordGraph) -> Result<CentralityVector, CentralityError> {
    require_nodes(graph)?;
    let adj = graph.adjacency();
    let values = (0..adj.len()).map(|i| adj.degree(i) as f64).collect();
    Ok(CentralityVector::new(MeasureId::Degree, graph, values))
}

/// Sum of incident edge weights.
pub fn strength(graph: &WordGraph) -> Result<CentralityVector, CentralityError> {
    require_nodes(graph)?;
    let adj = graph.adjacency();
    let values = (0..adj.len()).map(|i| adj.strength(i)).collect();
    Ok(CentralityVector::new(MeasureId::Strength, graph, values))
}

/// Parameters shared by [`compute_all`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CentralityParams {
    pub pagerank: PageRankParams,
    pub eigenvector: EigenvectorParams,
}

pub fn compute(
    graph: &WordGraph,
    measure: MeasureId,
    params: &CentralityParams,
) -> Result<CentralityVector, CentralityError> {
    let result = match measure {
        MeasureId::Degree => degree(graph),
        MeasureId::Strength => strength(graph),
        MeasureId::PageRank => pagerank(graph, &params.pagerank, false),
        MeasureId::PageRankWeighted => pagerank(graph, &params.pagerank, true),
        MeasureId::Eigenvector => eigenvector(graph, &params.eigenvector, false),
        MeasureId::EigenvectorWeighted => eigenvector(graph, &params.eigenvector, true),
        MeasureId::Betweenness => betweenness(graph, false),
        MeasureId::BetweennessWeighted => betweenness(graph, true),
        MeasureId::Closeness => closeness(graph, false),
        MeasureId::ClosenessWeighted => closeness(graph, true),
        MeasureId::Accessibility1 => accessibility(graph, AccessibilityLevel::One),
        MeasureId::Accessibility2 => accessibility(graph, AccessibilityLevel::Two),
    };
    result.map_err(|source| CentralityError::Measure {
        measure,
        source: Box::new(source),
    })
}

/// Computes each requested measure, in the order given.
pub fn compute_all(
    graph: &WordGraph,
    measures: &[MeasureId],
    params: &CentralityParams,
) -> Result<Vec<CentralityVector>, CentralityError> {
    measures.iter().map(|&m| compute(graph, m, params)).collect()
}

/// Score dump: one `measure<TAB>stem<TAB>score` line per entry, sorted by
/// measure name then stem. Scores use the shortest representation that
/// parses back to the same `f64`, so rankings survive a round trip.
pub fn score_dump(vectors: &[CentralityVector]) -> String {
    let mut lines: Vec<(&str, &str, f64)> = vectors
        .iter()
        .flat_map(|v| {
            v.scores
                .iter()
                .map(move |(s, x)| (v.measure.as_str(), s.as_str(), *x))
        })
        .collect();
    lines.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.cmp(b.1)));
    let mut out = String::new();
    for (m, s, x) in lines {
        out.push_str(&format!("{m}\t{s}\t{x}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> WordGraph {
        WordGraph::from_index_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)])
    }

    #[test]
    fn degree_of_path_and_star() {
        assert_eq!(degree(&path3()).unwrap().values(), vec![1.0, 2.0, 1.0]);
        let star = WordGraph::from_index_edges(5, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)]);
        assert_eq!(degree(&star).unwrap().values()[0], 4.0);
    }

    #[test]
    fn strength_sums_weights() {
        let g = WordGraph::from_index_edges(3, &[(0, 1, 2.0), (1, 2, 0.5)]);
        assert_eq!(strength(&g).unwrap().values(), vec![2.0, 2.5, 0.5]);
        assert_eq!(strength(&path3()).unwrap().values(), degree(&path3()).unwrap().values());
    }

    #[test]
    fn empty_graph_is_rejected() {
        let g = WordGraph::from_index_edges(0, &[]);
        assert_eq!(degree(&g).unwrap_err(), CentralityError::EmptyGraph);
    }

    #[test]
    fn measure_names_round_trip() {
        for m in MeasureId::ALL {
            assert_eq!(m.as_str().parse::<MeasureId>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
        assert!("X".parse::<MeasureId>().is_err());
    }

    #[test]
    fn ranking_breaks_ties_by_stem() {
        let g = WordGraph::from_index_edges(4, &[(0, 1, 1.0), (2, 3, 1.0), (1, 2, 1.0)]);
        let v = degree(&g).unwrap();
        let names: Vec<_> = v.ranked_stems().into_iter().map(Stem::as_str).collect();
        assert_eq!(names, vec!["n001", "n002", "n000", "n003"]);
    }

    #[test]
    fn compute_all_shapes() {
        let g = path3();
        let params = CentralityParams::default();
        assert!(compute_all(&g, &[], &params).unwrap().is_empty());
        let ks = compute_all(&g, &[MeasureId::Degree, MeasureId::Strength], &params).unwrap();
        assert_eq!(ks[0].values(), ks[1].values());
    }

    #[test]
    fn errors_are_tagged_with_the_measure() {
        let g = WordGraph::from_index_edges(2, &[]);
        let err = compute(&g, MeasureId::EigenvectorWeighted, &CentralityParams::default()).unwrap_err();
        assert!(matches!(err, CentralityError::Measure { measure: MeasureId::EigenvectorWeighted, .. }));
        assert!(err.to_string().starts_with("EV_w: "));
    }

    #[test]
    fn dump_is_sorted_and_round_trips() {
        let g = path3();
        let vs = compute_all(&g, &[MeasureId::Strength, MeasureId::Degree], &CentralityParams::default()).unwrap();
        let dump = score_dump(&vs);
        let first: Vec<_> = dump.lines().take(2).collect();
        assert_eq!(first, vec!["k\tn000\t1", "k\tn001\t2"]);
        assert_eq!(dump.lines().count(), 6);

        let pr = compute(&path3(), MeasureId::PageRank, &CentralityParams::default()).unwrap();
        let parsed: Vec<f64> = score_dump(std::slice::from_ref(&pr))
            .lines()
            .map(|l| l.rsplit('\t').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(parsed, pr.values());
    }
}
