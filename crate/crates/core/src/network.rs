//! Word co-occurrence networks and virtual-edge enrichment.
//!
//! Nodes are the distinct stems of a document, kept in lexicographic order so
//! node index order and stem order agree. Two stems are joined by a
//! co-occurrence edge when they appear within `w` tokens of each other in the
//! same sentence; the edge weight is the number of such co-occurrences.
//! Enrichment then adds `round(P · E_t)` virtual edges between the most
//! similar non-adjacent stems, weighted by their similarity.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ProcessedDocument, Stem};
use crate::embedding::{top_similar_pairs, RankedPairs, SimilarityIndex, StemPair};

/// Floor applied to virtual edge weights so that non-positive similarities
/// still give a positive weight.
pub const MIN_VIRTUAL_WEIGHT: f64 = 1e-9;

/// Largest supported window length.
pub const MAX_WINDOW: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("window length must be in 1..={MAX_WINDOW}, got {0}")]
    Window(usize),
    #[error("virtual edge fraction must be in [0, 1], got {0}")]
    Fraction(f64),
    #[error("document has no tokens")]
    EmptyDocument,
    #[error("graph already has {0} virtual edges")]
    AlreadyEnriched(usize),
    #[error("line {line}: {message}")]
    Dump { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    window: usize,
    virtual_fraction: f64,
}

impl GraphConfig {
    pub fn new(window: usize, virtual_fraction: f64) -> Result<Self, NetworkError> {
        if !(1..=MAX_WINDOW).contains(&window) {
            return Err(NetworkError::Window(window));
        }
        if !(0.0..=1.0).contains(&virtual_fraction) {
            return Err(NetworkError::Fraction(virtual_fraction));
        }
        Ok(GraphConfig {
            window,
            virtual_fraction,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn virtual_fraction(&self) -> f64 {
        self.virtual_fraction
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Cooccurrence,
    Virtual,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Cooccurrence => "cooccurrence",
            EdgeKind::Virtual => "virtual",
        }
    }
}

impl FromStr for EdgeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cooccurrence" => Ok(EdgeKind::Cooccurrence),
            "virtual" => Ok(EdgeKind::Virtual),
            other => Err(format!("unknown edge kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub weight: f64,
    /// In-window co-occurrences; zero for virtual edges.
    pub count: u32,
}

/// Undirected weighted word network.
#[derive(Debug, Clone, PartialEq)]
pub struct WordGraph {
    nodes: Vec<Stem>,
    /// Keyed by `(lo, hi)` node indices, `lo < hi`.
    edges: BTreeMap<(usize, usize), Edge>,
    window: usize,
    virtual_fraction: f64,
    embedding: Option<String>,
}

/// Neighbor lists with weights, indexed like [`WordGraph::nodes`].
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Neighbors of `node` in ascending index order.
    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn strength(&self, node: usize) -> f64 {
        self.neighbors[node].iter().map(|&(_, w)| w).sum()
    }
}

impl WordGraph {
    fn empty(nodes: Vec<Stem>, window: usize) -> Self {
        WordGraph {
            nodes,
            edges: BTreeMap::new(),
            window,
            virtual_fraction: 0.0,
            embedding: None,
        }
    }

    /// Builds a graph from explicit weighted co-occurrence edges. Node order is
    /// lexicographic regardless of input order; edge endpoints must be listed
    /// in `nodes`. Repeated pairs accumulate weight; self-pairs are ignored.
    pub fn from_edges(
        nodes: impl IntoIterator<Item = Stem>,
        edges: &[(Stem, Stem, f64)],
    ) -> Self {
        let mut nodes: Vec<Stem> = nodes.into_iter().collect();
        nodes.sort();
        nodes.dedup();
        let mut graph = WordGraph::empty(nodes, 1);
        for (a, b, w) in edges {
            let (Some(i), Some(j)) = (graph.index_of(a), graph.index_of(b)) else {
                panic!("edge endpoint not in node list: {a}–{b}");
            };
            graph.add_cooccurrence(i, j, *w);
        }
        graph
    }

    /// Graph over `n` nodes named `n000`, `n001`, … so that index order equals
    /// stem order. Convenient for tests and synthetic benchmarks.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let nodes: Vec<Stem> = (0..n).map(|i| Stem::new(format!("n{i:03}"))).collect();
        let mut graph = WordGraph::empty(nodes, 1);
        for &(i, j, w) in edges {
            assert!(i < n && j < n, "edge ({i}, {j}) out of range for {n} nodes");
            graph.add_cooccurrence(i, j, w);
        }
        graph
    }

    fn add_cooccurrence(&mut self, i: usize, j: usize, weight: f64) {
        if i == j {
            return;
        }
        let key = (i.min(j), i.max(j));
        let edge = self.edges.entry(key).or_insert(Edge {
            kind: EdgeKind::Cooccurrence,
            weight: 0.0,
            count: 0,
        });
        edge.weight += weight;
        edge.count += 1;
    }

    pub fn nodes(&self) -> &[Stem] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, stem: &Stem) -> Option<usize> {
        self.nodes.binary_search(stem).ok()
    }

    /// Edges in lexicographic `(stem_a, stem_b)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Edge)> + '_ {
        self.edges.iter().map(|(&(a, b), e)| (a, b, e))
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&Edge> {
        self.edges.get(&(a.min(b), a.max(b)))
    }

    /// E_t
    pub fn cooccurrence_edge_count(&self) -> usize {
        self.edges
            .values()
            .filter(|e| e.kind == EdgeKind::Cooccurrence)
            .count()
    }

    /// E_v
    pub fn virtual_edge_count(&self) -> usize {
        self.edges.values().filter(|e| e.kind == EdgeKind::Virtual).count()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn virtual_fraction(&self) -> f64 {
        self.virtual_fraction
    }

    /// Descriptor of the embedding configuration used to add virtual edges.
    pub fn embedding(&self) -> Option<&str> {
        self.embedding.as_deref()
    }

    pub fn adjacency(&self) -> Adjacency {
        let mut neighbors = vec![Vec::new(); self.nodes.len()];
        for (&(a, b), edge) in &self.edges {
            neighbors[a].push((b, edge.weight));
            neighbors[b].push((a, edge.weight));
        }
        for list in &mut neighbors {
            list.sort_by_key(|&(n, _)| n);
        }
        Adjacency { neighbors }
    }

    /// Copy with every virtual edge removed and `P` reset to zero.
    pub fn without_virtual_edges(&self) -> WordGraph {
        WordGraph {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .filter(|(_, e)| e.kind == EdgeKind::Cooccurrence)
                .map(|(k, e)| (*k, *e))
                .collect(),
            window: self.window,
            virtual_fraction: 0.0,
            embedding: None,
        }
    }

    /// All unordered pairs of distinct nodes that share no edge.
    pub fn non_adjacent_pairs(&self) -> Vec<StemPair> {
        let n = self.nodes.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if !self.edges.contains_key(&(a, b)) {
                    out.push(StemPair {
                        first: self.nodes[a].clone(),
                        second: self.nodes[b].clone(),
                    });
                }
            }
        }
        out
    }

    /// Text dump: a header with E_t, E_v, w and P, then one
    /// `stem_a<TAB>stem_b<TAB>kind<TAB>weight` line per edge in lexicographic
    /// order, then one line per isolated node.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "E_t={} E_v={} w={} P={}",
            self.cooccurrence_edge_count(),
            self.virtual_edge_count(),
            self.window,
            self.virtual_fraction
        );
        for (&(a, b), e) in &self.edges {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                self.nodes[a],
                self.nodes[b],
                e.kind.as_str(),
                e.weight
            );
        }
        let adjacency = self.adjacency();
        for (i, stem) in self.nodes.iter().enumerate() {
            if adjacency.degree(i) == 0 {
                let _ = writeln!(out, "{stem}");
            }
        }
        out
    }

    /// Parses the output of [`WordGraph::to_dump`]. Co-occurrence counts are
    /// not part of the dump and come back as the rounded weight.
    pub fn from_dump(text: &str) -> Result<WordGraph, NetworkError> {
        let err = |line: usize, message: String| NetworkError::Dump { line, message };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| err(1, "missing header".into()))?;
        let mut fields: HashMap<&str, &str> = HashMap::new();
        for part in header.split_whitespace() {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| err(1, format!("bad header field `{part}`")))?;
            fields.insert(k, v);
        }
        let field = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| err(1, format!("header lacks `{k}`")))
        };
        let window: usize = field("w")?
            .parse()
            .map_err(|e| err(1, format!("bad w: {e}")))?;
        let fraction: f64 = field("P")?
            .parse()
            .map_err(|e| err(1, format!("bad P: {e}")))?;

        let mut raw_edges = Vec::new();
        let mut nodes = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            match parts.as_slice() {
                [stem] => nodes.push(Stem::new(*stem)),
                [a, b, kind, weight] => {
                    let kind: EdgeKind = kind.parse().map_err(|m| err(lineno, m))?;
                    let weight: f64 = weight
                        .parse()
                        .map_err(|e| err(lineno, format!("bad weight: {e}")))?;
                    nodes.push(Stem::new(*a));
                    nodes.push(Stem::new(*b));
                    raw_edges.push((Stem::new(*a), Stem::new(*b), kind, weight));
                }
                _ => return Err(err(lineno, "expected 1 or 4 tab-separated fields".into())),
            }
        }
        nodes.sort();
        nodes.dedup();
        let mut graph = WordGraph::empty(nodes, window);
        graph.virtual_fraction = fraction;
        for (a, b, kind, weight) in raw_edges {
            let i = graph.index_of(&a).expect("node collected above");
            let j = graph.index_of(&b).expect("node collected above");
            let count = match kind {
                EdgeKind::Cooccurrence => weight.round() as u32,
                EdgeKind::Virtual => 0,
            };
            graph
                .edges
                .insert((i.min(j), i.max(j)), Edge { kind, weight, count });
        }
        Ok(graph)
    }
}

impl fmt::Display for WordGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dump())
    }
}

/// Builds the co-occurrence network of `sentences` for window length `window`.
/// Windows never cross sentence boundaries.
pub fn build_cooccurrence_from_sentences(
    sentences: &[Vec<Stem>],
    window: usize,
) -> Result<WordGraph, NetworkError> {
    if window == 0 {
        return Err(NetworkError::Window(window));
    }
    let mut nodes: Vec<Stem> = sentences.iter().flatten().cloned().collect();
    if nodes.is_empty() {
        return Err(NetworkError::EmptyDocument);
    }
    nodes.sort();
    nodes.dedup();
    let mut graph = WordGraph::empty(nodes, window);
    for sentence in sentences {
        let ids: Vec<usize> = sentence
            .iter()
            .map(|s| graph.index_of(s).expect("every token is a node"))
            .collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in ids.iter().skip(i + 1).take(window) {
                graph.add_cooccurrence(a, b, 1.0);
            }
        }
    }
    Ok(graph)
}

pub fn build_cooccurrence(doc: &ProcessedDocument, window: usize) -> Result<WordGraph, NetworkError> {
    build_cooccurrence_from_sentences(&doc.stem_sentences(), window)
}

/// `round(P · E_t)` with halves rounded up.
pub fn virtual_edge_target(fraction: f64, cooccurrence_edges: usize) -> usize {
    let exact = fraction * cooccurrence_edges as f64;
    // Absorb representation error so that e.g. 0.15 * 10 rounds to 2.
    (exact + 0.5 + 1e-9 * exact.max(1.0)).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EnrichReport {
    pub requested: usize,
    pub added: usize,
    /// Candidate pairs dropped because a stem lacked a usable vector.
    pub skipped_missing: usize,
}

impl EnrichReport {
    pub fn shortfall(&self) -> usize {
        self.requested - self.added
    }
}

/// Ranks every non-adjacent pair of `graph`, keeping the best `limit`.
pub fn rank_virtual_candidates(graph: &WordGraph, index: &SimilarityIndex, limit: usize) -> RankedPairs {
    let candidates = graph.non_adjacent_pairs();
    top_similar_pairs(&candidates, limit, index)
}

/// Adds the first `round(P · E_t)` pairs of `ranked` as virtual edges.
/// `ranked` must come from [`rank_virtual_candidates`] on the same graph.
pub fn enrich_with_ranked(
    graph: &WordGraph,
    fraction: f64,
    ranked: &RankedPairs,
    embedding: &str,
) -> Result<(WordGraph, EnrichReport), NetworkError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(NetworkError::Fraction(fraction));
    }
    let existing = graph.virtual_edge_count();
    if existing > 0 {
        return Err(NetworkError::AlreadyEnriched(existing));
    }
    let requested = virtual_edge_target(fraction, graph.cooccurrence_edge_count());
    let mut out = graph.clone();
    if requested == 0 {
        return Ok((
            out,
            EnrichReport {
                requested,
                added: 0,
                skipped_missing: ranked.skipped,
            },
        ));
    }
    out.virtual_fraction = fraction;
    out.embedding = Some(embedding.to_string());
    let mut added = 0;
    for (pair, sim) in ranked.pairs.iter().take(requested) {
        let a = out.index_of(&pair.first).expect("candidate stems are graph nodes");
        let b = out.index_of(&pair.second).expect("candidate stems are graph nodes");
        let key = (a.min(b), a.max(b));
        debug_assert!(!out.edges.contains_key(&key));
        out.edges.insert(
            key,
            Edge {
                kind: EdgeKind::Virtual,
                weight: sim.max(MIN_VIRTUAL_WEIGHT),
                count: 0,
            },
        );
        added += 1;
    }
    let report = EnrichReport {
        requested,
        added,
        skipped_missing: ranked.skipped,
    };
    if report.shortfall() > 0 {
        log::warn!(
            "requested {requested} virtual edges, only {added} eligible pairs available"
        );
    }
    Ok((out, report))
}

/// Adds `round(P · E_t)` virtual edges between the most similar non-adjacent stems.
pub fn enrich(
    graph: &WordGraph,
    fraction: f64,
    index: &SimilarityIndex,
    embedding: &str,
) -> Result<(WordGraph, EnrichReport), NetworkError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(NetworkError::Fraction(fraction));
    }
    let requested = virtual_edge_target(fraction, graph.cooccurrence_edge_count());
    let ranked = if requested == 0 {
        RankedPairs::default()
    } else {
        rank_virtual_candidates(graph, index, requested)
    };
    enrich_with_ranked(graph, fraction, &ranked, embedding)
}
