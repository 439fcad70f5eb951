//! Shortest-path measures: Brandes betweenness and harmonic closeness.
//!
//! Unweighted searches are breadth-first; weighted searches run Dijkstra with
//! edge length `1 / weight`. Both settle nodes in `(distance, index)` order,
//! so on a unit-weight graph they visit nodes, count paths and accumulate
//! dependencies in exactly the same sequence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{require_nodes, CentralityError, CentralityVector, MeasureId};
use crate::network::{Adjacency, WordGraph};

/// Relative slack under which two weighted path lengths count as equal.
const PATH_LENGTH_TOLERANCE: f64 = 1e-10;

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= PATH_LENGTH_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Single-source shortest-path DAG.
struct PathDag {
    /// Settled nodes in nondecreasing distance.
    order: Vec<usize>,
    dist: Vec<f64>,
    /// Number of shortest paths from the source.
    sigma: Vec<f64>,
    preds: Vec<Vec<usize>>,
}

impl PathDag {
    fn new(n: usize, source: usize) -> Self {
        let mut dag = PathDag {
            order: Vec::with_capacity(n),
            dist: vec![f64::INFINITY; n],
            sigma: vec![0.0; n],
            preds: vec![Vec::new(); n],
        };
        dag.dist[source] = 0.0;
        dag.sigma[source] = 1.0;
        dag
    }
}

fn bfs(adj: &Adjacency, source: usize) -> PathDag {
    let mut dag = PathDag::new(adj.len(), source);
    let mut frontier = vec![source];
    dag.order.push(source);
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &v in &frontier {
            let reach = dag.dist[v] + 1.0;
            for &(w, _) in adj.neighbors(v) {
                if dag.dist[w].is_infinite() {
                    dag.dist[w] = reach;
                    next.push(w);
                }
                if dag.dist[w] == reach {
                    dag.sigma[w] += dag.sigma[v];
                    dag.preds[w].push(v);
                }
            }
        }
        next.sort_unstable();
        dag.order.extend_from_slice(&next);
        frontier = next;
    }
    dag
}

#[derive(PartialEq)]
struct Queued {
    dist: f64,
    node: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (dist, node).
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &Adjacency, source: usize) -> PathDag {
    let n = adj.len();
    let mut dag = PathDag::new(n, source);
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    heap.push(Queued {
        dist: 0.0,
        node: source,
    });
    while let Some(Queued { node: v, .. }) = heap.pop() {
        if settled[v] {
            continue;
        }
        settled[v] = true;
        dag.order.push(v);
        for &(w, weight) in adj.neighbors(v) {
            if settled[w] {
                continue;
            }
            let alt = dag.dist[v] + 1.0 / weight;
            let current = dag.dist[w];
            if current.is_infinite() || (alt < current && !same_length(alt, current)) {
                dag.dist[w] = alt;
                dag.sigma[w] = dag.sigma[v];
                dag.preds[w].clear();
                dag.preds[w].push(v);
                heap.push(Queued { dist: alt, node: w });
            } else if same_length(alt, current) {
                dag.sigma[w] += dag.sigma[v];
                dag.preds[w].push(v);
            }
        }
    }
    dag
}

fn shortest_paths(adj: &Adjacency, source: usize, weighted: bool) -> PathDag {
    if weighted {
        dijkstra(adj, source)
    } else {
        bfs(adj, source)
    }
}

fn source_dependencies(adj: &Adjacency, source: usize, weighted: bool) -> Vec<f64> {
    let dag = shortest_paths(adj, source, weighted);
    let mut delta = vec![0.0; adj.len()];
    for &w in dag.order.iter().rev() {
        let coeff = (1.0 + delta[w]) / dag.sigma[w];
        for &v in &dag.preds[w] {
            delta[v] += dag.sigma[v] * coeff;
        }
    }
    delta[source] = 0.0;
    delta
}

/// Brandes betweenness: for every node, the sum over unordered endpoint pairs
/// `{s, t}` (both different from it) of the share of shortest `s`–`t` paths
/// passing through it. Unreachable pairs contribute nothing.
pub fn betweenness(graph: &WordGraph, weighted: bool) -> Result<CentralityVector, CentralityError> {
    require_nodes(graph)?;
    let adj = graph.adjacency();
    let n = adj.len();
    let per_source: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| source_dependencies(&adj, s, weighted))
        .collect();
    // Serial reduction in source order keeps results independent of threading.
    let mut scores = vec![0.0; n];
    for delta in &per_source {
        for (acc, d) in scores.iter_mut().zip(delta) {
            *acc += d;
        }
    }
    scores.iter_mut().for_each(|x| *x /= 2.0);
    let measure = if weighted {
        MeasureId::BetweennessWeighted
    } else {
        MeasureId::Betweenness
    };
    Ok(CentralityVector::new(measure, graph, scores))
}

/// Harmonic closeness `C_i = N Σ_{j≠i} 1 / d_ij`, unreachable nodes adding 0.
pub fn closeness(graph: &WordGraph, weighted: bool) -> Result<CentralityVector, CentralityError> {
    require_nodes(graph)?;
    let adj = graph.adjacency();
    let n = adj.len();
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|s| {
            let dag = shortest_paths(&adj, s, weighted);
            let inverse_sum: f64 = dag
                .dist
                .iter()
                .enumerate()
                .filter(|&(j, d)| j != s && d.is_finite())
                .map(|(_, d)| 1.0 / d)
                .sum();
            n as f64 * inverse_sum
        })
        .collect();
    let measure = if weighted {
        MeasureId::ClosenessWeighted
    } else {
        MeasureId::Closeness
    };
    Ok(CentralityVector::new(measure, graph, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn complete(n: usize) -> WordGraph {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b, 1.0));
            }
        }
        WordGraph::from_index_edges(n, &edges)
    }

    #[test]
    fn path_betweenness() {
        let g = WordGraph::from_index_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(betweenness(&g, false).unwrap().values(), vec![0.0, 1.0, 0.0]);
        assert_eq!(betweenness(&g, true).unwrap().values(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn complete_graph_has_no_mediators() {
        for weighted in [false, true] {
            assert!(betweenness(&complete(4), weighted).unwrap().values().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn square_splits_paths() {
        // 4-cycle: each node mediates half of one opposite pair.
        let g = WordGraph::from_index_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        for x in betweenness(&g, false).unwrap().values() {
            assert_abs_diff_eq!(x, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn heavy_edges_are_short() {
        // Triangle where the 0-2 edge is light (long): path 0-1-2 wins when weighted.
        let g = WordGraph::from_index_edges(3, &[(0, 1, 4.0), (1, 2, 4.0), (0, 2, 1.0)]);
        assert_eq!(betweenness(&g, false).unwrap().values(), vec![0.0, 0.0, 0.0]);
        assert_eq!(betweenness(&g, true).unwrap().values(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn closeness_of_path() {
        let g = WordGraph::from_index_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let v = closeness(&g, false).unwrap().values();
        assert_eq!(v, vec![4.5, 6.0, 4.5]);
    }

    #[test]
    fn closeness_ignores_unreachable() {
        let g = WordGraph::from_index_edges(2, &[]);
        assert_eq!(closeness(&g, false).unwrap().values(), vec![0.0, 0.0]);
        let v = closeness(&complete(5), true).unwrap().values();
        assert!(v.iter().all(|&x| x == v[0]));
    }

    #[test]
    fn weighted_closeness_uses_inverse_weight() {
        let g = WordGraph::from_index_edges(2, &[(0, 1, 4.0)]);
        assert_eq!(closeness(&g, true).unwrap().values(), vec![8.0, 8.0]);
    }
}
