//! Independent reference implementations and generators shared by the
//! integration and acceptance suites. Nothing here calls into the library's
//! algorithms; the oracles work on dense matrices or explicit enumeration.

#![allow(dead_code)]

use std::collections::BTreeSet;

use kwgraph::corpus::RawDocument;
use kwgraph::network::WordGraph;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random undirected graph on `n` nodes with edge probability `p`. When
/// `connected`, a random spanning tree is laid down first. Weights are drawn
/// from `weights` (use `&[1.0]` for unit weights).
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, connected: bool, weights: &[f64]) -> WordGraph {
    let mut edges = BTreeSet::new();
    if connected && n > 1 {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for i in 1..n {
            let parent = order[rng.gen_range(0..i)];
            let child = order[i];
            edges.insert((parent.min(child), parent.max(child)));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.insert((a, b));
            }
        }
    }
    let weighted: Vec<_> = edges
        .into_iter()
        .map(|(a, b)| (a, b, *weights.choose(rng).unwrap()))
        .collect();
    WordGraph::from_index_edges(n, &weighted)
}

/// Dense symmetric weight matrix (0 where no edge).
pub fn weight_matrix(graph: &WordGraph) -> Vec<Vec<f64>> {
    let n = graph.node_count();
    let mut m = vec![vec![0.0; n]; n];
    for (a, b, e) in graph.edges() {
        m[a][b] = e.weight;
        m[b][a] = e.weight;
    }
    m
}

fn is_edge(m: &[Vec<f64>], a: usize, b: usize) -> bool {
    m[a][b] > 0.0
}

/// Betweenness by listing every simple path between every pair, keeping the
/// shortest ones, and counting those through each node.
pub fn brute_force_betweenness(graph: &WordGraph, weighted: bool) -> Vec<f64> {
    let m = weight_matrix(graph);
    let n = m.len();
    let length = |a: usize, b: usize| if weighted { 1.0 / m[a][b] } else { 1.0 };
    let mut scores = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let mut paths: Vec<(f64, Vec<usize>)> = Vec::new();
            let mut stack = vec![(vec![s], 0.0)];
            while let Some((path, len)) = stack.pop() {
                let last = *path.last().unwrap();
                if last == t {
                    paths.push((len, path));
                    continue;
                }
                for next in 0..n {
                    if is_edge(&m, last, next) && !path.contains(&next) {
                        let mut p = path.clone();
                        p.push(next);
                        stack.push((p, len + length(last, next)));
                    }
                }
            }
            if paths.is_empty() {
                continue;
            }
            let best = paths.iter().map(|(l, _)| *l).fold(f64::INFINITY, f64::min);
            let shortest: Vec<&Vec<usize>> = paths
                .iter()
                .filter(|(l, _)| (l - best).abs() <= 1e-9 * best.max(1.0))
                .map(|(_, p)| p)
                .collect();
            let total = shortest.len() as f64;
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = shortest.iter().filter(|p| p.contains(&v)).count() as f64;
                scores[v] += through / total;
            }
        }
    }
    scores
}

/// All-pairs distances by Floyd–Warshall.
pub fn floyd_warshall(graph: &WordGraph, weighted: bool) -> Vec<Vec<f64>> {
    let m = weight_matrix(graph);
    let n = m.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for a in 0..n {
        d[a][a] = 0.0;
        for b in 0..n {
            if is_edge(&m, a, b) {
                d[a][b] = if weighted { 1.0 / m[a][b] } else { 1.0 };
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub fn reference_closeness(graph: &WordGraph, weighted: bool) -> Vec<f64> {
    let d = floyd_warshall(graph, weighted);
    let n = d.len();
    (0..n)
        .map(|i| {
            n as f64
                * (0..n)
                    .filter(|&j| j != i && d[i][j].is_finite())
                    .map(|j| 1.0 / d[i][j])
                    .sum::<f64>()
        })
        .collect()
}

/// PageRank as the solution of `(I − γ M) π = β 1` with `β = (1 − γ)/N`,
/// where column `j` of `M` spreads node `j`'s rank over its neighbors (or over
/// every node when `j` has no edges).
pub fn dense_pagerank(graph: &WordGraph, gamma: f64, weighted: bool) -> Vec<f64> {
    let w = weight_matrix(graph);
    let n = w.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let col: Vec<f64> = (0..n)
            .map(|i| if w[i][j] > 0.0 { if weighted { w[i][j] } else { 1.0 } } else { 0.0 })
            .collect();
        let total: f64 = col.iter().sum();
        for i in 0..n {
            m[(i, j)] = if total > 0.0 { col[i] / total } else { 1.0 / n as f64 };
        }
    }
    let a = DMatrix::<f64>::identity(n, n) - m * gamma;
    let b = DVector::<f64>::from_element(n, (1.0 - gamma) / n as f64);
    let x = a.lu().solve(&b).expect("I - γM is nonsingular for γ < 1");
    x.iter().copied().collect()
}

/// Principal eigenvector from a dense symmetric eigensolver, scaled to unit
/// 1-norm with nonnegative entries.
pub fn dense_eigenvector(graph: &WordGraph, weighted: bool) -> Vec<f64> {
    let w = weight_matrix(graph);
    let n = w.len();
    let a = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if w[i][j] > 0.0 {
            if weighted {
                w[i][j]
            } else {
                1.0
            }
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(a);
    let (top, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let v = eig.eigenvectors.column(top);
    let sum: f64 = v.iter().sum();
    v.iter().map(|x| x / sum).collect()
}

/// Accessibility by listing every node sequence `(i, j1, …, jh)` of distinct,
/// consecutively adjacent nodes, and weighting it by the product of
/// `1 / (unvisited neighbors)` along the way. Truncated walks never appear in
/// the listing, so their mass is dropped. No reachable end node → 0.
pub fn exhaustive_accessibility(graph: &WordGraph, start: usize, h: usize) -> f64 {
    let m = weight_matrix(graph);
    let n = m.len();
    let mut ends = vec![0.0; n];
    let mut sequences: Vec<Vec<usize>> = vec![vec![start]];
    for _ in 0..h {
        let mut longer = Vec::new();
        for seq in &sequences {
            let last = *seq.last().unwrap();
            for next in 0..n {
                if is_edge(&m, last, next) && !seq.contains(&next) {
                    let mut s = seq.clone();
                    s.push(next);
                    longer.push(s);
                }
            }
        }
        sequences = longer;
    }
    for seq in &sequences {
        let mut prob = 1.0;
        for step in 0..h {
            let here = seq[step];
            let visited = &seq[..=step];
            let open = (0..n)
                .filter(|&x| is_edge(&m, here, x) && !visited.contains(&x))
                .count();
            prob /= open as f64;
        }
        ends[*seq.last().unwrap()] += prob;
    }
    let positive: Vec<f64> = ends.into_iter().filter(|&p| p > 0.0).collect();
    if positive.is_empty() {
        return 0.0;
    }
    (-positive.iter().map(|p| p * p.ln()).sum::<f64>()).exp()
}

pub fn plain_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (nu * nv)
}

/// Mean of all pairwise occurrence cosines, by two nested loops.
pub fn nested_loop_bert_sim2(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut sum = 0.0;
    for u in a {
        for v in b {
            sum += plain_cosine(u, v);
        }
    }
    sum / (a.len() * b.len()) as f64
}

/// Ranking by descending score, ties by ascending index (node order equals
/// stem order for graphs built with `from_index_edges`).
pub fn argsort_desc(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

const SYLLABLES: [&str; 12] = ["ka", "lo", "mi", "tu", "re", "sa", "po", "ni", "ve", "du", "zo", "fa"];

/// Pronounceable pseudo-word, distinct for distinct `i`.
pub fn pseudo_word(i: usize) -> String {
    let mut w = String::from("q");
    let mut x = i;
    loop {
        w.push_str(SYLLABLES[x % SYLLABLES.len()]);
        x /= SYLLABLES.len();
        if x == 0 {
            break;
        }
    }
    w.push('x');
    w
}

/// Synthetic document whose `gold` words are planted with high frequency
/// among `filler` rarely used words.
pub fn planted_document(rng: &mut ChaCha8Rng, id: usize, gold: usize, filler: usize) -> RawDocument {
    let vocab_offset = id * 1000;
    let gold_words: Vec<String> = (0..gold).map(|i| pseudo_word(vocab_offset + i)).collect();
    let filler_words: Vec<String> = (0..filler).map(|i| pseudo_word(vocab_offset + 100 + i)).collect();
    let mut sentences = Vec::new();
    for _ in 0..12 {
        let len = rng.gen_range(6..12);
        let words: Vec<&str> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.45) {
                    gold_words.choose(rng).unwrap().as_str()
                } else {
                    filler_words.choose(rng).unwrap().as_str()
                }
            })
            .collect();
        sentences.push(format!("{}.", words.join(" ")));
    }
    RawDocument {
        id: format!("doc{id:03}"),
        text: sentences.join(" "),
        gold_keyphrases: gold_words,
    }
}

/// Random sentences over a small vocabulary, for graph-construction properties.
pub fn random_sentences(rng: &mut ChaCha8Rng, vocab: usize) -> Vec<Vec<kwgraph::Stem>> {
    let count = rng.gen_range(1..6);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..15);
            (0..len)
                .map(|_| kwgraph::Stem::new(pseudo_word(rng.gen_range(0..vocab))))
                .collect()
        })
        .collect()
}
