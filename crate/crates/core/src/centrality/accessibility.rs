//! Accessibility: the true diversity (exponential of the Shannon entropy) of
//! where a self-avoiding random walk of `h` steps ends up.
//!
//! A walker at a node moves to one of its not-yet-visited neighbors uniformly
//! at random. A walk that runs out of unvisited neighbors before `h` steps
//! ends early and its probability mass is dropped, so the end-node
//! probabilities may sum to less than one. A node from which no walk reaches
//! `h` steps has accessibility 0.

use super::{require_nodes, CentralityError, CentralityVector, MeasureId};
use crate::network::{Adjacency, WordGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessibilityLevel {
    One,
    Two,
}

impl AccessibilityLevel {
    pub fn steps(self) -> usize {
        match self {
            AccessibilityLevel::One => 1,
            AccessibilityLevel::Two => 2,
        }
    }
}

/// End-node probabilities of self-avoiding walks of exactly `steps` steps from
/// `start`, indexed by node. Also returns whether any walk ended early.
pub fn walk_distribution(adj: &Adjacency, start: usize, steps: usize) -> (Vec<f64>, bool) {
    let mut ends = vec![0.0; adj.len()];
    let mut visited = vec![false; adj.len()];
    let mut truncated = false;
    visited[start] = true;
    extend_walk(adj, start, steps, 1.0, &mut visited, &mut ends, &mut truncated);
    (ends, truncated)
}

fn extend_walk(
    adj: &Adjacency,
    at: usize,
    remaining: usize,
    mass: f64,
    visited: &mut [bool],
    ends: &mut [f64],
    truncated: &mut bool,
) {
    if remaining == 0 {
        ends[at] += mass;
        return;
    }
    let open: Vec<usize> = adj
        .neighbors(at)
        .iter()
        .map(|&(n, _)| n)
        .filter(|&n| !visited[n])
        .collect();
    if open.is_empty() {
        *truncated = true;
        return;
    }
    let share = mass / open.len() as f64;
    for next in open {
        visited[next] = true;
        extend_walk(adj, next, remaining - 1, share, visited, ends, truncated);
        visited[next] = false;
    }
}

/// `exp(−Σ p log p)` over positive entries; 0 when there are none.
///
/// A complete (untruncated) distribution whose entries are all equal is
/// uniform over its support, so its diversity is the support size exactly.
fn true_diversity(probs: &[f64], truncated: bool) -> f64 {
    let mut support = probs.iter().copied().filter(|&p| p > 0.0);
    let Some(first) = support.next() else {
        return 0.0;
    };
    let mut count = 1usize;
    let mut uniform = true;
    for p in support {
        count += 1;
        uniform &= p == first;
    }
    if uniform && !truncated {
        return count as f64;
    }
    let entropy: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    entropy.exp()
}

pub fn accessibility(
    graph: &WordGraph,
    level: AccessibilityLevel,
) -> Result<CentralityVector, CentralityError> {
    require_nodes(graph)?;
    let adj = graph.adjacency();
    let values = (0..adj.len())
        .map(|i| {
            let (probs, truncated) = walk_distribution(&adj, i, level.steps());
            true_diversity(&probs, truncated)
        })
        .collect();
    let measure = match level {
        AccessibilityLevel::One => MeasureId::Accessibility1,
        AccessibilityLevel::Two => MeasureId::Accessibility2,
    };
    Ok(CentralityVector::new(measure, graph, values))
}
