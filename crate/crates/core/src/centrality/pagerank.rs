use serde::{Deserialize, Serialize};

use super::{require_nodes, CentralityError, CentralityVector, MeasureId};
use crate::network::WordGraph;

/// Power-iteration settings for `π_i = γ Σ_j a_ij π_j / k_j + β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankParams {
    /// γ
    pub damping: f64,
    /// β; `None` means `(1 − γ) / N`.
    pub teleport: Option<f64>,
    /// Stop once the largest per-node change drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            teleport: None,
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

impl PageRankParams {
    fn validate(&self) -> Result<(), CentralityError> {
        let bad = |m: String| Err(CentralityError::InvalidParams(m));
        if !(0.0..=1.0).contains(&self.damping) {
            return bad(format!("damping {} outside [0, 1]", self.damping));
        }
        if let Some(b) = self.teleport {
            if !(b >= 0.0 && b.is_finite()) {
                return bad(format!("teleport {b} must be a nonnegative number"));
            }
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return bad(format!("tolerance {} must be positive", self.tolerance));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        Ok(())
    }
}

/// PageRank by power iteration. Nodes without edges spread their mass evenly
/// over all nodes. The result is scaled to sum to 1; with the default teleport
/// it already does.
pub fn pagerank(
    graph: &WordGraph,
    params: &PageRankParams,
    weighted: bool,
) -> Result<CentralityVector, CentralityError> {
    require_nodes(graph)?;
    params.validate()?;
    let adj = graph.adjacency();
    let n = adj.len();
    let nf = n as f64;
    let gamma = params.damping;
    let beta = params.teleport.unwrap_or((1.0 - gamma) / nf);

    // out_share[j] = 1 / k_j or 1 / s_j
    let out_share: Vec<f64> = (0..n)
        .map(|j| {
            let total = if weighted {
                adj.strength(j)
            } else {
                adj.degree(j) as f64
            };
            if total > 0.0 {
                1.0 / total
            } else {
                0.0
            }
        })
        .collect();

    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..params.max_iterations {
        let dangling: f64 = (0..n)
            .filter(|&j| out_share[j] == 0.0)
            .map(|j| rank[j])
            .sum();
        let spread = dangling / nf;
        for (i, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = adj
                .neighbors(i)
                .iter()
                .map(|&(j, w)| {
                    let a = if weighted { w } else { 1.0 };
                    a * rank[j] * out_share[j]
                })
                .sum();
            *slot = gamma * (inflow + spread) + beta;
        }
        residual = rank
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut rank, &mut next);
        if !residual.is_finite() {
            break;
        }
        if residual < params.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CentralityError::NoConvergence {
            iterations: params.max_iterations,
            residual,
        });
    }
    let total: f64 = rank.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(CentralityError::InvalidParams(
            "teleport and damping drive every score to zero".into(),
        ));
    }
    rank.iter_mut().for_each(|x| *x /= total);
    let measure = if weighted {
        MeasureId::PageRankWeighted
    } else {
        MeasureId::PageRank
    };
    Ok(CentralityVector::new(measure, graph, rank))
}
