use serde::{Deserialize, Serialize};

use super::{require_nodes, CentralityError, CentralityVector, MeasureId};
use crate::network::WordGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorParams {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EigenvectorParams {
    fn default() -> Self {
        EigenvectorParams {
            tolerance: 1e-12,
            max_iterations: 100_000,
        }
    }
}

/// Principal eigenvector of the adjacency matrix, scaled to unit 1-norm.
///
/// Iterates on `A + I`: the shift leaves eigenvectors unchanged and removes
/// the period-2 oscillation power iteration shows on bipartite graphs.
pub fn eigenvector(
    graph: &WordGraph,
    params: &EigenvectorParams,
    weighted: bool,
) -> Result<CentralityVector, CentralityError> {
    require_nodes(graph)?;
    if graph.edge_count() == 0 {
        return Err(CentralityError::NoEdges);
    }
    if !params.tolerance.is_finite() || params.tolerance <= 0.0 || params.max_iterations == 0 {
        return Err(CentralityError::InvalidParams(
            "eigenvector tolerance and max_iterations must be positive".into(),
        ));
    }
    let adj = graph.adjacency();
    let n = adj.len();
    let mut x = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iterations {
        for (i, slot) in next.iter_mut().enumerate() {
            let sum: f64 = adj
                .neighbors(i)
                .iter()
                .map(|&(j, w)| if weighted { w * x[j] } else { x[j] })
                .sum();
            *slot = x[i] + sum;
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if residual < params.tolerance {
            let measure = if weighted {
                MeasureId::EigenvectorWeighted
            } else {
                MeasureId::Eigenvector
            };
            return Ok(CentralityVector::new(measure, graph, x));
        }
    }
    Err(CentralityError::NoConvergence {
        iterations: params.max_iterations,
        residual,
    })
}
