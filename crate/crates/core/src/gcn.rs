//! Parameter-free, relation-weighted single-layer propagation.
//!
//! For supernode `i` with initial state `h⁰ᵢ` and summary-graph edges to
//! anchors `a` under relations `r`:
//!
//! ```text
//! h¹ᵢ = (h⁰ᵢ + Σ_(a,r) w_r · vec(a)) / (1 + #edges(i))
//! ```
//!
//! With one incident relation this is exactly the per-relation neighbour
//! average; with several, every edge counts once in the denominator.

use crate::embedding::EntityTable;
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::rcnn::RelationWeights;
use crate::summary::SummaryGraph;

/// Rows ordered by supernode id.
pub type EmbeddingMatrix = Matrix;

pub fn propagate(
    summary: &SummaryGraph,
    inits: &[Vec<f64>],
    anchors: &EntityTable,
    weights: &RelationWeights,
) -> Result<EmbeddingMatrix> {
    if inits.len() != summary.len() {
        return Err(Error::Shape(format!(
            "{} initial states for {} supernodes",
            inits.len(),
            summary.len()
        )));
    }
    let dim = anchors.dim();
    let mut out = Matrix::zeros(summary.len(), dim);
    for (i, edges) in summary.incident_edges().iter().enumerate() {
        if inits[i].len() != dim {
            return Err(Error::Shape(format!(
                "supernode {i}: initial state has {} values, expected {dim}",
                inits[i].len()
            )));
        }
        let row = out.row_mut(i);
        row.copy_from_slice(&inits[i]);
        for e in edges {
            let w = weights.get(e.relation).ok_or_else(|| {
                Error::Config(format!("no weight for relation {}", e.relation))
            })?;
            for (acc, v) in row.iter_mut().zip(anchors.get(e.anchor)) {
                *acc += w * v;
            }
        }
        let denom = 1.0 + edges.len() as f64;
        row.iter_mut().for_each(|v| *v /= denom);
    }
    Ok(out)
}
