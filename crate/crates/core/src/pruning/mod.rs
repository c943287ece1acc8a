//! Redundant-layer selection from per-layer activation dumps.
//!
//! Each layer is scored with the Block Influence measure used by ShortGPT:
//! one minus the mean cosine similarity between a token's hidden state
//! entering the layer and leaving it. Low influence means the layer barely
//! changes its input and is a pruning candidate.

mod manifest;


use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use manifest::{load_manifest, parse_manifest, write_matrix, ManifestEntry};

#[derive(Debug, thiserror::Error)]
pub enum PruneError {
    #[error("layer {layer}: {message}")]
    BadDump { layer: usize, message: String },
    #[error("layer {0}: every row has zero norm")]
    DegenerateDump(usize),
    #[error("need more than {k} candidate layers, have {available}")]
    NotEnoughCandidates { k: usize, available: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("manifest line {line}: {message}")]
    BadManifest { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Option<Matrix> {
        (rows * cols == data.len()).then_some(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Option<Matrix> {
        let cols = rows.first()?.len();
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// Hidden states entering and leaving one layer for the same token positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationDump {
    layer_index: usize,
    hidden_in: Matrix,
    hidden_out: Matrix,
}

impl ActivationDump {
    pub fn new(layer_index: usize, hidden_in: Matrix, hidden_out: Matrix) -> Result<Self, PruneError> {
        let bad = |message: String| PruneError::BadDump {
            layer: layer_index,
            message,
        };
        if (hidden_in.rows, hidden_in.cols) != (hidden_out.rows, hidden_out.cols) {
            return Err(bad(format!(
                "input is {}x{}, output is {}x{}",
                hidden_in.rows, hidden_in.cols, hidden_out.rows, hidden_out.cols
            )));
        }
        if hidden_in.rows == 0 || hidden_in.cols == 0 {
            return Err(bad("empty matrix".into()));
        }
        if hidden_in.data.iter().chain(&hidden_out.data).any(|v| !v.is_finite()) {
            return Err(bad("non-finite value".into()));
        }
        Ok(ActivationDump {
            layer_index,
            hidden_in,
            hidden_out,
        })
    }

    pub fn layer_index(&self) -> usize {
        self.layer_index
    }

    pub fn hidden_in(&self) -> &Matrix {
        &self.hidden_in
    }

    pub fn hidden_out(&self) -> &Matrix {
        &self.hidden_out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerScore {
    pub layer_index: usize,
    pub influence: f64,
}

/// Cosine of two rows, or `None` when either has zero norm.
fn row_cosine(a: &[f32], b: &[f32]) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

/// `1 - mean_r cos(in[r], out[r])` over rows where both vectors are non-zero.
pub fn block_influence(dump: &ActivationDump) -> Result<LayerScore, PruneError> {
    let mut sum = 0.0;
    let mut used = 0usize;
    for r in 0..dump.hidden_in.rows {
        match row_cosine(dump.hidden_in.row(r), dump.hidden_out.row(r)) {
            Some(c) => {
                sum += c;
                used += 1;
            }
            None => log::debug!("layer {}: skipping zero-norm row {r}", dump.layer_index),
        }
    }
    if used == 0 {
        return Err(PruneError::DegenerateDump(dump.layer_index));
    }
    if used < dump.hidden_in.rows {
        log::warn!(
            "layer {}: skipped {} zero-norm row(s)",
            dump.layer_index,
            dump.hidden_in.rows - used
        );
    }
    Ok(LayerScore {
        layer_index: dump.layer_index,
        influence: 1.0 - sum / used as f64,
    })
}

/// Scores sorted by influence, lowest first, ties by layer index.
pub fn rank_scores(scores: &[LayerScore]) -> Vec<LayerScore> {
    let mut ranked = scores.to_vec();
    ranked.sort_by(|a, b| {
        a.influence
            .total_cmp(&b.influence)
            .then(a.layer_index.cmp(&b.layer_index))
    });
    ranked
}

/// The first and last layer of the scored stack.
pub fn default_protected(scores: &[LayerScore]) -> BTreeSet<usize> {
    let min = scores.iter().map(|s| s.layer_index).min();
    let max = scores.iter().map(|s| s.layer_index).max();
    min.into_iter().chain(max).collect()
}

/// The `k` least influential unprotected layers in ascending influence.
pub fn select_prune_layers(
    scores: &[LayerScore],
    k: usize,
    protected: &BTreeSet<usize>,
) -> Result<Vec<usize>, PruneError> {
    if k == 0 {
        return Err(PruneError::ZeroK);
    }
    let candidates: Vec<LayerScore> = scores
        .iter()
        .filter(|s| !protected.contains(&s.layer_index))
        .copied()
        .collect();
    if candidates.len() < k || scores.len() <= k {
        return Err(PruneError::NotEnoughCandidates {
            k,
            available: candidates.len(),
        });
    }
    Ok(rank_scores(&candidates)
        .into_iter()
        .take(k)
        .map(|s| s.layer_index)
        .collect())
}
