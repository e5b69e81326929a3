use serde::Serialize;

use crate::diagnostics::margins::MarginSnapshot;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

pub const DEFAULT_WEIGHT_TOL: f64 = 1e-8;
pub const DEFAULT_MARGIN_TOL: f64 = 1e-2;

/// Examples whose weight persists or whose margin sits at the minimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportVectorReport {
    /// Union of the two criteria, ascending.
    pub support_set: Vec<usize>,
    /// `{ i : w_{T+1}(i) > weight_tol }`
    pub by_weight: Vec<usize>,
    /// `{ i : β_T(i) - min margin < margin_tol }`
    pub by_margin: Vec<usize>,
    pub criteria_agree: bool,
    pub final_weights: Vec<f64>,
    pub margin_distances: Vec<f64>,
    pub min_margin: f64,
    /// `Σ_i w_{T+1}(i) β_T(i)`; tends to the minimum margin.
    pub weighted_margin: f64,
    pub positives: usize,
    pub negatives: usize,
}

impl SupportVectorReport {
    pub fn weighted_margin_drift(&self) -> f64 {
        (self.weighted_margin - self.min_margin).abs()
    }

    pub fn has_both_labels(&self) -> bool {
        self.positives > 0 && self.negatives > 0
    }
}

pub fn support_vectors(
    traj: &Trajectory,
    snapshot: &MarginSnapshot,
    labels: &[i8],
    weight_tol: f64,
    margin_tol: f64,
) -> Result<SupportVectorReport> {
    let w = traj.final_weight.as_slice();
    let m = w.len();
    if snapshot.beta.len() != m || labels.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: snapshot.beta.len().min(labels.len()),
        });
    }
    let margin_distances: Vec<f64> = snapshot
        .beta
        .iter()
        .map(|b| b - snapshot.min_margin)
        .collect();
    let by_weight: Vec<usize> = (0..m).filter(|&i| w[i] > weight_tol).collect();
    let by_margin: Vec<usize> = (0..m)
        .filter(|&i| margin_distances[i] < margin_tol)
        .collect();
    let support_set: Vec<usize> = (0..m)
        .filter(|&i| w[i] > weight_tol || margin_distances[i] < margin_tol)
        .collect();
    let weighted_margin = w.iter().zip(&snapshot.beta).map(|(a, b)| a * b).sum();
    let positives = support_set.iter().filter(|&&i| labels[i] == 1).count();
    Ok(SupportVectorReport {
        criteria_agree: by_weight == by_margin,
        negatives: support_set.len() - positives,
        positives,
        support_set,
        by_weight,
        by_margin,
        final_weights: w.to_vec(),
        margin_distances,
        min_margin: snapshot.min_margin,
        weighted_margin,
    })
}
