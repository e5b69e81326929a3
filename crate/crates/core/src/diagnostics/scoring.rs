//! The averaged ensemble `(1/T) F_T(x)` on arbitrary inputs and its test error.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::stumps::StumpHypothesis;

/// `Σ_η (mass_η / rounds) · h^η(x)`.
pub fn score_with_mass(
    x: &[f64],
    alpha_mass: &[f64],
    rounds: u64,
    representatives: &[StumpHypothesis],
) -> f64 {
    let total: f64 = alpha_mass
        .iter()
        .zip(representatives)
        .filter(|(&mass, _)| mass != 0.0)
        .map(|(&mass, h)| mass * f64::from(h.predict(x)))
        .sum();
    total / rounds as f64
}

/// `(1/T) F_T(x)` for the trajectory's ensemble.
pub fn score(x: &[f64], traj: &Trajectory, representatives: &[StumpHypothesis]) -> Result<f64> {
    if representatives.len() != traj.alpha_mass.len() {
        return Err(Error::DimensionMismatch {
            expected: traj.alpha_mass.len(),
            actual: representatives.len(),
        });
    }
    if traj.is_empty() {
        return Err(Error::Domain("no rounds to score with".into()));
    }
    Ok(score_with_mass(
        x,
        &traj.alpha_mass,
        traj.len() as u64,
        representatives,
    ))
}

/// Per-row vote mass after `t` rounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreCheckpoint {
    pub t: u64,
    pub alpha_mass: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: u64,
    pub test_error: f64,
    /// Test points with score exactly zero, all counted as errors.
    pub zero_scores: usize,
}

/// Fraction of `test` misclassified by `sign(score)`; zero scores are errors.
pub fn test_error(
    test: &Dataset,
    alpha_mass: &[f64],
    rounds: u64,
    representatives: &[StumpHypothesis],
) -> (f64, usize) {
    let mut wrong = 0usize;
    let mut zeros = 0usize;
    for (x, &y) in test.rows().zip(test.labels()) {
        let s = score_with_mass(x, alpha_mass, rounds, representatives);
        if s == 0.0 {
            zeros += 1;
            wrong += 1;
        } else if (s > 0.0) != (y > 0) {
            wrong += 1;
        }
    }
    (wrong as f64 / test.len() as f64, zeros)
}

pub fn generalization_curve(
    checkpoints: &[ScoreCheckpoint],
    test: &Dataset,
    representatives: &[StumpHypothesis],
) -> Result<Vec<CurvePoint>> {
    if test.is_empty() {
        return Err(Error::InvalidDataset("empty test set".into()));
    }
    Ok(checkpoints
        .iter()
        .map(|c| {
            let (test_error, zero_scores) = test_error(test, &c.alpha_mass, c.t, representatives);
            CurvePoint {
                t: c.t,
                test_error,
                zero_scores,
            }
        })
        .collect())
}
