use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

pub const HISTOGRAM_BINS: usize = 200;

/// Signed margins `β_T(i) = Σ_t α_t (1 - 2η_t(i)) / Σ_t α_t` at round `T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginSnapshot {
    pub t: u64,
    pub beta: Vec<f64>,
    pub min_margin: f64,
    /// Counts over `[-1, 1]` split into 200 equal bins; `1.0` falls in the
    /// last bin.
    pub histogram: Vec<u64>,
}

impl MarginSnapshot {
    pub fn from_parts(t: u64, margin_numerator: &[f64], alpha_sum: f64) -> Result<Self> {
        if !(alpha_sum > 0.0) {
            return Err(Error::Domain(
                "margins undefined before the first round".into(),
            ));
        }
        let beta: Vec<f64> = margin_numerator.iter().map(|x| x / alpha_sum).collect();
        let min_margin = beta.iter().copied().fold(f64::INFINITY, f64::min);
        let histogram = histogram(&beta);
        Ok(Self {
            t,
            beta,
            min_margin,
            histogram,
        })
    }

    /// Lower edge of bin `k`.
    pub fn bin_lower(k: usize) -> f64 {
        -1.0 + 2.0 * k as f64 / HISTOGRAM_BINS as f64
    }
}

fn histogram(beta: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for &b in beta {
        let pos = ((b + 1.0) / 2.0 * HISTOGRAM_BINS as f64).floor();
        let k = (pos.max(0.0) as usize).min(HISTOGRAM_BINS - 1);
        counts[k] += 1;
    }
    counts
}

/// Margins at the end of `traj`.
pub fn margins(traj: &Trajectory) -> Result<MarginSnapshot> {
    MarginSnapshot::from_parts(traj.len() as u64, &traj.margin_numerator, traj.alpha_sum)
}

/// `(T, min margin)` for each snapshot.
pub fn min_margin_trace(snapshots: &[MarginSnapshot]) -> Vec<(u64, f64)> {
    snapshots.iter().map(|s| (s.t, s.min_margin)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_round_margins() {
        let a = 0.5 * 3f64.ln();
        // η = (1, 0): example 0 wrong, example 1 right.
        let snap = MarginSnapshot::from_parts(1, &[-a, a], a).unwrap();
        assert_eq!(snap.beta, vec![-1.0, 1.0]);
        assert_eq!(snap.min_margin, -1.0);
        assert_eq!(snap.histogram[0], 1);
        assert_eq!(snap.histogram[HISTOGRAM_BINS - 1], 1);
        assert_eq!(snap.histogram.iter().sum::<u64>(), 2);
    }

    #[test]
    fn balanced_rounds_cancel() {
        // α = (1, 1), example wrong then right.
        let snap = MarginSnapshot::from_parts(2, &[-1.0 + 1.0], 2.0).unwrap();
        assert_abs_diff_eq!(snap.beta[0], 0.0);
        assert_eq!(snap.histogram[HISTOGRAM_BINS / 2], 1);
    }

    #[test]
    fn undefined_without_rounds() {
        assert!(MarginSnapshot::from_parts(0, &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn trace_takes_per_snapshot_minimum() {
        let a = MarginSnapshot::from_parts(1, &[0.1, 0.5], 1.0).unwrap();
        let b = MarginSnapshot::from_parts(2, &[0.2, 0.4], 1.0).unwrap();
        assert_eq!(min_margin_trace(std::slice::from_ref(&a)), vec![(1, 0.1)]);
        assert_eq!(min_margin_trace(&[a, b]), vec![(1, 0.1), (2, 0.2)]);
    }
}
