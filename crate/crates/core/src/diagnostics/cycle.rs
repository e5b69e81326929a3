//! Periodicity of the tail of a trajectory.

use serde::Serialize;

use crate::dynamics::{a_update, l1_distance};
use crate::stumps::DichotomyMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Cycle {
    /// First round from which the orbit repeats with this period.
    pub start: u64,
    pub period: usize,
}

/// Smallest period `p ≤ max_period` such that `d(w_t, w_{t+p}) < tol` (and,
/// when given, the selected rows repeat) over the last `3p` comparable
/// rounds. The returned start extends backwards as far as the relation holds.
///
/// `weights[k]` is the weight at round `first_t + k`; `rows[k]`, if given,
/// the row selected from it.
pub fn cycle_detect<W: AsRef<[f64]>>(
    weights: &[W],
    rows: Option<&[usize]>,
    first_t: u64,
    tol: f64,
    max_period: usize,
) -> Option<Cycle> {
    let n = weights.len();
    let repeats = |t: usize, p: usize| {
        let rows_ok = match rows {
            Some(r) if t + p < r.len() => r[t] == r[t + p],
            _ => true,
        };
        rows_ok && l1_distance(weights[t].as_ref(), weights[t + p].as_ref()) < tol
    };
    for p in 1..=max_period {
        let window = 3 * p;
        if n < window + p {
            break;
        }
        let from = n - p - window;
        // Scan from the end: a chaotic tail fails on the first comparison.
        if !(from..n - p).rev().all(|t| repeats(t, p)) {
            continue;
        }
        let mut start = from;
        while start > 0 && repeats(start - 1, p) {
            start -= 1;
        }
        return Some(Cycle {
            start: first_t + start as u64,
            period: p,
        });
    }
    None
}

/// Replays `period` rounds from `start` and checks the orbit closes up.
pub fn verify_cycle(
    matrix: &DichotomyMatrix,
    start: &[f64],
    period: usize,
    tol: f64,
    tie_tol: f64,
) -> bool {
    let mut w = start.to_vec();
    for _ in 0..period {
        match a_update(matrix, &w, tie_tol) {
            Ok(step) => w = step.weight.into_inner(),
            Err(_) => return false,
        }
    }
    l1_distance(&w, start) < tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_has_period_one() {
        let weights = vec![vec![0.5, 0.5]; 10];
        assert_eq!(
            cycle_detect(&weights, None, 1, 1e-9, 5),
            Some(Cycle {
                start: 1,
                period: 1
            })
        );
    }

    #[test]
    fn three_cycle_after_transient() {
        let orbit = [vec![0.2, 0.8], vec![0.5, 0.5], vec![0.7, 0.3]];
        let mut weights = vec![vec![0.9, 0.1], vec![0.05, 0.95]];
        weights.extend((0..12).map(|k| orbit[k % 3].clone()));
        let rows: Vec<usize> = (0..weights.len())
            .map(|k| if k < 2 { 9 } else { k % 3 })
            .collect();
        let c = cycle_detect(&weights, Some(&rows), 1, 1e-9, 5).unwrap();
        assert_eq!(
            c,
            Cycle {
                start: 3,
                period: 3
            }
        );
    }

    #[test]
    fn aperiodic_sequence_has_none() {
        let weights: Vec<Vec<f64>> = (0..200)
            .map(|k| {
                let x = ((k as f64) * 0.618_033_988_75).fract();
                vec![x, 1.0 - x]
            })
            .collect();
        assert_eq!(cycle_detect(&weights, None, 1, 1e-9, 40), None);
    }

    #[test]
    fn row_mismatch_blocks_detection() {
        let weights = vec![vec![0.5, 0.5]; 10];
        let rows = vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let c = cycle_detect(&weights, Some(&rows), 1, 1e-9, 5).unwrap();
        assert_eq!(c.period, 2);
    }
}
