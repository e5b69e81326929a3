//! Time averages along a trajectory.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dynamics::Trajectory;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BirkhoffReport {
    /// `ā_T = (1/T) Σ_{t ≤ T} a_t` for every `T`.
    pub running_means: Vec<f64>,
    /// `(T, |ā_T - ā_{⌊T/2⌋}|)` at `T = 2, 4, 8, …` and the final length.
    pub checkpoints: Vec<(u64, f64)>,
}

impl BirkhoffReport {
    pub fn final_mean(&self) -> f64 {
        *self.running_means.last().expect("nonempty series")
    }
}

pub fn birkhoff_average(series: &[f64]) -> BirkhoffReport {
    assert!(!series.is_empty(), "time average of an empty series");
    let mut running_means = Vec::with_capacity(series.len());
    let mut total = 0.0;
    for (k, &a) in series.iter().enumerate() {
        total += a;
        running_means.push(total / (k + 1) as f64);
    }
    let len = series.len() as u64;
    let mut points: Vec<u64> = std::iter::successors(Some(2u64), |&t| Some(t * 2))
        .take_while(|&t| t <= len)
        .collect();
    if len >= 2 && points.last() != Some(&len) {
        points.push(len);
    }
    let checkpoints = points
        .into_iter()
        .map(|t| {
            let now = running_means[(t - 1) as usize];
            let half = running_means[(t / 2 - 1) as usize];
            (t, (now - half).abs())
        })
        .collect();
    BirkhoffReport {
        running_means,
        checkpoints,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionFrequency {
    pub row: usize,
    /// Fraction of rounds selecting this row.
    pub count_freq: f64,
    /// Fraction of the total vote weight carried by this row.
    pub mass_freq: f64,
}

/// Selection frequencies of every row chosen at least once, sorted by
/// decreasing count (ties by row index).
pub fn selection_frequencies(traj: &Trajectory) -> Vec<SelectionFrequency> {
    let rounds = traj.len() as f64;
    let mut out: Vec<SelectionFrequency> = traj
        .selection_count
        .iter()
        .zip(&traj.alpha_mass)
        .enumerate()
        .filter(|(_, (&c, _))| c > 0)
        .map(|(row, (&c, &mass))| SelectionFrequency {
            row,
            count_freq: c as f64 / rounds,
            mass_freq: mass / traj.alpha_sum,
        })
        .collect();
    out.sort_by(|a, b| {
        b.count_freq
            .total_cmp(&a.count_freq)
            .then(a.row.cmp(&b.row))
    });
    out
}

/// Per-row `count/T` from raw counts.
pub fn count_frequencies(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// `(T, distinct rows selected in rounds 1..=T)` for every round.
pub fn unique_hypothesis_trace(traj: &Trajectory) -> Vec<(u64, usize)> {
    let mut seen = BTreeSet::new();
    traj.rounds
        .iter()
        .map(|r| {
            seen.insert(r.selected_row);
            (r.t, seen.len())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{RoundRecord, WeightVector};

    fn traj_with(rows: &[usize], alphas: &[f64], n: usize) -> Trajectory {
        let mut selection_count = vec![0; n];
        let mut alpha_mass = vec![0.0; n];
        let rounds = rows
            .iter()
            .zip(alphas)
            .enumerate()
            .map(|(k, (&row, &a))| {
                selection_count[row] += 1;
                alpha_mass[row] += a;
                RoundRecord {
                    t: k as u64 + 1,
                    selected_row: row,
                    eps: 0.25,
                    alpha: a,
                    tie_count: 1,
                    tie_gap: None,
                }
            })
            .collect();
        Trajectory {
            initial_weight: WeightVector::uniform(2),
            rounds,
            margin_numerator: vec![0.0; 2],
            alpha_sum: alphas.iter().sum(),
            selection_count,
            alpha_mass,
            weight_snapshots: Vec::new(),
            final_weight: WeightVector::uniform(2),
        }
    }

    #[test]
    fn constant_series() {
        let r = birkhoff_average(&[3.0; 16]);
        assert!(r.running_means.iter().all(|&x| x == 3.0));
        assert!(r.checkpoints.iter().all(|&(_, d)| d == 0.0));
        assert_eq!(r.checkpoints.last().unwrap().0, 16);
    }

    #[test]
    fn alternating_series_converges_to_half() {
        let series: Vec<f64> = (0..4096).map(|k| (k % 2) as f64).collect();
        let r = birkhoff_average(&series);
        assert!((r.final_mean() - 0.5).abs() < 1e-12);
        // Even lengths from 2 on average exactly one half.
        assert_eq!(r.checkpoints[0], (2, 0.5));
        assert!(r.checkpoints[1..].iter().all(|&(_, d)| d == 0.0));

        let series: Vec<f64> = (0..1001).map(|k| (k % 2) as f64).collect();
        let r = birkhoff_average(&series);
        assert!((r.final_mean() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn selection_frequency_examples() {
        let traj = traj_with(&[0, 1, 0, 1], &[1.0; 4], 2);
        let f = selection_frequencies(&traj);
        assert_eq!(f.len(), 2);
        assert_eq!((f[0].row, f[0].count_freq, f[0].mass_freq), (0, 0.5, 0.5));
        assert_eq!((f[1].row, f[1].count_freq), (1, 0.5));

        let traj = traj_with(&[0, 0, 0], &[0.3, 0.2, 0.1], 1);
        let f = selection_frequencies(&traj);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].count_freq, 1.0);
        assert!((f[0].mass_freq - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unique_trace_examples() {
        let traj = traj_with(&[0, 0, 1], &[1.0; 3], 2);
        assert_eq!(unique_hypothesis_trace(&traj), vec![(1, 1), (2, 1), (3, 2)]);
        let traj = traj_with(&[1, 1, 1, 1], &[1.0; 4], 2);
        assert!(unique_hypothesis_trace(&traj).iter().all(|&(_, c)| c == 1));
    }
}
