//! Optimal AdaBoost as an iterated map on the weight simplex.
//!
//! The state is a weight vector `w_t`. One round selects the lowest-index
//! row of minimum error (`ada_select`) and applies the row's update map
//! (`t_update`): misclassified weights are scaled by `1/(2ε)`, the rest by
//! `1/(2(1-ε))`.

use std::ops::Deref;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::diagnostics::ties::gap_among;
use crate::dichotomy::{lane_sum, Dichotomy};
use crate::error::{Error, Result};
use crate::stumps::{merge_classes, DichotomyMatrix};

/// Tolerance on `|Σw - 1|` for externally supplied weight vectors.
pub const INPUT_SIMPLEX_TOL: f64 = 1e-9;

/// Rounds whose minimum error exceeds `1/2 - NO_WEAK_LEARNING_TOL` halt.
pub const NO_WEAK_LEARNING_TOL: f64 = 1e-12;

/// A point of the probability simplex over the training examples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates nonnegativity and that the entries sum to one.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::NotInSimplex("empty weight vector".into()));
        }
        if let Some(x) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::NotInSimplex(format!("invalid component {x}")));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > INPUT_SIMPLEX_TOL {
            return Err(Error::NotInSimplex(format!("components sum to {total}")));
        }
        Ok(Self(w))
    }

    /// Scales a nonnegative vector onto the simplex.
    pub fn normalized(w: Vec<f64>) -> Result<Self> {
        if let Some(x) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::NotInSimplex(format!("invalid component {x}")));
        }
        let total: f64 = w.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NotInSimplex(format!("components sum to {total}")));
        }
        Ok(Self(w.into_iter().map(|x| x / total).collect()))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `d(a, b) = Σ |a(i) - b(i)|`.
    pub fn distance(&self, other: &[f64]) -> f64 {
        l1_distance(&self.0, other)
    }
}

impl Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// The L1 metric on the simplex.
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Weighted error of a row: the weight on the examples it misclassifies.
pub fn err(eta: &Dichotomy, w: &[f64]) -> f64 {
    debug_assert_eq!(eta.len(), w.len());
    lane_sum(w, |i| eta.get(i))
}

/// `1/2 · ln((1 - ε)/ε)`, defined for `0 < ε < 1/2`.
pub fn alpha(eps: f64) -> Result<f64> {
    if eps > 0.0 && eps < 0.5 {
        Ok(0.5 * ((1.0 - eps) / eps).ln())
    } else {
        Err(Error::Domain(format!("alpha undefined at error {eps}")))
    }
}

/// The row AdaSelect picks and every row tied with it.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub row: usize,
    pub ties: Vec<usize>,
    pub min_error: f64,
}

/// Lowest-index row among those within `tie_tol` of the minimum error.
pub fn ada_select(matrix: &DichotomyMatrix, w: &[f64], tie_tol: f64) -> Selection {
    select_from_errors(&matrix.row_errors(w), tie_tol)
}

pub(crate) fn select_from_errors(errors: &[f64], tie_tol: f64) -> Selection {
    assert!(!errors.is_empty(), "selection over an empty matrix");
    let min_error = errors.iter().copied().fold(f64::INFINITY, f64::min);
    let ties: Vec<usize> = errors
        .iter()
        .enumerate()
        .filter(|(_, &e)| e <= min_error + tie_tol)
        .map(|(k, _)| k)
        .collect();
    Selection {
        row: ties[0],
        ties,
        min_error,
    }
}

/// The update map of `eta`, assuming it is the selected row.
pub fn t_update(eta: &Dichotomy, w: &[f64]) -> Result<WeightVector> {
    let eps = err(eta, w);
    t_update_with_error(eta, w, eps)
}

fn t_update_with_error(eta: &Dichotomy, w: &[f64], eps: f64) -> Result<WeightVector> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!(
            "update undefined for row error {eps}"
        )));
    }
    let wrong = 0.5 / eps;
    let right = 0.5 / (1.0 - eps);
    let mut next: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(i, &x)| x * if eta.get(i) { wrong } else { right })
        .collect();
    let total: f64 = next.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Domain(format!(
            "update produced total weight {total}"
        )));
    }
    for x in &mut next {
        *x /= total;
    }
    Ok(WeightVector(next))
}

/// Why a run stopped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum HaltReason {
    Completed,
    /// Some row has zero error: the update is undefined.
    ZeroError {
        t: u64,
        row: usize,
    },
    /// The best row's error is within tolerance of 1/2.
    NoWeakLearning {
        t: u64,
        eps: f64,
    },
    NumericFailure {
        t: u64,
        detail: String,
    },
}

impl HaltReason {
    pub fn is_completed(&self) -> bool {
        matches!(self, HaltReason::Completed)
    }

    pub fn name(&self) -> &'static str {
        match self {
            HaltReason::Completed => "completed",
            HaltReason::ZeroError { .. } => "zero_error",
            HaltReason::NoWeakLearning { .. } => "no_weak_learning",
            HaltReason::NumericFailure { .. } => "numeric_failure",
        }
    }
}

/// Best-versus-second-best error gap after merging equivalent rows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TieGapRecord {
    pub t: u64,
    /// `+inf` when every other row was merged into the best one.
    pub gap: f64,
    pub merged_away: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: u64,
    pub selected_row: usize,
    pub eps: f64,
    pub alpha: f64,
    pub tie_count: usize,
    pub tie_gap: Option<TieGapRecord>,
}

/// One application of the AdaBoost map.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub weight: WeightVector,
    pub selection: Selection,
    pub eps: f64,
    pub alpha: f64,
}

/// Selects a row and applies its update, or reports why the map is undefined.
pub fn a_update(
    matrix: &DichotomyMatrix,
    w: &[f64],
    tie_tol: f64,
) -> std::result::Result<Step, HaltReason> {
    let errors = matrix.row_errors(w);
    step_from_errors(matrix, w, &errors, tie_tol, 1)
}

fn step_from_errors(
    matrix: &DichotomyMatrix,
    w: &[f64],
    errors: &[f64],
    tie_tol: f64,
    t: u64,
) -> std::result::Result<Step, HaltReason> {
    let selection = select_from_errors(errors, tie_tol);
    let eps = selection.min_error;
    if eps <= 0.0 {
        return Err(HaltReason::ZeroError {
            t,
            row: selection.row,
        });
    }
    if eps > 0.5 - NO_WEAK_LEARNING_TOL {
        return Err(HaltReason::NoWeakLearning { t, eps });
    }
    let alpha = alpha(eps).map_err(|e| HaltReason::NumericFailure {
        t,
        detail: e.to_string(),
    })?;
    let weight = t_update_with_error(matrix.row(selection.row), w, eps).map_err(|e| {
        HaltReason::NumericFailure {
            t,
            detail: e.to_string(),
        }
    })?;
    Ok(Step {
        weight,
        selection,
        eps,
        alpha,
    })
}

/// How the initial weight vector is chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InitMode {
    Uniform,
    /// Flat Dirichlet draw: normalized unit-rate exponentials.
    RandomSimplex {
        seed: u64,
    },
}

pub fn init_weight(mode: &InitMode, m: usize) -> Result<WeightVector> {
    if m < 2 {
        return Err(Error::Domain(format!("need at least 2 examples, got {m}")));
    }
    match mode {
        InitMode::Uniform => Ok(WeightVector::uniform(m)),
        InitMode::RandomSimplex { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let draws: Vec<f64> = (0..m).map(|_| Exp1.sample(&mut rng)).collect();
            WeightVector::normalized(draws)
        }
    }
}

/// Set of rounds at which something is recorded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Every round up to 1000, then 9 points per decade band (multiples of
    /// `10^(digits-2)`).
    #[default]
    Default,
    Every(u64),
    At(Vec<u64>),
    Never,
}

impl Schedule {
    pub fn contains(&self, t: u64) -> bool {
        match self {
            Schedule::Default => {
                if t <= 1000 {
                    true
                } else {
                    let digits = t.ilog10() + 1;
                    t.is_multiple_of(10u64.pow(digits - 2))
                }
            }
            Schedule::Every(k) => *k > 0 && t.is_multiple_of(*k),
            Schedule::At(ts) => ts.contains(&t),
            Schedule::Never => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub tie_tol: f64,
    /// When set, rows are merged under this threshold each round to compute
    /// the tie gap. The update itself always uses the full matrix.
    pub equivalence_eps: Option<f64>,
    /// Which `w_t` are kept in the trajectory (`w_1` and the final weight
    /// are always available).
    pub snapshot_schedule: Schedule,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            tie_tol: 0.0,
            equivalence_eps: None,
            snapshot_schedule: Schedule::Default,
        }
    }
}

/// State handed to hooks after round `t`.
pub struct RoundView<'a> {
    pub t: u64,
    pub record: &'a RoundRecord,
    /// `w_t`, the weight the round started from.
    pub previous: &'a WeightVector,
    /// `w_{t+1}`.
    pub weight: &'a WeightVector,
    /// Row errors under `w_t`.
    pub row_errors: &'a [f64],
    pub margin_numerator: &'a [f64],
    pub alpha_sum: f64,
    pub selection_count: &'a [u64],
    pub alpha_mass: &'a [f64],
}

pub trait RoundHook {
    fn on_round(&mut self, view: &RoundView<'_>);
}

impl<F: FnMut(&RoundView<'_>)> RoundHook for F {
    fn on_round(&mut self, view: &RoundView<'_>) {
        self(view)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial_weight: WeightVector,
    pub rounds: Vec<RoundRecord>,
    /// `Σ_t α_t (1 - 2 η_t(i))` per example.
    pub margin_numerator: Vec<f64>,
    pub alpha_sum: f64,
    pub selection_count: Vec<u64>,
    /// `Σ_t α_t · 1[η_t = η]` per row.
    pub alpha_mass: Vec<f64>,
    /// `(t, w_t)` at the scheduled rounds.
    pub weight_snapshots: Vec<(u64, WeightVector)>,
    /// `w_{T+1}`, or the weight at which the run halted.
    pub final_weight: WeightVector,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn selected_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.rounds.iter().map(|r| r.selected_row)
    }

    /// Smallest minimum row error over rounds `t > after`.
    pub fn running_min_error(&self, after: u64) -> Option<f64> {
        self.rounds
            .iter()
            .filter(|r| r.t > after)
            .map(|r| r.eps)
            .reduce(f64::min)
    }
}

/// Iterates the AdaBoost map from `w1` for up to `rounds` rounds.
///
/// Hooks are called after every completed round. On a halt the trajectory up
/// to the halting round is returned alongside the reason.
pub fn run(
    matrix: &DichotomyMatrix,
    w1: &WeightVector,
    rounds: u64,
    options: &RunOptions,
    hooks: &mut [&mut dyn RoundHook],
) -> Result<(Trajectory, HaltReason)> {
    if rounds == 0 {
        return Err(Error::Domain("need at least one round".into()));
    }
    if w1.len() != matrix.m() {
        return Err(Error::DimensionMismatch {
            expected: matrix.m(),
            actual: w1.len(),
        });
    }
    let m = matrix.m();
    let n = matrix.n_rows();
    let mut traj = Trajectory {
        initial_weight: w1.clone(),
        rounds: Vec::new(),
        margin_numerator: vec![0.0; m],
        alpha_sum: 0.0,
        selection_count: vec![0; n],
        alpha_mass: vec![0.0; n],
        weight_snapshots: Vec::new(),
        final_weight: w1.clone(),
    };
    let mut w = w1.clone();
    let mut errors = Vec::with_capacity(n);
    let mut halt = HaltReason::Completed;

    for t in 1..=rounds {
        if options.snapshot_schedule.contains(t) {
            traj.weight_snapshots.push((t, w.clone()));
        }
        matrix.row_errors_into(&w, &mut errors);
        let step = match step_from_errors(matrix, &w, &errors, options.tie_tol, t) {
            Ok(step) => step,
            Err(reason) => {
                halt = reason;
                break;
            }
        };
        let tie_gap = options
            .equivalence_eps
            .map(|eps| merged_tie_gap(matrix, &w, &errors, eps, t));

        let row = step.selection.row;
        let eta = matrix.row(row);
        for (i, num) in traj.margin_numerator.iter_mut().enumerate() {
            *num += if eta.get(i) { -step.alpha } else { step.alpha };
        }
        traj.alpha_sum += step.alpha;
        traj.selection_count[row] += 1;
        traj.alpha_mass[row] += step.alpha;
        traj.rounds.push(RoundRecord {
            t,
            selected_row: row,
            eps: step.eps,
            alpha: step.alpha,
            tie_count: step.selection.ties.len(),
            tie_gap,
        });

        let previous = std::mem::replace(&mut w, step.weight);
        if !hooks.is_empty() {
            let view = RoundView {
                t,
                record: traj.rounds.last().expect("just pushed"),
                previous: &previous,
                weight: &w,
                row_errors: &errors,
                margin_numerator: &traj.margin_numerator,
                alpha_sum: traj.alpha_sum,
                selection_count: &traj.selection_count,
                alpha_mass: &traj.alpha_mass,
            };
            for hook in hooks.iter_mut() {
                hook.on_round(&view);
            }
        }
    }
    traj.final_weight = w;
    Ok((traj, halt))
}

/// Tie gap on the matrix whose equivalent rows (under `eps`) are merged into
/// their lowest-index member.
pub(crate) fn merged_tie_gap(
    matrix: &DichotomyMatrix,
    w: &[f64],
    errors: &[f64],
    eps: f64,
    t: u64,
) -> TieGapRecord {
    let report = merge_classes(matrix, w, eps);
    let survivors = report.survivors();
    TieGapRecord {
        t,
        gap: gap_among(matrix, w, errors, &survivors),
        merged_away: report.merged_away(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_rows() -> DichotomyMatrix {
        DichotomyMatrix::from_u8_rows(&[vec![1, 0], vec![0, 1]]).unwrap()
    }

    #[test]
    fn err_examples() {
        let w = [0.2, 0.3, 0.5];
        assert_abs_diff_eq!(
            err(&Dichotomy::from_u8(&[1, 0, 1]), &w),
            0.7,
            epsilon = 1e-15
        );
        assert_eq!(err(&Dichotomy::from_u8(&[0, 0, 0]), &w), 0.0);
        assert_abs_diff_eq!(
            err(&Dichotomy::from_u8(&[1, 1, 1]), &w),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ada_select_examples() {
        let s = ada_select(&two_rows(), &[0.3, 0.7], 0.0);
        assert_eq!((s.row, s.ties), (0, vec![0]));
        let s = ada_select(&two_rows(), &[0.5, 0.5], 0.0);
        assert_eq!((s.row, s.ties), (0, vec![0, 1]));
    }

    #[test]
    fn ada_select_breaks_rounding_ties_by_index() {
        // Row 2 carries an extra 1e-17, below half an ulp of 0.3.
        let w = [0.3, 1e-17, 0.7];
        let matrix =
            DichotomyMatrix::from_u8_rows(&[vec![0, 1, 0], vec![1, 0, 0], vec![1, 1, 0]]).unwrap();
        let errors = matrix.row_errors(&w);
        assert_eq!(errors[1], 0.3);
        assert_eq!(errors[2], errors[1], "0.3 + 1e-17 rounds to 0.3");
        let s = select_from_errors(&errors[1..], 0.0);
        assert_eq!((s.row, s.ties), (0, vec![0, 1]));
    }

    #[test]
    fn t_update_examples() {
        let w = t_update(&Dichotomy::from_u8(&[1, 0]), &[0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(w.as_slice(), &[0.5, 0.5][..], epsilon = 1e-15);

        let w = t_update(&Dichotomy::from_u8(&[1, 0]), &[0.5, 0.5]).unwrap();
        assert_eq!(w.as_slice(), &[0.5, 0.5]);

        let w = t_update(&Dichotomy::from_u8(&[1, 0, 0]), &[0.2, 0.4, 0.4]).unwrap();
        assert_abs_diff_eq!(w.as_slice(), &[0.5, 0.25, 0.25][..], epsilon = 1e-15);

        assert!(t_update(&Dichotomy::from_u8(&[0, 0]), &[0.5, 0.5]).is_err());
        assert!(t_update(&Dichotomy::from_u8(&[1, 1]), &[0.5, 0.5]).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert_abs_diff_eq!(alpha(0.25).unwrap(), 0.5 * 3f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            alpha(0.25).unwrap(),
            0.549_306_144_334_054_8,
            epsilon = 1e-12
        );
        assert!(alpha(0.5 - 1e-9).unwrap() > 0.0);
        assert!(alpha(0.5 - 1e-9).unwrap() < 1e-8);
        assert!(alpha(0.0).is_err());
        assert!(alpha(0.5).is_err());
        assert!(alpha(0.25).unwrap() > alpha(1.0 / 3.0).unwrap());
    }

    #[test]
    fn a_update_examples() {
        let step = a_update(&two_rows(), &[0.25, 0.75], 0.0).unwrap();
        assert_eq!(step.selection.row, 0);
        assert_abs_diff_eq!(step.weight.as_slice(), &[0.5, 0.5][..], epsilon = 1e-15);
        assert_eq!(step.eps, 0.25);
        assert_abs_diff_eq!(step.alpha, 0.549_306_144_334_054_8, epsilon = 1e-12);

        assert!(matches!(
            a_update(&two_rows(), &[1.0, 0.0], 0.0),
            Err(HaltReason::ZeroError { row: 1, .. })
        ));
        assert!(matches!(
            a_update(&two_rows(), &[0.5, 0.5], 0.0),
            Err(HaltReason::NoWeakLearning { .. })
        ));
    }

    #[test]
    fn init_weight_modes() {
        assert_eq!(
            init_weight(&InitMode::Uniform, 4).unwrap().as_slice(),
            &[0.25; 4]
        );
        let a = init_weight(&InitMode::RandomSimplex { seed: 9 }, 5).unwrap();
        let b = init_weight(&InitMode::RandomSimplex { seed: 9 }, 5).unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(a.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(init_weight(&InitMode::Uniform, 1).is_err());
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.1, 1.1]).is_err());
        assert!(WeightVector::new(vec![0.1, 0.2, 0.7]).is_ok());
        assert!(WeightVector::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn single_round_run() {
        let w1 = WeightVector::new(vec![0.25, 0.75]).unwrap();
        let (traj, halt) = run(&two_rows(), &w1, 1, &RunOptions::default(), &mut []).unwrap();
        assert!(halt.is_completed());
        assert_eq!(traj.rounds.len(), 1);
        assert_eq!(traj.rounds[0].eps, 0.25);
        assert_abs_diff_eq!(
            traj.rounds[0].alpha,
            0.549_306_144_334_054_8,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            traj.final_weight.as_slice(),
            &[0.5, 0.5][..],
            epsilon = 1e-15
        );
        assert_eq!(traj.margin_numerator, vec![-traj.alpha_sum, traj.alpha_sum]);
    }

    #[test]
    fn run_returns_partial_trajectory_on_halt() {
        let w1 = WeightVector::new(vec![0.25, 0.75]).unwrap();
        let (traj, halt) = run(&two_rows(), &w1, 5, &RunOptions::default(), &mut []).unwrap();
        assert_eq!(halt, HaltReason::NoWeakLearning { t: 2, eps: 0.5 });
        assert_eq!(traj.rounds.len(), 1);
    }

    #[test]
    fn default_schedule_thins_out_logarithmically() {
        let s = Schedule::Default;
        assert!((1..=1000).all(|t| s.contains(t)));
        assert!(!s.contains(1001));
        assert!(s.contains(1100));
        assert!(!s.contains(10_100));
        assert!(s.contains(11_000));
        assert_eq!((1001..=10_000).filter(|&t| s.contains(t)).count(), 90);
    }

    #[test]
    fn hooks_see_every_round() {
        let matrix =
            DichotomyMatrix::from_u8_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        let w1 = WeightVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let mut seen = Vec::new();
        let mut hook = |v: &RoundView<'_>| {
            seen.push((
                v.t,
                v.record.selected_row,
                err(matrix.row(v.record.selected_row), v.weight),
            ))
        };
        let (traj, _) = run(&matrix, &w1, 20, &RunOptions::default(), &mut [&mut hook]).unwrap();
        assert_eq!(seen.len(), 20);
        for ((t, row, half), rec) in seen.iter().zip(&traj.rounds) {
            assert_eq!((*t, *row), (rec.t, rec.selected_row));
            assert_abs_diff_eq!(*half, 0.5, epsilon = 1e-12);
        }
    }
}
