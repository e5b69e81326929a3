//! Empirical quantities computed from trajectories: margins, tie gaps,
//! time averages, support vectors, cycles and test error.

pub mod averages;
pub mod cycle;
pub mod margins;
pub mod scoring;
pub mod support;
pub mod ties;

pub use averages::{
    birkhoff_average, count_frequencies, selection_frequencies, unique_hypothesis_trace,
    BirkhoffReport, SelectionFrequency,
};
pub use cycle::{cycle_detect, verify_cycle, Cycle};
pub use margins::{margins, min_margin_trace, MarginSnapshot, HISTOGRAM_BINS};
pub use scoring::{
    generalization_curve, score, score_with_mass, test_error, CurvePoint, ScoreCheckpoint,
};
pub use support::{support_vectors, SupportVectorReport, DEFAULT_MARGIN_TOL, DEFAULT_WEIGHT_TOL};
pub use ties::tie_gap;
