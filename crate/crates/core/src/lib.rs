//! Optimal AdaBoost on a finite training set, viewed as a map on the weight
//! simplex, together with the tools to run it, invert it and measure it.
//!
//! The pipeline is: load a [`Dataset`], build the [`DichotomyMatrix`] of its
//! decision stumps, then iterate [`a_update`] with [`run`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod diagnostics;
pub mod dichotomy;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod stumps;

pub use dataset::{load_csv, signed_label_mapping, split, Dataset, LabelColumn, LabelMapping};
pub use dichotomy::Dichotomy;
pub use dynamics::{
    a_update, ada_select, alpha, err, init_weight, l1_distance, run, t_update, HaltReason,
    InitMode, RoundHook, RoundRecord, RoundView, RunOptions, Schedule, Selection, Step, Trajectory,
    WeightVector,
};
pub use error::{Error, Result};
pub use geometry::{
    a_inverse, err_along, region_of, t_inverse, Region, RhoInterval, SegmentPreimage,
};
pub use stumps::{
    build_matrix, build_matrix_lenient, dichotomy_of, enumerate_stumps, merge_equivalent, prune,
    DichotomyMatrix, MergeReport, StumpHypothesis,
};
