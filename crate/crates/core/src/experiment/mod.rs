//! Config-driven experiments: synthetic data, runs and their artifacts.

pub mod config;
pub mod inspect;
pub mod runner;
pub mod synth;

pub use config::{
    CycleConfig, DatasetSource, DiagnosticsToggles, ExperimentConfig, SplitConfig, SupportConfig,
};
pub use inspect::inspect;
pub use runner::{run_experiment, RunOutcome, Summary};
pub use synth::{synth, SynthKind, SynthParams};
