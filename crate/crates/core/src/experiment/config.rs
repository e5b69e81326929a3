use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{signed_label_mapping, LabelColumn, LabelMapping};
use crate::diagnostics::{DEFAULT_MARGIN_TOL, DEFAULT_WEIGHT_TOL};
use crate::dynamics::{InitMode, Schedule};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSource {
    /// Resolved against the config file's directory when relative.
    pub path: PathBuf,
    #[serde(default)]
    pub label_column: LabelColumn,
    #[serde(default = "signed_label_mapping")]
    pub label_mapping: LabelMapping,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsToggles {
    pub tie_gap: bool,
    pub margins: bool,
    pub support_vectors: bool,
    pub cycle: bool,
    pub test_error: bool,
    /// Writes `weights.csv` at the snapshot schedule.
    pub weights: bool,
    /// Writes `matrix.csv` and `representatives.json`.
    pub matrix: bool,
}

impl Default for DiagnosticsToggles {
    fn default() -> Self {
        Self {
            tie_gap: true,
            margins: true,
            support_vectors: true,
            cycle: true,
            test_error: true,
            weights: false,
            matrix: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleConfig {
    pub tol: f64,
    pub max_period: usize,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_period: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupportConfig {
    pub weight_tol: f64,
    pub margin_tol: f64,
}

impl Default for SupportConfig {
    fn default() -> Self {
        Self {
            weight_tol: DEFAULT_WEIGHT_TOL,
            margin_tol: DEFAULT_MARGIN_TOL,
        }
    }
}

fn default_init() -> InitMode {
    InitMode::Uniform
}

fn default_test_error_points() -> u64 {
    1000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// One experiment, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run_id: String,
    pub dataset: DatasetSource,
    #[serde(default)]
    pub split: Option<SplitConfig>,
    #[serde(default = "default_init")]
    pub init: InitMode,
    pub rounds: u64,
    #[serde(default)]
    pub equivalence_eps: f64,
    #[serde(default)]
    pub tie_tol: f64,
    #[serde(default)]
    pub include_constant: bool,
    /// Rounds at which weights and test error are recorded.
    #[serde(default)]
    pub snapshot_schedule: Schedule,
    /// Rounds at which margins are written; see [`ExperimentConfig::margin_rounds`].
    #[serde(default)]
    pub margin_checkpoints: Option<Vec<u64>>,
    /// Number of evenly spaced rounds at which test error is measured.
    #[serde(default = "default_test_error_points")]
    pub test_error_points: u64,
    #[serde(default)]
    pub diagnostics: DiagnosticsToggles,
    #[serde(default)]
    pub cycle: CycleConfig,
    #[serde(default)]
    pub support: SupportConfig,
    /// Resolved against the config file's directory when relative.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config. Its relative paths stay relative, to be resolved
    /// against the file's directory, so the hash does not depend on where
    /// the file lives.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn dataset_path(&self, base: &Path) -> PathBuf {
        base.join(&self.dataset.path)
    }

    pub fn output_path(&self, base: &Path) -> PathBuf {
        base.join(&self.output_dir)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let id_ok = !self.run_id.is_empty()
            && self.run_id != "."
            && self.run_id != ".."
            && self
                .run_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
        if !id_ok {
            return bad(format!("run_id {:?} is not filesystem-safe", self.run_id));
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if !(self.equivalence_eps >= 0.0 && self.equivalence_eps.is_finite()) {
            return bad(format!(
                "equivalence_eps must be >= 0, got {}",
                self.equivalence_eps
            ));
        }
        if !(self.tie_tol >= 0.0 && self.tie_tol.is_finite()) {
            return bad(format!("tie_tol must be >= 0, got {}", self.tie_tol));
        }
        if let Some(split) = &self.split {
            if !(split.test_fraction > 0.0 && split.test_fraction < 1.0) {
                return bad(format!(
                    "test_fraction must lie in (0, 1), got {}",
                    split.test_fraction
                ));
            }
        }
        if let Some(ts) = &self.margin_checkpoints {
            if ts.iter().any(|&t| t == 0 || t > self.rounds) {
                return bad("margin checkpoints must lie in 1..=rounds".into());
            }
        }
        if !(self.cycle.tol > 0.0) || self.cycle.max_period == 0 {
            return bad("cycle tol must be > 0 and max_period >= 1".into());
        }
        if !(self.support.weight_tol >= 0.0 && self.support.margin_tol >= 0.0) {
            return bad("support tolerances must be >= 0".into());
        }
        Ok(())
    }

    /// Margin rounds: the configured list, or powers of ten up to `T` plus
    /// `T/2`, `0.9T` and `T`.
    pub fn margin_rounds(&self) -> BTreeSet<u64> {
        let t = self.rounds;
        let mut out: BTreeSet<u64> = match &self.margin_checkpoints {
            Some(ts) => ts.iter().copied().collect(),
            None => std::iter::successors(Some(1u64), |&p| p.checked_mul(10))
                .take_while(|&p| p <= t)
                .chain([t / 2, t * 9 / 10, t])
                .collect(),
        };
        out.remove(&0);
        out
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{"run_id": "toy", "dataset": {"path": "d.csv"}, "rounds": 10}"#
    }

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(minimal()).unwrap();
        assert_eq!(c.init, InitMode::Uniform);
        assert_eq!(c.equivalence_eps, 0.0);
        assert_eq!(c.dataset.label_column, LabelColumn::Name("label".into()));
        assert_eq!(c.cycle.max_period, 1000);
        assert!(c.diagnostics.tie_gap && !c.diagnostics.matrix);
        assert_eq!(
            c.margin_rounds().into_iter().collect::<Vec<_>>(),
            vec![1, 5, 9, 10]
        );
    }

    #[test]
    fn parses_full_config() {
        let c = ExperimentConfig::from_json(
            r#"{
                "run_id": "g-1",
                "dataset": {"path": "d.csv", "label_column": 2, "label_mapping": {"0": -1, "1": 1}},
                "split": {"test_fraction": 0.5, "seed": 3},
                "init": {"mode": "random_simplex", "seed": 9},
                "rounds": 100000,
                "equivalence_eps": 1e-15,
                "snapshot_schedule": {"every": 100},
                "diagnostics": {"matrix": true},
                "output_dir": "runs/g"
            }"#,
        )
        .unwrap();
        assert_eq!(c.dataset.label_column, LabelColumn::Index(2));
        assert_eq!(c.init, InitMode::RandomSimplex { seed: 9 });
        assert_eq!(c.snapshot_schedule, Schedule::Every(100));
        let rounds: Vec<u64> = c.margin_rounds().into_iter().collect();
        assert_eq!(rounds, vec![1, 10, 100, 1000, 10000, 50000, 90000, 100000]);
    }

    #[test]
    fn rejects_invalid_values() {
        for text in [
            r#"{"run_id": "", "dataset": {"path": "d"}, "rounds": 1}"#,
            r#"{"run_id": "a/b", "dataset": {"path": "d"}, "rounds": 1}"#,
            r#"{"run_id": "a", "dataset": {"path": "d"}, "rounds": 0}"#,
            r#"{"run_id": "a", "dataset": {"path": "d"}, "rounds": 5, "equivalence_eps": -1}"#,
            r#"{"run_id": "a", "dataset": {"path": "d"}, "rounds": 5, "split": {"test_fraction": 1.0, "seed": 0}}"#,
            r#"{"run_id": "a", "dataset": {"path": "d"}, "rounds": 5, "bogus": 1}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::from_json(minimal()).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.rounds = 11;
        assert_ne!(a.hash(), b.hash());
    }
}
