//! Runs an [`ExperimentConfig`] end to end and writes its artifacts.

use std::collections::{BTreeSet, VecDeque};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dataset::{load_csv, split, Dataset};
use crate::diagnostics::{
    cycle_detect, generalization_curve, margins, min_margin_trace, selection_frequencies,
    support_vectors, unique_hypothesis_trace, verify_cycle, CurvePoint, Cycle, MarginSnapshot,
    ScoreCheckpoint, SelectionFrequency, SupportVectorReport, HISTOGRAM_BINS,
};
use crate::dynamics::{
    init_weight, run, HaltReason, RoundHook, RoundView, RunOptions, Schedule, Trajectory,
};
use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;
use crate::stumps::{build_matrix_lenient, enumerate_stumps, DichotomyMatrix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinErrorReport {
    /// `n₀ = |M| + 1`.
    pub burn_in: u64,
    pub overall: Option<f64>,
    pub overall_round: Option<u64>,
    pub after_burn_in: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginDrift {
    pub from: u64,
    pub to: u64,
    /// `max_i |β_to(i) - β_from(i)|`
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginReport {
    pub min_margin_trace: Vec<(u64, f64)>,
    /// Between `0.9T` and `T`, when both were recorded.
    pub late_drift: Option<MarginDrift>,
}

/// L1 distance between selection-frequency vectors at `T/2` and `T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyDrift {
    pub half: u64,
    pub l1_count: f64,
    pub l1_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TieGapSummary {
    pub equivalence_eps: f64,
    pub min_gap_final_half: f64,
    pub positive_final_half: bool,
    pub merged_away_nondecreasing_final_half: bool,
    pub final_merged_away: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleReport {
    pub tol: f64,
    pub max_period: usize,
    /// Earliest round kept for detection; a reported start equal to it may
    /// be later than the true onset.
    pub tail_start: u64,
    pub detected: Option<Cycle>,
    pub verified: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestErrorSummary {
    pub checkpoints: usize,
    pub final_error: f64,
    /// Population standard deviation over the last 10% of checkpoints.
    pub tail_std: f64,
    pub tail_points: usize,
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub run_id: String,
    pub config_hash: String,
    pub halt: HaltReason,
    pub rounds_requested: u64,
    pub rounds_completed: u64,
    pub train_examples: usize,
    pub test_examples: Option<usize>,
    pub stumps: usize,
    pub rows: usize,
    pub min_error: MinErrorReport,
    pub margins: Option<MarginReport>,
    pub selection_frequencies: Vec<SelectionFrequency>,
    pub frequency_drift: Option<FrequencyDrift>,
    pub unique_hypotheses: Vec<(u64, usize)>,
    pub tie_gap: Option<TieGapSummary>,
    pub support_vectors: Option<SupportVectorReport>,
    pub cycle: Option<CycleReport>,
    pub test_error: Option<TestErrorSummary>,
    pub artifacts: Vec<String>,
}

/// Everything a run produced, in memory.
pub struct RunOutcome {
    pub summary: Summary,
    pub trajectory: Trajectory,
    pub matrix: DichotomyMatrix,
    pub train: Dataset,
    pub test: Option<Dataset>,
    pub margin_snapshots: Vec<MarginSnapshot>,
    /// Per-round `min_η η·w_t`.
    pub min_row_errors: Vec<f64>,
    pub curve: Vec<CurvePoint>,
    pub output_dir: PathBuf,
}

impl RunOutcome {
    /// 0 on completion, 2 when the dynamics halted.
    pub fn exit_code(&self) -> i32 {
        if self.summary.halt.is_completed() {
            0
        } else {
            2
        }
    }
}

/// Collects what the artifacts need while the run is in progress.
struct Recorder {
    margin_rounds: BTreeSet<u64>,
    margins: Vec<MarginSnapshot>,
    min_errors: Vec<f64>,
    half: u64,
    half_counts: Option<(Vec<u64>, Vec<f64>, f64)>,
    test_every: Option<u64>,
    last_round: u64,
    checkpoints: Vec<ScoreCheckpoint>,
    tail: VecDeque<(Vec<f64>, usize)>,
    tail_cap: usize,
}

impl RoundHook for Recorder {
    fn on_round(&mut self, v: &RoundView<'_>) {
        self.min_errors
            .push(v.row_errors.iter().copied().fold(f64::INFINITY, f64::min));
        if self.margin_rounds.contains(&v.t) {
            if let Ok(s) = MarginSnapshot::from_parts(v.t, v.margin_numerator, v.alpha_sum) {
                self.margins.push(s);
            }
        }
        if v.t == self.half {
            self.half_counts = Some((
                v.selection_count.to_vec(),
                v.alpha_mass.to_vec(),
                v.alpha_sum,
            ));
        }
        if let Some(every) = self.test_every {
            if v.t.is_multiple_of(every) || v.t == self.last_round {
                self.checkpoints.push(ScoreCheckpoint {
                    t: v.t,
                    alpha_mass: v.alpha_mass.to_vec(),
                });
            }
        }
        if self.tail_cap > 0 {
            if self.tail.len() == self.tail_cap {
                self.tail.pop_front();
            }
            self.tail
                .push_back((v.previous.to_vec(), v.record.selected_row));
        }
    }
}

/// Collects artifact files in one directory and remembers their names.
struct ArtifactDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl ArtifactDir {
    fn create(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    fn csv(&mut self, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(csv::Writer::from_writer(BufWriter::new(file)))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(text.as_bytes())
            .map_err(|e| Error::io(&path, e))
    }
}

/// Round-trip float formatting shared by every CSV.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Loads the data, runs the dynamics and writes every artifact into the
/// configured output directory. Relative paths resolve against `base_dir`.
///
/// A halt of the dynamics is not an error: artifacts up to the halt are
/// written, plus `error.json`, and the outcome carries the reason.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let data = load_csv(
        config.dataset_path(base_dir),
        &config.dataset.label_column,
        &config.dataset.label_mapping,
    )?;
    let (train, test) = match &config.split {
        Some(s) => {
            let (train, test) = split(&data, s.test_fraction, s.seed)?;
            (train, Some(test))
        }
        None => (data, None),
    };
    let stumps = enumerate_stumps(&train, config.include_constant)?;
    let matrix = build_matrix_lenient(&train, &stumps)?;
    let w1 = init_weight(&config.init, train.len())?;
    let total = config.rounds;
    let d = &config.diagnostics;

    let test_every = match (&test, d.test_error) {
        (Some(_), true) => Some((total / config.test_error_points.max(1)).max(1)),
        _ => None,
    };
    let tail_cap = if d.cycle {
        (4 * config.cycle.max_period).min(total as usize)
    } else {
        0
    };
    let mut recorder = Recorder {
        margin_rounds: if d.margins {
            config.margin_rounds()
        } else {
            BTreeSet::new()
        },
        margins: Vec::new(),
        min_errors: Vec::with_capacity(total.min(1 << 24) as usize),
        half: total / 2,
        half_counts: None,
        test_every,
        last_round: total,
        checkpoints: Vec::new(),
        tail: VecDeque::with_capacity(tail_cap),
        tail_cap,
    };
    let options = RunOptions {
        tie_tol: config.tie_tol,
        equivalence_eps: d.tie_gap.then_some(config.equivalence_eps),
        snapshot_schedule: if d.weights {
            config.snapshot_schedule.clone()
        } else {
            Schedule::Never
        },
    };
    let (traj, halt) = run(&matrix, &w1, total, &options, &mut [&mut recorder])?;
    let completed = traj.len() as u64;
    let finished = halt.is_completed();

    let mut out = ArtifactDir::create(config.output_path(base_dir))?;

    let mut w = out.csv("rounds.csv")?;
    w.write_record([
        "t",
        "selected_row",
        "eps_t",
        "alpha_t",
        "tie_gap",
        "merged_away",
        "min_row_error",
    ])?;
    for (r, &min_err) in traj.rounds.iter().zip(&recorder.min_errors) {
        let (gap, merged) = match &r.tie_gap {
            Some(g) => (num(g.gap), g.merged_away.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.t.to_string(),
            r.selected_row.to_string(),
            num(r.eps),
            num(r.alpha),
            gap,
            merged,
            num(min_err),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&out.dir, e))?;

    for snap in &recorder.margins {
        let mut w = out.csv(&format!("margins_T{}.csv", snap.t))?;
        w.write_record(["i", "label", "beta"])?;
        for (i, (&b, &y)) in snap.beta.iter().zip(train.labels()).enumerate() {
            w.write_record([i.to_string(), y.to_string(), num(b)])?;
        }
        w.flush().map_err(|e| Error::io(&out.dir, e))?;

        let mut w = out.csv(&format!("histogram_T{}.csv", snap.t))?;
        w.write_record(["bin", "lower", "upper", "count"])?;
        for (k, &c) in snap.histogram.iter().enumerate() {
            w.write_record([
                k.to_string(),
                num(MarginSnapshot::bin_lower(k)),
                num(if k + 1 == HISTOGRAM_BINS {
                    1.0
                } else {
                    MarginSnapshot::bin_lower(k + 1)
                }),
                c.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&out.dir, e))?;
    }

    if d.weights {
        let mut w = out.csv("weights.csv")?;
        let mut header = vec!["t".to_string()];
        header.extend((0..train.len()).map(|i| format!("w{i}")));
        w.write_record(&header)?;
        for (t, weight) in &traj.weight_snapshots {
            let mut record = vec![t.to_string()];
            record.extend(weight.iter().map(|&x| num(x)));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io(&out.dir, e))?;
    }

    if d.matrix {
        matrix.save_csv(out.path("matrix.csv"))?;
        matrix.save_representatives_json(out.path("representatives.json"))?;
    }

    let curve = match (&test, test_every) {
        (Some(test), Some(_)) if !recorder.checkpoints.is_empty() => {
            let reps = matrix.representatives().expect("built from stumps");
            let curve = generalization_curve(&recorder.checkpoints, test, reps)?;
            let mut w = out.csv("test_error.csv")?;
            w.write_record(["t", "test_error", "zero_scores"])?;
            for p in &curve {
                w.write_record([
                    p.t.to_string(),
                    num(p.test_error),
                    p.zero_scores.to_string(),
                ])?;
            }
            w.flush().map_err(|e| Error::io(&out.dir, e))?;
            curve
        }
        _ => Vec::new(),
    };

    // Summary pieces.
    let burn_in = matrix.n_rows() as u64 + 1;
    let overall = recorder
        .min_errors
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, &e)| (k as u64 + 1, e));
    let min_error = MinErrorReport {
        burn_in,
        overall: overall.map(|o| o.1),
        overall_round: overall.map(|o| o.0),
        after_burn_in: recorder
            .min_errors
            .iter()
            .skip(burn_in as usize)
            .copied()
            .reduce(f64::min),
    };

    let margin_report = d.margins.then(|| {
        let find = |t: u64| recorder.margins.iter().find(|s| s.t == t);
        let late_drift = match (find(total * 9 / 10), find(total)) {
            (Some(a), Some(b)) if a.t < b.t => Some(MarginDrift {
                from: a.t,
                to: b.t,
                max_abs: a
                    .beta
                    .iter()
                    .zip(&b.beta)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max),
            }),
            _ => None,
        };
        MarginReport {
            min_margin_trace: min_margin_trace(&recorder.margins),
            late_drift,
        }
    });

    let frequency_drift = match &recorder.half_counts {
        Some((counts, mass, alpha_sum)) if finished && recorder.half > 0 => {
            let half = recorder.half as f64;
            let l1_count = counts
                .iter()
                .zip(&traj.selection_count)
                .map(|(&a, &b)| (a as f64 / half - b as f64 / completed as f64).abs())
                .sum();
            let l1_mass = mass
                .iter()
                .zip(&traj.alpha_mass)
                .map(|(a, b)| (a / alpha_sum - b / traj.alpha_sum).abs())
                .sum();
            Some(FrequencyDrift {
                half: recorder.half,
                l1_count,
                l1_mass,
            })
        }
        _ => None,
    };

    let full_trace = unique_hypothesis_trace(&traj);
    let unique_hypotheses = full_trace
        .iter()
        .copied()
        .filter(|&(t, _)| Schedule::Default.contains(t) || t == completed)
        .collect();

    let tie_gap = d.tie_gap.then(|| {
        let tail: Vec<_> = traj
            .rounds
            .iter()
            .filter(|r| r.t > completed / 2)
            .filter_map(|r| r.tie_gap)
            .collect();
        TieGapSummary {
            equivalence_eps: config.equivalence_eps,
            min_gap_final_half: tail.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min),
            positive_final_half: tail.iter().all(|g| g.gap > 0.0),
            merged_away_nondecreasing_final_half: tail
                .windows(2)
                .all(|p| p[1].merged_away >= p[0].merged_away),
            final_merged_away: tail.last().map_or(0, |g| g.merged_away),
        }
    });

    let support = if d.support_vectors && finished {
        let snap = margins(&traj)?;
        Some(support_vectors(
            &traj,
            &snap,
            train.labels(),
            config.support.weight_tol,
            config.support.margin_tol,
        )?)
    } else {
        None
    };

    let cycle = if d.cycle && finished && !recorder.tail.is_empty() {
        let tail_start = completed + 1 - recorder.tail.len() as u64;
        let mut weights: Vec<&[f64]> = recorder.tail.iter().map(|(w, _)| w.as_slice()).collect();
        weights.push(traj.final_weight.as_slice());
        let rows: Vec<usize> = recorder.tail.iter().map(|&(_, r)| r).collect();
        let detected = cycle_detect(
            &weights,
            Some(&rows),
            tail_start,
            config.cycle.tol,
            config.cycle.max_period,
        );
        let verified = detected.map(|c| {
            let start = weights[(c.start - tail_start) as usize];
            verify_cycle(&matrix, start, c.period, config.cycle.tol, config.tie_tol)
        });
        Some(CycleReport {
            tol: config.cycle.tol,
            max_period: config.cycle.max_period,
            tail_start,
            detected,
            verified,
        })
    } else {
        None
    };

    let test_error = curve.last().map(|last| {
        let tail_points = curve.len().div_ceil(10);
        let tail: Vec<f64> = curve[curve.len() - tail_points..]
            .iter()
            .map(|p| p.test_error)
            .collect();
        TestErrorSummary {
            checkpoints: curve.len(),
            final_error: last.test_error,
            tail_std: population_std(&tail),
            tail_points,
        }
    });

    let selection = selection_frequencies(&traj);

    // Long-format diagnostics.
    let mut w = out.csv("diagnostics.csv")?;
    w.write_record(["run_id", "T", "metric", "key", "value"])?;
    let mut row = |t: u64, metric: &str, key: &str, value: String| {
        w.write_record([config.run_id.as_str(), &t.to_string(), metric, key, &value])
    };
    row(completed, "halt", halt.name(), "1".into())?;
    if let Some(v) = min_error.overall {
        row(completed, "running_min_error", "overall", num(v))?;
    }
    if let Some(v) = min_error.after_burn_in {
        row(completed, "running_min_error", "after_burn_in", num(v))?;
    }
    for s in &recorder.margins {
        row(s.t, "min_margin", "", num(s.min_margin))?;
    }
    if let Some(drift) = margin_report.as_ref().and_then(|m| m.late_drift.as_ref()) {
        row(
            drift.to,
            "margin_drift",
            &drift.from.to_string(),
            num(drift.max_abs),
        )?;
    }
    for f in &selection {
        row(
            completed,
            "selection_count_freq",
            &f.row.to_string(),
            num(f.count_freq),
        )?;
        row(
            completed,
            "selection_mass_freq",
            &f.row.to_string(),
            num(f.mass_freq),
        )?;
    }
    if let Some(fd) = &frequency_drift {
        row(completed, "frequency_drift", "l1_count", num(fd.l1_count))?;
        row(completed, "frequency_drift", "l1_mass", num(fd.l1_mass))?;
    }
    for &(t, n) in &full_trace {
        if Schedule::Default.contains(t) || t == completed {
            row(t, "unique_hypotheses", "", n.to_string())?;
        }
    }
    if let Some(tg) = &tie_gap {
        row(
            completed,
            "tie_gap",
            "min_final_half",
            num(tg.min_gap_final_half),
        )?;
        row(
            completed,
            "tie_gap",
            "final_merged_away",
            tg.final_merged_away.to_string(),
        )?;
    }
    if let Some(sv) = &support {
        row(
            completed,
            "support_vectors",
            "size",
            sv.support_set.len().to_string(),
        )?;
        row(
            completed,
            "support_vectors",
            "criteria_agree",
            u8::from(sv.criteria_agree).to_string(),
        )?;
        row(
            completed,
            "support_vectors",
            "weighted_margin_drift",
            num(sv.weighted_margin_drift()),
        )?;
    }
    if let Some(Some(c)) = cycle.as_ref().map(|c| c.detected) {
        row(completed, "cycle", "period", c.period.to_string())?;
        row(completed, "cycle", "start", c.start.to_string())?;
    }
    for p in &curve {
        row(p.t, "test_error", "", num(p.test_error))?;
        row(p.t, "zero_scores", "", p.zero_scores.to_string())?;
    }
    w.flush().map_err(|e| Error::io(&out.dir, e))?;

    if !finished {
        out.json(
            "error.json",
            &ErrorReport {
                run_id: &config.run_id,
                halt: &halt,
                rounds_completed: completed,
            },
        )?;
    }
    out.written.push("summary.json".into());
    let summary = Summary {
        run_id: config.run_id.clone(),
        config_hash: config.hash(),
        halt,
        rounds_requested: total,
        rounds_completed: completed,
        train_examples: train.len(),
        test_examples: test.as_ref().map(Dataset::len),
        stumps: stumps.len(),
        rows: matrix.n_rows(),
        min_error,
        margins: margin_report,
        selection_frequencies: selection,
        frequency_drift,
        unique_hypotheses,
        tie_gap,
        support_vectors: support,
        cycle,
        test_error,
        artifacts: out.written.clone(),
    };
    out.written.pop();
    out.json("summary.json", &summary)?;

    Ok(RunOutcome {
        summary,
        trajectory: traj,
        matrix,
        train,
        test,
        margin_snapshots: recorder.margins,
        min_row_errors: recorder.min_errors,
        curve,
        output_dir: out.dir,
    })
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    run_id: &'a str,
    halt: &'a HaltReason,
    rounds_completed: u64,
}
