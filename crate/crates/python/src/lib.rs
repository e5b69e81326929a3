//! Python bindings: datasets, stump matrices, runs of the AdaBoost map, its
//! inverse and the experiment runner.

use std::path::PathBuf;

use optboost::diagnostics::margins;
use optboost::experiment::{
    run_experiment, synth as synth_dataset, ExperimentConfig, SynthKind, SynthParams,
};
use optboost::{
    a_inverse, a_update, build_matrix, build_matrix_lenient, enumerate_stumps, init_weight,
    load_csv, signed_label_mapping, t_inverse as t_inverse_segment, Dichotomy, HaltReason,
    InitMode, LabelColumn, RunOptions, SegmentPreimage, WeightVector,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn to_py<T>(r: optboost::Result<T>) -> PyResult<T> {
    r.map_err(|e| PyValueError::new_err(e.to_string()))
}

fn init_mode(seed: Option<u64>) -> InitMode {
    match seed {
        Some(seed) => InitMode::RandomSimplex { seed },
        None => InitMode::Uniform,
    }
}

#[pyclass(name = "Dataset", frozen)]
struct PyDataset(optboost::Dataset);

#[pymethods]
impl PyDataset {
    #[new]
    fn new(rows: Vec<Vec<f64>>, labels: Vec<i8>) -> PyResult<Self> {
        to_py(optboost::Dataset::new(rows, labels)).map(Self)
    }

    /// Loads a CSV file whose labels are `+1`/`-1` in the named column.
    #[staticmethod]
    #[pyo3(signature = (path, label_column = "label"))]
    fn from_csv(path: PathBuf, label_column: &str) -> PyResult<Self> {
        let column = LabelColumn::Name(label_column.to_string());
        to_py(load_csv(path, &column, &signed_label_mapping())).map(Self)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn labels(&self) -> Vec<i8> {
        self.0.labels().to_vec()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows().map(<[f64]>::to_vec).collect()
    }

    fn save_csv(&self, path: PathBuf) -> PyResult<()> {
        to_py(self.0.save_csv(path))
    }
}

#[pyfunction]
#[pyo3(signature = (kind, seed = 1, m = 200, dim = 2, separation = 1.0, xor_cut = 0.37))]
fn synth(
    kind: &str,
    seed: u64,
    m: usize,
    dim: usize,
    separation: f64,
    xor_cut: f64,
) -> PyResult<PyDataset> {
    let kind: SynthKind = to_py(kind.parse())?;
    let params = SynthParams {
        m,
        dim,
        separation,
        xor_cut,
    };
    to_py(synth_dataset(kind, &params, seed)).map(PyDataset)
}

/// Pruned dichotomy matrix; bit 1 marks a misclassified example.
#[pyclass(name = "Matrix", frozen)]
struct PyMatrix(optboost::DichotomyMatrix);

#[pymethods]
impl PyMatrix {
    /// Stump matrix of a dataset. With `lenient`, a perfect stump is kept
    /// instead of raising.
    #[staticmethod]
    #[pyo3(signature = (dataset, include_constant = false, lenient = false))]
    fn from_stumps(dataset: &PyDataset, include_constant: bool, lenient: bool) -> PyResult<Self> {
        let stumps = to_py(enumerate_stumps(&dataset.0, include_constant))?;
        let matrix = if lenient {
            build_matrix_lenient(&dataset.0, &stumps)
        } else {
            build_matrix(&dataset.0, &stumps)
        };
        to_py(matrix).map(Self)
    }

    #[staticmethod]
    fn from_rows(rows: Vec<Vec<u8>>) -> PyResult<Self> {
        to_py(optboost::DichotomyMatrix::from_u8_rows(&rows)).map(Self)
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.0.n_rows()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    fn rows(&self) -> Vec<Vec<u8>> {
        self.0.rows().iter().map(Dichotomy::to_u8).collect()
    }

    fn row_errors(&self, w: Vec<f64>) -> PyResult<Vec<f64>> {
        check_len(&self.0, &w)?;
        Ok(self.0.row_errors(&w))
    }

    /// One round: `(next_weight, selected_row, eps, alpha)`.
    #[pyo3(signature = (w, tie_tol = 0.0))]
    fn step(&self, w: Vec<f64>, tie_tol: f64) -> PyResult<(Vec<f64>, usize, f64, f64)> {
        check_len(&self.0, &w)?;
        let step = a_update(&self.0, &w, tie_tol).map_err(|halt| {
            PyValueError::new_err(format!(
                "halted: {}",
                serde_json::to_string(&halt).unwrap_or_default()
            ))
        })?;
        Ok((
            step.weight.into_inner(),
            step.selection.row,
            step.eps,
            step.alpha,
        ))
    }

    /// Preimage segments of `w` under the map, one per row that can reach it.
    fn preimage(&self, w: Vec<f64>) -> PyResult<Vec<Segment>> {
        check_len(&self.0, &w)?;
        Ok(a_inverse(&self.0, &w).into_iter().map(Segment).collect())
    }

    /// Runs `rounds` rounds from the uniform weight, or from a flat
    /// Dirichlet draw when `seed` is given.
    #[pyo3(signature = (rounds, seed = None, tie_tol = 0.0, equivalence_eps = None))]
    fn run(
        &self,
        rounds: u64,
        seed: Option<u64>,
        tie_tol: f64,
        equivalence_eps: Option<f64>,
    ) -> PyResult<Run> {
        let w1 = to_py(init_weight(&init_mode(seed), self.0.m()))?;
        self.run_inner(&w1, rounds, tie_tol, equivalence_eps)
    }

    #[pyo3(signature = (w1, rounds, tie_tol = 0.0, equivalence_eps = None))]
    fn run_from(
        &self,
        w1: Vec<f64>,
        rounds: u64,
        tie_tol: f64,
        equivalence_eps: Option<f64>,
    ) -> PyResult<Run> {
        check_len(&self.0, &w1)?;
        let w1 = to_py(WeightVector::new(w1))?;
        self.run_inner(&w1, rounds, tie_tol, equivalence_eps)
    }
}

impl PyMatrix {
    fn run_inner(
        &self,
        w1: &WeightVector,
        rounds: u64,
        tie_tol: f64,
        equivalence_eps: Option<f64>,
    ) -> PyResult<Run> {
        let options = RunOptions {
            tie_tol,
            equivalence_eps,
            ..RunOptions::default()
        };
        let (traj, halt) = to_py(optboost::run(&self.0, w1, rounds, &options, &mut []))?;
        Ok(Run { traj, halt })
    }
}

fn check_len(matrix: &optboost::DichotomyMatrix, w: &[f64]) -> PyResult<()> {
    if w.len() == matrix.m() {
        Ok(())
    } else {
        Err(PyValueError::new_err(format!(
            "weight has {} entries, the matrix has {} columns",
            w.len(),
            matrix.m()
        )))
    }
}

#[pyclass(frozen)]
struct Segment(SegmentPreimage);

#[pymethods]
impl Segment {
    #[getter]
    fn row(&self) -> usize {
        self.0.row
    }

    /// `(lo, hi)` of the allowed error parameter.
    #[getter]
    fn interval(&self) -> (f64, f64) {
        (self.0.interval.lo, self.0.interval.hi)
    }

    fn point(&self, rho: f64) -> Vec<f64> {
        self.0.point(rho)
    }

    #[pyo3(signature = (w, tol = 1e-9))]
    fn locate(&self, w: Vec<f64>, tol: f64) -> Option<f64> {
        self.0.locate(&w, tol)
    }

    fn __repr__(&self) -> String {
        format!(
            "Segment(row={}, interval=({}, {}))",
            self.0.row, self.0.interval.lo, self.0.interval.hi
        )
    }
}

/// Preimage line of `w` under the update for a single dichotomy, unclipped.
#[pyfunction]
fn t_inverse(bits: Vec<u8>, w: Vec<f64>) -> PyResult<Option<Segment>> {
    if bits.len() != w.len() {
        return Err(PyValueError::new_err("dichotomy and weight lengths differ"));
    }
    Ok(t_inverse_segment(&Dichotomy::from_u8(&bits), &w).map(Segment))
}

#[pyclass(frozen)]
struct Run {
    traj: optboost::Trajectory,
    halt: HaltReason,
}

#[pymethods]
impl Run {
    /// `completed`, `zero_error`, `no_weak_learning` or `numeric_failure`.
    #[getter]
    fn halt(&self) -> &'static str {
        self.halt.name()
    }

    fn __len__(&self) -> usize {
        self.traj.len()
    }

    #[getter]
    fn selected_rows(&self) -> Vec<usize> {
        self.traj.selected_rows().collect()
    }

    #[getter]
    fn eps(&self) -> Vec<f64> {
        self.traj.rounds.iter().map(|r| r.eps).collect()
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.traj.rounds.iter().map(|r| r.alpha).collect()
    }

    /// Gap and merged-row count per round, when tracked.
    #[getter]
    fn tie_gaps(&self) -> Vec<Option<(f64, usize)>> {
        self.traj
            .rounds
            .iter()
            .map(|r| r.tie_gap.map(|g| (g.gap, g.merged_away)))
            .collect()
    }

    #[getter]
    fn final_weight(&self) -> Vec<f64> {
        self.traj.final_weight.as_slice().to_vec()
    }

    #[getter]
    fn selection_count(&self) -> Vec<u64> {
        self.traj.selection_count.clone()
    }

    /// Normalized margins of the combined classifier.
    fn margins(&self) -> PyResult<Vec<f64>> {
        to_py(margins(&self.traj)).map(|s| s.beta)
    }
}

/// Runs a JSON experiment config; returns the summary as a JSON string.
#[pyfunction]
fn run_config(path: PathBuf) -> PyResult<String> {
    let config = to_py(ExperimentConfig::load(&path))?;
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    let outcome = to_py(run_experiment(&config, &base))?;
    serde_json::to_string(&outcome.summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn pyoptboost(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<Segment>()?;
    m.add_class::<Run>()?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(t_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
