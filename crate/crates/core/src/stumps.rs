//! Decision-stump hypothesis space and its reduction to the dichotomy matrix.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dichotomy::{lane_sum, masked_dot, Dichotomy};
use crate::error::{Error, Result};

/// `predict(x) = polarity` if `x[feature_index] > threshold`, else `-polarity`.
///
/// A threshold of `-inf` gives the constant hypothesis `polarity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StumpHypothesis {
    pub feature_index: usize,
    #[serde(with = "threshold_serde")]
    pub threshold: f64,
    pub polarity: i8,
}

impl StumpHypothesis {
    pub fn new(feature_index: usize, threshold: f64, polarity: i8) -> Self {
        debug_assert!(polarity == 1 || polarity == -1);
        Self {
            feature_index,
            threshold,
            polarity,
        }
    }

    pub fn constant(polarity: i8) -> Self {
        Self::new(0, f64::NEG_INFINITY, polarity)
    }

    pub fn is_constant(&self) -> bool {
        self.threshold == f64::NEG_INFINITY
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> i8 {
        if x[self.feature_index] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }

    pub fn flipped(&self) -> Self {
        Self {
            polarity: -self.polarity,
            ..*self
        }
    }
}

mod threshold_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &f64, s: S) -> Result<S::Ok, S::Error> {
        if t.is_finite() {
            s.serialize_f64(*t)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

/// All stumps with thresholds at midpoints between consecutive distinct
/// values of each feature, ordered by feature, then threshold, then polarity
/// (+1 first). Constant hypotheses, when enabled, come first.
pub fn enumerate_stumps(ds: &Dataset, include_constant: bool) -> Result<Vec<StumpHypothesis>> {
    let mut out = Vec::new();
    if include_constant {
        out.push(StumpHypothesis::constant(1));
        out.push(StumpHypothesis::constant(-1));
    }
    for j in 0..ds.dim() {
        let mut values: Vec<f64> = (0..ds.len()).map(|i| ds.feature(i, j)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = pair[0] + (pair[1] - pair[0]) / 2.0;
            out.push(StumpHypothesis::new(j, threshold, 1));
            out.push(StumpHypothesis::new(j, threshold, -1));
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyHypothesisSpace);
    }
    Ok(out)
}

/// Bit `i` is set iff `h` misclassifies example `i`.
pub fn dichotomy_of(h: &StumpHypothesis, ds: &Dataset) -> Dichotomy {
    let labels = ds.labels();
    Dichotomy::from_fn(ds.len(), |i| h.predict(ds.row(i)) != labels[i])
}

/// The error matrix: one row per kept dichotomy, with an optional
/// representative hypothesis per row.
#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyMatrix {
    m: usize,
    rows: Vec<Dichotomy>,
    dense: Vec<f64>,
    representatives: Option<Vec<StumpHypothesis>>,
}

impl DichotomyMatrix {
    /// Wraps rows as given, without deduplication or pruning.
    pub fn new(rows: Vec<Dichotomy>) -> Result<Self> {
        Self::build(rows, None)
    }

    pub fn with_representatives(
        rows: Vec<Dichotomy>,
        representatives: Vec<StumpHypothesis>,
    ) -> Result<Self> {
        if representatives.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                actual: representatives.len(),
            });
        }
        Self::build(rows, Some(representatives))
    }

    /// Convenience constructor from 0/1 rows.
    pub fn from_u8_rows(rows: &[Vec<u8>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| Dichotomy::from_u8(r)).collect())
    }

    fn build(rows: Vec<Dichotomy>, representatives: Option<Vec<StumpHypothesis>>) -> Result<Self> {
        let m = match rows.first() {
            Some(r) => r.len(),
            None => return Err(Error::EmptyHypothesisSpace),
        };
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: bad.len(),
            });
        }
        let dense = rows
            .iter()
            .flat_map(|r| r.iter().map(|b| if b { 1.0 } else { 0.0 }))
            .collect();
        Ok(Self {
            m,
            rows,
            dense,
            representatives,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of training examples.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, k: usize) -> &Dichotomy {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Dichotomy] {
        &self.rows
    }

    pub fn representatives(&self) -> Option<&[StumpHypothesis]> {
        self.representatives.as_deref()
    }

    /// `err(row k, w) = row_k · w`.
    #[inline]
    pub fn row_error(&self, k: usize, w: &[f64]) -> f64 {
        masked_dot(&self.dense[k * self.m..(k + 1) * self.m], w)
    }

    /// Errors of every row under `w`, written into `out`.
    pub fn row_errors_into(&self, w: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(w.len(), self.m);
        out.clear();
        out.extend(
            self.dense
                .chunks_exact(self.m)
                .map(|mask| masked_dot(mask, w)),
        );
    }

    pub fn row_errors(&self, w: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_rows());
        self.row_errors_into(w, &mut out);
        out
    }

    /// The matrix made of the rows at `keep`, in that order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let rows = keep.iter().map(|&k| self.rows[k].clone()).collect();
        let reps = self
            .representatives
            .as_ref()
            .map(|r| keep.iter().map(|&k| r[k]).collect());
        Self::build(rows, reps).expect("selection of a valid matrix")
    }

    /// One line per row, `m` comma-separated bits.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for row in &self.rows {
            let bits: Vec<&str> = row.iter().map(|b| if b { "1" } else { "0" }).collect();
            out.push_str(&bits.join(","));
            out.push('\n');
        }
        let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn save_representatives_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let reps = self.representatives.as_deref().unwrap_or(&[]);
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(f, reps)?;
        Ok(())
    }
}

/// Builds the deduplicated, pruned matrix. Each row keeps the first stump (in
/// the given order) that produced it. Refuses when a stump makes no mistakes.
pub fn build_matrix(ds: &Dataset, stumps: &[StumpHypothesis]) -> Result<DichotomyMatrix> {
    collect_rows(ds, stumps, false)
}

/// Like [`build_matrix`], but a perfect stump is kept. Pruning then leaves
/// its all-zero row alone and the dynamics halts on the first round.
pub fn build_matrix_lenient(ds: &Dataset, stumps: &[StumpHypothesis]) -> Result<DichotomyMatrix> {
    collect_rows(ds, stumps, true)
}

fn collect_rows(
    ds: &Dataset,
    stumps: &[StumpHypothesis],
    allow_perfect: bool,
) -> Result<DichotomyMatrix> {
    if stumps.is_empty() {
        return Err(Error::EmptyHypothesisSpace);
    }
    let mut seen: HashMap<Dichotomy, usize> = HashMap::new();
    let mut rows = Vec::new();
    let mut reps = Vec::new();
    for h in stumps {
        let row = dichotomy_of(h, ds);
        if row.is_all_zero() && !allow_perfect {
            return Err(Error::PerfectHypothesis { stump: *h });
        }
        if !seen.contains_key(&row) {
            seen.insert(row.clone(), rows.len());
            rows.push(row);
            reps.push(*h);
        }
    }
    Ok(prune(&DichotomyMatrix::with_representatives(rows, reps)?))
}

/// Removes every row whose misclassified set strictly contains another row's.
/// Surviving rows keep their relative order.
pub fn prune(matrix: &DichotomyMatrix) -> DichotomyMatrix {
    let rows = matrix.rows();
    let keep: Vec<usize> = (0..rows.len())
        .filter(|&k| {
            !rows
                .iter()
                .any(|other| rows[k].is_strict_superset_of(other))
        })
        .collect();
    assert!(
        !keep.is_empty(),
        "a finite strict partial order has minimal elements"
    );
    matrix.select_rows(&keep)
}

/// Weight of the examples on which two rows disagree.
pub fn differing_mass(a: &Dichotomy, b: &Dichotomy, w: &[f64]) -> f64 {
    lane_sum(w, |i| a.get(i) != b.get(i))
}

/// `err(a, w) - err(b, w)`, summed only over the examples where the rows
/// differ. Stays accurate when the two errors agree to the last few bits.
pub fn error_difference(a: &Dichotomy, b: &Dichotomy, w: &[f64]) -> f64 {
    lane_sum(w, |i| a.get(i) && !b.get(i)) - lane_sum(w, |i| b.get(i) && !a.get(i))
}

/// Result of grouping rows that are equivalent under a weight vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeReport {
    /// For each row of the input, the index of its class representative
    /// (the lowest index in the class).
    pub survivor_of: Vec<usize>,
    /// Classes with more than one member, each sorted ascending.
    pub merged_classes: Vec<Vec<usize>>,
}

impl MergeReport {
    pub fn survivors(&self) -> Vec<usize> {
        self.survivor_of
            .iter()
            .enumerate()
            .filter(|(k, s)| *k == **s)
            .map(|(k, _)| k)
            .collect()
    }

    /// Rows absorbed into a lower-index representative.
    pub fn merged_away(&self) -> usize {
        self.survivor_of
            .iter()
            .enumerate()
            .filter(|(k, s)| *k != **s)
            .count()
    }
}

/// Classes of the transitive closure of "differing mass below `eps`".
///
/// Examples of weight at least `eps` must agree within a class, so rows are
/// first bucketed by their bits on those examples. When the remaining light
/// mass is itself below `eps`, the buckets are exactly the classes; otherwise
/// pairs inside each bucket are compared directly.
pub fn merge_classes(matrix: &DichotomyMatrix, w: &[f64], eps: f64) -> MergeReport {
    let n = matrix.n_rows();
    let mut parent: Vec<usize> = (0..n).collect();
    if eps > 0.0 && n > 1 {
        let heavy = Dichotomy::from_fn(matrix.m(), |i| w[i] >= eps);
        let light_mass = lane_sum(w, |i| w[i] < eps);

        let mut buckets: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
        for (k, row) in matrix.rows().iter().enumerate() {
            buckets
                .entry(row.masked_words(heavy.words()))
                .or_default()
                .push(k);
        }
        for members in buckets.values() {
            if members.len() < 2 {
                continue;
            }
            if light_mass < eps {
                for &k in &members[1..] {
                    union(&mut parent, members[0], k);
                }
            } else {
                for (a, &ka) in members.iter().enumerate() {
                    for &kb in &members[a + 1..] {
                        if differing_mass(matrix.row(ka), matrix.row(kb), w) < eps {
                            union(&mut parent, ka, kb);
                        }
                    }
                }
            }
        }
    }
    let survivor_of: Vec<usize> = (0..n).map(|k| find(&mut parent, k)).collect();
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &s) in survivor_of.iter().enumerate() {
        classes[s].push(k);
    }
    let merged_classes = classes.into_iter().filter(|c| c.len() > 1).collect();
    MergeReport {
        survivor_of,
        merged_classes,
    }
}

/// Replaces each equivalence class by its lowest-index row.
pub fn merge_equivalent(
    matrix: &DichotomyMatrix,
    w: &[f64],
    eps: f64,
) -> (DichotomyMatrix, MergeReport) {
    let report = merge_classes(matrix, w, eps);
    (matrix.select_rows(&report.survivors()), report)
}

// Union-find whose root is always the smallest index of its set.
fn find(parent: &mut [usize], mut k: usize) -> usize {
    while parent[k] != k {
        parent[k] = parent[parent[k]];
        k = parent[k];
    }
    k
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra < rb {
        parent[rb] = ra;
    } else if rb < ra {
        parent[ra] = rb;
    }
}
