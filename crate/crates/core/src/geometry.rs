//! Single-step preimages of the AdaBoost map.
//!
//! A point `w` with `η·w = 1/2` has the segment
//! `w(ρ) = 2ρ·w⁻ + 2(1-ρ)·w⁺` as its preimage under `η`'s update, where `w⁻`
//! and `w⁺` are the parts of `w` that `η` gets wrong and right, and
//! `err(η, w(ρ)) = ρ`. The true map's preimage is the union of these
//! segments, each clipped to the parameters where AdaSelect picks `η`.

use serde::Serialize;

use crate::dichotomy::Dichotomy;
use crate::dynamics::{a_update, err, l1_distance, select_from_errors};
use crate::error::{Error, Result};
use crate::stumps::DichotomyMatrix;

/// Tolerance on `|η·w - 1/2|` for a row to have a preimage segment.
pub const HALF_ERROR_TOL: f64 = 1e-10;

/// Split of `w` into the mass `eta` misclassifies (`w⁻`) and the rest (`w⁺`).
pub fn decompose(w: &[f64], eta: &Dichotomy) -> Result<(Vec<f64>, Vec<f64>)> {
    if w.len() != eta.len() {
        return Err(Error::DimensionMismatch {
            expected: eta.len(),
            actual: w.len(),
        });
    }
    let minus = w
        .iter()
        .enumerate()
        .map(|(i, &x)| if eta.get(i) { x } else { 0.0 })
        .collect();
    let plus = w
        .iter()
        .enumerate()
        .map(|(i, &x)| if eta.get(i) { 0.0 } else { x })
        .collect();
    Ok((minus, plus))
}

/// An interval of the segment parameter ρ with open/closed ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RhoInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl RhoInterval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn contains(&self, rho: f64) -> bool {
        let above = if self.lo_open {
            rho > self.lo
        } else {
            rho >= self.lo
        };
        let below = if self.hi_open {
            rho < self.hi
        } else {
            rho <= self.hi
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    /// `count` evenly spaced points strictly inside the interval.
    pub fn interior_samples(&self, count: usize) -> Vec<f64> {
        (0..count)
            .map(|k| self.lo + self.width() * (k as f64 + 0.5) / count as f64)
            .collect()
    }

    /// Intersects with `{ρ : slope·ρ ≤ bound}` (strict when `strict`).
    fn restrict(&mut self, slope: f64, bound: f64, strict: bool) {
        const FLAT: f64 = 1e-12;
        if slope.abs() <= FLAT {
            let ok = if strict { bound > FLAT } else { bound >= -FLAT };
            if !ok {
                self.hi = f64::NEG_INFINITY;
                self.hi_open = true;
            }
        } else if slope > 0.0 {
            let cut = bound / slope;
            if cut < self.hi || (cut == self.hi && strict) {
                self.hi = cut;
                self.hi_open = strict;
            }
        } else {
            let cut = bound / slope;
            if cut > self.lo || (cut == self.lo && strict) {
                self.lo = cut;
                self.lo_open = strict;
            }
        }
    }
}

/// Affine error profile `slope·ρ + intercept` of some row along a segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Affine {
    pub slope: f64,
    pub intercept: f64,
}

impl Affine {
    pub fn at(&self, rho: f64) -> f64 {
        self.slope * rho + self.intercept
    }
}

/// One component of a preimage: points `2ρ·w⁻ + 2(1-ρ)·w⁺` for ρ in
/// `interval`, all mapped onto the same image by `row`'s update.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentPreimage {
    pub row: usize,
    pub interval: RhoInterval,
    #[serde(skip)]
    pub w_minus: Vec<f64>,
    #[serde(skip)]
    pub w_plus: Vec<f64>,
    #[serde(skip)]
    eta: Dichotomy,
}

impl SegmentPreimage {
    pub fn point(&self, rho: f64) -> Vec<f64> {
        self.w_minus
            .iter()
            .zip(&self.w_plus)
            .map(|(m, p)| 2.0 * rho * m + 2.0 * (1.0 - rho) * p)
            .collect()
    }

    pub fn endpoints(&self) -> (Vec<f64>, Vec<f64>) {
        (self.point(self.interval.lo), self.point(self.interval.hi))
    }

    pub fn dichotomy(&self) -> &Dichotomy {
        &self.eta
    }

    /// The parameter of `w` when it lies on the (unclipped) segment line
    /// within `tol` in the L1 metric.
    pub fn locate(&self, w: &[f64], tol: f64) -> Option<f64> {
        let rho = err(&self.eta, w);
        (l1_distance(&self.point(rho), w) <= tol).then_some(rho)
    }

    /// Serializable form including the endpoint vectors.
    pub fn dump(&self) -> SegmentDump {
        let (start, end) = self.endpoints();
        SegmentDump {
            row: self.row,
            interval: self.interval,
            start,
            end,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentDump {
    pub row: usize,
    pub interval: RhoInterval,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

/// Preimage of `w` under `eta`'s update: the full segment over `[0, 1]`, or
/// `None` when `eta·w` is not one half. The endpoints belong only to the
/// closure, since the update is undefined at error 0 and 1.
pub fn t_inverse(eta: &Dichotomy, w: &[f64]) -> Option<SegmentPreimage> {
    t_inverse_row(eta, w, 0)
}

fn t_inverse_row(eta: &Dichotomy, w: &[f64], row: usize) -> Option<SegmentPreimage> {
    if (err(eta, w) - 0.5).abs() > HALF_ERROR_TOL {
        return None;
    }
    let (w_minus, w_plus) = decompose(w, eta).ok()?;
    Some(SegmentPreimage {
        row,
        interval: RhoInterval::closed(0.0, 1.0),
        w_minus,
        w_plus,
        eta: eta.clone(),
    })
}

/// Error of `other` along `seg`:
/// `2ρ(other·w⁻ - other·w⁺) + 2(other·w⁺)`.
pub fn err_along(other: &Dichotomy, seg: &SegmentPreimage) -> Affine {
    let on_minus = err(other, &seg.w_minus);
    let on_plus = err(other, &seg.w_plus);
    Affine {
        slope: 2.0 * (on_minus - on_plus),
        intercept: 2.0 * on_plus,
    }
}

/// Preimage of `w` under the AdaBoost map, as clipped segments.
///
/// On the segment of row `j`, row `j` has error ρ. AdaSelect picks `j` iff
/// ρ is strictly below the error of every lower-index row and at most that of
/// every higher-index row. Each such condition is a half-line in ρ. ρ = 0
/// and ρ = 1 are excluded.
pub fn a_inverse(matrix: &DichotomyMatrix, w: &[f64]) -> Vec<SegmentPreimage> {
    let mut out = Vec::new();
    for (j, eta) in matrix.rows().iter().enumerate() {
        let Some(mut seg) = t_inverse_row(eta, w, j) else {
            continue;
        };
        let mut interval = RhoInterval {
            lo: 0.0,
            hi: 1.0,
            lo_open: true,
            hi_open: true,
        };
        for (k, other) in matrix.rows().iter().enumerate() {
            if k == j {
                continue;
            }
            // ρ ≤ slope·ρ + intercept  ⇔  (1 - slope)·ρ ≤ intercept
            let profile = err_along(other, &seg);
            interval.restrict(1.0 - profile.slope, profile.intercept, k < j);
            if interval.is_empty() {
                break;
            }
        }
        if !interval.is_empty() {
            seg.interval = interval;
            out.push(seg);
        }
    }
    out
}

/// Where `w` sits in the partition of the simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub selected: usize,
    pub ties: Vec<usize>,
    /// Every row has positive error.
    pub in_sigma0: bool,
}

impl Region {
    /// More than one row attains the minimum: a point where the map jumps.
    pub fn is_tie_point(&self) -> bool {
        self.ties.len() > 1
    }
}

pub fn region_of(matrix: &DichotomyMatrix, w: &[f64]) -> Region {
    let errors = matrix.row_errors(w);
    let selection = select_from_errors(&errors, 0.0);
    Region {
        selected: selection.row,
        ties: selection.ties,
        in_sigma0: errors.iter().all(|&e| e > 0.0),
    }
}

/// Outcome of checking the error-doubling bound on sampled preimages.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Epsilon0Report {
    pub points_checked: usize,
    pub comparisons: usize,
    /// Largest `err(η', w') / err(η', w)` seen (rows with zero error at `w`
    /// are skipped in the ratio but still checked against the bound).
    pub max_ratio: f64,
    /// `(row, ρ, err at preimage, err at image)` for every bound violation.
    pub violations: Vec<(usize, f64, f64, f64)>,
    /// Violations of `err(selected, w') ≤ 2·min_η err(η, w)`.
    pub selected_violations: usize,
}

impl Epsilon0Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.selected_violations == 0
    }
}

/// Checks `err(η', w') ≤ 2·err(η', w)` for every row `η'` at `samples`
/// points spread evenly over the preimage segments of `w`.
pub fn epsilon0_check(
    matrix: &DichotomyMatrix,
    w: &[f64],
    samples: usize,
) -> Result<Epsilon0Report> {
    const SLACK: f64 = 1e-12;
    let segments = a_inverse(matrix, w);
    if segments.is_empty() {
        return Err(Error::Domain("point has no preimage".into()));
    }
    let image_errors = matrix.row_errors(w);
    let image_min = image_errors.iter().copied().fold(f64::INFINITY, f64::min);

    let total_width: f64 = segments.iter().map(|s| s.interval.width()).sum();
    let mut report = Epsilon0Report {
        points_checked: 0,
        comparisons: 0,
        max_ratio: 0.0,
        violations: Vec::new(),
        selected_violations: 0,
    };
    for seg in &segments {
        // Share samples by width; every segment gets at least one.
        let share = if total_width > 0.0 {
            ((samples as f64) * seg.interval.width() / total_width).round() as usize
        } else {
            samples / segments.len()
        };
        let count = share.max(1).min(samples.max(1));
        for rho in seg.interval.interior_samples(count) {
            let pre = seg.point(rho);
            let pre_errors = matrix.row_errors(&pre);
            report.points_checked += 1;
            for (k, (&before, &after)) in pre_errors.iter().zip(&image_errors).enumerate() {
                report.comparisons += 1;
                if after > 0.0 {
                    report.max_ratio = report.max_ratio.max(before / after);
                }
                if before > 2.0 * after + SLACK {
                    report.violations.push((k, rho, before, after));
                }
            }
            let selected = select_from_errors(&pre_errors, 0.0).row;
            if pre_errors[selected] > 2.0 * image_min + SLACK {
                report.selected_violations += 1;
            }
        }
    }
    Ok(report)
}

/// True when every sampled interior point of every segment maps onto `w`
/// within `tol` under the AdaBoost map.
pub fn forward_check(
    matrix: &DichotomyMatrix,
    w: &[f64],
    segments: &[SegmentPreimage],
    samples: usize,
    tol: f64,
) -> bool {
    segments.iter().all(|seg| {
        seg.interval
            .interior_samples(samples)
            .into_iter()
            .all(|rho| {
                match a_update(matrix, &seg.point(rho), 0.0) {
                    Ok(step) => {
                        step.selection.row == seg.row && l1_distance(&step.weight, w) <= tol
                    }
                    // ρ = 1/2 is a fixed point of the map but halts the runner.
                    Err(_) => false,
                }
            })
    })
}
