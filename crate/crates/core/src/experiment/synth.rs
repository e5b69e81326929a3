//! Small synthetic datasets for desk-scale experiments.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// Two overlapping isotropic Gaussians, labels alternating `+1, -1, ...`.
    TwoGaussians,
    /// Three examples whose pruned stump matrix is the three singletons.
    /// Needs the constant hypotheses (`include_constant`).
    Rudin3,
    /// Jittered grid on the unit square labelled by an off-center XOR.
    XorGrid,
}

impl SynthKind {
    pub const ALL: [SynthKind; 3] = [
        SynthKind::TwoGaussians,
        SynthKind::Rudin3,
        SynthKind::XorGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SynthKind::TwoGaussians => "two_gaussians",
            SynthKind::Rudin3 => "rudin3",
            SynthKind::XorGrid => "xor_grid",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown synthetic dataset {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub m: usize,
    pub dim: usize,
    /// Distance between the Gaussian means.
    pub separation: f64,
    /// Where the XOR boundary cuts each axis.
    pub xor_cut: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            m: 200,
            dim: 2,
            separation: 1.0,
            xor_cut: 0.37,
        }
    }
}

pub fn synth(kind: SynthKind, params: &SynthParams, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        SynthKind::TwoGaussians => two_gaussians(params, &mut rng),
        SynthKind::Rudin3 => Dataset::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]],
            vec![1, 1, -1],
        ),
        SynthKind::XorGrid => xor_grid(params, &mut rng),
    }
}

fn two_gaussians(p: &SynthParams, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    if p.m < 2 || p.dim == 0 || !(p.separation >= 0.0 && p.separation.is_finite()) {
        return Err(Error::Config(format!(
            "two_gaussians needs m >= 2, dim >= 1 and a finite separation >= 0, got {p:?}"
        )));
    }
    // Means at ±(separation/2) along the diagonal.
    let offset = p.separation / 2.0 / (p.dim as f64).sqrt();
    let mut rows = Vec::with_capacity(p.m);
    let mut labels = Vec::with_capacity(p.m);
    for i in 0..p.m {
        let y: i8 = if i % 2 == 0 { 1 } else { -1 };
        let shift = f64::from(y) * offset;
        rows.push(
            (0..p.dim)
                .map(|_| shift + rng.sample::<f64, _>(StandardNormal))
                .collect(),
        );
        labels.push(y);
    }
    Dataset::new(rows, labels)
}

fn xor_grid(p: &SynthParams, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    if p.m < 4 || !(p.xor_cut > 0.0 && p.xor_cut < 1.0) {
        return Err(Error::Config(format!(
            "xor_grid needs m >= 4 and xor_cut in (0, 1), got {p:?}"
        )));
    }
    let side = (p.m as f64).sqrt().ceil() as usize;
    let mut rows = Vec::with_capacity(p.m);
    let mut labels = Vec::with_capacity(p.m);
    for cell in 0..p.m {
        let (r, c) = (cell / side, cell % side);
        let x = (c as f64 + rng.random::<f64>()) / side as f64;
        let y = (r as f64 + rng.random::<f64>()) / side as f64;
        labels.push(if (x < p.xor_cut) != (y < p.xor_cut) {
            1
        } else {
            -1
        });
        rows.push(vec![x, y]);
    }
    Dataset::new(rows, labels)
}
