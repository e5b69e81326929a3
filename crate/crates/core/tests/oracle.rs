//! Checks against independent computations: a textbook AdaBoost loop, a
//! Monte Carlo estimate of the simplex draw, the unpruned hypothesis space
//! and the closed form of the three-point cycle.

use optboost::experiment::{synth, SynthKind, SynthParams};
use optboost::{
    build_matrix, dichotomy_of, enumerate_stumps, init_weight, run, Dataset, DichotomyMatrix,
    InitMode, RoundView, RunOptions, WeightVector,
};

fn weights_per_round(matrix: &DichotomyMatrix, w1: &WeightVector, rounds: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut hook = |v: &RoundView<'_>| out.push(v.weight.to_vec());
    run(matrix, w1, rounds, &RunOptions::default(), &mut [&mut hook]).unwrap();
    out
}

/// exp(-α y h(x)) reweighting with explicit normalization, minimum error,
/// first index on ties.
fn textbook(ds: &Dataset, include_constant: bool, rounds: usize) -> Vec<Vec<f64>> {
    let stumps = enumerate_stumps(ds, include_constant).unwrap();
    let m = ds.len();
    let mut d = vec![1.0 / m as f64; m];
    let mut out = Vec::new();
    for _ in 0..rounds {
        let errors: Vec<f64> = stumps
            .iter()
            .map(|h| {
                (0..m)
                    .filter(|&i| h.predict(ds.row(i)) != ds.labels()[i])
                    .map(|i| d[i])
                    .sum()
            })
            .collect();
        let k = (0..errors.len())
            .min_by(|&a, &b| errors[a].partial_cmp(&errors[b]).unwrap())
            .unwrap();
        let e = errors[k];
        let a = 0.5 * ((1.0 - e) / e).ln();
        for (i, di) in d.iter_mut().enumerate() {
            let yh = f64::from(ds.labels()[i] * stumps[k].predict(ds.row(i)));
            *di *= (-a * yh).exp();
        }
        let z: f64 = d.iter().sum();
        d.iter_mut().for_each(|x| *x /= z);
        out.push(d.clone());
    }
    out
}

fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn matches_textbook_adaboost_on_rudin3() {
    let ds = synth(SynthKind::Rudin3, &SynthParams::default(), 0).unwrap();
    let matrix = build_matrix(&ds, &enumerate_stumps(&ds, true).unwrap()).unwrap();
    let ours = weights_per_round(&matrix, &WeightVector::uniform(3), 10);
    assert!(max_gap(&ours, &textbook(&ds, true, 10)) <= 1e-12);
}

#[test]
fn matches_textbook_adaboost_on_gaussians() {
    let p = SynthParams {
        m: 12,
        ..SynthParams::default()
    };
    let ds = synth(SynthKind::TwoGaussians, &p, 3).unwrap();
    let matrix = build_matrix(&ds, &enumerate_stumps(&ds, false).unwrap()).unwrap();
    let ours = weights_per_round(&matrix, &WeightVector::uniform(ds.len()), 10);
    assert!(max_gap(&ours, &textbook(&ds, false, 10)) <= 1e-12);
}

#[test]
fn pruning_does_not_change_the_orbit() {
    let ds = synth(SynthKind::TwoGaussians, &SynthParams::default(), 1).unwrap();
    let stumps = enumerate_stumps(&ds, false).unwrap();
    let full = DichotomyMatrix::new(stumps.iter().map(|h| dichotomy_of(h, &ds)).collect()).unwrap();
    let pruned = build_matrix(&ds, &stumps).unwrap();
    assert!(pruned.n_rows() < full.n_rows());
    let w1 = WeightVector::uniform(ds.len());
    let a = weights_per_round(&full, &w1, 200);
    let b = weights_per_round(&pruned, &w1, 200);
    assert!(max_gap(&a, &b) <= 1e-12);
}

#[test]
fn random_simplex_mean_is_uniform() {
    let draws = 10_000;
    let mut mean = [0.0; 3];
    for seed in 0..draws {
        let w = init_weight(&InitMode::RandomSimplex { seed }, 3).unwrap();
        for (acc, x) in mean.iter_mut().zip(w.as_slice()) {
            *acc += x / draws as f64;
        }
    }
    for x in mean {
        assert!((x - 1.0 / 3.0).abs() < 0.01, "{mean:?}");
    }
}

#[test]
fn rudin3_settles_on_the_symmetric_cycle() {
    // Each row of the cycle sees the others' weights rotated, which forces
    // 2ε² - 3ε + 1/2 = 0.
    let target = (3.0 - 5f64.sqrt()) / 4.0;
    let ds = synth(SynthKind::Rudin3, &SynthParams::default(), 0).unwrap();
    let matrix = build_matrix(&ds, &enumerate_stumps(&ds, true).unwrap()).unwrap();
    let w1 = init_weight(&InitMode::RandomSimplex { seed: 11 }, 3).unwrap();
    let (traj, halt) = run(&matrix, &w1, 500, &RunOptions::default(), &mut []).unwrap();
    assert!(halt.is_completed());
    for r in &traj.rounds[traj.len() - 6..] {
        assert!((r.eps - target).abs() < 1e-9, "{} vs {target}", r.eps);
    }
    let rows: Vec<usize> = traj.selected_rows().collect();
    let tail = &rows[rows.len() - 6..];
    assert_eq!(tail[..3], tail[3..]);
    let mut distinct = tail[..3].to_vec();
    distinct.sort();
    assert_eq!(distinct, vec![0, 1, 2]);
}
