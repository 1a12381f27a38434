#![allow(dead_code)]

use infopomdp::{Matrix, PomdpModel, RewardSpec, UncertaintyKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Column-stochastic `rows × cols` matrix with entries bounded away from zero.
pub fn stochastic(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f64> {
    let mut m = Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>() + 0.05);
    for j in 0..cols {
        let c = m.column_sum(j);
        for i in 0..rows {
            m.row_mut(i)[j] /= c;
        }
    }
    m
}

pub fn random_reward(rng: &mut ChaCha8Rng, s: usize, a: usize, kind: UncertaintyKind) -> RewardSpec<f64> {
    RewardSpec {
        state_reward: Matrix::from_fn(a, s, |_, _| rng.random_range(-2.0..2.0)),
        weights: (0..a).map(|_| rng.random_range(0.0..2.0)).collect(),
        uncertainty: kind,
        epsilon: 0.01,
    }
}

pub fn random_model(rng: &mut ChaCha8Rng, s: usize, a: usize, z: usize, kind: UncertaintyKind) -> PomdpModel<f64> {
    let ts = (0..a).map(|_| stochastic(rng, s, s)).collect();
    let os = (0..a).map(|_| stochastic(rng, z, s)).collect();
    let gamma = rng.random_range(0.5..0.99);
    let reward = random_reward(rng, s, a, kind);
    PomdpModel::new(ts, os, gamma, reward).expect("random model is valid")
}

/// A random model of a random size in `2..=max` per dimension.
pub fn random_small_model(rng: &mut ChaCha8Rng, max: usize) -> PomdpModel<f64> {
    let kinds = [UncertaintyKind::None, UncertaintyKind::Shannon, UncertaintyKind::RenyiQuadratic];
    let s = rng.random_range(2..=max);
    let a = rng.random_range(2..=max);
    let z = rng.random_range(2..=max);
    let kind = kinds[rng.random_range(0..kinds.len())];
    random_model(rng, s, a, z, kind)
}

pub fn write_temp(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("temp file");
    path
}

/// Runs the CLI in-process and returns `(code, stdout, stderr)`.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["infopomdp"];
    full.extend_from_slice(args);
    let code = infopomdp::cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
