//! Finite-horizon search over the reachable-belief tree.
//!
//! [`expectimax`] enumerates every action and every observation with
//! positive likelihood. [`branch_and_bound`] runs the same recursion but
//! expands only the actions between the myopic lower and upper policy
//! bounds at each belief node. Both share one implementation, so a
//! certificate without vectors reproduces expectimax bit for bit.
//!
//! A depth-`d` search has belief nodes on layers `0..d`; layer `d − 1`
//! holds the leaves, valued by the best one-step reward over all actions.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::filter::{self, Belief, ZERO_LIKELIHOOD};
use crate::mlr::{BoundCertificate, PolicyBounds};
use crate::model::PomdpModel;
use crate::rewards;
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult<T> {
    /// Smallest maximizer among the expanded root actions.
    pub best_action: usize,
    pub value: T,
    /// `(action, Q)` for every action expanded at the root.
    pub root_values: Vec<(usize, T)>,
    /// Belief nodes visited, root included.
    pub expanded: u64,
    /// Belief nodes inside skipped subtrees, counted at full size.
    pub pruned: u64,
}

impl<T> SearchResult<T> {
    /// Share of non-root nodes never generated.
    pub fn pruned_fraction(&self) -> f64 {
        let total = (self.expanded + self.pruned).saturating_sub(1);
        if total == 0 {
            0.0
        } else {
            self.pruned as f64 / total as f64
        }
    }
}

/// `Σ_{i<depth} (A·Z)^i`: belief nodes in an unpruned depth-`depth` tree.
pub fn full_tree_size(num_actions: usize, num_observations: usize, depth: usize) -> u64 {
    let branching = (num_actions as u64).saturating_mul(num_observations as u64);
    let mut layer = 1u64;
    let mut total = 0u64;
    for _ in 0..depth {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(branching);
    }
    total
}

#[derive(Clone, Copy, Default)]
struct Counts {
    expanded: u64,
    pruned: u64,
}

impl Counts {
    fn add(&mut self, other: Counts) {
        self.expanded = self.expanded.saturating_add(other.expanded);
        self.pruned = self.pruned.saturating_add(other.pruned);
    }
}

struct Search<'a, T, R> {
    model: &'a PomdpModel<T>,
    reward: R,
    terminal: Option<&'a [T]>,
    bounds: Option<&'a PolicyBounds<'a, T>>,
    /// `subtree[k]` = full node count of a depth-`k` tree.
    subtree: Vec<u64>,
}

impl<T: Scalar, R: Fn(&[T], usize) -> T + Sync> Search<'_, T, R> {
    fn actions(&self, b: &[T]) -> (usize, usize) {
        match self.bounds {
            Some(bounds) if !bounds.is_unrestricted() => {
                let iv = bounds.interval(b);
                (iv.lower, iv.upper)
            }
            _ => (0, self.model.num_actions() - 1),
        }
    }

    fn leaf_q(&self, b: &[T], a: usize) -> T {
        let q = (self.reward)(b, a);
        match self.terminal {
            Some(v) => {
                let predicted = self.model.transition(a).mul_vec(b);
                q + self.model.discount() * scalar::dot(v, &predicted)
            }
            None => q,
        }
    }

    fn live_observations(&self, b: &[T], a: usize) -> u64 {
        let predicted = self.model.transition(a).mul_vec(b);
        self.model
            .observation(a)
            .mul_vec(&predicted)
            .into_iter()
            .filter(|&eta| eta > T::of(ZERO_LIKELIHOOD))
            .count() as u64
    }

    /// `ρ(b,a) + γ Σ_z η(z) V_{depth−1}(τ(b,a,z))` for `depth ≥ 2`.
    fn q(&self, b: &[T], a: usize, depth: usize) -> (T, Counts) {
        let predicted = self.model.transition(a).mul_vec(b);
        let obs = self.model.observation(a);
        let mut counts = Counts::default();
        let mut future = T::zero();
        let mut posterior = vec![T::zero(); b.len()];
        for z in 0..obs.rows() {
            let row = obs.row(z);
            let mut eta = T::zero();
            for ((p, &o), &x) in posterior.iter_mut().zip(row).zip(&predicted) {
                *p = o * x;
                eta = eta + *p;
            }
            if eta <= T::of(ZERO_LIKELIHOOD) {
                continue;
            }
            posterior.iter_mut().for_each(|p| *p = *p / eta);
            let (v, c) = self.value(&posterior, depth - 1);
            counts.add(c);
            future = future + eta * v;
        }
        ((self.reward)(b, a) + self.model.discount() * future, counts)
    }

    fn expand(&self, b: &[T], depth: usize, parallel: bool) -> (Vec<(usize, T)>, Counts) {
        let mut counts = Counts {
            expanded: 1,
            pruned: 0,
        };
        if depth == 1 {
            let vals = (0..self.model.num_actions()).map(|a| (a, self.leaf_q(b, a))).collect();
            return (vals, counts);
        }
        let (lo, hi) = self.actions(b);
        for a in (0..lo).chain(hi + 1..self.model.num_actions()) {
            let skipped = self.live_observations(b, a).saturating_mul(self.subtree[depth - 1]);
            counts.pruned = counts.pruned.saturating_add(skipped);
        }
        let results: Vec<(usize, T, Counts)> = if parallel {
            (lo..=hi)
                .into_par_iter()
                .map(|a| {
                    let (q, c) = self.q(b, a, depth);
                    (a, q, c)
                })
                .collect()
        } else {
            (lo..=hi)
                .map(|a| {
                    let (q, c) = self.q(b, a, depth);
                    (a, q, c)
                })
                .collect()
        };
        let mut vals = Vec::with_capacity(results.len());
        for (a, q, c) in results {
            counts.add(c);
            vals.push((a, q));
        }
        (vals, counts)
    }

    fn value(&self, b: &[T], depth: usize) -> (T, Counts) {
        let (vals, counts) = self.expand(b, depth, false);
        (argmax(&vals).1, counts)
    }

    fn root(&self, b: &[T], depth: usize) -> SearchResult<T> {
        let (root_values, counts) = self.expand(b, depth, true);
        let (best_action, value) = argmax(&root_values);
        SearchResult {
            best_action,
            value,
            root_values,
            expanded: counts.expanded,
            pruned: counts.pruned,
        }
    }
}

/// First maximizer; the values are never empty.
fn argmax<T: Scalar>(vals: &[(usize, T)]) -> (usize, T) {
    let mut best = vals[0];
    for &(a, v) in &vals[1..] {
        if v > best.1 {
            best = (a, v);
        }
    }
    best
}

fn run<'a, T: Scalar, R: Fn(&[T], usize) -> T + Sync>(
    model: &'a PomdpModel<T>,
    b: &Belief<T>,
    depth: usize,
    terminal: Option<&'a [T]>,
    bounds: Option<&'a PolicyBounds<'a, T>>,
    reward: R,
) -> SearchResult<T> {
    assert!(depth >= 1, "search depth must be at least 1");
    let (a, z) = (model.num_actions(), model.num_observations());
    let search = Search {
        model,
        reward,
        terminal,
        bounds,
        subtree: (0..depth).map(|k| full_tree_size(a, z, k)).collect(),
    };
    search.root(b.probs(), depth)
}

/// Exhaustive depth-`depth` search. `terminal` adds `γ vᵀ bᵃ` to every
/// leaf action value, i.e. a linear value `vᵀ b` one step past the leaves.
///
/// # Panics
/// If `depth` is zero.
pub fn expectimax<T: Scalar>(
    model: &PomdpModel<T>,
    b: &Belief<T>,
    depth: usize,
    terminal: Option<&[T]>,
) -> SearchResult<T> {
    run(model, b, depth, terminal, None, |b: &[T], a| {
        rewards::expected_reward_unchecked(model, b, a)
    })
}

/// [`expectimax`] with a caller-supplied one-step reward `reward(b, a)`.
pub fn expectimax_with_reward<T: Scalar>(
    model: &PomdpModel<T>,
    b: &Belief<T>,
    depth: usize,
    terminal: Option<&[T]>,
    reward: impl Fn(&[T], usize) -> T + Sync,
) -> SearchResult<T> {
    run(model, b, depth, terminal, None, reward)
}

/// Search restricted to the certificate's action interval at every
/// non-leaf node.
///
/// # Panics
/// If `depth` is zero.
pub fn branch_and_bound<T: Scalar>(
    model: &PomdpModel<T>,
    cert: &BoundCertificate<T>,
    b: &Belief<T>,
    depth: usize,
) -> SearchResult<T> {
    let bounds = PolicyBounds::new(model, cert);
    branch_and_bound_with(model, &bounds, b, depth)
}

/// [`branch_and_bound`] with precomputed policy bounds.
pub fn branch_and_bound_with<T: Scalar>(
    model: &PomdpModel<T>,
    bounds: &PolicyBounds<'_, T>,
    b: &Belief<T>,
    depth: usize,
) -> SearchResult<T> {
    run(model, b, depth, None, Some(bounds), |b: &[T], a| {
        rewards::expected_reward_unchecked(model, b, a)
    })
}

/// Independent per-sample seeds drawn from one master seed.
pub fn sample_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PruningRow {
    pub depth: usize,
    pub n_samples: usize,
    pub mean_pruned_frac: f64,
    pub min_pruned_frac: f64,
    pub max_pruned_frac: f64,
    pub mean_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PruningStats {
    pub rows: Vec<PruningRow>,
}

/// Runs [`branch_and_bound`] from `n_samples` uniformly drawn beliefs at
/// every depth and aggregates pruned-node fractions.
pub fn pruning_experiment<T: Scalar>(
    model: &PomdpModel<T>,
    cert: &BoundCertificate<T>,
    depths: &[usize],
    n_samples: usize,
    seed: u64,
) -> PruningStats {
    let bounds = PolicyBounds::new(model, cert);
    let beliefs: Vec<Belief<T>> = sample_seeds(seed, n_samples)
        .into_iter()
        .map(|s| filter::sample_belief(model.num_states(), s))
        .collect();
    let rows = depths
        .iter()
        .map(|&depth| {
            let runs: Vec<(f64, f64)> = beliefs
                .par_iter()
                .map(|b| {
                    let start = Instant::now();
                    let res = branch_and_bound_with(model, &bounds, b, depth);
                    (res.pruned_fraction(), start.elapsed().as_secs_f64() * 1e3)
                })
                .collect();
            let fracs: Vec<f64> = runs.iter().map(|r| r.0).collect();
            let n = runs.len().max(1) as f64;
            PruningRow {
                depth,
                n_samples,
                mean_pruned_frac: fracs.iter().sum::<f64>() / n,
                min_pruned_frac: fracs.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0),
                max_pruned_frac: fracs.iter().cloned().fold(0.0, f64::max),
                mean_ms: runs.iter().map(|r| r.1).sum::<f64>() / n,
            }
        })
        .collect();
    PruningStats { rows }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapStats {
    pub n_samples: usize,
    /// Mean of `upper − lower` in action indices.
    pub mean_width: f64,
    pub reference_depth: Option<usize>,
    /// Mean of `upper − a*` against the reference search.
    pub mean_upper_distance: Option<f64>,
    /// Mean of `a* − lower` against the reference search.
    pub mean_lower_distance: Option<f64>,
    /// Share of samples whose reference action lies inside the interval.
    pub contained_fraction: Option<f64>,
}

/// Interval widths over uniformly drawn beliefs, and distances from the
/// bounds to the depth-`reference_depth` expectimax action when given.
pub fn bound_gap_experiment<T: Scalar>(
    model: &PomdpModel<T>,
    cert: &BoundCertificate<T>,
    n_samples: usize,
    seed: u64,
    reference_depth: Option<usize>,
) -> GapStats {
    let bounds = PolicyBounds::new(model, cert);
    let rows: Vec<(f64, Option<(f64, f64, bool)>)> = sample_seeds(seed, n_samples)
        .into_par_iter()
        .map(|s| {
            let b: Belief<T> = filter::sample_belief(model.num_states(), s);
            let iv = bounds.interval(b.probs());
            let reference = reference_depth.map(|d| {
                let best = expectimax(model, &b, d, None).best_action;
                (
                    iv.upper as f64 - best as f64,
                    best as f64 - iv.lower as f64,
                    iv.contains(best),
                )
            });
            (iv.width() as f64, reference)
        })
        .collect();
    let n = rows.len().max(1) as f64;
    let mean = |f: &dyn Fn(&(f64, f64, bool)) -> f64| {
        reference_depth.map(|_| rows.iter().filter_map(|r| r.1.as_ref()).map(f).sum::<f64>() / n)
    };
    GapStats {
        n_samples,
        mean_width: rows.iter().map(|r| r.0).sum::<f64>() / n,
        reference_depth,
        mean_upper_distance: mean(&|r| r.0),
        mean_lower_distance: mean(&|r| r.1),
        contained_fraction: mean(&|r| if r.2 { 1.0 } else { 0.0 }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionPruningStats {
    pub n_samples: usize,
    pub min_frac: f64,
    pub mean_frac: f64,
    pub max_frac: f64,
}

/// Share `1 − (upper − lower + 1)/A` of actions excluded by the interval,
/// over beliefs reached from the uniform belief after a random number of
/// random steps in `0..=max_steps`.
pub fn action_pruning_experiment<T: Scalar>(
    model: &PomdpModel<T>,
    cert: &BoundCertificate<T>,
    n_samples: usize,
    max_steps: usize,
    seed: u64,
) -> ActionPruningStats {
    let bounds = PolicyBounds::new(model, cert);
    let a = model.num_actions() as f64;
    let b0 = Belief::uniform(model.num_states());
    let fracs: Vec<f64> = sample_seeds(seed, n_samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let steps = rng.random_range(0..=max_steps);
            let b = filter::sample_reachable_with(model, &b0, steps, &mut rng);
            let iv = bounds.interval(b.probs());
            1.0 - (iv.width() as f64 + 1.0) / a
        })
        .collect();
    let n = fracs.len().max(1) as f64;
    ActionPruningStats {
        n_samples,
        min_frac: fracs.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0),
        mean_frac: fracs.iter().sum::<f64>() / n,
        max_frac: fracs.iter().cloned().fold(0.0, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::tracking_model_small;
    use crate::linalg::Matrix;
    use crate::mlr::{CertificateMode, BoundMode};
    use crate::model::RewardSpec;
    use crate::rewards::UncertaintyKind;

    fn trivial() -> BoundCertificate<f64> {
        BoundCertificate::trivial(CertificateMode::Global(BoundMode::Nominal))
    }

    fn hand_model() -> PomdpModel<f64> {
        let t0 = Matrix::from_rows(vec![vec![0.9, 0.2], vec![0.1, 0.8]]).unwrap();
        let t1 = Matrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let o0 = Matrix::from_rows(vec![vec![0.8, 0.3], vec![0.2, 0.7]]).unwrap();
        let o1 = Matrix::from_rows(vec![vec![0.6, 0.1], vec![0.4, 0.9]]).unwrap();
        let r = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.2, 0.6]]).unwrap();
        PomdpModel::new(vec![t0, t1], vec![o0, o1], 0.9, RewardSpec::linear(r)).unwrap()
    }

    /// Writes out the depth-2 tree by hand: root, 2 actions × 2 observations.
    #[test]
    fn depth_two_matches_manual_enumeration() {
        let m = hand_model();
        let b = [0.3, 0.7];
        let t = [[[0.9, 0.2], [0.1, 0.8]], [[0.5, 0.5], [0.5, 0.5]]];
        let o = [[[0.8, 0.3], [0.2, 0.7]], [[0.6, 0.1], [0.4, 0.9]]];
        let r = [[1.0, 0.0], [0.2, 0.6]];
        let rho = |b: [f64; 2], a: usize| r[a][0] * b[0] + r[a][1] * b[1];
        let leaf = |b: [f64; 2]| rho(b, 0).max(rho(b, 1));
        let mut q = [0.0; 2];
        for a in 0..2 {
            let p = [
                t[a][0][0] * b[0] + t[a][0][1] * b[1],
                t[a][1][0] * b[0] + t[a][1][1] * b[1],
            ];
            let mut future = 0.0;
            for z in 0..2 {
                let u = [o[a][z][0] * p[0], o[a][z][1] * p[1]];
                let eta = u[0] + u[1];
                future += eta * leaf([u[0] / eta, u[1] / eta]);
            }
            q[a] = rho(b, a) + 0.9 * future;
        }
        let res = expectimax(&m, &Belief::new(b.to_vec()).unwrap(), 2, None);
        assert!((res.value - q[0].max(q[1])).abs() < 1e-14);
        assert_eq!(res.best_action, if q[0] >= q[1] { 0 } else { 1 });
        assert_eq!(res.expanded, 5);
        assert_eq!(res.pruned, 0);
    }

    #[test]
    fn depth_one_is_best_reward() {
        let m = tracking_model_small::<f64>();
        let b = filter::sample_belief::<f64>(3, 1);
        let res = expectimax(&m, &b, 1, None);
        let best = (0..3)
            .map(|a| rewards::expected_reward(&m, &b, a).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(res.value, best);
        assert_eq!(res.expanded, 1);
    }

    #[test]
    fn zero_discount_collapses_to_depth_one() {
        let m = tracking_model_small::<f64>().with_discount(0.0).unwrap();
        let b = filter::sample_belief::<f64>(3, 2);
        let one = expectimax(&m, &b, 1, None);
        for d in 2..4 {
            let res = expectimax(&m, &b, d, None);
            assert_eq!(res.value, one.value);
            assert_eq!(res.best_action, one.best_action);
        }
    }

    #[test]
    fn tree_size_accounting() {
        let m = tracking_model_small::<f64>();
        let b = Belief::uniform(3);
        for d in 1..5 {
            let res = expectimax(&m, &b, d, None);
            assert_eq!(res.expanded, full_tree_size(3, 3, d));
            let bb = branch_and_bound(&m, &trivial(), &b, d);
            assert_eq!(bb, res);
        }
        assert_eq!(full_tree_size(3, 3, 3), 1 + 9 + 81);
    }

    #[test]
    fn single_action_interval_prunes_the_rest() {
        let m = tracking_model_small::<f64>();
        let b = filter::sample_belief::<f64>(3, 3);
        // Large weights on one state make action 1 the unique greedy choice
        // for both transforms everywhere.
        let cert = BoundCertificate {
            g: Some(vec![0.0; 3]),
            h: Some(vec![0.0; 3]),
            ..trivial()
        };
        let pinned = m
            .with_reward(RewardSpec {
                state_reward: Matrix::from_rows(vec![vec![0.0; 3], vec![100.0; 3], vec![0.0; 3]]).unwrap(),
                weights: vec![0.0; 3],
                uncertainty: UncertaintyKind::None,
                epsilon: 0.01,
            })
            .unwrap();
        let res = branch_and_bound(&pinned, &cert, &b, 2);
        assert_eq!(res.root_values.len(), 1);
        assert_eq!(res.best_action, 1);
        assert!((res.pruned_fraction() - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
        let full = expectimax(&pinned, &b, 2, None);
        assert_eq!(res.value, full.root_values[1].1);
        assert_eq!(res.expanded + res.pruned, full.expanded);
        let deep = branch_and_bound(&pinned, &cert, &b, 4);
        assert_eq!(deep.expanded, 1 + 3 + 9 + 27);
        assert_eq!(deep.expanded + deep.pruned, full_tree_size(3, 3, 4));
    }

    #[test]
    fn experiments_with_trivial_certificate() {
        let m = tracking_model_small::<f64>();
        let stats = pruning_experiment(&m, &trivial(), &[1, 2, 3], 5, 0);
        assert!(stats.rows.iter().all(|r| r.mean_pruned_frac == 0.0 && r.max_pruned_frac == 0.0));
        let gap = bound_gap_experiment(&m, &trivial(), 10, 0, Some(2));
        assert_eq!(gap.mean_width, 2.0);
        assert_eq!(gap.contained_fraction, Some(1.0));
        let sweep = action_pruning_experiment(&m, &trivial(), 10, 5, 0);
        assert_eq!(sweep.max_frac, 0.0);
    }

    #[test]
    fn experiments_are_deterministic() {
        let m = tracking_model_small::<f64>();
        let cert = crate::mlr::compute_certificate(&m, BoundMode::Nominal).unwrap();
        let a = pruning_experiment(&m, &cert, &[2, 3], 8, 7);
        let b = pruning_experiment(&m, &cert, &[2, 3], 8, 7);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.mean_pruned_frac.to_bits(), y.mean_pruned_frac.to_bits());
        }
        assert_eq!(
            action_pruning_experiment(&m, &cert, 20, 5, 3),
            action_pruning_experiment(&m, &cert, 20, 5, 3)
        );
    }
}
