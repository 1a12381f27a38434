//! Checks for the structural conditions under which myopic policies bound
//! the optimal policy:
//!
//! - **A1**: every transition and observation matrix is TP2.
//! - **A2**: the matrices `D^{j,a,z}` are copositive. Checked through the
//!   entrywise sufficient condition (A2′) and a sampled witness search.
//! - **A3**: the observation distribution reached from any state under
//!   action `a+1` first-order dominates the one under `a`.
//!
//! In the `D` and A3 formulas, `T^a_{m,j}` denotes the probability of moving
//! from state `m` to state `j`, i.e. entry `(j, m)` of the stored
//! next-by-previous matrix, and `O^a_{z,j}` the probability of observing `z`
//! in state `j`.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::filter::{self, Belief, ZERO_LIKELIHOOD};
use crate::linalg::Matrix;
use crate::model::PomdpModel;
use crate::scalar::Scalar;

/// Slack on 2×2 minors, A2′ entries and A3 partial sums.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Slack on sampled quadratic forms.
pub const QUADRATIC_TOL: f64 = 1e-9;
/// Slack on the order relations checked by [`validate_update_ordering`].
pub const ORDERING_TOL: f64 = 1e-9;
/// Counterexamples kept per assumption.
pub const MAX_COUNTEREXAMPLES: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("matrix entry ({row}, {col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption {
    A1,
    A2Relaxed,
    A2Sampled,
    A3,
}

impl Assumption {
    /// What a pass of this check establishes.
    pub fn strength(self) -> &'static str {
        match self {
            Self::A1 | Self::A3 => "exact",
            Self::A2Relaxed => "sufficient",
            Self::A2Sampled => "evidence",
        }
    }
}

/// Index tuples: A1 `(matrix, a, row_i, row_k, col_j, col_l)` with matrix
/// 0 for transitions and 1 for observations; A2 `(j, a, z, m, n)`; A3
/// `(i, z̄, a)`. All zero-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub assumption: Assumption,
    pub indices: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub assumption: Assumption,
    pub pass: bool,
    pub violations: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl CheckOutcome {
    fn new(assumption: Assumption) -> Self {
        Self {
            assumption,
            pass: true,
            violations: 0,
            counterexamples: Vec::new(),
        }
    }

    fn record(&mut self, indices: Vec<usize>, value: f64) {
        self.pass = false;
        self.violations += 1;
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(Counterexample {
                assumption: self.assumption,
                indices,
                value,
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub a1_pass: bool,
    pub a2_relaxed_pass: bool,
    pub a2_sampled_pass: bool,
    pub a3_pass: bool,
    pub counterexamples: Vec<Counterexample>,
}

impl StructureReport {
    pub fn from_outcomes(outcomes: &[CheckOutcome]) -> Self {
        let pass = |a: Assumption| outcomes.iter().filter(|o| o.assumption == a).all(|o| o.pass);
        Self {
            a1_pass: pass(Assumption::A1),
            a2_relaxed_pass: pass(Assumption::A2Relaxed),
            a2_sampled_pass: pass(Assumption::A2Sampled),
            a3_pass: pass(Assumption::A3),
            counterexamples: outcomes.iter().flat_map(|o| o.counterexamples.clone()).collect(),
        }
    }

    /// A1, A2′ and A3 all hold.
    pub fn sufficient_conditions_hold(&self) -> bool {
        self.a1_pass && self.a2_relaxed_pass && self.a3_pass
    }
}

/// A 2×2 minor `M[i][j] M[k][l] − M[i][l] M[k][j]` with `i < k`, `j < l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minor {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tp2Verdict {
    pub holds: bool,
    pub first_violation: Option<Minor>,
}

fn tp2_violations<T: Scalar>(m: &Matrix<T>, mut on_violation: impl FnMut(Minor) -> bool) -> Result<(), StructureError> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m[(i, j)] < T::zero() {
                return Err(StructureError::NegativeEntry {
                    row: i,
                    col: j,
                    value: m[(i, j)].as_f64(),
                });
            }
        }
    }
    let tol = T::tol(STRUCTURE_TOL);
    for i in 0..m.rows() {
        for k in i + 1..m.rows() {
            for j in 0..m.cols() {
                for l in j + 1..m.cols() {
                    let minor = m[(i, j)] * m[(k, l)] - m[(i, l)] * m[(k, j)];
                    if minor < -tol {
                        let keep_going = on_violation(Minor {
                            rows: (i, k),
                            cols: (j, l),
                            value: minor.as_f64(),
                        });
                        if !keep_going {
                            return Ok(());
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Whether every 2×2 minor of a nonnegative matrix is nonnegative.
pub fn is_tp2<T: Scalar>(m: &Matrix<T>) -> Result<Tp2Verdict, StructureError> {
    let mut first = None;
    tp2_violations(m, |minor| {
        first = Some(minor);
        false
    })?;
    Ok(Tp2Verdict {
        holds: first.is_none(),
        first_violation: first,
    })
}

pub fn check_a1<T: Scalar>(model: &PomdpModel<T>) -> CheckOutcome {
    let mut out = CheckOutcome::new(Assumption::A1);
    for a in 0..model.num_actions() {
        for (tag, m) in [(0usize, model.transition(a)), (1, model.observation(a))] {
            let res = tp2_violations(m, |minor| {
                out.record(
                    vec![tag, a, minor.rows.0, minor.rows.1, minor.cols.0, minor.cols.1],
                    minor.value,
                );
                true
            });
            if let Err(StructureError::NegativeEntry { row, col, value }) = res {
                out.record(vec![tag, a, row, row, col, col], value);
            }
        }
    }
    out
}

/// `T^a_{m,j}`: probability of moving from `m` to `j` under `a`.
#[inline]
fn step<T: Scalar>(model: &PomdpModel<T>, a: usize, from: usize, to: usize) -> T {
    model.transition(a)[(to, from)]
}

/// The symmetric matrix `D^{j,a,z}` for consecutive states `j, j+1` and
/// actions `a, a+1`.
pub fn copositivity_matrix<T: Scalar>(model: &PomdpModel<T>, j: usize, a: usize, z: usize) -> Matrix<T> {
    let s = model.num_states();
    let (o0, o1) = (model.observation(a), model.observation(a + 1));
    let c_plus = o0[(z, j)] * o1[(z, j + 1)];
    let c_minus = o0[(z, j + 1)] * o1[(z, j)];
    let d = |m: usize, n: usize| {
        c_plus * step(model, a, m, j) * step(model, a + 1, n, j + 1)
            - c_minus * step(model, a, m, j + 1) * step(model, a + 1, n, j)
    };
    Matrix::from_fn(s, s, |m, n| d(m, n) + d(n, m))
}

fn a2_indices<T: Scalar>(model: &PomdpModel<T>) -> impl Iterator<Item = (usize, usize, usize)> {
    let (s, a, z) = (model.num_states(), model.num_actions(), model.num_observations());
    (0..s - 1).flat_map(move |j| (0..a.saturating_sub(1)).flat_map(move |act| (0..z).map(move |obs| (j, act, obs))))
}

/// Entrywise nonnegativity of every `D^{j,a,z}`.
pub fn check_a2_relaxed<T: Scalar>(model: &PomdpModel<T>) -> CheckOutcome {
    let mut out = CheckOutcome::new(Assumption::A2Relaxed);
    let tol = T::tol(STRUCTURE_TOL);
    for (j, a, z) in a2_indices(model) {
        let d = copositivity_matrix(model, j, a, z);
        for m in 0..d.rows() {
            for n in m..d.cols() {
                if d[(m, n)] < -tol {
                    out.record(vec![j, a, z, m, n], d[(m, n)].as_f64());
                }
            }
        }
    }
    out
}

/// Searches for `x ≥ 0` with `xᵀ D x < 0` among basis vectors, pairwise
/// midpoints and random nonnegative unit vectors. Returns the most negative
/// value found below the tolerance.
pub fn copositivity_witness<T: Scalar, R: Rng + ?Sized>(d: &Matrix<T>, n_samples: usize, rng: &mut R) -> Option<(Vec<T>, T)> {
    let s = d.rows();
    let tol = T::tol(QUADRATIC_TOL);
    let quad = |x: &[T]| crate::scalar::dot(x, &d.mul_vec(x));
    let mut worst: Option<(Vec<T>, T)> = None;
    let mut consider = |x: Vec<T>| {
        let v = quad(&x);
        if v < -tol && worst.as_ref().is_none_or(|(_, w)| v < *w) {
            worst = Some((x, v));
        }
    };
    let half = T::of(std::f64::consts::FRAC_1_SQRT_2);
    for i in 0..s {
        let mut e = vec![T::zero(); s];
        e[i] = T::one();
        consider(e);
        for k in i + 1..s {
            let mut mid = vec![T::zero(); s];
            mid[i] = half;
            mid[k] = half;
            consider(mid);
        }
    }
    for _ in 0..n_samples {
        let raw: Vec<f64> = (0..s).map(|_| rng.random::<f64>()).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            consider(raw.iter().map(|&x| T::of(x / norm)).collect());
        }
    }
    worst
}

/// Sampled surrogate for copositivity of every `D^{j,a,z}`. A failure is a
/// certified witness; a pass is evidence only.
pub fn check_a2_sampled<T: Scalar>(model: &PomdpModel<T>, n_samples: usize, seed: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new(Assumption::A2Sampled);
    let mut rng = filter::rng(seed);
    for (j, a, z) in a2_indices(model) {
        let d = copositivity_matrix(model, j, a, z);
        if let Some((x, v)) = copositivity_witness(&d, n_samples, &mut rng) {
            let support = x
                .iter()
                .enumerate()
                .max_by(|p, q| p.1.partial_cmp(q.1).unwrap())
                .map_or(0, |(i, _)| i);
            out.record(vec![j, a, z, support, support], v.as_f64());
        }
    }
    out
}

/// `Σ_{z ≤ z̄} Σ_j [T^a_{i,j} O^a_{z,j} − T^{a+1}_{i,j} O^{a+1}_{z,j}] ≥ 0`.
pub fn check_a3<T: Scalar>(model: &PomdpModel<T>) -> CheckOutcome {
    let mut out = CheckOutcome::new(Assumption::A3);
    let (s, zn) = (model.num_states(), model.num_observations());
    let tol = T::tol(STRUCTURE_TOL);
    for a in 0..model.num_actions().saturating_sub(1) {
        for i in 0..s {
            let mut cumulative = T::zero();
            for zbar in 0..zn {
                for j in 0..s {
                    cumulative = cumulative + step(model, a, i, j) * model.observation(a)[(zbar, j)]
                        - step(model, a + 1, i, j) * model.observation(a + 1)[(zbar, j)];
                }
                if cumulative < -tol {
                    out.record(vec![i, zbar, a], cumulative.as_f64());
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct StructureOptions {
    pub a2_samples: usize,
    pub seed: u64,
}

impl Default for StructureOptions {
    fn default() -> Self {
        Self {
            a2_samples: 200,
            seed: 0,
        }
    }
}

pub fn check_structure<T: Scalar>(model: &PomdpModel<T>, opts: &StructureOptions) -> StructureReport {
    StructureReport::from_outcomes(&[
        check_a1(model),
        check_a2_relaxed(model),
        check_a2_sampled(model, opts.a2_samples, opts.seed),
        check_a3(model),
    ])
}

/// A sampled violation of the update-monotonicity conclusions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingViolation {
    pub sample: usize,
    pub lower_action: usize,
    pub upper_action: usize,
    /// `None` for the likelihood-dominance check.
    pub observation: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingReport {
    pub samples: usize,
    /// `η(·|b,a') ≥_s η(·|b,a)` failures.
    pub likelihood_violations: usize,
    /// `τ(b,a',z) ≥_r τ(b,a,z)` failures.
    pub posterior_violations: usize,
    pub posterior_checks: usize,
    pub examples: Vec<OrderingViolation>,
}

impl OrderingReport {
    pub fn clean(&self) -> bool {
        self.likelihood_violations == 0 && self.posterior_violations == 0
    }
}

/// Samples beliefs and checks, for all action pairs `a < a'`, that the
/// observation likelihood under `a'` first-order dominates the one under
/// `a`, and that posteriors are MLR-ordered the same way for every
/// observation possible under both.
pub fn validate_update_ordering<T: Scalar>(model: &PomdpModel<T>, n_samples: usize, seed: u64) -> OrderingReport {
    let mut report = OrderingReport {
        samples: n_samples,
        likelihood_violations: 0,
        posterior_violations: 0,
        posterior_checks: 0,
        examples: Vec::new(),
    };
    let mut rng = filter::rng(seed);
    let floor = T::of(ZERO_LIKELIHOOD);
    for sample in 0..n_samples {
        let b: Belief<T> = filter::sample_belief_with(model.num_states(), &mut rng);
        let steps: Vec<_> = (0..model.num_actions())
            .map(|a| filter::branch(model, &b, a).expect("action in range"))
            .collect();
        for lo in 0..steps.len() {
            for hi in lo + 1..steps.len() {
                let (low, high) = (&steps[lo], &steps[hi]);
                if !filter::fosd_geq_tol(&high.likelihood, &low.likelihood, ORDERING_TOL).expect("equal lengths") {
                    report.likelihood_violations += 1;
                    push_example(&mut report, sample, lo, hi, None);
                }
                for z in 0..model.num_observations() {
                    if low.likelihood[z] <= floor || high.likelihood[z] <= floor {
                        continue;
                    }
                    let (Some(p_low), Some(p_high)) = (&low.posteriors[z], &high.posteriors[z]) else {
                        continue;
                    };
                    report.posterior_checks += 1;
                    if !filter::mlr_geq_tol(p_high.probs(), p_low.probs(), ORDERING_TOL).expect("equal lengths") {
                        report.posterior_violations += 1;
                        push_example(&mut report, sample, lo, hi, Some(z));
                    }
                }
            }
        }
    }
    report
}

fn push_example(report: &mut OrderingReport, sample: usize, lo: usize, hi: usize, observation: Option<usize>) {
    if report.examples.len() < MAX_COUNTEREXAMPLES {
        report.examples.push(OrderingViolation {
            sample,
            lower_action: lo,
            upper_action: hi,
            observation,
        });
    }
}
