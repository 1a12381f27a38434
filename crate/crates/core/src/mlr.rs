//! MLR-monotone reward transforms and myopic policy bounds.
//!
//! A vector `g` shifts the reward of action `a` by `[(I − γ Tᵃᵀ) g]ᵀ b`,
//! which leaves optimal policies unchanged (the value function moves by
//! `gᵀ b`). If the shifted reward is MLR increasing for every action, the
//! greedy policy on it is a lower bound on the optimal policy; a vector `h`
//! making it MLR decreasing yields an upper bound.
//!
//! Writing `b = K δ` with `δ` the upper-tail sums of `b`, MLR dominance
//! implies componentwise dominance of `δ`, so monotonicity reduces to the
//! sign of `∂ρ/∂b · K`. Its first component multiplies the fixed `δ(1) = 1`
//! and is dropped, leaving `S − 1` constraints per action of the form
//!
//! ```text
//! φᵃ_{i+1} − φᵃ_i ≥ bound,   φᵃ = ∂ρ/∂b + (I − γ Tᵃᵀ) g
//! ```
//!
//! (reversed for `h`). With a linear reward increasing in the state this
//! holds at `g = 0`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::Belief;
use crate::linalg::Matrix;
use crate::lp::{self, FreeOutcome, Inequality, LpError, SimplexOptions};
use crate::model::PomdpModel;
use crate::rewards::{self, RewardError, UncertaintyKind};
use crate::scalar::{self, Scalar};

/// Slack below which a system counts as infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Default box on the transform vector entries.
pub const DEFAULT_G_MAX: f64 = 1e6;

#[derive(Debug, Error)]
pub enum MlrError {
    #[error("need at least two states, got {0}")]
    TooFewStates(usize),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error("epsilon {0} must lie in (0, 1) for the Shannon bound")]
    InvalidEpsilon(f64),
    #[error("no {0:?} transform vector in the certificate")]
    MissingCertificate(Direction),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("certificate file: {0}")]
    File(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Lower-bound transform `g`.
    Increasing,
    /// Upper-bound transform `h`.
    Decreasing,
}

/// How the belief-dependent part of the constraint is bounded over the simplex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// Shannon `−w_a log ε`, Rényi `2 w_a`. The Rényi allowance is not a
    /// supremum over the whole simplex.
    Nominal,
    /// Shannon `−w_a log ε`, Rényi `2 w_a S`, valid everywhere.
    Conservative,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertificateMode<T> {
    Global(BoundMode),
    AtBelief(Belief<T>),
}

/// How the transform vector is chosen among feasible ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorObjective {
    /// The maximizer of the minimum slack inside the box.
    MaxSlack,
    /// Smallest `‖g‖₁` satisfying the constraints.
    MinNorm,
}

/// `coeff · g ≥ rhs`, one row per `(action, state pair)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem<T> {
    pub coeff: Matrix<T>,
    pub rhs: Vec<T>,
    /// `(action, i)` for the row constraining `φ_{i+1} − φ_i`.
    pub rows: Vec<(usize, usize)>,
}

impl<T: Scalar> LinearSystem<T> {
    /// `coeff · g − rhs` per row.
    pub fn slacks(&self, g: &[T]) -> Vec<T> {
        self.coeff
            .mul_vec(g)
            .into_iter()
            .zip(&self.rhs)
            .map(|(lhs, &r)| lhs - r)
            .collect()
    }

    pub fn min_slack(&self, g: &[T]) -> T {
        self.slacks(g).into_iter().fold(T::infinity(), T::min)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityResult<T> {
    pub feasible: bool,
    pub solution: Option<Vec<T>>,
    pub min_slack: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCertificate<T> {
    pub g: Option<Vec<T>>,
    pub h: Option<Vec<T>>,
    pub mode: CertificateMode<T>,
    /// Best achievable minimum slack per direction.
    pub min_slack_g: T,
    pub min_slack_h: T,
    pub epsilon: T,
}

impl<T: Scalar> BoundCertificate<T> {
    /// Certificate without transform vectors: the interval is every action.
    pub fn trivial(mode: CertificateMode<T>) -> Self {
        Self {
            g: None,
            h: None,
            mode,
            min_slack_g: T::neg_infinity(),
            min_slack_h: T::neg_infinity(),
            epsilon: T::of(crate::model::DEFAULT_EPSILON),
        }
    }

    pub fn vector(&self, direction: Direction) -> Option<&[T]> {
        match direction {
            Direction::Increasing => self.g.as_deref(),
            Direction::Decreasing => self.h.as_deref(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertificateOptions<T> {
    pub mode: CertificateMode<T>,
    /// Overrides the model's Shannon epsilon.
    pub epsilon: Option<T>,
    pub g_max: T,
    pub objective: VectorObjective,
    pub simplex: SimplexOptions,
}

impl<T: Scalar> CertificateOptions<T> {
    pub fn new(mode: BoundMode) -> Self {
        Self {
            mode: CertificateMode::Global(mode),
            epsilon: None,
            g_max: T::of(DEFAULT_G_MAX),
            objective: VectorObjective::MinNorm,
            simplex: SimplexOptions::default(),
        }
    }
}

/// `k_ii = 1`, `k_{i,i+1} = −1`, zero elsewhere; maps tail sums to beliefs.
pub fn k_matrix<T: Scalar>(num_states: usize) -> Result<Matrix<T>, MlrError> {
    if num_states < 2 {
        return Err(MlrError::TooFewStates(num_states));
    }
    Ok(Matrix::from_fn(num_states, num_states, |i, j| {
        if i == j {
            T::one()
        } else if j == i + 1 {
            -T::one()
        } else {
            T::zero()
        }
    }))
}

/// Row `(a, i)` of `gᵀ (I − γ Tᵃ) K` as a coefficient vector over `g`:
/// `e_{i+1} − e_i − γ (Tᵃ_{·,i+1} − Tᵃ_{·,i})`.
fn transform_row<T: Scalar>(model: &PomdpModel<T>, a: usize, i: usize) -> Vec<T> {
    let t = model.transition(a);
    let gamma = model.discount();
    let mut row: Vec<T> = (0..model.num_states())
        .map(|k| -gamma * (t[(k, i + 1)] - t[(k, i)]))
        .collect();
    row[i + 1] = row[i + 1] + T::one();
    row[i] = row[i] - T::one();
    row
}

fn build_system<T: Scalar>(
    model: &PomdpModel<T>,
    direction: Direction,
    mut gradient_difference: impl FnMut(usize, usize) -> Result<T, MlrError>,
) -> Result<LinearSystem<T>, MlrError> {
    let (s, a_count) = (model.num_states(), model.num_actions());
    if s < 2 {
        return Err(MlrError::TooFewStates(s));
    }
    let n_rows = (s - 1) * a_count;
    let mut coeff = Matrix::zeros(n_rows, s);
    let mut rhs = Vec::with_capacity(n_rows);
    let mut rows = Vec::with_capacity(n_rows);
    for a in 0..a_count {
        for i in 0..s - 1 {
            let r = rows.len();
            let base = transform_row(model, a, i);
            // Requirement on the reward part of φ_{i+1} − φ_i.
            let need = gradient_difference(a, i)?;
            let (sign, bound) = match direction {
                Direction::Increasing => (T::one(), -need),
                Direction::Decreasing => (-T::one(), need),
            };
            for (c, v) in coeff.row_mut(r).iter_mut().zip(base) {
                *c = sign * v;
            }
            rhs.push(bound);
            rows.push((a, i));
        }
    }
    Ok(LinearSystem { coeff, rhs, rows })
}

/// Constraints making the transformed reward MLR monotone at `b0`.
pub fn assemble_constraints_at<T: Scalar>(
    model: &PomdpModel<T>,
    b0: &Belief<T>,
    direction: Direction,
) -> Result<LinearSystem<T>, MlrError> {
    let gradients: Vec<Vec<T>> = (0..model.num_actions())
        .map(|a| rewards::reward_gradient(model, b0, a))
        .collect::<Result<_, _>>()?;
    build_system(model, direction, |a, i| Ok(gradients[a][i + 1] - gradients[a][i]))
}

/// Belief-independent bound on how negative (for `g`) or positive (for `h`)
/// the uncertainty part of a consecutive gradient difference can be.
pub fn uncertainty_bound<T: Scalar>(kind: UncertaintyKind, mode: BoundMode, weight: T, epsilon: T, num_states: usize) -> T {
    match kind {
        UncertaintyKind::None => T::zero(),
        UncertaintyKind::Shannon => -weight * epsilon.ln(),
        UncertaintyKind::RenyiQuadratic => {
            let two_w = T::of(2.0) * weight;
            match mode {
                BoundMode::Nominal => two_w,
                BoundMode::Conservative => two_w * T::of(num_states as f64),
            }
        }
    }
}

fn effective_epsilon<T: Scalar>(model: &PomdpModel<T>, epsilon: Option<T>) -> Result<T, MlrError> {
    let eps = epsilon.unwrap_or(model.reward().epsilon);
    if !(eps > T::zero() && eps < T::one()) {
        return Err(MlrError::InvalidEpsilon(eps.as_f64()));
    }
    Ok(eps)
}

/// Constraints valid over the whole simplex (the inner simplex for Shannon).
pub fn assemble_constraints_global<T: Scalar>(
    model: &PomdpModel<T>,
    direction: Direction,
    mode: BoundMode,
) -> Result<LinearSystem<T>, MlrError> {
    assemble_constraints_global_eps(model, direction, mode, None)
}

pub fn assemble_constraints_global_eps<T: Scalar>(
    model: &PomdpModel<T>,
    direction: Direction,
    mode: BoundMode,
    epsilon: Option<T>,
) -> Result<LinearSystem<T>, MlrError> {
    let spec = model.reward();
    let eps = effective_epsilon(model, epsilon)?;
    let s = model.num_states();
    build_system(model, direction, |a, i| {
        let r = spec.reward_vector(a);
        let slack = uncertainty_bound(spec.uncertainty, mode, spec.weights[a], eps, s);
        // `need` enters as −need for g and +need for h; the uncertainty
        // allowance must tighten both.
        Ok(match direction {
            Direction::Increasing => r[i + 1] - r[i] - slack,
            Direction::Decreasing => r[i + 1] - r[i] + slack,
        })
    })
}

/// `max t` subject to `coeff · g − t ≥ rhs`, `‖g‖∞ ≤ g_max`.
pub fn solve_feasibility<T: Scalar>(sys: &LinearSystem<T>, g_max: T) -> Result<FeasibilityResult<T>, MlrError> {
    solve_feasibility_with(sys, g_max, &SimplexOptions::default())
}

pub fn solve_feasibility_with<T: Scalar>(
    sys: &LinearSystem<T>,
    g_max: T,
    opts: &SimplexOptions,
) -> Result<FeasibilityResult<T>, MlrError> {
    let s = sys.coeff.cols();
    let mut ineqs = Vec::with_capacity(sys.rhs.len() + 2 * s);
    for (k, &r) in sys.rhs.iter().enumerate() {
        let mut coeff = Vec::with_capacity(s + 1);
        coeff.push(T::one());
        coeff.extend(sys.coeff.row(k).iter().map(|&c| -c));
        ineqs.push(Inequality { coeff, bound: -r });
    }
    push_box(&mut ineqs, 1, s, g_max);
    let mut objective = vec![T::zero(); s + 1];
    objective[0] = T::one();
    match lp::maximize_free(&objective, &ineqs, opts)? {
        FreeOutcome::Optimal { point, .. } => {
            let g = point[1..].to_vec();
            let min_slack = sys.min_slack(&g);
            let feasible = min_slack >= -T::tol(FEASIBILITY_TOL);
            Ok(FeasibilityResult {
                feasible,
                solution: feasible.then_some(g),
                min_slack,
            })
        }
        other => Err(LpError::NumericFailure(format!("bounded slack program reported {other:?}")).into()),
    }
}

/// `±π_{offset+i} ≤ bound` for `i < count`.
fn push_box<T: Scalar>(ineqs: &mut Vec<Inequality<T>>, offset: usize, count: usize, bound: T) {
    let dim = ineqs.first().map_or(offset + count, |q| q.coeff.len());
    for i in 0..count {
        for sign in [T::one(), -T::one()] {
            let mut coeff = vec![T::zero(); dim];
            coeff[offset + i] = sign;
            ineqs.push(Inequality { coeff, bound });
        }
    }
}

/// Smallest `‖g‖₁` with `coeff · g ≥ rhs + relax` inside the box.
pub fn min_norm_solution<T: Scalar>(
    sys: &LinearSystem<T>,
    relax: T,
    g_max: T,
    opts: &SimplexOptions,
) -> Result<Option<Vec<T>>, MlrError> {
    let s = sys.coeff.cols();
    // Variables: g (s), then |g| bounds u (s).
    let dim = 2 * s;
    let mut ineqs = Vec::with_capacity(sys.rhs.len() + 4 * s);
    for (k, &r) in sys.rhs.iter().enumerate() {
        let mut coeff = vec![T::zero(); dim];
        for (c, &v) in coeff.iter_mut().zip(sys.coeff.row(k)) {
            *c = -v;
        }
        ineqs.push(Inequality { coeff, bound: -(r + relax) });
    }
    for i in 0..s {
        for sign in [T::one(), -T::one()] {
            let mut coeff = vec![T::zero(); dim];
            coeff[i] = sign;
            coeff[s + i] = -T::one();
            ineqs.push(Inequality { coeff, bound: T::zero() });
        }
    }
    push_box(&mut ineqs, 0, s, g_max);
    let mut objective = vec![T::zero(); dim];
    objective[s..].iter_mut().for_each(|o| *o = -T::one());
    match lp::maximize_free(&objective, &ineqs, opts)? {
        FreeOutcome::Optimal { point, .. } => Ok(Some(point[..s].to_vec())),
        FreeOutcome::Infeasible => Ok(None),
        FreeOutcome::Unbounded => Err(LpError::NumericFailure("norm program reported unbounded".into()).into()),
    }
}

fn solve_direction<T: Scalar>(sys: &LinearSystem<T>, opts: &CertificateOptions<T>) -> Result<(Option<Vec<T>>, T), MlrError> {
    let res = solve_feasibility_with(sys, opts.g_max, &opts.simplex)?;
    if !res.feasible {
        return Ok((None, res.min_slack));
    }
    let vector = match opts.objective {
        VectorObjective::MaxSlack => res.solution,
        VectorObjective::MinNorm => {
            let relax = res.min_slack.min(T::zero());
            min_norm_solution(sys, relax, opts.g_max, &opts.simplex)?
                .filter(|g| sys.min_slack(g) >= -T::tol(FEASIBILITY_TOL))
                .or(res.solution)
        }
    };
    Ok((vector, res.min_slack))
}

/// Solves both directions with the default options for `mode`.
pub fn compute_certificate<T: Scalar>(model: &PomdpModel<T>, mode: BoundMode) -> Result<BoundCertificate<T>, MlrError> {
    compute_certificate_with(model, &CertificateOptions::new(mode))
}

pub fn compute_certificate_with<T: Scalar>(
    model: &PomdpModel<T>,
    opts: &CertificateOptions<T>,
) -> Result<BoundCertificate<T>, MlrError> {
    let eps = effective_epsilon(model, opts.epsilon)?;
    let system = |direction| match &opts.mode {
        CertificateMode::Global(mode) => assemble_constraints_global_eps(model, direction, *mode, Some(eps)),
        CertificateMode::AtBelief(b0) => {
            if model.reward().uncertainty == UncertaintyKind::Shannon {
                let with_eps = model
                    .with_reward(crate::model::RewardSpec {
                        epsilon: eps,
                        ..model.reward().clone()
                    })
                    .map_err(|e| MlrError::File(e.to_string()))?;
                assemble_constraints_at(&with_eps, b0, direction)
            } else {
                assemble_constraints_at(model, b0, direction)
            }
        }
    };
    let (g, min_slack_g) = solve_direction(&system(Direction::Increasing)?, opts)?;
    let (h, min_slack_h) = solve_direction(&system(Direction::Decreasing)?, opts)?;
    Ok(BoundCertificate {
        g,
        h,
        mode: opts.mode.clone(),
        min_slack_g,
        min_slack_h,
        epsilon: eps,
    })
}

/// `ρ(b,a) + [(I − γ Tᵃᵀ) v]ᵀ b` with `v = g` or `h`.
pub fn transformed_reward<T: Scalar>(
    model: &PomdpModel<T>,
    cert: &BoundCertificate<T>,
    b: &Belief<T>,
    a: usize,
    direction: Direction,
) -> Result<T, MlrError> {
    let v = cert.vector(direction).ok_or(MlrError::MissingCertificate(direction))?;
    let base = rewards::expected_reward(model, b, a)?;
    Ok(base + scalar::dot(&shift_vector(model, a, v), b.probs()))
}

/// `(I − γ Tᵃᵀ) v`.
pub fn shift_vector<T: Scalar>(model: &PomdpModel<T>, a: usize, v: &[T]) -> Vec<T> {
    let gamma = model.discount();
    let tv = model.transition(a).tr_mul_vec(v);
    v.iter().zip(tv).map(|(&x, y)| x - gamma * y).collect()
}

/// Closed interval of action indices with `lower ≤ upper`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ActionInterval {
    pub lower: usize,
    pub upper: usize,
    /// The raw bounds came out inverted and were widened to their hull.
    pub widened: bool,
}

impl ActionInterval {
    pub fn contains(&self, a: usize) -> bool {
        self.lower <= a && a <= self.upper
    }

    pub fn width(&self) -> usize {
        self.upper - self.lower
    }
}

/// Precomputed reward shifts for evaluating both bound policies quickly.
#[derive(Clone, Debug)]
pub struct PolicyBounds<'m, T> {
    model: &'m PomdpModel<T>,
    lower_shift: Option<Vec<Vec<T>>>,
    upper_shift: Option<Vec<Vec<T>>>,
}

impl<'m, T: Scalar> PolicyBounds<'m, T> {
    pub fn new(model: &'m PomdpModel<T>, cert: &BoundCertificate<T>) -> Self {
        let shifts = |v: Option<&[T]>| v.map(|v| (0..model.num_actions()).map(|a| shift_vector(model, a, v)).collect());
        Self {
            model,
            lower_shift: shifts(cert.g.as_deref()),
            upper_shift: shifts(cert.h.as_deref()),
        }
    }

    /// Interval `(0, A−1)` everywhere.
    pub fn unrestricted(model: &'m PomdpModel<T>) -> Self {
        Self {
            model,
            lower_shift: None,
            upper_shift: None,
        }
    }

    pub fn is_unrestricted(&self) -> bool {
        self.lower_shift.is_none() && self.upper_shift.is_none()
    }

    fn values(&self, shift: &[Vec<T>], b: &[T]) -> Vec<T> {
        (0..self.model.num_actions())
            .map(|a| rewards::expected_reward_unchecked(self.model, b, a) + scalar::dot(&shift[a], b))
            .collect()
    }

    /// Smallest maximizer of the `g`-transformed reward.
    pub fn lower(&self, b: &[T]) -> Option<usize> {
        let shift = self.lower_shift.as_ref()?;
        let vals = self.values(shift, b);
        let mut best = 0;
        for (a, &v) in vals.iter().enumerate().skip(1) {
            if v > vals[best] {
                best = a;
            }
        }
        Some(best)
    }

    /// Largest maximizer of the `h`-transformed reward.
    pub fn upper(&self, b: &[T]) -> Option<usize> {
        let shift = self.upper_shift.as_ref()?;
        let vals = self.values(shift, b);
        let mut best = 0;
        for (a, &v) in vals.iter().enumerate().skip(1) {
            if v >= vals[best] {
                best = a;
            }
        }
        Some(best)
    }

    pub fn interval(&self, b: &[T]) -> ActionInterval {
        let lo = self.lower(b).unwrap_or(0);
        let hi = self.upper(b).unwrap_or(self.model.num_actions() - 1);
        if lo <= hi {
            ActionInterval {
                lower: lo,
                upper: hi,
                widened: false,
            }
        } else {
            ActionInterval {
                lower: hi,
                upper: lo,
                widened: true,
            }
        }
    }
}

/// Greedy action on the `g`-transformed reward; `0` without `g`.
pub fn myopic_lower<T: Scalar>(model: &PomdpModel<T>, cert: &BoundCertificate<T>, b: &Belief<T>) -> usize {
    PolicyBounds::new(model, cert).lower(b.probs()).unwrap_or(0)
}

/// Greedy action on the `h`-transformed reward; `A−1` without `h`.
pub fn myopic_upper<T: Scalar>(model: &PomdpModel<T>, cert: &BoundCertificate<T>, b: &Belief<T>) -> usize {
    PolicyBounds::new(model, cert)
        .upper(b.probs())
        .unwrap_or(model.num_actions() - 1)
}

pub fn action_interval<T: Scalar>(model: &PomdpModel<T>, cert: &BoundCertificate<T>, b: &Belief<T>) -> ActionInterval {
    PolicyBounds::new(model, cert).interval(b.probs())
}

// ---------------------------------------------------------------------------
// Certificate file
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    belief: Option<Vec<f64>>,
    g: Option<Vec<f64>>,
    h: Option<Vec<f64>>,
    min_slack_g: Option<f64>,
    min_slack_h: Option<f64>,
    epsilon: f64,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn certificate_to_json<T: Scalar>(cert: &BoundCertificate<T>) -> String {
    let to_f64 = |v: &Option<Vec<T>>| v.as_ref().map(|v| v.iter().map(|x| x.as_f64()).collect());
    let (mode, belief) = match &cert.mode {
        CertificateMode::Global(BoundMode::Nominal) => ("nominal", None),
        CertificateMode::Global(BoundMode::Conservative) => ("conservative", None),
        CertificateMode::AtBelief(b) => ("at_belief", Some(b.probs().iter().map(|x| x.as_f64()).collect())),
    };
    let file = CertificateFile {
        mode: mode.to_string(),
        belief,
        g: to_f64(&cert.g),
        h: to_f64(&cert.h),
        min_slack_g: finite(cert.min_slack_g.as_f64()),
        min_slack_h: finite(cert.min_slack_h.as_f64()),
        epsilon: cert.epsilon.as_f64(),
    };
    serde_json::to_string_pretty(&file).expect("certificate serialization cannot fail")
}

pub fn parse_certificate<T: Scalar>(text: &str, num_states: usize) -> Result<BoundCertificate<T>, MlrError> {
    let file: CertificateFile = serde_json::from_str(text).map_err(|e| MlrError::File(e.to_string()))?;
    let mode = match file.mode.as_str() {
        "nominal" => CertificateMode::Global(BoundMode::Nominal),
        "conservative" => CertificateMode::Global(BoundMode::Conservative),
        "at_belief" => {
            let b = file.belief.ok_or_else(|| MlrError::File("at_belief mode needs `belief`".into()))?;
            CertificateMode::AtBelief(
                Belief::new(b.into_iter().map(T::of).collect()).map_err(|e| MlrError::File(e.to_string()))?,
            )
        }
        other => return Err(MlrError::File(format!("unknown mode `{other}`"))),
    };
    let conv = |v: Option<Vec<f64>>, name: &str| -> Result<Option<Vec<T>>, MlrError> {
        match v {
            Some(v) if v.len() != num_states => Err(MlrError::File(format!(
                "`{name}` has length {}, model has {num_states} states",
                v.len()
            ))),
            other => Ok(other.map(|v| v.into_iter().map(T::of).collect())),
        }
    };
    Ok(BoundCertificate {
        g: conv(file.g, "g")?,
        h: conv(file.h, "h")?,
        mode,
        min_slack_g: T::of(file.min_slack_g.unwrap_or(f64::NEG_INFINITY)),
        min_slack_h: T::of(file.min_slack_h.unwrap_or(f64::NEG_INFINITY)),
        epsilon: T::of(file.epsilon),
    })
}

pub fn save_certificate<T: Scalar>(cert: &BoundCertificate<T>, path: impl AsRef<Path>) -> Result<(), MlrError> {
    std::fs::write(path, certificate_to_json(cert)).map_err(|e| MlrError::File(e.to_string()))
}

pub fn load_certificate<T: Scalar>(path: impl AsRef<Path>, num_states: usize) -> Result<BoundCertificate<T>, MlrError> {
    let text = std::fs::read_to_string(path).map_err(|e| MlrError::File(e.to_string()))?;
    parse_certificate(&text, num_states)
}
