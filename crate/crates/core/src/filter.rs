//! Bayesian belief filtering and the stochastic orders on beliefs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use crate::model::{PomdpModel, STOCHASTIC_TOL};
use crate::scalar::{self, Scalar};

/// Observations whose likelihood is at or below this are impossible.
pub const ZERO_LIKELIHOOD: f64 = 1e-300;

/// Slack allowed on the cross-product and tail-sum inequalities.
pub const ORDER_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("action {action} out of range (model has {num_actions})")]
    ActionOutOfRange { action: usize, num_actions: usize },
    #[error("observation {observation} out of range (model has {num_observations})")]
    ObservationOutOfRange { observation: usize, num_observations: usize },
    #[error("observation {observation} has zero likelihood ({likelihood:e}) under this belief and action")]
    ZeroLikelihood { observation: usize, likelihood: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid belief: {0}")]
    InvalidBelief(String),
}

/// Probability vector over the hidden states.
#[derive(Clone, Debug, PartialEq)]
pub struct Belief<T> {
    probs: Vec<T>,
}

impl<T: Scalar> Belief<T> {
    /// Validates nonnegativity and unit sum within `1e-9`.
    pub fn new(probs: Vec<T>) -> Result<Self, FilterError> {
        Self::with_tolerance(probs, STOCHASTIC_TOL)
    }

    pub fn with_tolerance(probs: Vec<T>, tol: f64) -> Result<Self, FilterError> {
        if probs.is_empty() {
            return Err(FilterError::InvalidBelief("empty vector".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= T::zero()) || !p.is_finite()) {
            return Err(FilterError::InvalidBelief(format!("entry {i} is {p}")));
        }
        let s = scalar::sum(&probs);
        if (s - T::one()).abs() > T::tol(tol) {
            return Err(FilterError::InvalidBelief(format!("entries sum to {s}")));
        }
        Ok(Self { probs })
    }

    /// Scales a nonnegative vector with positive mass onto the simplex.
    pub fn normalized(mut probs: Vec<T>) -> Result<Self, FilterError> {
        let s = scalar::sum(&probs);
        if !(s > T::zero()) || probs.iter().any(|p| !(*p >= T::zero())) {
            return Err(FilterError::InvalidBelief("cannot normalize".into()));
        }
        probs.iter_mut().for_each(|p| *p = *p / s);
        Ok(Self { probs })
    }

    pub fn uniform(num_states: usize) -> Self {
        Self {
            probs: vec![T::one() / T::of(num_states as f64); num_states],
        }
    }

    /// Point mass on state `k`.
    pub fn vertex(num_states: usize, k: usize) -> Self {
        let mut probs = vec![T::zero(); num_states];
        probs[k] = T::one();
        Self { probs }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }

    /// Whether every entry is at least `epsilon`.
    pub fn in_inner_simplex(&self, epsilon: T) -> bool {
        self.probs.iter().all(|&p| p >= epsilon)
    }
}

impl<T> AsRef<[T]> for Belief<T> {
    fn as_ref(&self) -> &[T] {
        &self.probs
    }
}

fn check_action<T: Scalar>(model: &PomdpModel<T>, a: usize) -> Result<(), FilterError> {
    if a >= model.num_actions() {
        return Err(FilterError::ActionOutOfRange {
            action: a,
            num_actions: model.num_actions(),
        });
    }
    Ok(())
}

/// Prediction step: `bᵃ(s') = Σ_s T(s'|s,a) b(s)`.
pub fn predict<T: Scalar>(model: &PomdpModel<T>, b: &Belief<T>, a: usize) -> Result<Belief<T>, FilterError> {
    check_action(model, a)?;
    Ok(Belief {
        probs: model.transition(a).mul_vec(&b.probs),
    })
}

/// `η(z|b,a)` for every observation `z`.
pub fn observation_likelihood<T: Scalar>(
    model: &PomdpModel<T>,
    b: &Belief<T>,
    a: usize,
) -> Result<Vec<T>, FilterError> {
    let predicted = predict(model, b, a)?;
    Ok(model.observation(a).mul_vec(&predicted.probs))
}

/// Bayes update `τ(b,a,z)`.
pub fn update<T: Scalar>(
    model: &PomdpModel<T>,
    b: &Belief<T>,
    a: usize,
    z: usize,
) -> Result<Belief<T>, FilterError> {
    let predicted = predict(model, b, a)?;
    if z >= model.num_observations() {
        return Err(FilterError::ObservationOutOfRange {
            observation: z,
            num_observations: model.num_observations(),
        });
    }
    posterior(model, &predicted, a, z)
}

fn posterior<T: Scalar>(
    model: &PomdpModel<T>,
    predicted: &Belief<T>,
    a: usize,
    z: usize,
) -> Result<Belief<T>, FilterError> {
    let row = model.observation(a).row(z);
    let mut probs: Vec<T> = row.iter().zip(&predicted.probs).map(|(&o, &p)| o * p).collect();
    let eta = scalar::sum(&probs);
    if !(eta > T::of(ZERO_LIKELIHOOD)) {
        return Err(FilterError::ZeroLikelihood {
            observation: z,
            likelihood: eta.as_f64(),
        });
    }
    probs.iter_mut().for_each(|p| *p = *p / eta);
    Ok(Belief { probs })
}

/// One full filter step: the predicted belief, `η(·|b,a)` and the
/// posterior for every observation with nonzero likelihood.
#[derive(Clone, Debug)]
pub struct Branching<T> {
    pub predicted: Belief<T>,
    pub likelihood: Vec<T>,
    pub posteriors: Vec<Option<Belief<T>>>,
}

pub fn branch<T: Scalar>(model: &PomdpModel<T>, b: &Belief<T>, a: usize) -> Result<Branching<T>, FilterError> {
    let predicted = predict(model, b, a)?;
    let o = model.observation(a);
    let mut likelihood = Vec::with_capacity(model.num_observations());
    let mut posteriors = Vec::with_capacity(model.num_observations());
    for z in 0..model.num_observations() {
        let mut probs: Vec<T> = o.row(z).iter().zip(&predicted.probs).map(|(&x, &p)| x * p).collect();
        let eta = scalar::sum(&probs);
        likelihood.push(eta);
        if eta > T::of(ZERO_LIKELIHOOD) {
            probs.iter_mut().for_each(|p| *p = *p / eta);
            posteriors.push(Some(Belief { probs }));
        } else {
            posteriors.push(None);
        }
    }
    Ok(Branching {
        predicted,
        likelihood,
        posteriors,
    })
}

/// `b1 ≥_r b2` with a custom slack on the cross products.
pub fn mlr_geq_tol<T: Scalar>(b1: &[T], b2: &[T], tol: f64) -> Result<bool, FilterError> {
    if b1.len() != b2.len() {
        return Err(FilterError::LengthMismatch(b1.len(), b2.len()));
    }
    let tol = T::tol(tol);
    for i in 0..b1.len() {
        for j in i + 1..b1.len() {
            if b1[i] * b2[j] - b2[i] * b1[j] > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Monotone likelihood ratio order: `b1(i) b2(j) ≤ b2(i) b1(j)` for all `i < j`.
pub fn mlr_geq<T: Scalar>(b1: &[T], b2: &[T]) -> Result<bool, FilterError> {
    mlr_geq_tol(b1, b2, ORDER_TOL)
}

pub fn fosd_geq_tol<T: Scalar>(b1: &[T], b2: &[T], tol: f64) -> Result<bool, FilterError> {
    if b1.len() != b2.len() {
        return Err(FilterError::LengthMismatch(b1.len(), b2.len()));
    }
    let tol = T::tol(tol);
    let (mut t1, mut t2) = (T::zero(), T::zero());
    for j in (0..b1.len()).rev() {
        t1 = t1 + b1[j];
        t2 = t2 + b2[j];
        if t1 < t2 - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First-order stochastic dominance: every upper tail of `b1` carries at
/// least the mass of the same tail of `b2`.
pub fn fosd_geq<T: Scalar>(b1: &[T], b2: &[T]) -> Result<bool, FilterError> {
    fosd_geq_tol(b1, b2, ORDER_TOL)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from the simplex using normalized exponential variates.
pub fn sample_belief_with<T: Scalar, R: Rng + ?Sized>(num_states: usize, rng: &mut R) -> Belief<T> {
    loop {
        let draws: Vec<f64> = (0..num_states).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            return Belief {
                probs: draws.iter().map(|&x| T::of(x / total)).collect(),
            };
        }
    }
}

pub fn sample_belief<T: Scalar>(num_states: usize, seed: u64) -> Belief<T> {
    sample_belief_with(num_states, &mut rng(seed))
}

/// `(b1, b2)` with `b1 ≥_r b2`: `b2` is uniform on the simplex and `b1`
/// reweights it by a strictly increasing positive likelihood vector.
pub fn sample_mlr_pair_with<T: Scalar, R: Rng + ?Sized>(num_states: usize, rng: &mut R) -> (Belief<T>, Belief<T>) {
    let b2: Belief<T> = sample_belief_with(num_states, rng);
    let mut level = 0.0f64;
    let mut weighted = Vec::with_capacity(num_states);
    for &p in &b2.probs {
        let step: f64 = Exp1.sample(rng);
        level += step + 1e-3;
        weighted.push(p * T::of(level));
    }
    let b1 = Belief::normalized(weighted).unwrap_or_else(|_| b2.clone());
    (b1, b2)
}

pub fn sample_mlr_pair<T: Scalar>(num_states: usize, seed: u64) -> (Belief<T>, Belief<T>) {
    sample_mlr_pair_with(num_states, &mut rng(seed))
}

/// Like [`sample_mlr_pair_with`] but rejects pairs until both beliefs lie
/// in the inner simplex `{b : b(i) ≥ ε}`.
pub fn sample_mlr_pair_inner<T: Scalar, R: Rng + ?Sized>(
    num_states: usize,
    epsilon: T,
    rng: &mut R,
) -> Option<(Belief<T>, Belief<T>)> {
    for _ in 0..100_000 {
        let (b1, b2) = sample_mlr_pair_with(num_states, rng);
        if b1.in_inner_simplex(epsilon) && b2.in_inner_simplex(epsilon) {
            return Some((b1, b2));
        }
    }
    None
}

/// Runs `depth` filter steps from `b0` with uniformly random actions and
/// observations drawn from `η`.
pub fn sample_reachable_with<T: Scalar, R: Rng + ?Sized>(
    model: &PomdpModel<T>,
    b0: &Belief<T>,
    depth: usize,
    rng: &mut R,
) -> Belief<T> {
    let mut b = b0.clone();
    for _ in 0..depth {
        let a = rng.random_range(0..model.num_actions());
        let predicted = model.transition(a).mul_vec(&b.probs);
        let eta = model.observation(a).mul_vec(&predicted);
        let u = T::of(rng.random::<f64>()) * scalar::sum(&eta);
        let mut acc = T::zero();
        let mut z = eta.len() - 1;
        for (k, &e) in eta.iter().enumerate() {
            acc = acc + e;
            if u < acc && e > T::of(ZERO_LIKELIHOOD) {
                z = k;
                break;
            }
        }
        match posterior(model, &Belief { probs: predicted }, a, z) {
            Ok(next) => b = next,
            Err(_) => break,
        }
    }
    b
}

pub fn sample_reachable<T: Scalar>(model: &PomdpModel<T>, b0: &Belief<T>, depth: usize, seed: u64) -> Belief<T> {
    sample_reachable_with(model, b0, depth, &mut rng(seed))
}
