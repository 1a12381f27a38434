//! Uncertainty functions, the belief-dependent reward and information gain.
//!
//! Logarithms are natural throughout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{self, Belief, FilterError};
use crate::model::PomdpModel;
use crate::scalar::{self, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyKind {
    None,
    Shannon,
    RenyiQuadratic,
}

impl std::fmt::Display for UncertaintyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Shannon => "shannon",
            Self::RenyiQuadratic => "renyi_quadratic",
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("belief entry {index} = {value} is below epsilon = {epsilon}; Shannon gradient undefined")]
    BeliefOutsideEpsilonSimplex { index: usize, value: f64, epsilon: f64 },
    #[error(transparent)]
    Filter(#[from] FilterError),
}

fn check_action<T: Scalar>(model: &PomdpModel<T>, a: usize) -> Result<(), RewardError> {
    if a >= model.num_actions() {
        return Err(FilterError::ActionOutOfRange {
            action: a,
            num_actions: model.num_actions(),
        }
        .into());
    }
    Ok(())
}

/// `f(b)`: zero, Shannon entropy, or Rényi quadratic entropy.
pub fn uncertainty<T: Scalar>(kind: UncertaintyKind, b: &[T]) -> T {
    match kind {
        UncertaintyKind::None => T::zero(),
        UncertaintyKind::Shannon => {
            let h = b
                .iter()
                .filter(|&&p| p > T::zero())
                .fold(T::zero(), |acc, &p| acc - p * p.ln());
            h.max(T::zero())
        }
        UncertaintyKind::RenyiQuadratic => {
            let sq = b.iter().fold(T::zero(), |acc, &p| acc + p * p);
            (-sq.ln()).max(T::zero())
        }
    }
}

/// Gradient of `f` with respect to the belief coordinates.
///
/// Shannon requires every entry to be at least `epsilon`.
pub fn uncertainty_gradient<T: Scalar>(kind: UncertaintyKind, epsilon: T, b: &[T]) -> Result<Vec<T>, RewardError> {
    match kind {
        UncertaintyKind::None => Ok(vec![T::zero(); b.len()]),
        UncertaintyKind::Shannon => {
            if let Some((index, &value)) = b.iter().enumerate().find(|(_, &p)| p < epsilon) {
                return Err(RewardError::BeliefOutsideEpsilonSimplex {
                    index,
                    value: value.as_f64(),
                    epsilon: epsilon.as_f64(),
                });
            }
            Ok(b.iter().map(|&p| -(T::one() + p.ln())).collect())
        }
        UncertaintyKind::RenyiQuadratic => {
            let sq = b.iter().fold(T::zero(), |acc, &p| acc + p * p);
            let two = T::of(2.0);
            Ok(b.iter().map(|&p| -two * p / sq).collect())
        }
    }
}

/// `ρ(b,a) = Σ_s r(s,a) b(s) − w_a f(b)`.
pub fn expected_reward<T: Scalar>(model: &PomdpModel<T>, b: &Belief<T>, a: usize) -> Result<T, RewardError> {
    check_action(model, a)?;
    Ok(expected_reward_unchecked(model, b.probs(), a))
}

pub(crate) fn expected_reward_unchecked<T: Scalar>(model: &PomdpModel<T>, b: &[T], a: usize) -> T {
    let spec = model.reward();
    let linear = scalar::dot(spec.reward_vector(a), b);
    let w = spec.weights[a];
    if w == T::zero() {
        linear
    } else {
        linear - w * uncertainty(spec.uncertainty, b)
    }
}

/// `∂ρ(b,a)/∂b = r_a − w_a ∇f(b)`.
pub fn reward_gradient<T: Scalar>(model: &PomdpModel<T>, b: &Belief<T>, a: usize) -> Result<Vec<T>, RewardError> {
    check_action(model, a)?;
    let spec = model.reward();
    let grad = uncertainty_gradient(spec.uncertainty, spec.epsilon, b.probs())?;
    let w = spec.weights[a];
    Ok(spec
        .reward_vector(a)
        .iter()
        .zip(grad)
        .map(|(&r, g)| r - w * g)
        .collect())
}

/// `f(bᵃ) − Σ_z η(z|b,a) f(τ(b,a,z))`, skipping impossible observations.
pub fn information_gain<T: Scalar>(
    model: &PomdpModel<T>,
    b: &Belief<T>,
    a: usize,
    kind: UncertaintyKind,
) -> Result<T, RewardError> {
    let step = filter::branch(model, b, a)?;
    let prior = uncertainty(kind, step.predicted.probs());
    let expected = step
        .likelihood
        .iter()
        .zip(&step.posteriors)
        .filter_map(|(&eta, post)| post.as_ref().map(|p| eta * uncertainty(kind, p.probs())))
        .fold(T::zero(), |acc, x| acc + x);
    Ok(prior - expected)
}
