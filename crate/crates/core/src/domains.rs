//! Target-tracking POMDP family.
//!
//! States are ordered from innocuous (`0`) to red alert (`S-1`); actions
//! from highest tracking priority (`0`) to no tracking (`A-1`). Lower
//! priority makes transitions to higher states more likely. The sensor
//! reports the true state with probability `q` and otherwise an adjacent
//! state.

use thiserror::Error;

use crate::linalg::Matrix;
use crate::model::{ModelError, PomdpModel, RewardSpec, DEFAULT_EPSILON};
use crate::rewards::UncertaintyKind;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn invalid(msg: impl Into<String>) -> DomainError {
    DomainError::InvalidParameter(msg.into())
}

fn strictly_increasing<T: Scalar>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// `x_i = i` for `i = 1..=S`.
pub fn default_x_seq<T: Scalar>(num_states: usize) -> Vec<T> {
    (1..=num_states).map(|i| T::of(i as f64)).collect()
}

/// `y_j = j − S·A − 1` for `j = 1..=S·A`, i.e. `−S·A, …, −1`.
pub fn default_y_seq<T: Scalar>(num_states: usize, num_actions: usize) -> Vec<T> {
    let n = num_states * num_actions;
    (1..=n).map(|j| T::of(j as f64 - n as f64 - 1.0)).collect()
}

/// Slices the column-normalized matrix `exp(x_i y_j)` into `A` square
/// blocks of consecutive columns.
pub fn tracking_transitions<T: Scalar>(
    num_states: usize,
    num_actions: usize,
    x_seq: &[T],
    y_seq: &[T],
) -> Result<Vec<Matrix<T>>, DomainError> {
    if num_states < 2 || num_actions < 1 {
        return Err(invalid("need S >= 2 and A >= 1"));
    }
    if x_seq.len() != num_states || y_seq.len() != num_states * num_actions {
        return Err(invalid(format!(
            "sequence lengths {}/{} do not match S={num_states}, S*A={}",
            x_seq.len(),
            y_seq.len(),
            num_states * num_actions
        )));
    }
    if !strictly_increasing(x_seq) || !strictly_increasing(y_seq) {
        return Err(invalid("x and y sequences must be strictly increasing"));
    }
    let mut full = Matrix::zeros(num_states, num_states * num_actions);
    for (j, &y) in y_seq.iter().enumerate() {
        let shift = x_seq.iter().map(|&x| x * y).fold(T::neg_infinity(), T::max);
        let mut total = T::zero();
        for (i, &x) in x_seq.iter().enumerate() {
            let v = (x * y - shift).exp();
            full[(i, j)] = v;
            total = total + v;
        }
        for i in 0..num_states {
            full[(i, j)] = full[(i, j)] / total;
        }
    }
    Ok((0..num_actions)
        .map(|a| Matrix::from_fn(num_states, num_states, |i, j| full[(i, a * num_states + j)]))
        .collect())
}

/// Tridiagonal sensor with `Z = S`, identical for every action.
pub fn tracking_observations<T: Scalar>(
    num_states: usize,
    num_actions: usize,
    q: T,
) -> Result<Vec<Matrix<T>>, DomainError> {
    if !(q > T::zero() && q < T::one()) {
        return Err(invalid(format!("observation accuracy q = {q} must lie in (0, 1)")));
    }
    if num_states < 2 {
        return Err(invalid("need S >= 2"));
    }
    let miss = T::one() - q;
    let half = miss / T::of(2.0);
    let last = num_states - 1;
    let o = Matrix::from_fn(num_states, num_states, |z, j| {
        let edge = j == 0 || j == last;
        if z == j {
            q
        } else if z.abs_diff(j) == 1 {
            if edge {
                miss
            } else {
                half
            }
        } else {
            T::zero()
        }
    });
    Ok(vec![o; num_actions])
}

/// Reward attached to a tracking domain.
#[derive(Clone, Debug, PartialEq)]
pub enum TrackingReward<T> {
    /// `ρ = r·b − w_a f(b)` with explicit `r[state][action]`.
    EntropyPenalized {
        weights: Vec<T>,
        state_reward: Vec<Vec<T>>,
        kind: UncertaintyKind,
        epsilon: T,
    },
    /// Effort cost plus poor/dangerous tracking penalties, no uncertainty term.
    Costed(CostedParams<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostedParams<T> {
    pub effort_cost: T,
    pub poor_penalty: T,
    pub danger_penalty: T,
    pub tracking_gain: T,
}

impl<T: Scalar> CostedParams<T> {
    /// `c_a = 1/(2A)`, `c_p = 1`, `c_d = 0.1`, `k_r = 2/S`.
    pub fn defaults(num_states: usize, num_actions: usize) -> Self {
        Self {
            effort_cost: T::one() / T::of(2.0 * num_actions as f64),
            poor_penalty: T::one(),
            danger_penalty: T::of(0.1),
            tracking_gain: T::of(2.0 / num_states as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackingParams<T> {
    pub num_states: usize,
    pub num_actions: usize,
    pub q: T,
    pub x_seq: Vec<T>,
    pub y_seq: Vec<T>,
    pub reward: TrackingReward<T>,
    pub discount: T,
}

impl<T: Scalar> TrackingParams<T> {
    pub fn build(&self) -> Result<PomdpModel<T>, DomainError> {
        let (s, a) = (self.num_states, self.num_actions);
        let transitions = tracking_transitions(s, a, &self.x_seq, &self.y_seq)?;
        let observations = tracking_observations(s, a, self.q)?;
        let reward = match &self.reward {
            TrackingReward::EntropyPenalized {
                weights,
                state_reward,
                kind,
                epsilon,
            } => {
                if state_reward.len() != s || state_reward.iter().any(|r| r.len() != a) {
                    return Err(invalid("state_reward must be S rows by A columns"));
                }
                RewardSpec {
                    state_reward: Matrix::from_fn(a, s, |act, st| state_reward[st][act]),
                    weights: weights.clone(),
                    uncertainty: *kind,
                    epsilon: *epsilon,
                }
            }
            TrackingReward::Costed(p) => RewardSpec::linear(costed_reward(s, a, p)?),
        };
        Ok(PomdpModel::new(transitions, observations, self.discount, reward)?)
    }
}

/// Poor-tracking set `{s ≤ S/5}` and dangerous set `{s ≥ 9S/10}` in
/// one-based state labels.
fn region(num_states: usize, s1: usize) -> Region {
    let (s, x) = (num_states as f64, s1 as f64);
    if x <= s / 5.0 {
        Region::Poor
    } else if x >= 9.0 * s / 10.0 {
        Region::Dangerous
    } else {
        Region::Tracking
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Region {
    Poor,
    Dangerous,
    Tracking,
}

/// `r(s,a) = −c_a (A − a + 1) + t(s)` on one-based labels, returned as `[action][state]`.
pub fn costed_reward<T: Scalar>(
    num_states: usize,
    num_actions: usize,
    p: &CostedParams<T>,
) -> Result<Matrix<T>, DomainError> {
    if !(1..=num_states).any(|s1| region(num_states, s1) == Region::Tracking) {
        return Err(invalid(format!(
            "S = {num_states} leaves no states between the poor (s <= S/5) and dangerous (s >= 9S/10) regions"
        )));
    }
    let tracking = |s1: usize| -> T {
        let x = T::of(s1 as f64);
        match region(num_states, s1) {
            Region::Poor => -p.poor_penalty / x,
            Region::Dangerous => -p.danger_penalty / T::of((num_states - s1 + 1) as f64),
            Region::Tracking => p.tracking_gain * x,
        }
    };
    Ok(Matrix::from_fn(num_actions, num_states, |a, s| {
        let effort = T::of((num_actions - a) as f64);
        -p.effort_cost * effort + tracking(s + 1)
    }))
}

/// Three-state, three-action tracking problem with a Rényi-entropy penalty.
pub fn tracking_model_small<T: Scalar>() -> PomdpModel<T> {
    tracking_model_small_with_q(T::of(0.7)).expect("built-in constants are valid")
}

pub fn tracking_model_small_with_q<T: Scalar>(q: T) -> Result<PomdpModel<T>, DomainError> {
    let lit = |rows: &[[f64; 3]]| -> Vec<Vec<T>> {
        rows.iter().map(|r| r.iter().map(|&x| T::of(x)).collect()).collect()
    };
    TrackingParams {
        num_states: 3,
        num_actions: 3,
        q,
        x_seq: default_x_seq(3),
        y_seq: default_y_seq(3, 3),
        reward: TrackingReward::EntropyPenalized {
            weights: [1.1, 1.6, 1.0].iter().map(|&w| T::of(w)).collect(),
            state_reward: lit(&[[2.0, 2.5, 1.0], [1.1, 1.2, 0.5], [0.3, 2.0, 0.2]]),
            kind: UncertaintyKind::RenyiQuadratic,
            epsilon: T::of(DEFAULT_EPSILON),
        },
        discount: T::of(0.99),
    }
    .build()
}

/// Optional overrides for [`tracking_model_costed`].
#[derive(Clone, Debug, Default)]
pub struct CostedOverrides<T> {
    pub params: Option<CostedParams<T>>,
    pub discount: Option<T>,
}

/// Costed tracking domain with default sequences, `γ = 0.99` unless overridden.
pub fn tracking_model_costed<T: Scalar>(
    num_states: usize,
    num_actions: usize,
    q: T,
    overrides: CostedOverrides<T>,
) -> Result<PomdpModel<T>, DomainError> {
    TrackingParams {
        num_states,
        num_actions,
        q,
        x_seq: default_x_seq(num_states),
        y_seq: default_y_seq(num_states, num_actions),
        reward: TrackingReward::Costed(
            overrides
                .params
                .unwrap_or_else(|| CostedParams::defaults(num_states, num_actions)),
        ),
        discount: overrides.discount.unwrap_or(T::of(0.99)),
    }
    .build()
}

/// Costed domain with all published defaults (`q = 0.8`).
pub fn tracking_model_costed_default<T: Scalar>(num_states: usize, num_actions: usize) -> Result<PomdpModel<T>, DomainError> {
    tracking_model_costed(num_states, num_actions, T::of(0.8), CostedOverrides::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_transition_columns() {
        let t = tracking_transitions(2, 1, &[1.0, 2.0], &[-2.0, -1.0]).unwrap();
        let t = &t[0];
        // exp(-2)/(exp(-2)+exp(-4)) and exp(-1)/(exp(-1)+exp(-2)).
        let c0 = 1.0 / (1.0 + (-2.0f64).exp());
        let c1 = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((t[(0, 0)] - c0).abs() < 1e-15);
        assert!((t[(0, 1)] - c1).abs() < 1e-15);
        assert!((t[(0, 0)] - 0.8808).abs() < 1e-4);
        assert!((t[(1, 1)] - 0.2689).abs() < 1e-4);
    }

    #[test]
    fn default_sequences_match_small_instance() {
        assert_eq!(default_x_seq::<f64>(3), vec![1.0, 2.0, 3.0]);
        assert_eq!(
            default_y_seq::<f64>(3, 3),
            vec![-9.0, -8.0, -7.0, -6.0, -5.0, -4.0, -3.0, -2.0, -1.0]
        );
    }

    #[test]
    fn observation_columns() {
        let o = tracking_observations(3, 1, 0.7).unwrap().remove(0);
        let cols: Vec<Vec<f64>> = (0..3).map(|j| o.column(j)).collect();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(&cols[0], &[0.7, 0.3, 0.0]));
        assert!(close(&cols[1], &[0.15, 0.7, 0.15]));
        assert!(close(&cols[2], &[0.0, 0.3, 0.7]));
        let o = tracking_observations(2, 1, 0.8).unwrap().remove(0);
        assert!(close(&o.to_rows().concat(), &[0.8, 0.2, 0.2, 0.8]));
        let near_one = tracking_observations::<f64>(4, 1, 1.0 - 1e-12).unwrap().remove(0);
        assert!((near_one[(2, 2)] - 1.0).abs() < 1e-11);
        assert!(tracking_observations::<f64>(3, 1, 1.0).is_err());
        assert!(tracking_observations::<f64>(3, 1, 0.0).is_err());
    }

    #[test]
    fn small_model_constants() {
        let m = tracking_model_small::<f64>();
        // r(s=1, a=2) = 2.5 in one-based labels.
        assert_eq!(m.reward().state_reward[(1, 0)], 2.5);
        assert_eq!(m.reward().weights[1], 1.6);
        assert_eq!(m.discount(), 0.99);
        assert_eq!(m.reward().uncertainty, UncertaintyKind::RenyiQuadratic);
    }

    #[test]
    fn costed_reward_small_case() {
        let r = costed_reward(4, 4, &CostedParams::<f64>::defaults(4, 4)).unwrap();
        assert!((r[(0, 0)] - 0.0).abs() < 1e-15);
        assert!((r[(0, 3)] + 0.6).abs() < 1e-15);
        // The tracking term does not depend on the action: differences
        // between actions are the effort cost only.
        for s in 0..4 {
            for a in 1..4 {
                assert!((r[(a, s)] - r[(a - 1, s)] - 0.125).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn costed_rejects_empty_middle_region() {
        assert!(matches!(
            tracking_model_costed_default::<f64>(1, 2),
            Err(DomainError::InvalidParameter(_))
        ));
    }

    #[test]
    fn costed_models_validate() {
        for (s, a) in [(4, 4), (8, 3), (16, 8)] {
            let m = tracking_model_costed_default::<f64>(s, a).unwrap();
            assert!(m.validate().passed);
            for act in 0..a {
                for j in 0..s {
                    assert!((m.transition(act).column_sum(j) - 1.0).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_increasing_sequences_are_rejected() {
        assert!(tracking_transitions(2, 1, &[2.0, 1.0], &[-2.0, -1.0]).is_err());
        assert!(tracking_transitions(2, 1, &[1.0, 2.0], &[-2.0]).is_err());
    }
}
