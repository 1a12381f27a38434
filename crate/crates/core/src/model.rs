//! POMDP data model, validation and the JSON model file format.
//!
//! Tensor orientation is fixed crate-wide:
//!
//! - `transition(a)[(next, prev)]` is `T(next | prev, a)`; every column sums to one.
//! - `observation(a)[(z, next)]` is `O(z | next, a)`; every column sums to one.
//! - `reward().state_reward[(a, s)]` is `r(s, a)`.
//!
//! Indices are zero-based in the API. Model files store the same nested
//! layout as plain JSON arrays.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::rewards::UncertaintyKind;
use crate::scalar::Scalar;

/// Column-sum tolerance for stochastic matrices.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Default Shannon inner-simplex parameter.
pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read or write model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model file: {0}")]
    Parse(String),
    #[error("dimension mismatch in `{field}`: {detail}")]
    DimensionMismatch { field: String, detail: String },
    #[error("model failed validation: {0}")]
    Validation(ValidationReport),
}

/// Belief-dependent reward `ρ(b,a) = Σ_s r(s,a) b(s) − w_a f(b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardSpec<T> {
    /// `[action][state]`
    pub state_reward: Matrix<T>,
    pub weights: Vec<T>,
    pub uncertainty: UncertaintyKind,
    /// Lower bound on belief entries for Shannon gradients.
    pub epsilon: T,
}

impl<T: Scalar> RewardSpec<T> {
    /// Purely state-dependent reward: no uncertainty penalty.
    pub fn linear(state_reward: Matrix<T>) -> Self {
        let a = state_reward.rows();
        Self {
            state_reward,
            weights: vec![T::zero(); a],
            uncertainty: UncertaintyKind::None,
            epsilon: T::of(DEFAULT_EPSILON),
        }
    }

    pub fn reward_vector(&self, a: usize) -> &[T] {
        self.state_reward.row(a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub index: Vec<usize>,
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, field: &str, index: Vec<usize>, measured: f64, tolerance: f64) {
        self.violations.push(Violation {
            field: field.to_string(),
            index,
            measured,
            tolerance,
        });
        self.passed = false;
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed {
            return write!(f, "ok");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(5) {
            write!(
                f,
                "; {}{:?} = {} (tol {})",
                v.field, v.index, v.measured, v.tolerance
            )?;
        }
        Ok(())
    }
}

/// Finite POMDP with a belief-dependent reward. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct PomdpModel<T> {
    num_states: usize,
    num_actions: usize,
    num_observations: usize,
    discount: T,
    transitions: Vec<Matrix<T>>,
    observations: Vec<Matrix<T>>,
    reward: RewardSpec<T>,
}

impl<T: Scalar> PomdpModel<T> {
    /// Builds and validates a model. Columns within tolerance are
    /// renormalized to sum to one exactly.
    pub fn new(
        transitions: Vec<Matrix<T>>,
        observations: Vec<Matrix<T>>,
        discount: T,
        reward: RewardSpec<T>,
    ) -> Result<Self, ModelError> {
        let model = Self::from_parts_unchecked(transitions, observations, discount, reward)?;
        let report = model.validate();
        if !report.passed {
            return Err(ModelError::Validation(report));
        }
        Ok(model.renormalized())
    }

    /// Builds a model checking only the shapes. Stochasticity is left to
    /// [`PomdpModel::validate`].
    pub fn from_parts_unchecked(
        transitions: Vec<Matrix<T>>,
        observations: Vec<Matrix<T>>,
        discount: T,
        reward: RewardSpec<T>,
    ) -> Result<Self, ModelError> {
        let num_actions = transitions.len();
        if num_actions == 0 {
            return Err(mismatch("transitions", "at least one action is required"));
        }
        let num_states = transitions[0].rows();
        if num_states < 2 {
            return Err(mismatch("transitions", "at least two states are required"));
        }
        for (a, t) in transitions.iter().enumerate() {
            if t.rows() != num_states || t.cols() != num_states {
                return Err(mismatch(
                    "transitions",
                    &format!("action {a} is {}x{}, expected {num_states}x{num_states}", t.rows(), t.cols()),
                ));
            }
        }
        if observations.len() != num_actions {
            return Err(mismatch(
                "observations",
                &format!("{} actions, expected {num_actions}", observations.len()),
            ));
        }
        let num_observations = observations[0].rows();
        if num_observations == 0 {
            return Err(mismatch("observations", "at least one observation is required"));
        }
        for (a, o) in observations.iter().enumerate() {
            if o.rows() != num_observations || o.cols() != num_states {
                return Err(mismatch(
                    "observations",
                    &format!(
                        "action {a} is {}x{}, expected {num_observations}x{num_states}",
                        o.rows(),
                        o.cols()
                    ),
                ));
            }
        }
        if reward.state_reward.rows() != num_actions || reward.state_reward.cols() != num_states {
            return Err(mismatch(
                "reward.state_reward",
                &format!(
                    "{}x{}, expected {num_actions}x{num_states}",
                    reward.state_reward.rows(),
                    reward.state_reward.cols()
                ),
            ));
        }
        if reward.weights.len() != num_actions {
            return Err(mismatch(
                "reward.weights",
                &format!("length {}, expected {num_actions}", reward.weights.len()),
            ));
        }
        Ok(Self {
            num_states,
            num_actions,
            num_observations,
            discount,
            transitions,
            observations,
            reward,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_observations(&self) -> usize {
        self.num_observations
    }

    pub fn discount(&self) -> T {
        self.discount
    }

    pub fn transition(&self, a: usize) -> &Matrix<T> {
        &self.transitions[a]
    }

    pub fn observation(&self, a: usize) -> &Matrix<T> {
        &self.observations[a]
    }

    pub fn reward(&self) -> &RewardSpec<T> {
        &self.reward
    }

    pub fn with_reward(&self, reward: RewardSpec<T>) -> Result<Self, ModelError> {
        Self::new(
            self.transitions.clone(),
            self.observations.clone(),
            self.discount,
            reward,
        )
    }

    pub fn with_discount(&self, discount: T) -> Result<Self, ModelError> {
        Self::new(
            self.transitions.clone(),
            self.observations.clone(),
            discount,
            self.reward.clone(),
        )
    }

    /// Same model with the action order reversed.
    pub fn with_reversed_actions(&self) -> Self {
        let rev = |v: &[Matrix<T>]| v.iter().rev().cloned().collect::<Vec<_>>();
        let a = self.num_actions;
        let reward = RewardSpec {
            state_reward: Matrix::from_fn(a, self.num_states, |i, j| {
                self.reward.state_reward[(a - 1 - i, j)]
            }),
            weights: self.reward.weights.iter().rev().copied().collect(),
            uncertainty: self.reward.uncertainty,
            epsilon: self.reward.epsilon,
        };
        Self {
            transitions: rev(&self.transitions),
            observations: rev(&self.observations),
            reward,
            ..self.clone()
        }
    }

    /// Reports every stochasticity, sign and range violation.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport {
            passed: true,
            violations: Vec::new(),
        };
        let tol = T::tol(STOCHASTIC_TOL);
        for (name, tensors) in [("transitions", &self.transitions), ("observations", &self.observations)] {
            for (a, m) in tensors.iter().enumerate() {
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        let v = m[(i, j)];
                        if !v.is_finite() || v < T::zero() {
                            report.push(name, vec![a, i, j], v.as_f64(), 0.0);
                        }
                    }
                }
                for j in 0..m.cols() {
                    let s = m.column_sum(j);
                    if !((s - T::one()).abs() <= tol) {
                        report.push(&format!("{name}.column_sum"), vec![a, j], s.as_f64(), tol.as_f64());
                    }
                }
            }
        }
        if !(self.discount >= T::zero() && self.discount <= T::one()) {
            report.push("discount", vec![], self.discount.as_f64(), 0.0);
        }
        for a in 0..self.num_actions {
            for s in 0..self.num_states {
                let r = self.reward.state_reward[(a, s)];
                if !r.is_finite() {
                    report.push("reward.state_reward", vec![a, s], r.as_f64(), 0.0);
                }
            }
            let w = self.reward.weights[a];
            if !(w >= T::zero()) || !w.is_finite() {
                report.push("reward.weights", vec![a], w.as_f64(), 0.0);
            }
        }
        let eps = self.reward.epsilon;
        if !(eps > T::zero() && eps < T::one()) {
            report.push("reward.epsilon", vec![], eps.as_f64(), 0.0);
        }
        report
    }

    fn renormalized(mut self) -> Self {
        for m in self.transitions.iter_mut().chain(self.observations.iter_mut()) {
            for j in 0..m.cols() {
                let s = m.column_sum(j);
                for i in 0..m.rows() {
                    m[(i, j)] = m[(i, j)] / s;
                }
            }
        }
        self
    }

    /// Converts to another precision. The result is revalidated.
    pub fn cast<U: Scalar>(&self) -> Result<PomdpModel<U>, ModelError> {
        let conv = |m: &Matrix<T>| m.map(|x| U::of(x.as_f64()));
        PomdpModel::new(
            self.transitions.iter().map(conv).collect(),
            self.observations.iter().map(conv).collect(),
            U::of(self.discount.as_f64()),
            RewardSpec {
                state_reward: conv(&self.reward.state_reward),
                weights: self.reward.weights.iter().map(|w| U::of(w.as_f64())).collect(),
                uncertainty: self.reward.uncertainty,
                epsilon: U::of(self.reward.epsilon.as_f64()),
            },
        )
    }
}

fn mismatch(field: &str, detail: &str) -> ModelError {
    ModelError::DimensionMismatch {
        field: field.to_string(),
        detail: detail.to_string(),
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelFile {
    num_states: usize,
    num_actions: usize,
    num_observations: usize,
    discount: f64,
    transitions: Value,
    observations: Value,
    reward: RewardFile,
}

#[derive(Serialize, Deserialize)]
struct RewardFile {
    state_reward: Value,
    weights: Vec<f64>,
    uncertainty: UncertaintyKind,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn number(v: &Value, field: &str) -> Result<f64, ModelError> {
    v.as_f64()
        .ok_or_else(|| mismatch(field, &format!("expected a number, found {v}")))
}

fn array<'a>(v: &'a Value, field: &str, len: usize) -> Result<&'a Vec<Value>, ModelError> {
    let arr = v
        .as_array()
        .ok_or_else(|| mismatch(field, &format!("expected an array, found {v}")))?;
    if arr.len() != len {
        return Err(mismatch(field, &format!("length {}, expected {len}", arr.len())));
    }
    Ok(arr)
}

fn matrix_from_value<T: Scalar>(v: &Value, field: &str, rows: usize, cols: usize) -> Result<Matrix<T>, ModelError> {
    let outer = array(v, field, rows)?;
    let mut m = Matrix::zeros(rows, cols);
    for (i, row) in outer.iter().enumerate() {
        let inner = array(row, field, cols)?;
        for (j, x) in inner.iter().enumerate() {
            m[(i, j)] = T::of(number(x, field)?);
        }
    }
    Ok(m)
}

fn tensor_from_value<T: Scalar>(
    v: &Value,
    field: &str,
    dims: (usize, usize, usize),
) -> Result<Vec<Matrix<T>>, ModelError> {
    array(v, field, dims.0)?
        .iter()
        .map(|slice| matrix_from_value(slice, field, dims.1, dims.2))
        .collect()
}

fn matrix_to_value<T: Scalar>(m: &Matrix<T>) -> Value {
    Value::from(
        m.to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(|x| x.as_f64()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    )
}

/// Parses a model from its JSON text, checks shapes and validates it.
pub fn parse_model<T: Scalar>(text: &str) -> Result<PomdpModel<T>, ModelError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
    let (s, a, z) = (file.num_states, file.num_actions, file.num_observations);
    let transitions = tensor_from_value(&file.transitions, "transitions", (a, s, s))?;
    let observations = tensor_from_value(&file.observations, "observations", (a, z, s))?;
    let state_reward = matrix_from_value(&file.reward.state_reward, "reward.state_reward", a, s)?;
    if file.reward.weights.len() != a {
        return Err(mismatch(
            "reward.weights",
            &format!("length {}, expected {a}", file.reward.weights.len()),
        ));
    }
    let reward = RewardSpec {
        state_reward,
        weights: file.reward.weights.iter().map(|&w| T::of(w)).collect(),
        uncertainty: file.reward.uncertainty,
        epsilon: T::of(file.reward.epsilon),
    };
    PomdpModel::new(transitions, observations, T::of(file.discount), reward)
}

pub fn model_to_json<T: Scalar>(model: &PomdpModel<T>) -> String {
    let file = ModelFile {
        num_states: model.num_states,
        num_actions: model.num_actions,
        num_observations: model.num_observations,
        discount: model.discount.as_f64(),
        transitions: Value::from(model.transitions.iter().map(matrix_to_value).collect::<Vec<_>>()),
        observations: Value::from(model.observations.iter().map(matrix_to_value).collect::<Vec<_>>()),
        reward: RewardFile {
            state_reward: matrix_to_value(&model.reward.state_reward),
            weights: model.reward.weights.iter().map(|w| w.as_f64()).collect(),
            uncertainty: model.reward.uncertainty,
            epsilon: model.reward.epsilon.as_f64(),
        },
    };
    serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<PomdpModel<T>, ModelError> {
    parse_model(&fs::read_to_string(path)?)
}

pub fn save_model<T: Scalar>(model: &PomdpModel<T>, path: impl AsRef<Path>) -> Result<(), ModelError> {
    fs::write(path, model_to_json(model))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::tracking_model_small;

    fn identity_model() -> PomdpModel<f64> {
        let s = 3;
        PomdpModel::new(
            vec![Matrix::identity(s)],
            vec![Matrix::from_fn(2, s, |_, _| 0.5)],
            0.9,
            RewardSpec::linear(Matrix::zeros(1, s)),
        )
        .unwrap()
    }

    #[test]
    fn identity_transitions_validate() {
        assert!(identity_model().validate().passed);
    }

    #[test]
    fn short_column_is_reported() {
        let mut t = Matrix::<f64>::identity(3);
        t[(1, 1)] = 0.9;
        let m = PomdpModel::from_parts_unchecked(
            vec![t],
            vec![Matrix::from_fn(2, 3, |_, _| 0.5)],
            0.9,
            RewardSpec::linear(Matrix::zeros(1, 3)),
        )
        .unwrap();
        let report = m.validate();
        assert!(!report.passed);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].field, "transitions.column_sum");
        assert_eq!(report.violations[0].index, vec![0, 1]);
        assert!((report.violations[0].measured - 0.9).abs() < 1e-15);
    }

    #[test]
    fn tracking_model_validates() {
        assert!(tracking_model_small::<f64>().validate().passed);
    }

    #[test]
    fn file_round_trip_is_lossless() {
        let m = tracking_model_small::<f64>();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&m, &path).unwrap();
        let back: PomdpModel<f64> = load_model(&path).unwrap();
        assert_eq!(back.num_states(), 3);
        for a in 0..3 {
            for (x, y) in m.transition(a).iter().zip(back.transition(a).iter()) {
                assert!((x - y).abs() <= 1e-12);
            }
            for (x, y) in m.observation(a).iter().zip(back.observation(a).iter()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
        assert_eq!(back.reward().weights, m.reward().weights);
        assert_eq!(back.reward().state_reward, m.reward().state_reward);
        assert_eq!(back.discount(), m.discount());
        assert_eq!(back.reward().uncertainty, m.reward().uncertainty);
    }

    #[test]
    fn wrong_rank_is_dimension_mismatch() {
        let mut v: Value = serde_json::from_str(&model_to_json(&identity_model())).unwrap();
        v["transitions"] = serde_json::json!([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let err = parse_model::<f64>(&v.to_string()).unwrap_err();
        assert!(matches!(err, ModelError::DimensionMismatch { .. }), "{err}");
    }

    #[test]
    fn negative_observation_is_validation_error() {
        let mut v: Value = serde_json::from_str(&model_to_json(&identity_model())).unwrap();
        v["observations"][0][0][0] = serde_json::json!(-0.5);
        v["observations"][0][1][0] = serde_json::json!(1.5);
        let err = parse_model::<f64>(&v.to_string()).unwrap_err();
        assert!(matches!(err, ModelError::Validation(_)), "{err}");
    }

    #[test]
    fn malformed_text_is_parse_error() {
        assert!(matches!(parse_model::<f64>("{ not json"), Err(ModelError::Parse(_))));
    }

    #[test]
    fn near_stochastic_columns_are_renormalized() {
        let mut t = Matrix::<f64>::identity(2);
        t[(0, 0)] = 1.0 + 5e-10;
        let m = PomdpModel::new(
            vec![t],
            vec![Matrix::identity(2)],
            0.5,
            RewardSpec::linear(Matrix::zeros(1, 2)),
        )
        .unwrap();
        assert_eq!(m.transition(0).column_sum(0), 1.0);
    }
}
