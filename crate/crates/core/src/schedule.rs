//! Stepsize schedules and prediction sources.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepsizeSchedule {
    Constant { eta: f64 },
    /// `η_t = c / √t`.
    InverseSqrt { c: f64 },
    /// `η_t = 1 / √(1/η₁² + Σ_{k<t} ‖s_k − m_k‖²)`.
    Adaptive { eta1: f64 },
}

impl Default for StepsizeSchedule {
    fn default() -> Self {
        StepsizeSchedule::Constant { eta: 1.0 }
    }
}

impl StepsizeSchedule {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            StepsizeSchedule::Constant { eta } => ("eta", eta),
            StepsizeSchedule::InverseSqrt { c } => ("c", c),
            StepsizeSchedule::Adaptive { eta1 } => ("eta1", eta1),
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("stepsize parameter {name} must be positive, got {v}")));
        }
        Ok(())
    }

    /// Stepsize for round `t ≥ 1`, given the accumulated squared prediction
    /// errors of rounds `1..t`.
    pub fn eta(&self, t: usize, accumulator: f64) -> f64 {
        debug_assert!(t >= 1);
        match *self {
            StepsizeSchedule::Constant { eta } => eta,
            StepsizeSchedule::InverseSqrt { c } => c / (t as f64).sqrt(),
            StepsizeSchedule::Adaptive { eta1 } => adaptive_value(eta1, accumulator),
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, StepsizeSchedule::Adaptive { .. })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, StepsizeSchedule::Constant { .. })
    }

    pub fn label(&self) -> String {
        match self {
            StepsizeSchedule::Constant { eta } => format!("const{eta}"),
            StepsizeSchedule::InverseSqrt { c } => format!("isqrt{c}"),
            StepsizeSchedule::Adaptive { eta1 } => format!("adapt{eta1:.4}"),
        }
    }
}

/// Adaptive stepsize `1 / √(1/η₁² + accumulator)`.
pub fn adaptive_eta(eta1: f64, accumulator: f64) -> Result<f64> {
    if !(eta1 > 0.0 && eta1.is_finite()) {
        return Err(Error::invalid(format!("eta1 must be positive, got {eta1}")));
    }
    if !(accumulator >= 0.0) {
        return Err(Error::invalid(format!("accumulator must be nonnegative, got {accumulator}")));
    }
    Ok(adaptive_value(eta1, accumulator))
}

fn adaptive_value(eta1: f64, accumulator: f64) -> f64 {
    if accumulator == 0.0 {
        return eta1;
    }
    1.0 / (1.0 / (eta1 * eta1) + accumulator).sqrt()
}

/// Largest `η₁` for which the adaptive regret bound is valid given a bound
/// `C` on the squared prediction errors.
pub fn max_adaptive_eta1(c_bound: f64) -> f64 {
    (3.0 / c_bound).sqrt()
}

/// Where the prediction `m_t` of the next instantaneous regret comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    /// `m_t = 0`.
    #[default]
    Zero,
    /// `m_t = s_{t−1}`, with `m_1 = 0`.
    LastInstant,
    /// Supplied by the caller every round.
    External,
}
