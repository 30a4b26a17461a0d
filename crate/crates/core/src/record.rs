use serde::Serialize;

use crate::audit::AuditRecord;
use crate::vector::{Simplex, KahanAccumulator};

/// Telemetry of one completed round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: usize,
    pub iterate: Vec<f64>,
    pub loss: Vec<f64>,
    pub prediction: Vec<f64>,
    /// `s_t` (or `s^Φ_t`), never truncated.
    pub instant_regret: Vec<f64>,
    pub eta: f64,
    /// `F(η_t s_{1:t})` for the vector the learner steers.
    pub potential_value: f64,
    /// `<∇F(η_t (s_{1:t−1} + m_t)), s_t>`.
    pub blackwell_ip: f64,
    pub fallback: bool,
    /// `‖s_t − m_t‖²` in the potential's smoothness norm.
    pub prediction_error_sq: f64,
    pub measured_regret: f64,
    pub audit: AuditRecord,
}

/// Regret against the best vertex of the simplex, recomputed from the
/// recorded instantaneous regret vectors. Zero for an empty history.
pub fn measured_regret(history: &[RoundRecord], comparator: &Simplex) -> f64 {
    match cumulative_from_history(history) {
        Some(total) => comparator.support(&total),
        None => 0.0,
    }
}

/// Exact sum of the recorded instantaneous regret vectors.
pub fn cumulative_from_history(history: &[RoundRecord]) -> Option<Vec<f64>> {
    let first = history.first()?;
    let mut acc = vec![KahanAccumulator::default(); first.instant_regret.len()];
    for rec in history {
        for (a, v) in acc.iter_mut().zip(&rec.instant_regret) {
            a.add(*v);
        }
    }
    Some(acc.iter().map(KahanAccumulator::value).collect())
}
