//! Re-checks recorded telemetry without rerunning the experiment.

use std::path::Path;

use serde::Serialize;

use crate::audit::{
    adaptive_regret_bound, potential_growth_bound, BLACKWELL_TOLERANCE, REGRET_SLACK, GROWTH_RELATIVE_SLACK,
};
use crate::error::Result;
use crate::potential::RegretTranslation;
use crate::vector::KahanAccumulator;

use super::telemetry::{meta_path, read_rows, PlayerMeta, TelemetryMeta, TelemetryRow};

/// Relative agreement required between recorded and recomputed bounds.
pub const RECOMPUTE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OfflineAudit {
    pub rows: usize,
    pub blackwell_violations: usize,
    pub growth_violations: usize,
    pub regret_violations: usize,
    /// Rows whose recorded bounds disagree with the bounds recomputed from
    /// the stepsize and prediction-error columns (needs the sidecar).
    pub bound_mismatches: usize,
    pub recomputed: bool,
    /// `(t, player)` of the first failing row.
    pub first_violation: Option<(usize, usize)>,
}

impl OfflineAudit {
    pub fn violations(&self) -> usize {
        self.blackwell_violations + self.growth_violations + self.regret_violations + self.bound_mismatches
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

#[derive(Default)]
struct Recompute {
    weighted: KahanAccumulator,
    squared: KahanAccumulator,
    eta1: Option<f64>,
    max_error_sq: f64,
}

impl Recompute {
    /// Potential and regret bounds after this row, as the auditor forms them.
    fn step(&mut self, m: &PlayerMeta, row: &TelemetryRow) -> (f64, f64) {
        let q = m.exponent;
        let e = row.prediction_error_sq.sqrt();
        self.eta1.get_or_insert(row.eta);
        self.weighted.add(row.eta.powf(q - 1.0) * e.powf(q));
        self.squared.add(row.prediction_error_sq);
        self.max_error_sq = self.max_error_sq.max(row.prediction_error_sq);
        let k = 0.5 * m.smoothness * row.eta * self.weighted.value();
        let translation = RegretTranslation::NormPower { a: m.a, b: m.b, p: m.p };
        let general = potential_growth_bound(m.diameter, k, translation, row.eta);
        let regret = if m.bound_kind == "adaptive" && m.eta1_admissible && self.max_error_sq <= m.c_bound {
            adaptive_regret_bound(m.diameter, m.b, m.smoothness, m.a, self.eta1.unwrap_or(row.eta), self.squared.value())
        } else {
            general
        };
        (k, regret)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RECOMPUTE_TOLERANCE * (1.0 + a.abs().max(b.abs()))
}

/// Audits a telemetry CSV. Bounds are also recomputed when the metadata
/// sidecar written next to the CSV is present.
pub fn audit_csv(path: &Path) -> Result<OfflineAudit> {
    let rows = read_rows(path)?;
    let meta: Option<TelemetryMeta> = match std::fs::read_to_string(meta_path(path)) {
        Ok(text) => Some(serde_json::from_str(&text)?),
        Err(_) => None,
    };
    Ok(audit_rows(&rows, meta.as_ref()))
}

pub fn audit_rows(rows: &[TelemetryRow], meta: Option<&TelemetryMeta>) -> OfflineAudit {
    let mut report = OfflineAudit { rows: rows.len(), recomputed: meta.is_some(), ..OfflineAudit::default() };
    let mut state: Vec<Recompute> = Vec::new();
    for row in rows {
        let blackwell_ok = row.fallback != 0 || row.blackwell_ip <= BLACKWELL_TOLERANCE;
        let growth_ok =
            row.potential_value <= row.potential_bound + GROWTH_RELATIVE_SLACK * (1.0 + row.potential_bound.abs());
        let regret_ok = row.regret <= row.bound + REGRET_SLACK;
        let mut consistent = true;
        if let Some(player_meta) = meta.and_then(|m| m.players.get(row.player)) {
            if state.len() <= row.player {
                state.resize_with(row.player + 1, Recompute::default);
            }
            let (k, r) = state[row.player].step(player_meta, row);
            consistent = close(k, row.potential_bound) && close(r, row.bound);
        }
        report.blackwell_violations += usize::from(!blackwell_ok);
        report.growth_violations += usize::from(!growth_ok);
        report.regret_violations += usize::from(!regret_ok);
        report.bound_mismatches += usize::from(!consistent);
        if !(blackwell_ok && growth_ok && regret_ok && consistent) && report.first_violation.is_none() {
            report.first_violation = Some((row.t, row.player));
        }
    }
    report
}
