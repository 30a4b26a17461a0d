//! Runtime auditing of the potential-growth and regret guarantees.
//!
//! The [`Auditor`] follows one learner through its rounds. From the realized
//! stepsizes and prediction errors it maintains the right-hand side of the
//! optimistic potential-growth bound
//!
//! ```text
//! F(η_T s_{1:T}) ≤ (L/2) Σ_t η_T η_t^{q−1} ‖s_t − m_t‖^q
//! ```
//!
//! (`q = 2` except for the subquadratic polynomial family) and converts it
//! into a regret bound through the potential's translation constants. Every
//! round is checked against the Blackwell condition, the stepsize-monotonicity
//! inequality `F(η_t s) ≤ (η_t/η_{t−1}) F(η_{t−1} s)`, the potential bound and
//! the regret bound.

use serde::Serialize;

use crate::potential::{Potential, RegretTranslation};
use crate::schedule::{max_adaptive_eta1, StepsizeSchedule};
use crate::vector::KahanAccumulator;

pub const BLACKWELL_TOLERANCE: f64 = 1e-9;
pub const GROWTH_RELATIVE_SLACK: f64 = 1e-9;
pub const MONOTONE_SLACK: f64 = 1e-12;
pub const REGRET_SLACK: f64 = 1e-6;

/// Which regret bound the configuration is audited against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `D ((K_T + A) / B)^{1/p} / η_T` from the potential-growth bound.
    /// For `p = 2` with a constant stepsize this is exactly
    /// `D √((L Σ‖s_t − m_t‖² + 2A) / (2B))`.
    PotentialGrowth,
    /// `(D/B)(L + A) √(1/η₁² + Σ_{t≤T} ‖s_t − m_t‖²)` for `p = 1` potentials
    /// with adaptive stepsizes.
    Adaptive,
}

/// Constant inputs of the auditor.
#[derive(Clone, Debug)]
pub struct BoundContext {
    pub smoothness: f64,
    pub exponent: f64,
    pub translation: RegretTranslation,
    pub diameter: f64,
    pub schedule: StepsizeSchedule,
    /// Bound `C` on `‖s_t − m_t‖²` used by the adaptive precondition.
    pub c_bound: f64,
}

impl BoundContext {
    pub fn new(potential: &Potential, schedule: StepsizeSchedule, diameter: f64, c_bound: f64) -> Self {
        BoundContext {
            smoothness: potential.smoothness(),
            exponent: potential.smoothness_exponent(),
            translation: potential.translation(),
            diameter,
            schedule,
            c_bound,
        }
    }

    pub fn bound_kind(&self) -> BoundKind {
        let (_, _, p) = self.translation.constants();
        match self.schedule {
            StepsizeSchedule::Adaptive { .. } if p == 1.0 => BoundKind::Adaptive,
            _ => BoundKind::PotentialGrowth,
        }
    }

    /// `η₁ ≤ √(3/C)`, required by the adaptive bound.
    pub fn eta1_admissible(&self) -> bool {
        match self.schedule {
            StepsizeSchedule::Adaptive { eta1 } => eta1 <= max_adaptive_eta1(self.c_bound),
            _ => true,
        }
    }
}

/// Per-round measurements handed to the auditor.
#[derive(Clone, Copy, Debug)]
pub struct RoundInputs {
    pub eta: f64,
    /// `‖s_t − m_t‖` in the potential's smoothness norm.
    pub prediction_error: f64,
    /// `F(η_t s_{1:t})` for the regret vector the learner steers.
    pub potential_value: f64,
    /// `F(η_t s_{1:t−1})`.
    pub monotone_lhs: f64,
    /// `(η_t / η_{t−1}) F(η_{t−1} s_{1:t−1})`.
    pub monotone_rhs: f64,
    pub blackwell_ip: f64,
    pub fallback: bool,
    pub measured_regret: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AuditRecord {
    pub potential_bound: f64,
    pub regret_bound: f64,
    pub blackwell_ok: bool,
    pub growth_ok: bool,
    pub monotone_ok: bool,
    pub regret_ok: bool,
    /// The adaptive bound's preconditions held so far (always true for
    /// other schedules). Not counted as an audit failure.
    pub adaptive_precondition_ok: bool,
}

impl AuditRecord {
    pub fn all_ok(&self) -> bool {
        self.blackwell_ok && self.growth_ok && self.monotone_ok && self.regret_ok
    }
}

/// Aggregated audit results over a whole run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AuditSummary {
    pub rounds: usize,
    pub blackwell_violations: usize,
    pub growth_violations: usize,
    pub monotone_violations: usize,
    pub regret_violations: usize,
    pub precondition_violations: usize,
    pub first_violation_round: Option<usize>,
    /// Largest Blackwell inner product over non-fallback rounds.
    pub max_blackwell: f64,
    /// Smallest `bound − regret` seen.
    pub min_bound_slack: f64,
}

impl AuditSummary {
    pub fn violations(&self) -> usize {
        self.blackwell_violations + self.growth_violations + self.monotone_violations + self.regret_violations
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn merge(&mut self, other: &AuditSummary) {
        self.rounds = self.rounds.max(other.rounds);
        self.blackwell_violations += other.blackwell_violations;
        self.growth_violations += other.growth_violations;
        self.monotone_violations += other.monotone_violations;
        self.regret_violations += other.regret_violations;
        self.precondition_violations += other.precondition_violations;
        self.first_violation_round = match (self.first_violation_round, other.first_violation_round) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.max_blackwell = self.max_blackwell.max(other.max_blackwell);
        self.min_bound_slack = self.min_bound_slack.min(other.min_bound_slack);
    }
}

#[derive(Clone, Debug)]
pub struct Auditor {
    ctx: BoundContext,
    weighted: KahanAccumulator,
    squared: KahanAccumulator,
    eta: f64,
    eta1: Option<f64>,
    max_error_sq: f64,
    summary: AuditSummary,
}

impl Auditor {
    pub fn new(ctx: BoundContext) -> Self {
        Auditor {
            ctx,
            weighted: KahanAccumulator::default(),
            squared: KahanAccumulator::default(),
            eta: 1.0,
            eta1: None,
            max_error_sq: 0.0,
            summary: AuditSummary {
                max_blackwell: f64::NEG_INFINITY,
                min_bound_slack: f64::INFINITY,
                ..AuditSummary::default()
            },
        }
    }

    pub fn context(&self) -> &BoundContext {
        &self.ctx
    }

    pub fn record(&mut self, inp: RoundInputs) -> AuditRecord {
        let q = self.ctx.exponent;
        let err_sq = inp.prediction_error * inp.prediction_error;
        self.eta1.get_or_insert(inp.eta);
        self.eta = inp.eta;
        self.weighted.add(inp.eta.powf(q - 1.0) * inp.prediction_error.powf(q));
        self.squared.add(err_sq);
        self.max_error_sq = self.max_error_sq.max(err_sq);
        self.summary.rounds += 1;
        let t = self.summary.rounds;

        let potential_bound = self.potential_bound();
        let regret_bound = self.regret_bound();

        let blackwell_ok = inp.fallback || inp.blackwell_ip <= BLACKWELL_TOLERANCE;
        let growth_ok =
            inp.potential_value <= potential_bound + GROWTH_RELATIVE_SLACK * (1.0 + potential_bound.abs());
        let monotone_ok = inp.monotone_lhs <= inp.monotone_rhs + MONOTONE_SLACK * (1.0 + inp.monotone_rhs.abs());
        let regret_ok = inp.measured_regret <= regret_bound + REGRET_SLACK;
        let adaptive_precondition_ok = self.adaptive_precondition_ok();

        let s = &mut self.summary;
        if !inp.fallback {
            s.max_blackwell = s.max_blackwell.max(inp.blackwell_ip);
        }
        s.min_bound_slack = s.min_bound_slack.min(regret_bound - inp.measured_regret);
        s.blackwell_violations += usize::from(!blackwell_ok);
        s.growth_violations += usize::from(!growth_ok);
        s.monotone_violations += usize::from(!monotone_ok);
        s.regret_violations += usize::from(!regret_ok);
        s.precondition_violations += usize::from(!adaptive_precondition_ok);
        if !(blackwell_ok && growth_ok && monotone_ok && regret_ok) && s.first_violation_round.is_none() {
            s.first_violation_round = Some(t);
        }

        AuditRecord {
            potential_bound,
            regret_bound,
            blackwell_ok,
            growth_ok,
            monotone_ok,
            regret_ok,
            adaptive_precondition_ok,
        }
    }

    /// `(L/2) η_T Σ_t η_t^{q−1} ‖s_t − m_t‖^q`; zero before the first round.
    pub fn potential_bound(&self) -> f64 {
        if self.summary.rounds == 0 {
            return 0.0;
        }
        0.5 * self.ctx.smoothness * self.eta * self.weighted.value()
    }

    /// `Σ_{t≤T} ‖s_t − m_t‖²`.
    pub fn squared_errors(&self) -> f64 {
        self.squared.value()
    }

    fn adaptive_precondition_ok(&self) -> bool {
        !self.ctx.schedule.is_adaptive() || (self.ctx.eta1_admissible() && self.max_error_sq <= self.ctx.c_bound)
    }

    pub fn regret_bound(&self) -> f64 {
        if self.summary.rounds == 0 {
            return potential_growth_bound(self.ctx.diameter, 0.0, self.ctx.translation, 1.0);
        }
        let general = potential_growth_bound(self.ctx.diameter, self.potential_bound(), self.ctx.translation, self.eta);
        match self.ctx.bound_kind() {
            BoundKind::Adaptive if self.adaptive_precondition_ok() => {
                let (a, b, _) = self.ctx.translation.constants();
                let eta1 = self.eta1.unwrap_or(self.eta);
                adaptive_regret_bound(self.ctx.diameter, b, self.ctx.smoothness, a, eta1, self.squared.value())
            }
            _ => general,
        }
    }

    pub fn summary(&self) -> &AuditSummary {
        &self.summary
    }
}

/// `D ((max(K, 0) + A) / B)^{1/p} / η` for a potential bound `F(η s) ≤ K`.
pub fn potential_growth_bound(diameter: f64, k: f64, translation: RegretTranslation, eta: f64) -> f64 {
    let (a, b, p) = translation.constants();
    diameter * ((k.max(0.0) + a) / b).powf(1.0 / p) / eta
}

/// Optimistic bound without stepsizes, `D ((L Σ‖s_t − m_t‖² + 2A) / (2B))^{1/p}`.
pub fn optimistic_regret_bound(diameter: f64, smoothness: f64, a: f64, b: f64, p: f64, squared_errors: f64) -> f64 {
    diameter * ((smoothness * squared_errors + 2.0 * a) / (2.0 * b)).powf(1.0 / p)
}

/// Adaptive-stepsize bound `(D/B)(L + A) √(1/η₁² + Σ‖s_t − m_t‖²)`.
pub fn adaptive_regret_bound(diameter: f64, b: f64, smoothness: f64, a: f64, eta1: f64, squared_errors: f64) -> f64 {
    diameter / b * (smoothness + a) * (1.0 / (eta1 * eta1) + squared_errors).sqrt()
}

/// Potential-growth right-hand side computed directly from a stepsize and
/// prediction-error history.
pub fn potential_growth_rhs(smoothness: f64, exponent: f64, etas: &[f64], errors: &[f64]) -> f64 {
    match etas.last() {
        None => 0.0,
        Some(eta_t) => {
            let s: f64 = etas.iter().zip(errors).map(|(e, r)| e.powf(exponent - 1.0) * r.powf(exponent)).sum();
            0.5 * smoothness * eta_t * s
        }
    }
}

/// Conservative bound `C` on `‖s_t − m_t‖²` for external regret with
/// losses bounded by `loss_bound` in `‖·‖`: `(2 ‖ℓ‖ (1 + ‖u‖ D))²`.
pub fn conservative_c(loss_bound: f64, u_norm: f64, diameter: f64) -> f64 {
    let s = 2.0 * loss_bound * (1.0 + u_norm * diameter);
    s * s
}
