//! External-regret optimistic Lagrangian hedging.
//!
//! A [`Hedger`] keeps the cumulative regret vector `s_{1:t−1}` and plays
//!
//! ```text
//! x_t = ∇F(η_t (s_{1:t−1} + m_t)) / <∇F(η_t (s_{1:t−1} + m_t)), u>
//! ```
//!
//! falling back to a fixed point of the domain when the normalizer is not
//! positive. Rounds strictly alternate between [`Hedger::next_iterate`] and
//! [`Hedger::observe_loss`].

use serde::{Deserialize, Serialize};

use crate::audit::{conservative_c, AuditSummary, Auditor, BoundContext, RoundInputs};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::record::RoundRecord;
use crate::schedule::{Predictor, StepsizeSchedule};
use crate::vector::{check_dim, check_finite, dot, instant_regret_unchecked, KahanAccumulator, RealVec};

/// Iterate used when the gradient gives no direction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    #[default]
    Uniform,
    HoldLast,
}

/// One optimistic Lagrangian hedging step. Returns `None` when
/// `<∇F, u> ≤ 0`, where the caller picks any point of the domain.
pub fn optimistic_iterate(
    potential: &Potential,
    eta: f64,
    cumulative: &[f64],
    prediction: &[f64],
    u: &[f64],
) -> Result<Option<RealVec>> {
    let n = potential.dim();
    check_dim(n, cumulative)?;
    check_dim(n, prediction)?;
    check_dim(n, u)?;
    let mut gradient = vec![0.0; n];
    Ok(propose(potential, eta, cumulative, prediction, u, &mut gradient)?.map(RealVec::trusted))
}

fn propose(
    potential: &Potential,
    eta: f64,
    cumulative: &[f64],
    prediction: &[f64],
    u: &[f64],
    gradient: &mut [f64],
) -> Result<Option<Vec<f64>>> {
    let z: Vec<f64> = cumulative.iter().zip(prediction).map(|(s, m)| eta * (s + m)).collect();
    potential.gradient_into(&z, gradient);
    check_finite(gradient)?;
    let w = dot(gradient, u);
    if w > 0.0 {
        Ok(Some(gradient.iter().map(|g| g / w).collect()))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Debug)]
struct Pending {
    iterate: Vec<f64>,
    prediction: Vec<f64>,
    gradient: Vec<f64>,
    eta: f64,
    fallback: bool,
}

#[derive(Clone, Debug)]
pub struct Hedger {
    potential: Potential,
    schedule: StepsizeSchedule,
    predictor: Predictor,
    fallback: Fallback,
    u: Vec<f64>,
    diameter: f64,
    c_bound: f64,
    cumulative: Vec<f64>,
    round: usize,
    accumulator: KahanAccumulator,
    last_instant: Vec<f64>,
    last_iterate: Option<Vec<f64>>,
    eta_prev: Option<f64>,
    pending: Option<Pending>,
    auditor: Auditor,
}

impl Hedger {
    /// Hedger on the simplex (`u` = all ones, `D = 1`), with `C` derived
    /// from losses in `[−1, 1]`.
    pub fn new(potential: Potential, schedule: StepsizeSchedule, predictor: Predictor) -> Result<Self> {
        schedule.validate()?;
        let n = potential.dim();
        let mut h = Hedger {
            schedule,
            predictor,
            fallback: Fallback::default(),
            u: vec![1.0; n],
            diameter: 1.0,
            c_bound: 0.0,
            cumulative: vec![0.0; n],
            round: 1,
            accumulator: KahanAccumulator::default(),
            last_instant: vec![0.0; n],
            last_iterate: None,
            eta_prev: None,
            pending: None,
            auditor: Auditor::new(BoundContext::new(&potential, schedule, 1.0, 1.0)),
            potential,
        };
        h.c_bound = h.default_c(1.0);
        h.rebuild_auditor();
        Ok(h)
    }

    pub fn with_fallback(mut self, fallback: Fallback) -> Self {
        self.fallback = fallback;
        self
    }

    /// Normalizing vector with positive entries; the domain becomes
    /// `{x ≥ 0 : <u, x> = 1}` and `D` is reset to `1 / min u_i`.
    pub fn with_u(mut self, u: &[f64]) -> Result<Self> {
        check_dim(self.potential.dim(), u)?;
        check_finite(u)?;
        if u.iter().any(|v| *v <= 0.0) {
            return Err(Error::invalid("u must have positive entries"));
        }
        self.u = u.to_vec();
        self.diameter = 1.0 / u.iter().copied().fold(f64::INFINITY, f64::min);
        self.rebuild_auditor();
        Ok(self)
    }

    pub fn with_diameter(mut self, diameter: f64) -> Result<Self> {
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::invalid(format!("diameter must be positive, got {diameter}")));
        }
        self.diameter = diameter;
        self.rebuild_auditor();
        Ok(self)
    }

    /// Sets `C` from a bound on `max_i |ℓ_i|`.
    pub fn with_loss_bound(mut self, loss_bound: f64) -> Self {
        self.c_bound = self.default_c(loss_bound);
        self.rebuild_auditor();
        self
    }

    pub fn with_c_bound(mut self, c_bound: f64) -> Self {
        self.c_bound = c_bound;
        self.rebuild_auditor();
        self
    }

    fn default_c(&self, loss_bound: f64) -> f64 {
        let norm = self.potential.smoothness_norm();
        let n = self.potential.dim();
        conservative_c(loss_bound * norm.of_ones(n), norm.eval(&self.u), self.diameter)
    }

    fn rebuild_auditor(&mut self) {
        assert!(self.round == 1, "configuration must be set before the first round");
        self.auditor = Auditor::new(BoundContext::new(&self.potential, self.schedule, self.diameter, self.c_bound));
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn schedule(&self) -> StepsizeSchedule {
        self.schedule
    }

    pub fn predictor(&self) -> Predictor {
        self.predictor
    }

    pub fn c_bound(&self) -> f64 {
        self.c_bound
    }

    /// `s_{1:t−1}`.
    pub fn cumulative_regret(&self) -> &[f64] {
        &self.cumulative
    }

    /// Index of the round about to be played (starts at 1).
    pub fn round(&self) -> usize {
        self.round
    }

    /// `Σ_{k<t} ‖s_k − m_k‖²`.
    pub fn accumulator(&self) -> f64 {
        self.accumulator.value()
    }

    pub fn last_instant_regret(&self) -> &[f64] {
        &self.last_instant
    }

    /// Stepsize of the current round.
    pub fn eta(&self) -> f64 {
        self.schedule.eta(self.round, self.accumulator.value())
    }

    pub fn audit_summary(&self) -> &AuditSummary {
        self.auditor.summary()
    }

    pub fn bound_context(&self) -> &BoundContext {
        self.auditor.context()
    }

    /// `max_{x ∈ X} <s_{1:t}, x>`.
    pub fn measured_regret(&self) -> f64 {
        self.cumulative.iter().zip(&self.u).map(|(s, u)| s / u).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The configuration's regret bound after the rounds observed so far.
    pub fn regret_upper_bound(&self) -> f64 {
        self.auditor.regret_bound()
    }

    fn prediction(&self, external: Option<&[f64]>) -> Result<Vec<f64>> {
        let n = self.dim();
        match (self.predictor, external) {
            (Predictor::Zero, None) => Ok(vec![0.0; n]),
            (Predictor::LastInstant, None) => Ok(self.last_instant.clone()),
            (Predictor::External, Some(m)) => {
                check_dim(n, m)?;
                check_finite(m)?;
                Ok(m.to_vec())
            }
            (Predictor::External, None) => Err(Error::invalid("external predictor needs a prediction each round")),
            (_, Some(_)) => Err(Error::invalid("prediction supplied to a hedger without an external predictor")),
        }
    }

    fn fallback_iterate(&self) -> Vec<f64> {
        match (self.fallback, &self.last_iterate) {
            (Fallback::HoldLast, Some(x)) => x.clone(),
            _ => {
                let c = 1.0 / self.u.iter().sum::<f64>();
                vec![c; self.dim()]
            }
        }
    }

    /// Plays round `t`. `external` is required exactly when the predictor is
    /// [`Predictor::External`].
    pub fn next_iterate(&mut self, external: Option<&[f64]>) -> Result<RealVec> {
        if self.pending.is_some() {
            return Err(Error::invalid(format!("round {} already has a pending iterate", self.round)));
        }
        let prediction = self.prediction(external)?;
        let eta = self.eta();
        let mut gradient = vec![0.0; self.dim()];
        let proposal = propose(&self.potential, eta, &self.cumulative, &prediction, &self.u, &mut gradient)?;
        let fallback = proposal.is_none();
        let iterate = proposal.unwrap_or_else(|| self.fallback_iterate());
        self.pending = Some(Pending { iterate: iterate.clone(), prediction, gradient, eta, fallback });
        Ok(RealVec::trusted(iterate))
    }

    /// Completes round `t` with the revealed loss.
    pub fn observe_loss(&mut self, loss: &[f64]) -> Result<RoundRecord> {
        check_dim(self.dim(), loss)?;
        check_finite(loss)?;
        let p = self.pending.take().ok_or(Error::StaleIterate { round: self.round })?;
        let f = &self.potential;
        let t = self.round;

        let s_t = instant_regret_unchecked(loss, &p.iterate, &self.u);
        let blackwell_ip = dot(&p.gradient, &s_t);

        let eta_prev = self.eta_prev.unwrap_or(p.eta);
        let scaled = |eta: f64, v: &[f64]| v.iter().map(|x| eta * x).collect::<Vec<_>>();
        let monotone_lhs = f.value(&scaled(p.eta, &self.cumulative));
        let monotone_rhs = p.eta / eta_prev * f.value(&scaled(eta_prev, &self.cumulative));

        for (c, s) in self.cumulative.iter_mut().zip(&s_t) {
            *c += s;
        }
        let diff: Vec<f64> = s_t.iter().zip(&p.prediction).map(|(s, m)| s - m).collect();
        let err = f.smoothness_norm().eval(&diff);
        self.accumulator.add(err * err);
        let potential_value = f.value(&scaled(p.eta, &self.cumulative));
        let measured_regret = self.measured_regret();

        let audit = self.auditor.record(RoundInputs {
            eta: p.eta,
            prediction_error: err,
            potential_value,
            monotone_lhs,
            monotone_rhs,
            blackwell_ip,
            fallback: p.fallback,
            measured_regret,
        });

        self.eta_prev = Some(p.eta);
        self.last_instant.clone_from(&s_t);
        self.last_iterate = Some(p.iterate.clone());
        self.round += 1;

        Ok(RoundRecord {
            t,
            iterate: p.iterate,
            loss: loss.to_vec(),
            prediction: p.prediction,
            instant_regret: s_t,
            eta: p.eta,
            potential_value,
            blackwell_ip,
            fallback: p.fallback,
            prediction_error_sq: err * err,
            measured_regret,
            audit,
        })
    }
}
