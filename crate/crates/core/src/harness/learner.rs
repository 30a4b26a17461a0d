use crate::audit::{AuditSummary, BoundContext};
use crate::error::Result;
use crate::hedger::Hedger;
use crate::phi::PhiRegret;
use crate::potential::Potential;
use crate::record::RoundRecord;
use crate::schedule::{max_adaptive_eta1, Predictor};
use crate::vector::RealVec;

use super::config::{Algorithm, ExperimentConfig, PredictorSpec};

/// One player's learner as configured by an experiment.
#[derive(Clone, Debug)]
pub enum Learner {
    Hedger(Hedger),
    Phi(PhiRegret),
}

impl Learner {
    /// Learner over `n` actions facing losses bounded by `loss_bound`.
    pub fn build(cfg: &ExperimentConfig, n: usize, loss_bound: f64) -> Result<Self> {
        let predictor = match cfg.predictor {
            PredictorSpec::Zero => Predictor::Zero,
            PredictorSpec::LastInstant => Predictor::LastInstant,
            PredictorSpec::Average => Predictor::External,
        };
        Ok(match cfg.algorithm {
            Algorithm::Hedger => {
                let f = cfg.potential.build(n)?;
                let h = Hedger::new(f, cfg.schedule, predictor)?.with_fallback(cfg.fallback).with_loss_bound(loss_bound);
                Learner::Hedger(match cfg.c_bound {
                    Some(c) => h.with_c_bound(c),
                    None => h,
                })
            }
            Algorithm::PhiRegret | Algorithm::PhiRegretPlus => {
                let phi = cfg.phi_kind.build(n)?;
                let f = cfg.potential.build(phi.len())?;
                let plus = cfg.algorithm == Algorithm::PhiRegretPlus;
                let l = PhiRegret::new(phi, f, cfg.schedule, predictor, plus)?
                    .with_fallback(cfg.fallback)
                    .with_loss_bound(loss_bound);
                Learner::Phi(match cfg.c_bound {
                    Some(c) => l.with_c_bound(c),
                    None => l,
                })
            }
        })
    }

    pub fn next_iterate(&mut self, prediction: Option<&[f64]>) -> Result<RealVec> {
        match self {
            Learner::Hedger(h) => h.next_iterate(prediction),
            Learner::Phi(p) => p.next_iterate(prediction),
        }
    }

    pub fn observe_loss(&mut self, loss: &[f64]) -> Result<RoundRecord> {
        match self {
            Learner::Hedger(h) => h.observe_loss(loss),
            Learner::Phi(p) => p.observe_loss(loss),
        }
    }

    pub fn potential(&self) -> &Potential {
        match self {
            Learner::Hedger(h) => h.potential(),
            Learner::Phi(p) => p.potential(),
        }
    }

    /// Dimension of the regret vector.
    pub fn regret_dim(&self) -> usize {
        self.potential().dim()
    }

    /// Untruncated cumulative regret vector.
    pub fn raw_cumulative(&self) -> &[f64] {
        match self {
            Learner::Hedger(h) => h.cumulative_regret(),
            Learner::Phi(p) => p.raw_phi_regret(),
        }
    }

    pub fn measured_regret(&self) -> f64 {
        match self {
            Learner::Hedger(h) => h.measured_regret(),
            Learner::Phi(p) => p.measured_regret(),
        }
    }

    pub fn regret_upper_bound(&self) -> f64 {
        match self {
            Learner::Hedger(h) => h.regret_upper_bound(),
            Learner::Phi(p) => p.regret_upper_bound(),
        }
    }

    pub fn audit_summary(&self) -> &AuditSummary {
        match self {
            Learner::Hedger(h) => h.audit_summary(),
            Learner::Phi(p) => p.audit_summary(),
        }
    }

    pub fn c_bound(&self) -> f64 {
        match self {
            Learner::Hedger(h) => h.c_bound(),
            Learner::Phi(p) => p.c_bound(),
        }
    }

    pub fn max_eta1(&self) -> f64 {
        max_adaptive_eta1(self.c_bound())
    }

    pub fn bound_context(&self) -> BoundContext {
        match self {
            Learner::Hedger(h) => h.bound_context().clone(),
            Learner::Phi(p) => p.bound_context().clone(),
        }
    }

    pub fn eta1_admissible(&self) -> bool {
        self.bound_context().eta1_admissible()
    }
}
