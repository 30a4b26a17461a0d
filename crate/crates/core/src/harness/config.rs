use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::EnvSpec;
use crate::error::{Error, Result};
use crate::hedger::Fallback;
use crate::phi::PhiKind;
use crate::potential::PotentialSpec;
use crate::schedule::StepsizeSchedule;

use super::learner::Learner;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_ROUNDS: usize = 100_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Hedger,
    PhiRegret,
    PhiRegretPlus,
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Hedger => "hedger",
            Algorithm::PhiRegret => "phi_regret",
            Algorithm::PhiRegretPlus => "phi_regret_plus",
        }
    }
}

/// Prediction rule for `m_t`, expressed in the learner's regret space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorSpec {
    #[default]
    Zero,
    /// `m_t = s_{t−1}`.
    LastInstant,
    /// Mean of the instantaneous regret vectors seen so far.
    Average,
}

impl PredictorSpec {
    pub fn label(&self) -> &'static str {
        match self {
            PredictorSpec::Zero => "zero",
            PredictorSpec::LastInstant => "last_instant",
            PredictorSpec::Average => "average",
        }
    }
}

/// Update order of multi-player runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfPlay {
    #[default]
    Simultaneous,
    /// Two-player games only: the second player observes the first player's
    /// current iterate, then the first player observes the second player's
    /// next iterate.
    Alternating,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_rounds() -> usize {
    DEFAULT_ROUNDS
}

fn default_phi() -> PhiKind {
    PhiKind::External
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub environment: EnvSpec,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default = "default_phi")]
    pub phi_kind: PhiKind,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub schedule: StepsizeSchedule,
    #[serde(default)]
    pub predictor: PredictorSpec,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub audit: bool,
    #[serde(default)]
    pub self_play: SelfPlay,
    #[serde(default)]
    pub fallback: Fallback,
    /// Overrides the bound `C` on squared prediction errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(environment: EnvSpec, potential: PotentialSpec) -> Self {
        ExperimentConfig {
            schema: SCHEMA_VERSION,
            name: None,
            environment,
            algorithm: Algorithm::default(),
            phi_kind: PhiKind::External,
            potential,
            schedule: StepsizeSchedule::default(),
            predictor: PredictorSpec::default(),
            rounds: DEFAULT_ROUNDS,
            seed: 0,
            audit: true,
            self_play: SelfPlay::default(),
            fallback: Fallback::default(),
            c_bound: None,
            output: None,
        }
    }

    /// Parses and validates a config.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Short identifier used for file names and tables.
    pub fn label(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => {
                let mut s = format!("{}_{}", self.environment.label(), self.algorithm.label());
                if self.algorithm != Algorithm::Hedger {
                    s.push_str(&format!("_{:?}", self.phi_kind).to_lowercase());
                }
                format!(
                    "{s}_{}_{}_{}_seed{}",
                    self.potential.label(),
                    self.schedule.label(),
                    self.predictor.label(),
                    self.seed
                )
            }
        }
    }

    /// Checks everything that can be rejected before running. Returns
    /// warnings for conditions that weaken, but do not invalidate, the
    /// audit.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema)));
        }
        self.schedule.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.algorithm == Algorithm::PhiRegretPlus && !self.potential.positive_invariant() {
            return Err(Error::Config(format!(
                "phi_regret_plus needs a positive-invariant potential; {} is not",
                self.potential.label()
            )));
        }
        if self.algorithm != Algorithm::Hedger && self.phi_kind == PhiKind::Custom {
            return Err(Error::Config("custom phi sets cannot be configured from JSON".into()));
        }
        if let Some(c) = self.c_bound {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("c_bound must be positive, got {c}")));
            }
        }
        let env = self.environment.build(self.seed).map_err(|e| Error::Config(e.to_string()))?;
        if self.self_play == SelfPlay::Alternating && env.players() != 2 {
            return Err(Error::Config("alternating self-play needs a two-player game".into()));
        }
        let mut warnings = Vec::new();
        for (player, &n) in env.actions().iter().enumerate() {
            let learner = Learner::build(self, n, env.loss_bound()).map_err(|e| Error::Config(e.to_string()))?;
            if self.audit && !learner.eta1_admissible() {
                warnings.push(format!(
                    "player {player}: eta1 exceeds sqrt(3/C) = {:.6} with C = {:.6}; the adaptive bound is not guaranteed",
                    learner.max_eta1(),
                    learner.c_bound()
                ));
            }
        }
        Ok(warnings)
    }
}
