//! Loss generators: adversarial streams, a fixed smooth loss and games.

mod game;
mod smooth;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use game::{JointAccumulator, NormalFormGame};
pub use smooth::{path_length_constant, FixedSmoothLoss};

use crate::error::{Error, Result};
use crate::vector::{check_dim, NormPair};

/// Where a game's payoffs come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum GameSpec {
    RockPaperScissors,
    MatchingPennies,
    /// Payoffs uniform in `[−1, 1]`.
    Random { actions: Vec<usize>, seed: u64 },
    Inline { game: NormalFormGame },
    File { path: String },
}

impl GameSpec {
    pub fn build(&self) -> Result<NormalFormGame> {
        match self {
            GameSpec::RockPaperScissors => Ok(NormalFormGame::rock_paper_scissors()),
            GameSpec::MatchingPennies => Ok(NormalFormGame::matching_pennies()),
            GameSpec::Random { actions, seed } => NormalFormGame::random(actions.clone(), *seed),
            GameSpec::Inline { game } => Ok(game.clone()),
            GameSpec::File { path } => NormalFormGame::from_json_file(path),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvSpec {
    /// Losses drawn uniformly from `[0, 1]^n`.
    AdversarialRandom { n: usize },
    /// Loss `−1` on the least-played action and `+1` elsewhere.
    AdversarialWorstCaseSign { n: usize },
    FixedSmoothLoss {
        m: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default = "NormPair::euclidean")]
        norms: NormPair,
    },
    MatrixGameZeroSum { game: GameSpec },
    NormalFormGame { game: GameSpec },
}

impl EnvSpec {
    pub fn label(&self) -> &'static str {
        match self {
            EnvSpec::AdversarialRandom { .. } => "adversarial_random",
            EnvSpec::AdversarialWorstCaseSign { .. } => "adversarial_worst_case_sign",
            EnvSpec::FixedSmoothLoss { .. } => "fixed_smooth_loss",
            EnvSpec::MatrixGameZeroSum { .. } => "matrix_game_zero_sum",
            EnvSpec::NormalFormGame { .. } => "normal_form_game",
        }
    }

    pub fn build(&self, seed: u64) -> Result<Environment> {
        Environment::new(self, seed)
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Random { n: usize, rng: ChaCha8Rng },
    WorstCase { n: usize },
    Smooth(FixedSmoothLoss),
    Game(NormalFormGame),
}

/// A seeded loss generator for one or more players.
#[derive(Clone, Debug)]
pub struct Environment {
    kind: Kind,
}

impl Environment {
    pub fn new(spec: &EnvSpec, seed: u64) -> Result<Self> {
        let kind = match spec {
            EnvSpec::AdversarialRandom { n } | EnvSpec::AdversarialWorstCaseSign { n } if *n == 0 => {
                return Err(Error::Empty)
            }
            EnvSpec::AdversarialRandom { n } => Kind::Random { n: *n, rng: ChaCha8Rng::seed_from_u64(seed) },
            EnvSpec::AdversarialWorstCaseSign { n } => Kind::WorstCase { n: *n },
            EnvSpec::FixedSmoothLoss { m, b, norms } => Kind::Smooth(FixedSmoothLoss::new(m.clone(), b.clone(), *norms)?),
            EnvSpec::MatrixGameZeroSum { game } => {
                let g = game.build()?;
                if !g.is_zero_sum() {
                    return Err(Error::Config("matrix_game_zero_sum needs a two-player zero-sum game".into()));
                }
                Kind::Game(g)
            }
            EnvSpec::NormalFormGame { game } => Kind::Game(game.build()?),
        };
        Ok(Environment { kind })
    }

    pub fn players(&self) -> usize {
        match &self.kind {
            Kind::Game(g) => g.players(),
            _ => 1,
        }
    }

    /// Action count per player.
    pub fn actions(&self) -> Vec<usize> {
        match &self.kind {
            Kind::Random { n, .. } | Kind::WorstCase { n } => vec![*n],
            Kind::Smooth(f) => vec![f.dim()],
            Kind::Game(g) => g.actions().to_vec(),
        }
    }

    /// Bound on `max_i |ℓ_i|` over every emitted loss.
    pub fn loss_bound(&self) -> f64 {
        match &self.kind {
            Kind::Random { .. } | Kind::WorstCase { .. } => 1.0,
            Kind::Smooth(f) => f.loss_bound(),
            Kind::Game(g) => g.max_abs_payoff(),
        }
    }

    /// `max_{x ∈ Δ} ‖x‖`, which is 1 for every norm.
    pub fn diameter(&self) -> f64 {
        1.0
    }

    pub fn game(&self) -> Option<&NormalFormGame> {
        match &self.kind {
            Kind::Game(g) => Some(g),
            _ => None,
        }
    }

    pub fn smooth_loss(&self) -> Option<&FixedSmoothLoss> {
        match &self.kind {
            Kind::Smooth(f) => Some(f),
            _ => None,
        }
    }

    /// Losses of every player for this round's iterates. Games evaluate each
    /// player against the others' current mixed strategies.
    pub fn losses(&mut self, iterates: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let actions = self.actions();
        if iterates.len() != actions.len() {
            return Err(Error::DimensionMismatch { expected: actions.len(), found: iterates.len() });
        }
        for (x, &n) in iterates.iter().zip(&actions) {
            check_dim(n, x)?;
        }
        Ok(match &mut self.kind {
            Kind::Random { n, rng } => vec![(0..*n).map(|_| rng.gen::<f64>()).collect()],
            Kind::WorstCase { .. } => vec![worst_case_sign(iterates[0])],
            Kind::Smooth(f) => vec![f.gradient(iterates[0])],
            Kind::Game(g) => (0..g.players()).map(|i| g.loss(i, iterates)).collect::<Result<_>>()?,
        })
    }
}

/// `ℓ_a = −1` at the smallest entry of `x` (lowest index on ties) and `+1`
/// elsewhere, which maximizes `<ℓ, x> − min_a ℓ_a` over sign patterns.
pub fn worst_case_sign(x: &[f64]) -> Vec<f64> {
    let (argmin, _) = x.iter().enumerate().fold((0, f64::INFINITY), |(i, m), (j, &v)| if v < m { (j, v) } else { (i, m) });
    (0..x.len()).map(|a| if a == argmin { -1.0 } else { 1.0 }).collect()
}
