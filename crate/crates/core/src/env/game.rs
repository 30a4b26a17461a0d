//! Normal-form games, best responses and equilibrium gaps.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::vector::check_dim;

const ZERO_SUM_TOLERANCE: f64 = 1e-12;

/// A finite game in normal form. Payoff tensors are stored flat, one per
/// player, in row-major joint-action order (the last player's action varies
/// fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormGame {
    actions: Vec<usize>,
    payoffs: Vec<Vec<f64>>,
}

impl NormalFormGame {
    pub fn new(actions: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        if actions.len() < 2 {
            return Err(Error::invalid("a game needs at least two players"));
        }
        if actions.contains(&0) {
            return Err(Error::invalid("every player needs at least one action"));
        }
        if payoffs.len() != actions.len() {
            return Err(Error::DimensionMismatch { expected: actions.len(), found: payoffs.len() });
        }
        let size: usize = actions.iter().product();
        for p in &payoffs {
            check_dim(size, p)?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("payoffs must be finite"));
            }
        }
        Ok(NormalFormGame { actions, payoffs })
    }

    /// Two-player zero-sum game from the row player's payoff matrix.
    pub fn zero_sum(row_payoff: &[Vec<f64>]) -> Result<Self> {
        let n = row_payoff.len();
        let m = row_payoff.first().map_or(0, Vec::len);
        if row_payoff.iter().any(|r| r.len() != m) {
            return Err(Error::invalid("payoff matrix rows differ in length"));
        }
        let u0: Vec<f64> = row_payoff.iter().flatten().copied().collect();
        let u1 = u0.iter().map(|v| -v).collect();
        Self::new(vec![n, m], vec![u0, u1])
    }

    /// Rock-paper-scissors with payoffs in {−1, 0, 1}.
    pub fn rock_paper_scissors() -> Self {
        Self::zero_sum(&[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]).unwrap()
    }

    pub fn matching_pennies() -> Self {
        Self::zero_sum(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    /// Game with payoffs drawn uniformly from `[−1, 1]`.
    pub fn random(actions: Vec<usize>, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size: usize = actions.iter().product();
        let payoffs = (0..actions.len()).map(|_| (0..size).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
        Self::new(actions, payoffs)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn players(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    /// Number of joint actions.
    pub fn joint_size(&self) -> usize {
        self.payoffs[0].len()
    }

    pub fn payoff_table(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    pub fn is_zero_sum(&self) -> bool {
        self.players() == 2
            && self.payoffs[0].iter().zip(&self.payoffs[1]).all(|(a, b)| (a + b).abs() <= ZERO_SUM_TOLERANCE)
    }

    /// `max |U_i(a)|`, which bounds every emitted loss entry.
    pub fn max_abs_payoff(&self) -> f64 {
        self.payoffs.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Flat index of a joint action.
    pub fn index(&self, joint: &[usize]) -> usize {
        joint.iter().zip(&self.actions).fold(0, |acc, (&a, &n)| acc * n + a)
    }

    /// Joint action at a flat index.
    pub fn joint(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.players()];
        for (o, &n) in out.iter_mut().zip(&self.actions).rev() {
            *o = index % n;
            index /= n;
        }
        out
    }

    pub fn payoff(&self, player: usize, joint: &[usize]) -> f64 {
        self.payoffs[player][self.index(joint)]
    }

    fn check_profile(&self, profile: &[&[f64]]) -> Result<()> {
        if profile.len() != self.players() {
            return Err(Error::DimensionMismatch { expected: self.players(), found: profile.len() });
        }
        for (x, &n) in profile.iter().zip(&self.actions) {
            check_dim(n, x)?;
        }
        Ok(())
    }

    /// `E[U_i(a, a_{−i})]` for each action `a` of `player` when the others
    /// play the mixed strategies in `profile` (the player's own entry is
    /// ignored).
    pub fn action_values(&self, player: usize, profile: &[&[f64]]) -> Result<Vec<f64>> {
        self.check_profile(profile)?;
        let mut values = vec![0.0; self.actions[player]];
        let table = &self.payoffs[player];
        for (idx, u) in table.iter().enumerate() {
            let joint = self.joint(idx);
            let mut w = 1.0;
            for (j, (&a, x)) in joint.iter().zip(profile).enumerate() {
                if j != player {
                    w *= x[a];
                }
            }
            if w != 0.0 {
                values[joint[player]] += w * u;
            }
        }
        Ok(values)
    }

    /// Loss vector of `player`: `ℓ_a = −E[U_i(a, a_{−i})]`.
    pub fn loss(&self, player: usize, profile: &[&[f64]]) -> Result<Vec<f64>> {
        Ok(self.action_values(player, profile)?.into_iter().map(|v| -v).collect())
    }

    /// Expected payoff of `player` under a mixed profile.
    pub fn expected_payoff(&self, player: usize, profile: &[&[f64]]) -> Result<f64> {
        let v = self.action_values(player, profile)?;
        Ok(v.iter().zip(profile[player]).map(|(a, b)| a * b).sum())
    }

    /// Row player's loss matrix `A = −U₀` of a two-player game.
    pub fn loss_matrix(&self) -> Result<Vec<Vec<f64>>> {
        if self.players() != 2 {
            return Err(Error::Unsupported("loss matrix needs a two-player game".into()));
        }
        Ok(self.payoffs[0].chunks(self.actions[1]).map(|r| r.iter().map(|v| -v).collect()).collect())
    }

    /// Sum of the best-response gains against average strategies,
    /// `max_b U₁(x̄, b) + max_a U₀(a, ȳ)`.
    pub fn exploitability(&self, x_bar: &[f64], y_bar: &[f64]) -> Result<f64> {
        if !self.is_zero_sum() {
            return Err(Error::Unsupported("exploitability needs a two-player zero-sum game".into()));
        }
        let profile = [x_bar, y_bar];
        let best = |p: usize| -> Result<f64> {
            Ok(self.action_values(p, &profile)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
        };
        Ok(best(0)? + best(1)?)
    }

    /// Largest expected gain of each player from a deviation `a → a'` under a
    /// joint distribution over flat joint-action indices.
    pub fn ce_gaps(&self, joint: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.joint_size(), joint)?;
        let mut out = Vec::with_capacity(self.players());
        for i in 0..self.players() {
            let n = self.actions[i];
            // gain[a][a'] = Σ_{joint: a_i = a} p (U_i(a', a_{−i}) − U_i(joint))
            let mut gain = vec![0.0; n * n];
            for (idx, &p) in joint.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let mut ja = self.joint(idx);
                let a = ja[i];
                let base = self.payoffs[i][idx];
                for b in 0..n {
                    ja[i] = b;
                    gain[a * n + b] += p * (self.payoffs[i][self.index(&ja)] - base);
                }
            }
            out.push(gain.into_iter().fold(0.0, f64::max));
        }
        Ok(out)
    }

    /// `max_i max_{a → a'}` deviation gain under the joint distribution.
    pub fn ce_gap(&self, joint: &[f64]) -> Result<f64> {
        Ok(self.ce_gaps(joint)?.into_iter().fold(0.0, f64::max))
    }

    /// Product distribution over joint actions.
    pub fn product(&self, profile: &[&[f64]]) -> Result<Vec<f64>> {
        self.check_profile(profile)?;
        Ok((0..self.joint_size())
            .map(|idx| self.joint(idx).iter().zip(profile).map(|(&a, x)| x[a]).product())
            .collect())
    }
}

/// Running average of per-round product distributions `⊗_i x^i_t`.
#[derive(Clone, Debug)]
pub struct JointAccumulator {
    sums: Vec<f64>,
    rounds: usize,
}

impl JointAccumulator {
    pub fn new(game: &NormalFormGame) -> Self {
        JointAccumulator { sums: vec![0.0; game.joint_size()], rounds: 0 }
    }

    pub fn add(&mut self, game: &NormalFormGame, profile: &[&[f64]]) -> Result<()> {
        for (s, p) in self.sums.iter_mut().zip(game.product(profile)?) {
            *s += p;
        }
        self.rounds += 1;
        Ok(())
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Empirical joint distribution; uniform zero vector before any round.
    pub fn distribution(&self) -> Vec<f64> {
        let t = self.rounds.max(1) as f64;
        self.sums.iter().map(|s| s / t).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct RawGame {
    players: usize,
    actions: Vec<usize>,
    payoffs: Vec<Value>,
}

fn flatten(v: &Value, shape: &[usize], out: &mut Vec<f64>) -> Result<()> {
    match (shape.split_first(), v) {
        (None, Value::Number(n)) => {
            out.push(n.as_f64().ok_or_else(|| Error::Config("payoff is not a finite number".into()))?);
            Ok(())
        }
        (Some((&n, rest)), Value::Array(items)) if items.len() == n => {
            items.iter().try_for_each(|item| flatten(item, rest, out))
        }
        _ => Err(Error::Config(format!("payoff tensor does not match action counts {shape:?}"))),
    }
}

fn nest(values: &[f64], shape: &[usize]) -> Value {
    match shape.split_first() {
        None => Value::from(values[0]),
        Some((&n, rest)) => {
            let stride = values.len() / n;
            Value::Array((0..n).map(|k| nest(&values[k * stride..(k + 1) * stride], rest)).collect())
        }
    }
}

impl<'de> Deserialize<'de> for NormalFormGame {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawGame::deserialize(d)?;
        if raw.players != raw.actions.len() || raw.players != raw.payoffs.len() {
            return Err(D::Error::custom("players, actions and payoffs disagree on the number of players"));
        }
        let mut payoffs = Vec::with_capacity(raw.players);
        for v in &raw.payoffs {
            let mut flat = Vec::new();
            flatten(v, &raw.actions, &mut flat).map_err(D::Error::custom)?;
            payoffs.push(flat);
        }
        NormalFormGame::new(raw.actions, payoffs).map_err(D::Error::custom)
    }
}

impl Serialize for NormalFormGame {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawGame {
            players: self.players(),
            actions: self.actions.clone(),
            payoffs: self.payoffs.iter().map(|p| nest(p, &self.actions)).collect(),
        }
        .serialize(s)
    }
}
