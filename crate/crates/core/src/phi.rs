//! Φ-regret minimization through fixed points of gradient-weighted
//! transformation mixtures.
//!
//! Each round the learner forms `Q = Σ_φ w_φ Φ_φ` with
//! `w = ∇F(η_t (s + m_t)) / <∇F(η_t (s + m_t)), 1>` and plays a fixed point
//! of `Q`. In plus mode the steered vector is the truncated
//! `q_{1:t} = (q_{1:t−1} + s^Φ_t)⁺`, while the untruncated sum is kept for
//! measuring regret.

use serde::{Deserialize, Serialize};

use crate::audit::{AuditSummary, Auditor, BoundContext, RoundInputs};
use crate::error::{Error, Result};
use crate::fixed_point::{fixed_point, SquareMatrix};
use crate::hedger::Fallback;
use crate::potential::Potential;
use crate::record::RoundRecord;
use crate::schedule::{Predictor, StepsizeSchedule};
use crate::vector::{check_dim, check_finite, dot, KahanAccumulator, RealVec, Simplex};

/// Largest action count for which swap regret is materialized.
pub const MAX_SWAP_ACTIONS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKind {
    External,
    Internal,
    Swap,
    Custom,
}

impl PhiKind {
    pub fn build(self, n: usize) -> Result<PhiSet> {
        match self {
            PhiKind::External => PhiSet::external(n),
            PhiKind::Internal => PhiSet::internal(n),
            PhiKind::Swap => PhiSet::swap(n),
            PhiKind::Custom => Err(Error::invalid("custom transform sets are built with PhiSet::custom")),
        }
    }

    /// Number of transforms for `n` actions, without building them.
    pub fn size(self, n: usize) -> Option<usize> {
        match self {
            PhiKind::External => Some(n),
            PhiKind::Internal => Some(n * n.saturating_sub(1)),
            PhiKind::Swap if n <= MAX_SWAP_ACTIONS => Some(n.pow(n as u32)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Transform {
    /// Action `k` is sent to `map[k]`.
    Map(Vec<usize>),
    Dense(SquareMatrix),
}

/// A finite set of linear maps of the simplex into itself.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiSet {
    n: usize,
    kind: PhiKind,
    transforms: Vec<Transform>,
}

impl PhiSet {
    /// Constant maps `φ_a(x) = δ_a`.
    pub fn external(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let transforms = (0..n).map(|a| Transform::Map(vec![a; n])).collect();
        Ok(PhiSet { n, kind: PhiKind::External, transforms })
    }

    /// Maps `φ_{i→j}` moving all mass of action `i` to action `j`, ordered by
    /// `i` then `j`.
    pub fn internal(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("internal regret needs at least two actions"));
        }
        let mut transforms = Vec::with_capacity(n * (n - 1));
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let mut map: Vec<usize> = (0..n).collect();
                map[i] = j;
                transforms.push(Transform::Map(map));
            }
        }
        Ok(PhiSet { n, kind: PhiKind::Internal, transforms })
    }

    /// All `n^n` maps of the action set into itself, identity included.
    /// Map number `k` sends action `a` to the `a`-th base-`n` digit of `k`.
    pub fn swap(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if n > MAX_SWAP_ACTIONS {
            return Err(Error::Unsupported(format!(
                "swap regret materializes n^n transforms and is limited to n <= {MAX_SWAP_ACTIONS} (got {n}); \
                 use internal regret for larger action sets"
            )));
        }
        let count = n.pow(n as u32);
        let transforms = (0..count)
            .map(|mut k| {
                let mut map = vec![0; n];
                for m in map.iter_mut() {
                    *m = k % n;
                    k /= n;
                }
                Transform::Map(map)
            })
            .collect();
        Ok(PhiSet { n, kind: PhiKind::Swap, transforms })
    }

    pub fn custom(matrices: Vec<SquareMatrix>) -> Result<Self> {
        let n = matrices.first().ok_or(Error::Empty)?.n();
        for (k, m) in matrices.iter().enumerate() {
            if m.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.n() });
            }
            if !m.is_column_stochastic(1e-12) {
                return Err(Error::invalid(format!("transform {k} is not column-stochastic")));
            }
        }
        Ok(PhiSet { n, kind: PhiKind::Custom, transforms: matrices.into_iter().map(Transform::Dense).collect() })
    }

    /// Action-space dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of transforms `|Φ|`.
    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    pub fn kind(&self) -> PhiKind {
        self.kind
    }

    /// Dense matrix of transform `k`.
    pub fn matrix(&self, k: usize) -> SquareMatrix {
        match &self.transforms[k] {
            Transform::Dense(m) => m.clone(),
            Transform::Map(map) => {
                let mut m = SquareMatrix::zeros(self.n);
                for (a, &b) in map.iter().enumerate() {
                    m.set(b, a, 1.0);
                }
                m
            }
        }
    }

    /// `φ_k(x)`.
    pub fn apply(&self, k: usize, x: &[f64]) -> Vec<f64> {
        match &self.transforms[k] {
            Transform::Dense(m) => m.apply(x),
            Transform::Map(map) => {
                let mut out = vec![0.0; self.n];
                for (a, &b) in map.iter().enumerate() {
                    out[b] += x[a];
                }
                out
            }
        }
    }

    /// `{<ℓ, x> − <ℓ, φ(x)>}_φ` without validating the inputs.
    fn instant_regret_unchecked(&self, loss: &[f64], x: &[f64]) -> Vec<f64> {
        let lx = dot(loss, x);
        self.transforms
            .iter()
            .map(|t| match t {
                // φ_a(x) = δ_a exactly on the simplex
                Transform::Map(map) if self.kind == PhiKind::External => lx - loss[map[0]],
                Transform::Map(map) => {
                    map.iter().enumerate().filter(|(a, b)| a != *b).map(|(a, &b)| x[a] * (loss[a] - loss[b])).sum()
                }
                Transform::Dense(m) => lx - dot(loss, &m.apply(x)),
            })
            .collect()
    }

    /// `Σ_φ w_φ Φ_φ`.
    pub fn operator(&self, weights: &[f64]) -> Result<SquareMatrix> {
        check_dim(self.len(), weights)?;
        check_finite(weights)?;
        let mut q = SquareMatrix::zeros(self.n);
        for (t, &w) in self.transforms.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            match t {
                Transform::Map(map) => {
                    for (a, &b) in map.iter().enumerate() {
                        q.set(b, a, q.get(b, a) + w);
                    }
                }
                Transform::Dense(m) => q.add_scaled(m, w),
            }
        }
        Ok(q)
    }
}

/// `s^Φ_t = {<ℓ, x> − <ℓ, φ(x)>}_φ` for an iterate on the simplex.
pub fn phi_instant_regret(loss: &[f64], iterate: &[f64], phi: &PhiSet) -> Result<RealVec> {
    check_dim(phi.n(), loss)?;
    check_dim(phi.n(), iterate)?;
    check_finite(loss)?;
    check_finite(iterate)?;
    if !Simplex::new(phi.n())?.contains(iterate) {
        return Err(Error::NotNormalized(iterate.iter().sum()));
    }
    Ok(RealVec::trusted(phi.instant_regret_unchecked(loss, iterate)))
}

/// Normalized gradient weights `∇F(η (s + m)) / <∇F(η (s + m)), 1>`, with
/// the raw gradient. `Degenerate` when the normalizer is not positive.
pub fn operator_weights(
    potential: &Potential,
    eta: f64,
    cumulative: &[f64],
    prediction: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(potential.dim(), cumulative)?;
    check_dim(potential.dim(), prediction)?;
    let z: Vec<f64> = cumulative.iter().zip(prediction).map(|(s, m)| eta * (s + m)).collect();
    let gradient = potential.gradient(&z);
    check_finite(&gradient)?;
    let total = gradient.iter().sum::<f64>();
    if !(total > 0.0) {
        return Err(Error::Degenerate(total));
    }
    let weights = gradient.iter().map(|g| g / total).collect();
    Ok((weights, gradient))
}

/// The operator `Σ_φ w_φ Φ_φ` for `w ∝ ∇F(η (s + m))`.
pub fn build_operator(
    phi: &PhiSet,
    potential: &Potential,
    eta: f64,
    cumulative: &[f64],
    prediction: &[f64],
) -> Result<SquareMatrix> {
    check_dim(phi.len(), cumulative)?;
    let (weights, _) = operator_weights(potential, eta, cumulative, prediction)?;
    phi.operator(&weights)
}

/// `max_φ Σ_t (s^Φ_t)_φ` over the recorded untruncated instantaneous vectors.
pub fn phi_measured_regret(history: &[RoundRecord]) -> f64 {
    crate::record::cumulative_from_history(history)
        .map(|s| s.into_iter().fold(f64::NEG_INFINITY, f64::max))
        .unwrap_or(0.0)
}

#[derive(Clone, Debug)]
struct Pending {
    iterate: Vec<f64>,
    prediction: Vec<f64>,
    gradient: Vec<f64>,
    eta: f64,
    fallback: bool,
}

/// Learner for Φ-regret over the simplex of `phi.n()` actions.
#[derive(Clone, Debug)]
pub struct PhiRegret {
    phi: PhiSet,
    potential: Potential,
    schedule: StepsizeSchedule,
    predictor: Predictor,
    fallback: Fallback,
    plus: bool,
    c_bound: f64,
    /// `s^Φ_{1:t−1}` or `q_{1:t−1}` in plus mode.
    steered: Vec<f64>,
    raw: Vec<f64>,
    round: usize,
    accumulator: KahanAccumulator,
    last_instant: Vec<f64>,
    last_iterate: Option<Vec<f64>>,
    eta_prev: Option<f64>,
    pending: Option<Pending>,
    auditor: Auditor,
}

impl PhiRegret {
    /// `potential` must live in dimension `|Φ|`; `plus` selects the truncated
    /// update, which needs a positive-invariant potential.
    pub fn new(
        phi: PhiSet,
        potential: Potential,
        schedule: StepsizeSchedule,
        predictor: Predictor,
        plus: bool,
    ) -> Result<Self> {
        schedule.validate()?;
        let d = phi.len();
        if potential.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: potential.dim() });
        }
        if plus && !potential.positive_invariant() {
            return Err(Error::Unsupported(format!(
                "plus mode needs a positive-invariant potential, {} is not",
                potential.spec().label()
            )));
        }
        let c_bound = phi_c_bound(&potential, 1.0);
        let auditor = Auditor::new(BoundContext::new(&potential, schedule, 1.0, c_bound));
        Ok(PhiRegret {
            phi,
            potential,
            schedule,
            predictor,
            fallback: Fallback::default(),
            plus,
            c_bound,
            steered: vec![0.0; d],
            raw: vec![0.0; d],
            round: 1,
            accumulator: KahanAccumulator::default(),
            last_instant: vec![0.0; d],
            last_iterate: None,
            eta_prev: None,
            pending: None,
            auditor,
        })
    }

    pub fn with_fallback(mut self, fallback: Fallback) -> Self {
        self.fallback = fallback;
        self
    }

    /// Sets `C` from a bound on `max_i |ℓ_i|`.
    pub fn with_loss_bound(mut self, loss_bound: f64) -> Self {
        self.set_c(phi_c_bound(&self.potential, loss_bound));
        self
    }

    pub fn with_c_bound(mut self, c_bound: f64) -> Self {
        self.set_c(c_bound);
        self
    }

    fn set_c(&mut self, c: f64) {
        assert!(self.round == 1, "configuration must be set before the first round");
        self.c_bound = c;
        self.auditor = Auditor::new(BoundContext::new(&self.potential, self.schedule, 1.0, c));
    }

    pub fn phi(&self) -> &PhiSet {
        &self.phi
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn is_plus(&self) -> bool {
        self.plus
    }

    pub fn c_bound(&self) -> f64 {
        self.c_bound
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// The vector the learner steers: `s^Φ_{1:t−1}`, or `s^{Φ+}_{1:t−1}` in
    /// plus mode.
    pub fn phi_regret(&self) -> &[f64] {
        &self.steered
    }

    /// Untruncated `s^Φ_{1:t−1}`.
    pub fn raw_phi_regret(&self) -> &[f64] {
        &self.raw
    }

    pub fn accumulator(&self) -> f64 {
        self.accumulator.value()
    }

    pub fn eta(&self) -> f64 {
        self.schedule.eta(self.round, self.accumulator.value())
    }

    /// `max_φ (s^Φ_{1:t−1})_φ`.
    pub fn measured_regret(&self) -> f64 {
        self.raw.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn regret_upper_bound(&self) -> f64 {
        self.auditor.regret_bound()
    }

    pub fn audit_summary(&self) -> &AuditSummary {
        self.auditor.summary()
    }

    pub fn bound_context(&self) -> &BoundContext {
        self.auditor.context()
    }

    fn prediction(&self, external: Option<&[f64]>) -> Result<Vec<f64>> {
        let d = self.phi.len();
        match (self.predictor, external) {
            (Predictor::Zero, None) => Ok(vec![0.0; d]),
            (Predictor::LastInstant, None) => Ok(self.last_instant.clone()),
            (Predictor::External, Some(m)) => {
                check_dim(d, m)?;
                check_finite(m)?;
                Ok(m.to_vec())
            }
            (Predictor::External, None) => Err(Error::invalid("external predictor needs a prediction each round")),
            (_, Some(_)) => Err(Error::invalid("prediction supplied to a learner without an external predictor")),
        }
    }

    /// Plays round `t`. The prediction lives in `ℝ^{|Φ|}`.
    pub fn next_iterate(&mut self, external: Option<&[f64]>) -> Result<RealVec> {
        if self.pending.is_some() {
            return Err(Error::invalid(format!("round {} already has a pending iterate", self.round)));
        }
        let prediction = self.prediction(external)?;
        let eta = self.eta();
        let (iterate, gradient, fallback) =
            match operator_weights(&self.potential, eta, &self.steered, &prediction) {
                Ok((weights, gradient)) => {
                    let q = self.phi.operator(&weights)?;
                    (fixed_point(&q)?.into_inner(), gradient, false)
                }
                Err(Error::Degenerate(_)) => {
                    let x = match (self.fallback, &self.last_iterate) {
                        (Fallback::HoldLast, Some(x)) => x.clone(),
                        _ => vec![1.0 / self.phi.n() as f64; self.phi.n()],
                    };
                    (x, self.potential.gradient(&vec![0.0; self.phi.len()]), true)
                }
                Err(e) => return Err(e),
            };
        self.pending = Some(Pending { iterate: iterate.clone(), prediction, gradient, eta, fallback });
        Ok(RealVec::trusted(iterate))
    }

    pub fn observe_loss(&mut self, loss: &[f64]) -> Result<RoundRecord> {
        check_dim(self.phi.n(), loss)?;
        check_finite(loss)?;
        let p = self.pending.take().ok_or(Error::StaleIterate { round: self.round })?;
        let f = &self.potential;
        let t = self.round;

        let s_t = self.phi.instant_regret_unchecked(loss, &p.iterate);
        let blackwell_ip = dot(&p.gradient, &s_t);

        let eta_prev = self.eta_prev.unwrap_or(p.eta);
        let scaled = |eta: f64, v: &[f64]| v.iter().map(|x| eta * x).collect::<Vec<_>>();
        let monotone_lhs = f.value(&scaled(p.eta, &self.steered));
        let monotone_rhs = p.eta / eta_prev * f.value(&scaled(eta_prev, &self.steered));

        for ((q, r), s) in self.steered.iter_mut().zip(self.raw.iter_mut()).zip(&s_t) {
            *r += s;
            *q += s;
            if self.plus {
                *q = q.max(0.0);
            }
        }
        let diff: Vec<f64> = s_t.iter().zip(&p.prediction).map(|(s, m)| s - m).collect();
        let err = f.smoothness_norm().eval(&diff);
        self.accumulator.add(err * err);
        let potential_value = f.value(&scaled(p.eta, &self.steered));
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

/// `C` for Φ-regret with losses in `[−ℓ, ℓ]`: every entry of `s^Φ_t` lies in
/// `[−2ℓ, 2ℓ]`, and so does every entry of a last-instant prediction.
pub fn phi_c_bound(potential: &Potential, loss_bound: f64) -> f64 {
    let r = 4.0 * loss_bound * potential.smoothness_norm().of_ones(potential.dim());
    r * r
}
