//! Dense vectors, norms and the simplex.
//!
//! Every algorithm in this crate works on dense `f64` vectors. [`RealVec`]
//! is the validated form used at API boundaries: it is never empty and never
//! holds a NaN or an infinity. Hot loops take plain slices.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default simplex membership tolerance.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RealVec(Vec<f64>);

impl RealVec {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        check_finite(&entries)?;
        Ok(RealVec(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "RealVec dimension must be at least 1");
        RealVec(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        assert!(n > 0, "RealVec dimension must be at least 1");
        RealVec(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Wraps a vector the caller has already validated.
    pub(crate) fn trusted(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty() && entries.iter().all(|v| v.is_finite()));
        RealVec(entries)
    }
}

impl Deref for RealVec {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for RealVec {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl<'de> Deserialize<'de> for RealVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        RealVec::new(v).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn check_dim(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch { expected, found: v.len() });
    }
    Ok(())
}

/// Plain left-to-right inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Neumaier's compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Running compensated accumulator, for sums that grow over many rounds.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanAccumulator {
    sum: f64,
    comp: f64,
}

impl KahanAccumulator {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Componentwise `max(x_i, 0)`.
pub fn positive_part(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0)).collect()
}

pub fn max_entry(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    /// `p`-norm with `1 < p < ∞`.
    Lp(f64),
    LInf,
}

impl Norm {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!("p-norm exponent must lie in (1, inf), got {p}")));
        }
        Ok(Norm::Lp(p))
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        match *self {
            Norm::L1 => compensated_sum(v.iter().map(|x| x.abs())),
            Norm::LInf => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            Norm::Lp(p) => {
                // Scale by the largest entry so large exponents cannot overflow.
                let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                if scale == 0.0 {
                    return 0.0;
                }
                if p == 2.0 {
                    let s = compensated_sum(v.iter().map(|x| {
                        let r = x / scale;
                        r * r
                    }));
                    return scale * s.sqrt();
                }
                let s = compensated_sum(v.iter().map(|x| (x.abs() / scale).powf(p)));
                scale * s.powf(1.0 / p)
            }
        }
    }

    /// Exponent of the norm, with ∞ for the max norm.
    pub fn exponent(&self) -> f64 {
        match *self {
            Norm::L1 => 1.0,
            Norm::Lp(p) => p,
            Norm::LInf => f64::INFINITY,
        }
    }

    pub fn conjugate(&self) -> Norm {
        match *self {
            Norm::L1 => Norm::LInf,
            Norm::LInf => Norm::L1,
            Norm::Lp(p) => Norm::Lp(p / (p - 1.0)),
        }
    }

    /// Norm of the all-ones vector in dimension `n`.
    pub fn of_ones(&self, n: usize) -> f64 {
        match *self {
            Norm::L1 => n as f64,
            Norm::LInf => 1.0,
            Norm::Lp(p) => (n as f64).powf(1.0 / p),
        }
    }
}

/// A primal norm together with its dual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormPair {
    pub primal: Norm,
    pub dual: Norm,
}

impl NormPair {
    pub fn new(primal: Norm) -> Result<Self> {
        if let Norm::Lp(p) = primal {
            Norm::lp(p)?;
        }
        Ok(NormPair { primal, dual: primal.conjugate() })
    }

    pub fn euclidean() -> Self {
        NormPair { primal: Norm::Lp(2.0), dual: Norm::Lp(2.0) }
    }

    /// ∞-norm primal, 1-norm dual.
    pub fn max_l1() -> Self {
        NormPair { primal: Norm::LInf, dual: Norm::L1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Simplex {
    pub dim: usize,
    pub tolerance: f64,
}

impl Simplex {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        Ok(Simplex { dim, tolerance: SIMPLEX_TOLERANCE })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x.iter().all(|v| v.is_finite() && *v >= -self.tolerance)
            && (x.iter().sum::<f64>() - 1.0).abs() <= self.tolerance
    }

    pub fn uniform(&self) -> RealVec {
        RealVec::trusted(vec![1.0 / self.dim as f64; self.dim])
    }

    /// `max_{x ∈ Δ} <s, x>`, attained at a vertex.
    pub fn support(&self, s: &[f64]) -> f64 {
        max_entry(s)
    }
}

/// Instantaneous regret vector `<loss, iterate> u - loss`.
pub fn instant_regret(loss: &[f64], iterate: &[f64], u: &[f64]) -> Result<RealVec> {
    if loss.is_empty() {
        return Err(Error::Empty);
    }
    check_dim(loss.len(), iterate)?;
    check_dim(loss.len(), u)?;
    check_finite(loss)?;
    check_finite(iterate)?;
    check_finite(u)?;
    let norm = dot(u, iterate);
    if (norm - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    Ok(RealVec::trusted(instant_regret_unchecked(loss, iterate, u)))
}

pub(crate) fn instant_regret_unchecked(loss: &[f64], iterate: &[f64], u: &[f64]) -> Vec<f64> {
    let value = dot(loss, iterate);
    u.iter().zip(loss).map(|(ui, li)| value * ui - li).collect()
}

/// Appends a constant coordinate so that a domain without a normalizing
/// vector gains one: `x' = (x, 1)`, `loss' = (loss, 0)`, `u = (0, ..., 0, 1)`.
pub fn lift_domain(x: &[f64], loss: &[f64]) -> Result<(RealVec, RealVec, RealVec)> {
    if x.is_empty() || loss.is_empty() {
        return Err(Error::Empty);
    }
    check_dim(x.len(), loss)?;
    check_finite(x)?;
    check_finite(loss)?;
    let n = x.len();
    let mut lx = x.to_vec();
    lx.push(1.0);
    let mut ll = loss.to_vec();
    ll.push(0.0);
    let mut u = vec![0.0; n + 1];
    u[n] = 1.0;
    Ok((RealVec::trusted(lx), RealVec::trusted(ll), RealVec::trusted(u)))
}
