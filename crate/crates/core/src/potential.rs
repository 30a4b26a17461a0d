//! Convex potentials measuring how far a regret vector is from the
//! nonpositive orthant.
//!
//! Each potential carries its smoothness constant and norm, the exponent of
//! the norm in its smoothness remainder, and the constants that translate a
//! bound on the potential into a bound on the largest regret coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{compensated_sum, Norm};

/// Serializable description of a potential; the dimension is supplied when
/// the potential is built.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `‖x⁺‖²_p`, `p ≥ 2`.
    Polynomial { p: f64 },
    /// `‖x⁺‖^p_p`, `1 < p < 2`.
    Subquadratic { p: f64 },
    /// `ln Σ e^{x_i} − ln d`.
    Exponential,
}

impl PotentialSpec {
    pub fn build(&self, dim: usize) -> Result<Potential> {
        match *self {
            PotentialSpec::Polynomial { p } => Potential::polynomial(p, dim),
            PotentialSpec::Subquadratic { p } => Potential::subquadratic(p, dim),
            PotentialSpec::Exponential => Potential::exponential(dim),
        }
    }

    pub fn positive_invariant(&self) -> bool {
        !matches!(self, PotentialSpec::Exponential)
    }

    pub fn label(&self) -> String {
        match self {
            PotentialSpec::Polynomial { p } => format!("poly{p}"),
            PotentialSpec::Subquadratic { p } => format!("subq{p}"),
            PotentialSpec::Exponential => "exp".to_string(),
        }
    }
}

/// How a bound `F(η s) ≤ K` becomes a bound on `max_i s_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegretTranslation {
    /// `(F(s) + A)⁺ ≥ B · dist(s, S)^p`.
    NormPower { a: f64, b: f64, p: f64 },
    /// `max_i x_i ≤ (F(η x) + ln d) / η`.
    MaxShift { log_dim: f64 },
}

impl RegretTranslation {
    /// `(A, B, p)`, with the max-shift form read as `A = ln d`, `B = 1`, `p = 1`.
    pub fn constants(&self) -> (f64, f64, f64) {
        match *self {
            RegretTranslation::NormPower { a, b, p } => (a, b, p),
            RegretTranslation::MaxShift { log_dim } => (log_dim, 1.0, 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Family {
    Polynomial { p: f64 },
    Subquadratic { p: f64 },
    Exponential,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    family: Family,
    dim: usize,
}

impl Potential {
    pub fn polynomial(p: f64, dim: usize) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::invalid(format!("polynomial potential needs p >= 2, got {p}")));
        }
        Self::with_family(Family::Polynomial { p }, dim)
    }

    pub fn subquadratic(p: f64, dim: usize) -> Result<Self> {
        if !(p > 1.0 && p < 2.0) {
            return Err(Error::invalid(format!("subquadratic potential needs 1 < p < 2, got {p}")));
        }
        Self::with_family(Family::Subquadratic { p }, dim)
    }

    pub fn exponential(dim: usize) -> Result<Self> {
        Self::with_family(Family::Exponential, dim)
    }

    fn with_family(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        Ok(Potential { family, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> PotentialSpec {
        match self.family {
            Family::Polynomial { p } => PotentialSpec::Polynomial { p },
            Family::Subquadratic { p } => PotentialSpec::Subquadratic { p },
            Family::Exponential => PotentialSpec::Exponential,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.family {
            Family::Polynomial { p } => {
                let r = positive_norm(x, p);
                r * r
            }
            Family::Subquadratic { p } => {
                compensated_sum(x.iter().map(|v| if *v > 0.0 { v.powf(p) } else { 0.0 }))
            }
            Family::Exponential => {
                let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = x.iter().map(|v| (v - m).exp()).sum();
                m + s.ln() - (self.dim as f64).ln()
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.gradient_into(x, &mut out);
        out
    }

    /// Gradient written into `out`. Polynomial families use 0 on the kink
    /// `x_i = 0`.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match self.family {
            Family::Polynomial { p: 2.0 } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = 2.0 * v.max(0.0);
                }
            }
            Family::Polynomial { p } => {
                // 2 ‖x⁺‖_p^{2-p} (x⁺)^{p-1} = 2 r (x⁺ / r)^{p-1}
                let r = positive_norm(x, p);
                if r == 0.0 {
                    out.fill(0.0);
                    return;
                }
                for (o, v) in out.iter_mut().zip(x) {
                    *o = if *v > 0.0 { 2.0 * r * (v / r).powf(p - 1.0) } else { 0.0 };
                }
            }
            Family::Subquadratic { p } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = if *v > 0.0 { p * v.powf(p - 1.0) } else { 0.0 };
                }
            }
            Family::Exponential => {
                let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut s = 0.0;
                for (o, v) in out.iter_mut().zip(x) {
                    *o = (v - m).exp();
                    s += *o;
                }
                for o in out.iter_mut() {
                    *o /= s;
                }
            }
        }
    }

    /// Smoothness constant `L`.
    pub fn smoothness(&self) -> f64 {
        match self.family {
            Family::Polynomial { p } => 2.0 * (p - 1.0),
            Family::Subquadratic { .. } => 2.0,
            Family::Exponential => 1.0,
        }
    }

    /// Norm in which the smoothness remainder is measured.
    pub fn smoothness_norm(&self) -> Norm {
        match self.family {
            Family::Polynomial { p } | Family::Subquadratic { p } => Norm::Lp(p),
            Family::Exponential => Norm::LInf,
        }
    }

    /// Exponent `q` of the remainder `(L/2)‖y‖^q`.
    pub fn smoothness_exponent(&self) -> f64 {
        match self.family {
            Family::Subquadratic { p } => p,
            _ => 2.0,
        }
    }

    pub fn translation(&self) -> RegretTranslation {
        match self.family {
            Family::Polynomial { .. } => RegretTranslation::NormPower { a: 0.0, b: 1.0, p: 2.0 },
            Family::Subquadratic { p } => RegretTranslation::NormPower { a: 0.0, b: 1.0, p },
            Family::Exponential => RegretTranslation::MaxShift { log_dim: (self.dim as f64).ln() },
        }
    }

    /// Whether the distance condition is a power of a norm rather than the
    /// exponential max-shift inequality.
    pub fn distance_exponent_is_norm_power(&self) -> bool {
        !matches!(self.family, Family::Exponential)
    }

    /// `F(x⁺) = F(x)`, which makes the truncated regret vector admissible.
    pub fn positive_invariant(&self) -> bool {
        !matches!(self.family, Family::Exponential)
    }

    /// Remainder bound `(L/2)‖y‖^q` of the smoothness inequality.
    pub fn smoothness_remainder(&self, y: &[f64]) -> f64 {
        0.5 * self.smoothness() * self.smoothness_norm().eval(y).powf(self.smoothness_exponent())
    }
}

/// `‖x⁺‖_p`.
fn positive_norm(x: &[f64], p: f64) -> f64 {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(*v));
    if scale <= 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        let s = compensated_sum(x.iter().map(|v| {
            let r = v.max(0.0) / scale;
            r * r
        }));
        return scale * s.sqrt();
    }
    let s = compensated_sum(x.iter().map(|v| if *v > 0.0 { (v / scale).powf(p) } else { 0.0 }));
    scale * s.powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scalar evaluation of ‖x⁺‖²_p written independently of the gradient code.
    fn brute_poly(x: &[f64], p: f64) -> f64 {
        let mut s = 0.0;
        for v in x {
            if *v > 0.0 {
                s += v.powf(p);
            }
        }
        s.powf(2.0 / p)
    }

    #[test]
    fn polynomial_examples() {
        let f = Potential::polynomial(2.0, 2).unwrap();
        assert_eq!(f.value(&[1.0, -2.0]), 1.0);
        assert_eq!(f.gradient(&[1.0, -2.0]), vec![2.0, 0.0]);
        assert_eq!(f.value(&[-1.0, -3.0]), 0.0);
        assert_eq!(f.gradient(&[-1.0, -3.0]), vec![0.0, 0.0]);

        let f4 = Potential::polynomial(4.0, 2).unwrap();
        let expected = brute_poly(&[1.0, 1.0], 4.0);
        assert!((expected - 2f64.sqrt()).abs() < 1e-15);
        assert!((f4.value(&[1.0, 1.0]) - expected).abs() < 1e-15);
        assert_eq!(f4.gradient(&[-1.0, -1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn polynomial_constants() {
        let f = Potential::polynomial(2.0, 3).unwrap();
        assert_eq!(f.smoothness(), 2.0);
        assert_eq!(f.translation().constants(), (0.0, 1.0, 2.0));
        assert!(f.positive_invariant());
        assert_eq!(Potential::polynomial(3.0, 3).unwrap().smoothness(), 4.0);
        assert!(Potential::polynomial(1.9, 3).is_err());
        assert!(Potential::polynomial(2.0, 0).is_err());
    }

    #[test]
    fn subquadratic_examples() {
        let f = Potential::subquadratic(1.5, 2).unwrap();
        assert!((f.value(&[4.0, -1.0]) - 8.0).abs() < 1e-12);
        let g = f.gradient(&[4.0, -1.0]);
        assert!((g[0] - 3.0).abs() < 1e-12);
        assert_eq!(g[1], 0.0);
        assert_eq!(f.value(&[0.0, 0.0]), 0.0);
        assert_eq!(f.gradient(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert!(Potential::subquadratic(2.0, 2).is_err());
        assert!(Potential::subquadratic(1.0, 2).is_err());
        assert_eq!(f.smoothness_exponent(), 1.5);
    }

    #[test]
    fn exponential_examples() {
        let f = Potential::exponential(2).unwrap();
        assert!(f.value(&[0.0, 0.0]).abs() < 1e-15);
        assert_eq!(f.gradient(&[0.0, 0.0]), vec![0.5, 0.5]);
        assert!(f.value(&[-0.5, -2.0]) <= 0.0);
        let g = f.gradient(&[3f64.ln(), 0.0]);
        assert!((g[0] - 0.75).abs() < 1e-15 && (g[1] - 0.25).abs() < 1e-15);
        assert!(!f.positive_invariant());
        assert_eq!(f.smoothness(), 1.0);
        assert_eq!(f.smoothness_norm(), Norm::LInf);
        assert!(Potential::exponential(0).is_err());
    }

    #[test]
    fn exponential_is_overflow_safe() {
        let f = Potential::exponential(3).unwrap();
        let v = f.value(&[1e4, -1e4, 0.0]);
        assert!((v - (1e4 - 3f64.ln())).abs() < 1e-9);
        let g = f.gradient(&[1e4, 1e4, -1e4]);
        assert!((g[0] - 0.5).abs() < 1e-15 && g[2] == 0.0);
    }

    /// Grid search of the scalar remainder `(a+b)⁺^p − (a⁺)^p − p (a⁺)^{p−1} b`
    /// over `|b| = 1`; its supremum must not exceed `L/2 = 1`.
    #[test]
    fn subquadratic_scalar_remainder_constant() {
        for p in [1.1, 1.2, 1.5, 1.8, 1.95] {
            let f = |a: f64| if a > 0.0 { a.powf(p) } else { 0.0 };
            let df = |a: f64| if a > 0.0 { p * a.powf(p - 1.0) } else { 0.0 };
            let mut sup = f64::NEG_INFINITY;
            for i in 0..200_001 {
                let a = -5.0 + 10.0 * i as f64 / 200_000.0;
                for b in [-1.0, 1.0] {
                    sup = sup.max(f(a + b) - f(a) - df(a) * b);
                }
            }
            assert!(sup <= 1.0 + 1e-12, "p = {p}: sup = {sup}");
            assert!(sup >= 1.0 - 1e-12);
        }
    }
}
