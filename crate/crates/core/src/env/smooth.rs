//! A fixed least-squares loss over the simplex, linearized by its gradient.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::vector::{check_dim, check_finite, Norm, NormPair};

/// `ℓ(x) = ½‖Mx − b‖²₂` on the simplex.
///
/// Gradients are measured in the pair's primal norm and iterates in its
/// dual norm.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedSmoothLoss {
    m: Vec<Vec<f64>>,
    b: Vec<f64>,
    norms: NormPair,
    k: f64,
    lipschitz: f64,
    loss_bound: f64,
}

impl FixedSmoothLoss {
    pub fn new(m: Vec<Vec<f64>>, b: Vec<f64>, norms: NormPair) -> Result<Self> {
        let rows = m.len();
        if rows == 0 {
            return Err(Error::Empty);
        }
        let n = m[0].len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for r in &m {
            check_dim(n, r)?;
            check_finite(r)?;
        }
        check_dim(rows, &b)?;
        check_finite(&b)?;
        let mut f = FixedSmoothLoss { m, b, norms, k: 0.0, lipschitz: 0.0, loss_bound: 0.0 };
        // ‖∇ℓ‖ is convex along the simplex, so its maximum sits at a vertex
        let vertex_grads: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                f.gradient(&e)
            })
            .collect();
        f.k = vertex_grads.iter().map(|g| norms.primal.eval(g)).fold(0.0, f64::max);
        f.loss_bound = vertex_grads.iter().map(|g| Norm::LInf.eval(g)).fold(0.0, f64::max);
        f.lipschitz = f.operator_norm();
        Ok(f)
    }

    /// Identity design with target `b`: `ℓ(x) = ½‖x − b‖²`.
    pub fn identity(b: Vec<f64>, norms: NormPair) -> Result<Self> {
        let n = b.len();
        let m = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self::new(m, b, norms)
    }

    /// Doubles the columns of `M` as `[M, −M]`, so that a point of the
    /// simplex in `2n` coordinates encodes `w = x⁺ − x⁻` with `‖w‖₁ ≤ 1`.
    /// Scaling `M` by a radius `r` handles the constraint `‖w‖₁ ≤ r`.
    pub fn l1_ball(m: &[Vec<f64>], b: Vec<f64>, radius: f64, norms: NormPair) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("radius must be positive, got {radius}")));
        }
        let doubled =
            m.iter().map(|r| r.iter().map(|v| radius * v).chain(r.iter().map(|v| -radius * v)).collect()).collect();
        Self::new(doubled, b, norms)
    }

    /// Recovers `w` from a point of the doubled simplex.
    pub fn l1_ball_point(x: &[f64], radius: f64) -> Vec<f64> {
        let n = x.len() / 2;
        (0..n).map(|i| radius * (x[i] - x[n + i])).collect()
    }

    pub fn dim(&self) -> usize {
        self.m[0].len()
    }

    pub fn norms(&self) -> NormPair {
        self.norms
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.residual(x).iter().map(|r| r * r).sum::<f64>()
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.m.iter().zip(&self.b).map(|(row, bi)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - bi).collect()
    }

    /// `Mᵀ(Mx − b)`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = self.residual(x);
        let mut g = vec![0.0; self.dim()];
        for (row, ri) in self.m.iter().zip(&r) {
            for (gj, a) in g.iter_mut().zip(row) {
                *gj += a * ri;
            }
        }
        g
    }

    /// `K = max_{x ∈ Δ} ‖∇ℓ(x)‖`.
    pub fn gradient_bound(&self) -> f64 {
        self.k
    }

    /// `max_{x ∈ Δ} ‖∇ℓ(x)‖_∞`.
    pub fn loss_bound(&self) -> f64 {
        self.loss_bound
    }

    /// Lipschitz constant of the gradient, the operator norm of `MᵀM` from
    /// the dual norm into the primal norm.
    pub fn gradient_lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn gram(&self) -> DMatrix<f64> {
        let rows = self.m.len();
        let n = self.dim();
        let m = DMatrix::from_fn(rows, n, |i, j| self.m[i][j]);
        m.transpose() * m
    }

    fn operator_norm(&self) -> f64 {
        let g = self.gram();
        match (self.norms.primal, self.norms.dual) {
            (Norm::Lp(p), Norm::Lp(q)) if p == 2.0 && q == 2.0 => {
                g.symmetric_eigen().eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }
            // from 1 into ∞: the largest entry
            (Norm::LInf, Norm::L1) => g.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            // ‖Gd‖ ≤ ‖Gd‖₁ ≤ Σ|g_ij| ‖d‖_∞ ≤ Σ|g_ij| ‖d‖ for any pair
            _ => g.iter().map(|v| v.abs()).sum(),
        }
    }
}

/// `C̃ = (L + ‖u‖ D L + K)²`.
pub fn path_length_constant(lipschitz: f64, u_norm: f64, diameter: f64, gradient_bound: f64) -> f64 {
    let c = lipschitz + u_norm * diameter * lipschitz + gradient_bound;
    c * c
}
