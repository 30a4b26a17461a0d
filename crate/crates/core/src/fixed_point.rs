//! Stationary points of column-stochastic matrices.
//!
//! For `n ≤ 64` the recurrent classes of the chain are found with bitset
//! reachability and each class is solved exactly by GTH elimination
//! (subtraction-free, so the residual stays at rounding level even for
//! nearly decomposable chains). When several closed classes exist the
//! uniform mixture of their stationary distributions is returned, which for
//! `Q = I` is the uniform distribution. Larger matrices use power iteration
//! on the lazy chain `(I + Q) / 2`.

use crate::error::{Error, Result};
use crate::vector::{check_finite, RealVec};

/// Required `‖Qx − x‖₁` of a returned fixed point.
pub const FIXED_POINT_RESIDUAL: f64 = 1e-10;
pub const DIRECT_SOLVE_MAX_DIM: usize = 64;
pub const POWER_ITERATION_CAP: usize = 100_000;
const STOCHASTIC_TOLERANCE: f64 = 1e-9;

/// Dense row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        check_finite(&data)?;
        Ok(SquareMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// `Q x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        self.data.chunks(self.n).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// `Qᵀ y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (row, yi) in self.data.chunks(self.n).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }

    /// `self += w · other`.
    pub fn add_scaled(&mut self, other: &SquareMatrix, w: f64) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += w * b;
        }
    }

    pub fn is_column_stochastic(&self, tol: f64) -> bool {
        if self.data.iter().any(|v| !(*v >= -tol)) {
            return false;
        }
        (0..self.n).all(|j| ((0..self.n).map(|i| self.get(i, j)).sum::<f64>() - 1.0).abs() <= tol)
    }
}

/// `‖Qx − x‖₁`.
pub fn residual(q: &SquareMatrix, x: &[f64]) -> f64 {
    q.apply(x).iter().zip(x).map(|(a, b)| (a - b).abs()).sum()
}

/// A distribution `x` with `Qx = x` for a column-stochastic `Q`.
pub fn fixed_point(q: &SquareMatrix) -> Result<RealVec> {
    if q.n == 0 {
        return Err(Error::Empty);
    }
    if !q.is_column_stochastic(STOCHASTIC_TOLERANCE) {
        return Err(Error::invalid("fixed point requires a column-stochastic matrix"));
    }
    let x = if let Some(col) = common_column(q) {
        col
    } else if q.n <= DIRECT_SOLVE_MAX_DIM {
        match solve_by_classes(q) {
            Some(x) => x,
            None => lazy_power_iteration(q)?,
        }
    } else {
        lazy_power_iteration(q)?
    };
    let r = residual(q, &x);
    if !(r <= FIXED_POINT_RESIDUAL) {
        return Err(Error::NonConvergence { residual: r });
    }
    Ok(RealVec::trusted(x))
}

/// When every column of `Q` is the same vector `w`, `Qx = w` for every
/// distribution `x`, so `w` itself is the fixed point.
fn common_column(q: &SquareMatrix) -> Option<Vec<f64>> {
    let n = q.n;
    let first: Vec<f64> = (0..n).map(|i| q.get(i, 0)).collect();
    let same = (1..n).all(|j| (0..n).all(|i| q.get(i, j) == first[i]));
    same.then_some(first)
}

/// Transitions this small are dropped before the class decomposition. They
/// move at most `n · 1e-18` of mass, far below the residual tolerance, and
/// keeping them lets GTH pivots underflow to zero.
const NEGLIGIBLE_TRANSITION: f64 = 1e-18;

fn solve_by_classes(q: &SquareMatrix) -> Option<Vec<f64>> {
    let n = q.n;
    let mut cleaned = q.clone();
    for v in cleaned.data.iter_mut() {
        if *v < NEGLIGIBLE_TRANSITION {
            *v = 0.0;
        }
    }
    let q = &cleaned;
    // transition i -> j has probability Q[j][i]
    let mut reach = vec![0u64; n];
    for (i, r) in reach.iter_mut().enumerate() {
        *r |= 1 << i;
        for j in 0..n {
            if q.get(j, i) > 0.0 {
                *r |= 1 << j;
            }
        }
    }
    for k in 0..n {
        let rk = reach[k];
        for r in reach.iter_mut() {
            if *r & (1 << k) != 0 {
                *r |= rk;
            }
        }
    }
    let mut classes: Vec<u64> = Vec::new();
    for i in 0..n {
        let closed = (0..n).all(|j| reach[i] & (1 << j) == 0 || reach[j] & (1 << i) != 0);
        if closed && !classes.contains(&reach[i]) {
            classes.push(reach[i]);
        }
    }

    let mut x = vec![0.0; n];
    let weight = 1.0 / classes.len() as f64;
    for class in classes {
        let members: Vec<usize> = (0..n).filter(|j| class & (1 << j) != 0).collect();
        let pi = gth(q, &members);
        for (&m, p) in members.iter().zip(pi) {
            x[m] += weight * p;
        }
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Stationary distribution of the chain restricted to an irreducible closed
/// class, by Grassmann–Taksar–Heyman elimination.
fn gth(q: &SquareMatrix, members: &[usize]) -> Vec<f64> {
    let m = members.len();
    // row-stochastic restriction: a[i][j] = P(members[i] -> members[j])
    let mut a: Vec<f64> = Vec::with_capacity(m * m);
    for &i in members {
        for &j in members {
            a.push(q.get(j, i));
        }
    }
    for k in (1..m).rev() {
        let s: f64 = a[k * m..k * m + k].iter().sum();
        for i in 0..k {
            a[i * m + k] /= s;
        }
        for i in 0..k {
            let aik = a[i * m + k];
            if aik != 0.0 {
                for j in 0..k {
                    a[i * m + j] += aik * a[k * m + j];
                }
            }
        }
    }
    let mut pi = vec![0.0; m];
    pi[0] = 1.0;
    for j in 1..m {
        pi[j] = (0..j).map(|i| pi[i] * a[i * m + j]).sum();
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    pi
}

fn lazy_power_iteration(q: &SquareMatrix) -> Result<Vec<f64>> {
    let n = q.n;
    let mut x = vec![1.0 / n as f64; n];
    let mut r = f64::INFINITY;
    for _ in 0..POWER_ITERATION_CAP {
        let qx = q.apply(&x);
        r = qx.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        if r <= FIXED_POINT_RESIDUAL * 0.5 {
            return Ok(x);
        }
        for (xi, qi) in x.iter_mut().zip(&qx) {
            *xi = 0.5 * (*xi + qi);
        }
        let total: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= total);
    }
    Err(Error::NonConvergence { residual: r })
}
