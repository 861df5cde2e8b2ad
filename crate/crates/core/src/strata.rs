//! Tangent spaces of the fixed-rank strata.
//!
//! At a rank-`k` point `X` (an `n × m` matrix) the tangent space is
//! `{V : V·N(X) ⊂ R(X)}`. In adapted orthonormal bases `U = [U1 U2]`
//! (range, its complement) and `W = [W1 W2]` (row space, kernel) the
//! constraint reads `U2ᵀ V W2 = 0`, so the rank-one matrices `u_i w_jᵀ` with
//! `i < k` or `j < k` form an orthonormal basis.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StrataError};
use crate::io::{matrix_format, matrix_list_format};
use crate::linalg::{self, Mat};
use crate::scalar::Scalar;
use crate::subspace::{kernel_basis, orthogonal_complement, range_basis, Subspace, ToleranceConfig};

/// Absolute-relative tolerance of the tangency test.
pub const TANGENT_TOL: f64 = 1e-9;

/// `(m + n - k)·k`, the dimension of the rank-`k` stratum of `n × m` matrices.
pub fn dim_fk(m: usize, n: usize, k: usize) -> Result<usize> {
    if k > m.min(n) {
        return Err(StrataError::Precondition(format!("rank {k} exceeds min({m}, {n})")));
    }
    Ok((m + n - k) * k)
}

/// A matrix together with its rank, kernel and range.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumPoint<T: Scalar> {
    op: Mat<T>,
    k: usize,
    kernel: Subspace<T>,
    range: Subspace<T>,
}

impl<T: Scalar> StratumPoint<T> {
    pub fn new(op: Mat<T>, tol: &ToleranceConfig<T>) -> Self {
        let range = range_basis(&op, tol);
        let kernel = kernel_basis(&op, tol);
        Self { k: range.dim(), op, kernel, range }
    }

    pub fn op(&self) -> &Mat<T> {
        &self.op
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn kernel(&self) -> &Subspace<T> {
        &self.kernel
    }

    pub fn range(&self) -> &Subspace<T> {
        &self.range
    }

    /// `‖P⊥ V b‖` maximized over the kernel basis, with `P⊥` the orthogonal
    /// projector onto the complement of the range.
    pub fn tangent_residual(&self, v: &Mat<T>) -> Result<T> {
        if v.shape() != self.op.shape() {
            return Err(StrataError::ShapeMismatch { left: self.op.shape(), right: v.shape() });
        }
        if self.kernel.is_zero() {
            return Ok(T::zero());
        }
        let vb = v * self.kernel.basis();
        let q = self.range.basis();
        let perp = &vb - q * (q.transpose() * &vb);
        Ok((0..perp.ncols()).map(|j| perp.column(j).norm()).fold(T::zero(), |a, b| a.max(b)))
    }

    pub fn is_tangent(&self, v: &Mat<T>) -> Result<bool> {
        let r = self.tangent_residual(v)?;
        Ok(r <= T::lit(TANGENT_TOL) * (T::one() + linalg::max_abs(v)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
struct TangentRecord<T: Scalar> {
    #[serde(with = "matrix_format")]
    at: Mat<T>,
    k: usize,
    dim: usize,
    #[serde(with = "matrix_list_format")]
    basis: Vec<Mat<T>>,
}

/// A Frobenius-orthonormal basis of the tangent space at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    into = "TangentRecord<T>",
    try_from = "TangentRecord<T>",
    bound(serialize = "T: Scalar", deserialize = "T: Scalar")
)]
pub struct TangentBasis<T: Scalar> {
    at: StratumPoint<T>,
    basis: Vec<Mat<T>>,
}

impl<T: Scalar> From<TangentBasis<T>> for TangentRecord<T> {
    fn from(b: TangentBasis<T>) -> Self {
        Self { k: b.at.k, dim: b.basis.len(), at: b.at.op, basis: b.basis }
    }
}

impl<T: Scalar> TryFrom<TangentRecord<T>> for TangentBasis<T> {
    type Error = StrataError;

    fn try_from(r: TangentRecord<T>) -> Result<Self> {
        let at = StratumPoint::new(r.at, &ToleranceConfig::default());
        if at.k != r.k || r.dim != r.basis.len() {
            return Err(StrataError::InvalidRecord("tangent basis header disagrees with its contents".into()));
        }
        for v in &r.basis {
            if !at.is_tangent(v)? {
                return Err(StrataError::InvalidRecord("basis element is not tangent".into()));
            }
        }
        Ok(Self { at, basis: r.basis })
    }
}

impl<T: Scalar> TangentBasis<T> {
    pub fn at(&self) -> &StratumPoint<T> {
        &self.at
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat<T>] {
        &self.basis
    }

    /// Orthogonal projection of `v` onto the tangent space.
    pub fn project(&self, v: &Mat<T>) -> Mat<T> {
        let (r, c) = self.at.op.shape();
        self.basis
            .iter()
            .fold(Mat::zeros(r, c), |acc, e| acc + e * e.dot(v))
    }

    /// Number of entries that are nonzero in some basis element.
    pub fn support_size(&self, threshold: T) -> usize {
        let (r, c) = self.at.op.shape();
        (0..r)
            .flat_map(|i| (0..c).map(move |j| (i, j)))
            .filter(|&(i, j)| self.basis.iter().any(|e| e[(i, j)].abs() > threshold))
            .count()
    }
}

/// The adapted rank-one basis of the tangent space at `x`.
pub fn tangent_basis<T: Scalar>(x: &StratumPoint<T>) -> TangentBasis<T> {
    let k = x.k;
    let u = linalg::hcat(x.range.basis(), orthogonal_complement(&x.range).basis());
    let row = orthogonal_complement(&x.kernel);
    let w = linalg::hcat(row.basis(), x.kernel.basis());
    let (n, m) = x.op.shape();
    let mut basis = Vec::with_capacity((m + n - k) * k);
    for i in 0..n {
        for j in 0..m {
            if i < k || j < k {
                basis.push(u.column(i) * w.column(j).transpose());
            }
        }
    }
    TangentBasis { at: x.clone(), basis }
}

/// Outcome of [`tangency_order`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tangency {
    /// `σ_{k+1}(X + tV)` stays at machine noise over the whole grid.
    Exact,
    /// Fitted exponent of `σ_{k+1}(X + tV) ~ t^p`.
    Slope(f64),
}

impl Tangency {
    pub fn slope(self) -> Option<f64> {
        match self {
            Tangency::Exact => None,
            Tangency::Slope(s) => Some(s),
        }
    }
}

/// Thirteen points, four per decade, from `1e-1` down to `1e-4`.
pub fn default_tangency_grid() -> Vec<f64> {
    (0..13).map(|j| 10f64.powf(-1.0 - j as f64 / 4.0)).collect()
}

/// Least-squares slope of `log σ_{k+1}(X + tV)` against `log t`, over the
/// grid points where `σ_{k+1}` clears `1e3·ε·σ_1`.
pub fn tangency_order<T: Scalar>(x: &StratumPoint<T>, v: &Mat<T>, grid: &[f64]) -> Result<Tangency> {
    if v.shape() != x.op.shape() {
        return Err(StrataError::ShapeMismatch { left: x.op.shape(), right: v.shape() });
    }
    if grid.len() < 2 {
        return Err(StrataError::DegenerateGrid(format!("{} grid points", grid.len())));
    }
    if grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(StrataError::DegenerateGrid("grid points must be positive".into()));
    }
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(0.0, f64::max);
    if hi / lo < 100.0 * (1.0 - 1e-9) {
        return Err(StrataError::DegenerateGrid(format!("grid spans {:.3} decades, need 2", (hi / lo).log10())));
    }
    let k = x.k;
    if k >= x.op.nrows().min(x.op.ncols()) {
        return Ok(Tangency::Exact);
    }
    let mut pts = Vec::new();
    for &t in grid {
        let s = linalg::singular_values(&(x.op.clone() + v * T::lit(t)));
        let floor = T::lit(1e3) * T::eps() * s[0];
        if s[k] > floor {
            pts.push((t.ln(), s[k].as_f64().ln()));
        }
    }
    match pts.len() {
        0 => Ok(Tangency::Exact),
        1 => Err(StrataError::DegenerateGrid("only one grid point above the noise floor".into())),
        len => {
            let n = len as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            if sxx == 0.0 {
                return Err(StrataError::DegenerateGrid("usable grid points coincide".into()));
            }
            Ok(Tangency::Slope(sxy / sxx))
        }
    }
}
