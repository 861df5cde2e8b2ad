//! Tolerance-aware subspace arithmetic: numerical rank, kernels, ranges,
//! direct sums, sums and intersections, and common complements.
//!
//! A [`Subspace`] always stores an orthonormal basis. The zero subspace is an
//! ordinary value with a basis of zero columns.

use crate::error::{Result, StrataError};
use crate::linalg::{self, Mat};
use crate::scalar::Scalar;

/// Largest principal angle (radians) at which two subspaces count as equal.
pub const SUBSPACE_ANGLE_TOL: f64 = 1e-8;

/// Numerical thresholds for rank and direct-sum decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig<T> {
    /// Relative singular value cutoff.
    pub rank_rel_tol: T,
    /// Largest condition number of a concatenated basis accepted as a direct sum.
    pub membership_cond_max: T,
}

impl<T: Scalar> Default for ToleranceConfig<T> {
    fn default() -> Self {
        Self {
            rank_rel_tol: T::lit(1e-10),
            membership_cond_max: T::lit(1e8),
        }
    }
}

impl<T: Scalar> ToleranceConfig<T> {
    pub fn new(rank_rel_tol: T, membership_cond_max: T) -> Result<Self> {
        if !(rank_rel_tol > T::zero() && rank_rel_tol < T::one()) {
            return Err(StrataError::Precondition(format!(
                "rank_rel_tol must lie in (0, 1), got {}",
                rank_rel_tol.as_f64()
            )));
        }
        if !(membership_cond_max > T::one()) {
            return Err(StrataError::Precondition(format!(
                "membership_cond_max must exceed 1, got {}",
                membership_cond_max.as_f64()
            )));
        }
        Ok(Self { rank_rel_tol, membership_cond_max })
    }

    pub fn with_rank_tol(self, rank_rel_tol: T) -> Result<Self> {
        Self::new(rank_rel_tol, self.membership_cond_max)
    }
}

/// A linear subspace of `R^ambient_dim` held as an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<T: Scalar> {
    ambient_dim: usize,
    basis: Mat<T>,
}

impl<T: Scalar> Subspace<T> {
    /// Builds the span of the columns of `basis`, which must be linearly
    /// independent. The stored basis is the Gram-Schmidt orthonormalization
    /// of the given columns, in order.
    pub fn new(basis: Mat<T>, tol: &ToleranceConfig<T>) -> Result<Self> {
        let (n, d) = basis.shape();
        if n == 0 {
            return Err(StrataError::Precondition("ambient dimension must be positive".into()));
        }
        if d > n {
            return Err(StrataError::DimensionMismatch { left: d, right: n });
        }
        if d == 0 {
            return Ok(Self::zero(n));
        }
        let sigma = linalg::singular_values(&basis);
        let smax = sigma[0];
        let smin = sigma[d - 1];
        if smax == T::zero() || smin <= tol.rank_rel_tol * smax {
            let ratio = if smax == T::zero() { 0.0 } else { (smin / smax).as_f64() };
            return Err(StrataError::DependentBasis { ratio });
        }
        let q = linalg::gram_schmidt(&basis, T::eps())
            .ok_or(StrataError::DependentBasis { ratio: (smin / smax).as_f64() })?;
        Ok(Self { ambient_dim: n, basis: q })
    }

    /// Span of columns already known to be orthonormal.
    pub(crate) fn from_orthonormal(basis: Mat<T>) -> Self {
        Self { ambient_dim: basis.nrows(), basis }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: Mat::zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: Mat::identity(ambient_dim, ambient_dim) }
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Self {
        let mut b = Mat::zeros(ambient_dim, indices.len());
        for (j, &i) in indices.iter().enumerate() {
            b[(i, j)] = T::one();
        }
        Self::from_orthonormal(b)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Orthonormal basis, `ambient_dim x dim`.
    pub fn basis(&self) -> &Mat<T> {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn orthogonal_projector(&self) -> Mat<T> {
        &self.basis * self.basis.transpose()
    }

    /// Distance of `v` from the subspace.
    pub fn residual(&self, v: &Mat<T>) -> T {
        let p = v - &self.basis * (self.basis.transpose() * v);
        p.norm()
    }

    /// Principal angles to `other`, ascending.
    pub fn principal_angles(&self, other: &Self) -> Result<Vec<T>> {
        check_ambient(self, other)?;
        let (big, small) = if self.dim() >= other.dim() { (self, other) } else { (other, self) };
        if small.dim() == 0 {
            return Ok(Vec::new());
        }
        let c = big.basis.transpose() * &small.basis;
        let cos = linalg::singular_values(&c);
        let s = &small.basis - &big.basis * &c;
        let mut sin = linalg::singular_values(&s);
        sin.reverse();
        Ok(cos
            .iter()
            .zip(sin.iter())
            .map(|(&c, &s)| s.atan2(c))
            .collect())
    }

    /// Equal dimension and every principal angle below `angle_tol`.
    pub fn approx_eq(&self, other: &Self, angle_tol: T) -> bool {
        if self.ambient_dim != other.ambient_dim || self.dim() != other.dim() {
            return false;
        }
        match self.principal_angles(other) {
            Ok(a) => a.iter().all(|&x| x < angle_tol),
            Err(_) => false,
        }
    }

    /// [`Self::approx_eq`] at [`SUBSPACE_ANGLE_TOL`].
    pub fn same_as(&self, other: &Self) -> bool {
        self.approx_eq(other, T::lit(SUBSPACE_ANGLE_TOL))
    }

    /// Largest principal angle, or `pi/2` when the dimensions differ.
    pub fn max_angle(&self, other: &Self) -> T {
        if self.dim() != other.dim() || self.ambient_dim != other.ambient_dim {
            return T::frac_pi_2();
        }
        self.principal_angles(other)
            .ok()
            .and_then(|a| a.last().copied())
            .unwrap_or(T::zero())
    }
}

fn check_ambient<T: Scalar>(a: &Subspace<T>, b: &Subspace<T>) -> Result<()> {
    if a.ambient_dim != b.ambient_dim {
        return Err(StrataError::AmbientMismatch { left: a.ambient_dim, right: b.ambient_dim });
    }
    Ok(())
}

/// Count of singular values above `rank_rel_tol * sigma_max`.
pub fn rank_of<T: Scalar>(a: &Mat<T>, tol: &ToleranceConfig<T>) -> usize {
    linalg::numerical_rank(&linalg::singular_values(a), tol.rank_rel_tol)
}

/// Numerical null space of `a`.
pub fn kernel_basis<T: Scalar>(a: &Mat<T>, tol: &ToleranceConfig<T>) -> Subspace<T> {
    let (sigma, v) = linalg::full_right(a);
    let r = linalg::numerical_rank(&sigma, tol.rank_rel_tol);
    let n = a.ncols();
    Subspace::from_orthonormal(v.columns(r, n - r).into_owned())
}

/// Numerical column space of `a`.
pub fn range_basis<T: Scalar>(a: &Mat<T>, tol: &ToleranceConfig<T>) -> Subspace<T> {
    let d = linalg::svd(a);
    let r = linalg::numerical_rank(&d.sigma, tol.rank_rel_tol);
    Subspace::from_orthonormal(d.u.columns(0, r).into_owned())
}

/// Outcome of a direct-sum test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectSumReport<T> {
    pub direct: bool,
    pub dim_sum: usize,
    pub ambient_dim: usize,
    /// Condition number of the concatenated orthonormal bases (infinite when singular).
    pub condition: T,
}

impl<T: Scalar> DirectSumReport<T> {
    pub fn into_result(self) -> Result<()> {
        if self.direct {
            Ok(())
        } else {
            Err(StrataError::NotDirectSum {
                dim_sum: self.dim_sum,
                ambient: self.ambient_dim,
                condition: self.condition.as_f64(),
            })
        }
    }
}

/// Whether `parts` split the ambient space as a direct sum.
pub fn is_direct_sum<T: Scalar>(
    parts: &[&Subspace<T>],
    tol: &ToleranceConfig<T>,
) -> Result<DirectSumReport<T>> {
    let n = match parts.first() {
        Some(p) => p.ambient_dim,
        None => return Err(StrataError::Precondition("no subspaces given".into())),
    };
    for p in parts {
        if p.ambient_dim != n {
            return Err(StrataError::AmbientMismatch { left: n, right: p.ambient_dim });
        }
    }
    let dim_sum: usize = parts.iter().map(|p| p.dim()).sum();
    let cat = linalg::hcat_all(n, &parts.iter().map(|p| &p.basis).collect::<Vec<_>>());
    let sigma = linalg::singular_values(&cat);
    let condition = match (sigma.first(), sigma.last()) {
        (None, _) | (_, None) => T::one(),
        (Some(&hi), Some(&lo)) => {
            if lo > T::zero() {
                hi / lo
            } else {
                T::max_value().unwrap_or(hi)
            }
        }
    };
    let direct = dim_sum == n && condition <= tol.membership_cond_max;
    Ok(DirectSumReport { direct, dim_sum, ambient_dim: n, condition })
}

/// Orthogonal complement, with a deterministic basis: standard basis vectors
/// are orthogonalized greedily by largest residual.
pub fn orthogonal_complement<T: Scalar>(s: &Subspace<T>) -> Subspace<T> {
    Subspace::from_orthonormal(linalg::complete_basis(&s.basis))
}

/// `(E1 + E2, E1 ∩ E2)`, both decided from one SVD of `[B1 B2]` so that
/// `dim E1 + dim E2 = dim(sum) + dim(intersection)` holds exactly.
pub fn sum_and_intersection<T: Scalar>(
    e1: &Subspace<T>,
    e2: &Subspace<T>,
    tol: &ToleranceConfig<T>,
) -> Result<(Subspace<T>, Subspace<T>)> {
    check_ambient(e1, e2)?;
    let n = e1.ambient_dim;
    let (d1, d2) = (e1.dim(), e2.dim());
    if d1 + d2 == 0 {
        return Ok((Subspace::zero(n), Subspace::zero(n)));
    }
    let cat = linalg::hcat(&e1.basis, &e2.basis);
    let d = linalg::svd(&cat);
    let r = linalg::numerical_rank(&d.sigma, tol.rank_rel_tol);
    let sum = Subspace::from_orthonormal(d.u.columns(0, r).into_owned());

    let (_, v) = linalg::full_right(&cat);
    let kernel = v.columns(r, d1 + d2 - r);
    let inter_raw = &e1.basis * kernel.rows(0, d1);
    let inter = if inter_raw.ncols() == 0 {
        Subspace::zero(n)
    } else {
        let q = linalg::gram_schmidt(&inter_raw, T::eps())
            .ok_or(StrataError::Decomposition("intersection basis collapsed"))?;
        Subspace::from_orthonormal(q)
    };
    Ok((sum, inter))
}

/// A subspace complementing both `e1` and `e2` (which must have equal
/// dimension).
///
/// Each `E_i` is split as `E_i* ⊕ (E1 ∩ E2)`; the bases of `E1*` and `E2*`
/// are taken as matched principal vectors, the invertible map between them
/// sends the i-th basis vector of `E1*` to the i-th of `E2*`, and the result
/// is `{x + αx} ⊕ (E1 + E2)^⊥`.
pub fn common_complement<T: Scalar>(
    e1: &Subspace<T>,
    e2: &Subspace<T>,
    tol: &ToleranceConfig<T>,
) -> Result<Subspace<T>> {
    check_ambient(e1, e2)?;
    if e1.dim() != e2.dim() {
        return Err(StrataError::DimensionMismatch { left: e1.dim(), right: e2.dim() });
    }
    let n = e1.ambient_dim;
    let d = e1.dim();
    let (sum, inter) = sum_and_intersection(e1, e2, tol)?;
    let h1 = orthogonal_complement(&sum);
    let k_int = inter.dim();

    let star = d - k_int;
    let mut h = Mat::zeros(n, star);
    if star > 0 {
        let w = e1.basis.transpose() * &e2.basis;
        let dw = linalg::svd(&w);
        let x = &e1.basis * &dw.u;
        let y = &e2.basis * dw.v_t.transpose();
        for (j, i) in (k_int..d).enumerate() {
            let mut xi = x.column(i).into_owned();
            let mut yi = y.column(i).into_owned();
            orient(&mut xi);
            if xi.dot(&yi) < T::zero() {
                yi = -yi;
            }
            if xi.dot(&yi).abs() <= T::eps() {
                orient(&mut yi);
            }
            h.set_column(j, &(xi + yi));
        }
    }
    let raw = linalg::hcat(&h, &h1.basis);
    if raw.ncols() == 0 {
        return Ok(Subspace::zero(n));
    }
    let q = linalg::gram_schmidt(&raw, T::eps())
        .ok_or(StrataError::Decomposition("common complement basis collapsed"))?;
    Ok(Subspace::from_orthonormal(q))
}

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
fn orient<T: Scalar>(v: &mut linalg::Vector<T>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() * T::lit(1.0 + 1e-12) {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < T::zero() {
        v.neg_mut();
    }
}
