//! One-sided projection paths.
//!
//! Left: with `F = R(T0) ⊕ N = F* ⊕ N`, the path `(P + tαP)·T0` moves the
//! range through the graphs `F_t = {y + tαy}` while the kernel stays `N(T0)`.
//! Right: with `E = N(T0) ⊕ R0 = E* ⊕ R0`, the path `T0·(Q - tαP)` moves the
//! kernel through `N_t = {x + tαx}` while the range stays `R(T0)`.

use super::{OperatorPath, PathSegment};
use crate::error::{Result, StrataError};
use crate::linalg::Mat;
use crate::projection::{alpha_from_complements, oblique_projection};
use crate::scalar::Scalar;
use crate::subspace::{is_direct_sum, kernel_basis, range_basis, Subspace, ToleranceConfig};

/// Path from `P^N_{F*}·T0` (at `t = 0`) to `T0` (at `t = 1`).
pub fn left_project_path<T: Scalar>(
    t0: &Mat<T>,
    fstar: &Subspace<T>,
    n: &Subspace<T>,
    tol: &ToleranceConfig<T>,
) -> Result<OperatorPath<T>> {
    if n.is_zero() {
        return Err(StrataError::Precondition("complement N must be nonzero".into()));
    }
    if fstar.ambient_dim() != t0.nrows() {
        return Err(StrataError::AmbientMismatch { left: t0.nrows(), right: fstar.ambient_dim() });
    }
    let range = range_basis(t0, tol);
    is_direct_sum(&[&range, n], tol)?.into_result()?;
    is_direct_sum(&[fstar, n], tol)?.into_result()?;
    if range.same_as(fstar) {
        return Ok(OperatorPath::constant(t0.clone()));
    }
    let alpha = alpha_from_complements(&range, fstar, n, tol)?;
    let p = oblique_projection(fstar, n, tol)?.into_projector();
    let alpha_p = alpha.ambient_operator() * &p;
    let start = &p * t0;
    let seg = PathSegment::left_affine(p, alpha_p, t0.clone())?;
    OperatorPath::new(vec![seg])?.with_endpoints(start, t0.clone())
}

/// Path from `T0·P^{E*}_{R0}` (at `t = 0`) to `T0` (at `t = 1`).
pub fn right_project_path<T: Scalar>(
    t0: &Mat<T>,
    estar: &Subspace<T>,
    r0: &Subspace<T>,
    tol: &ToleranceConfig<T>,
) -> Result<OperatorPath<T>> {
    if r0.is_zero() {
        return Err(StrataError::Precondition("complement R0 must be nonzero".into()));
    }
    if estar.ambient_dim() != t0.ncols() {
        return Err(StrataError::AmbientMismatch { left: t0.ncols(), right: estar.ambient_dim() });
    }
    let kernel = kernel_basis(t0, tol);
    is_direct_sum(&[&kernel, r0], tol)?.into_result()?;
    is_direct_sum(&[estar, r0], tol)?.into_result()?;
    if kernel.same_as(estar) {
        return Ok(OperatorPath::constant(t0.clone()));
    }
    let alpha = alpha_from_complements(&kernel, estar, r0, tol)?;
    let proj = oblique_projection(estar, r0, tol)?;
    let q = proj.complementary_projector();
    let alpha_p = alpha.ambient_operator() * proj.projector();
    let start = t0 * &q;
    let seg = PathSegment::right_affine(t0.clone(), q, -alpha_p)?;
    OperatorPath::new(vec![seg])?.with_endpoints(start, t0.clone())
}
