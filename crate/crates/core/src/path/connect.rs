//! Paths inside `F_k` (fixed rank) and `Φ_{m,n}` (fixed kernel dimension and
//! range codimension).
//!
//! Both reduce the two endpoints to operators sharing a range and a kernel,
//! then join those through the invertible group on the common range, and
//! absorb a leftover determinant sign with one rotation flip.

use super::gl::gl_sandwiched;
use super::{preferred_side, right_project_path, left_project_path, FlipSide, OperatorPath, PathSegment};
use crate::error::{Result, StrataError};
use crate::linalg::{self, Mat};
use crate::scalar::Scalar;
use crate::subspace::{
    common_complement, kernel_basis, orthogonal_complement, range_basis, rank_of, Subspace, ToleranceConfig,
};

/// Joins `from` to `to`, two rank-`k` operators of the form `Y G V` with the
/// same `Y` (orthonormal columns, the common range) and `V` (orthonormal rows,
/// the common row space).
pub(crate) fn bridge<T: Scalar>(
    from: &Mat<T>,
    to: &Mat<T>,
    y: &Mat<T>,
    v: &Mat<T>,
    tol: &ToleranceConfig<T>,
) -> Result<OperatorPath<T>> {
    let k = y.ncols();
    if k == 0 {
        return Ok(OperatorPath::constant(to.clone()));
    }
    let g_from = y.transpose() * from * v.transpose();
    let c = y.transpose() * to * v.transpose();
    let c_inv = linalg::inverse(&c).ok_or(StrataError::Singular { ratio: 0.0 })?;
    let side = preferred_side(from.shape(), k);
    let (gl, sign) = match side {
        Some(FlipSide::Kernel) => {
            let b = &c_inv * &g_from;
            gl_sandwiched(&b, Some(&(y * &c)), Some(v), tol)?
        }
        _ => {
            let a = &g_from * &c_inv;
            gl_sandwiched(&a, Some(y), Some(&(&c * v)), tol)?
        }
    };
    let gl_end = gl.declared_end().clone();
    let path = gl.with_endpoints(from.clone(), gl_end)?;
    if sign > 0 {
        return path_to(path, to);
    }
    let side = side.ok_or(StrataError::DisconnectedComponents { dim: k })?;
    let base = path.declared_end().clone();
    let (u, outside) = match side {
        FlipSide::Range => (y.columns(0, 1).into_owned(), Subspace::from_orthonormal(y.clone())),
        FlipSide::Kernel => (v.rows(0, 1).transpose(), Subspace::from_orthonormal(v.transpose())),
    };
    let w = orthogonal_complement(&outside).basis().columns(0, 1).into_owned();
    let flip = PathSegment::rotation_flip(base, u, w, side)?;
    let tail = OperatorPath::new(vec![flip])?;
    let joined = path.then(tail)?;
    path_to(joined, to)
}

/// Declares `to` as the end after checking the path really gets there.
fn path_to<T: Scalar>(p: OperatorPath<T>, to: &Mat<T>) -> Result<OperatorPath<T>> {
    let end = p.segments().last().expect("nonempty").end();
    let gap = linalg::max_abs_diff(&end, to);
    if gap > T::lit(1e-9) * (T::one() + linalg::max_abs(to)) {
        return Err(StrataError::Inconsistent { what: "bridge endpoint", discrepancy: gap.as_f64() });
    }
    let start = p.declared_start().clone();
    p.with_endpoints(start, to.clone())
}

fn same_shape<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(StrataError::ShapeMismatch { left: a.shape(), right: b.shape() });
    }
    Ok(())
}

/// True when the two matrices agree to rounding.
fn coincide<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> bool {
    linalg::max_abs_diff(a, b) <= T::lit(16.0) * T::eps() * (T::one() + linalg::max_abs(a))
}

/// Row space of `a` as a subspace of the domain.
fn row_space<T: Scalar>(a: &Mat<T>, tol: &ToleranceConfig<T>) -> Subspace<T> {
    range_basis(&a.transpose(), tol)
}

/// A path from `t2` (at `t = 0`) to `t1` (at `t = 1`) through operators of
/// the common rank `k`.
pub fn connect_fk<T: Scalar>(t1: &Mat<T>, t2: &Mat<T>, tol: &ToleranceConfig<T>) -> Result<OperatorPath<T>> {
    same_shape(t1, t2)?;
    let k1 = rank_of(t1, tol);
    let k2 = rank_of(t2, tol);
    if k1 != k2 {
        return Err(StrataError::RankMismatch { left: k1, right: k2 });
    }
    if k1 == 0 || coincide(t1, t2) {
        return OperatorPath::constant(t2.clone()).with_endpoints(t2.clone(), t1.clone());
    }
    let r1 = row_space(t1, tol);
    let r2 = row_space(t2, tol);
    let n0 = common_complement(&r1, &r2, tol)?;
    let f1 = range_basis(t1, tol);
    let f2 = range_basis(t2, tol);
    let nplus = common_complement(&f1, &f2, tol)?;

    // T2 -> L2 = T2 P^{N0}_{R2}: the kernel moves to N0.
    let stage_a = if n0.is_zero() {
        OperatorPath::constant(t2.clone())
    } else {
        right_project_path(t2, &n0, &r2, tol)?.reversed()
    };
    let l2 = stage_a.declared_end().clone();

    // L2 -> M = P^{N+}_{R(T1)} L2: the range moves to R(T1).
    let stage_b = if nplus.is_zero() {
        OperatorPath::constant(l2.clone())
    } else {
        left_project_path(&l2, &f1, &nplus, tol)?.reversed()
    };
    let m = stage_b.declared_end().clone();

    // L1 -> T1, used at the end.
    let stage_e = if n0.is_zero() {
        OperatorPath::constant(t1.clone())
    } else {
        right_project_path(t1, &n0, &r1, tol)?
    };
    let l1 = stage_e.declared_start().clone();

    let v = orthogonal_complement(&n0).basis().transpose();
    let stage_cd = bridge(&m, &l1, f1.basis(), &v, tol)?;

    OperatorPath::concat(vec![stage_a, stage_b, stage_cd, stage_e])?.with_endpoints(t2.clone(), t1.clone())
}

/// Kernel dimension and range codimension of `a`.
pub fn phi_indices<T: Scalar>(a: &Mat<T>, tol: &ToleranceConfig<T>) -> (usize, usize) {
    let k = rank_of(a, tol);
    (a.ncols() - k, a.nrows() - k)
}

/// A path from `t2` (at `t = 0`) to `t1` (at `t = 1`) inside `Φ_{m_, n_}`.
pub fn connect_phi<T: Scalar>(
    t1: &Mat<T>,
    t2: &Mat<T>,
    m_: usize,
    n_: usize,
    tol: &ToleranceConfig<T>,
) -> Result<OperatorPath<T>> {
    if m_ == 0 && n_ == 0 {
        return Err(StrataError::InvertibleStratum);
    }
    same_shape(t1, t2)?;
    for t in [t1, t2] {
        let (m, n) = phi_indices(t, tol);
        if (m, n) != (m_, n_) {
            return Err(StrataError::Precondition(format!(
                "operator has kernel dimension {m} and range codimension {n}, expected {m_} and {n_}"
            )));
        }
    }
    let (rows, cols) = t1.shape();
    if rows == n_ || coincide(t1, t2) {
        return OperatorPath::constant(t2.clone()).with_endpoints(t2.clone(), t1.clone());
    }
    let f1 = range_basis(t1, tol);
    let f2 = range_basis(t2, tol);
    let nn1 = orthogonal_complement(&f1);
    let nn2 = orthogonal_complement(&f2);
    let f0 = if n_ == 0 { Subspace::full(rows) } else { common_complement(&nn1, &nn2, tol)? };

    // T2 -> T2⁰ = P^{N2}_{F0} T2 and T1⁰ -> T1: ranges moved to F0.
    let (stage_a, t2_0, stage_e, t1_0) = if n_ == 0 {
        (OperatorPath::constant(t2.clone()), t2.clone(), OperatorPath::constant(t1.clone()), t1.clone())
    } else {
        let a = left_project_path(t2, &f0, &nn2, tol)?.reversed();
        let e = left_project_path(t1, &f0, &nn1, tol)?;
        let (a_end, e_start) = (a.declared_end().clone(), e.declared_start().clone());
        (a, a_end, e, e_start)
    };

    // T2⁰ -> T2⁰ P^{N(T1)}_R: kernel moved to N(T1).
    let k1 = kernel_basis(t1, tol);
    let k2 = kernel_basis(t2, tol);
    let stage_b = if m_ == 0 {
        OperatorPath::constant(t2_0.clone())
    } else {
        let r = common_complement(&k1, &k2, tol)?;
        right_project_path(&t2_0, &k1, &r, tol)?.reversed()
    };
    let m = stage_b.declared_end().clone();

    let y = if n_ == 0 { Mat::identity(rows, rows) } else { f0.basis().clone() };
    let v = orthogonal_complement(&k1).basis().transpose();
    debug_assert_eq!(v.ncols(), cols);
    let stage_cd = bridge(&m, &t1_0, &y, &v, tol)?;

    OperatorPath::concat(vec![stage_a, stage_b, stage_cd, stage_e])?.with_endpoints(t2.clone(), t1.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    fn m(r: usize, c: usize, d: &[f64]) -> Mat<f64> {
        Mat::from_row_slice(r, c, d)
    }

    fn check_rank(p: &OperatorPath<f64>, k: usize, grid: usize) {
        for j in 0..grid {
            let t = j as f64 / (grid - 1) as f64;
            let s = linalg::singular_values(&p.eval(t).unwrap());
            let sk = s[k - 1];
            let next = s.get(k).copied().unwrap_or(0.0).max(f64::EPSILON * s[0]);
            assert!(sk / next >= 1e6, "rank drop at t = {t}: {s:?}");
        }
    }

    fn check_ends(p: &OperatorPath<f64>, a: &Mat<f64>, b: &Mat<f64>) {
        assert!(linalg::max_abs_diff(&p.eval(0.0).unwrap(), a) < 1e-9);
        assert!(linalg::max_abs_diff(&p.eval(1.0).unwrap(), b) < 1e-9);
    }

    #[test]
    fn fk_diagonal_units() {
        let t1 = m(2, 2, &[1., 0., 0., 0.]);
        let t2 = m(2, 2, &[0., 0., 0., 1.]);
        let p = connect_fk(&t1, &t2, &tol()).unwrap();
        check_ends(&p, &t2, &t1);
        check_rank(&p, 1, 1001);
    }

    #[test]
    fn fk_equal_is_constant() {
        let t = m(2, 3, &[1., 2., 3., 0., 1., 0.]);
        let p = connect_fk(&t, &t, &tol()).unwrap();
        assert_eq!(p.segments().len(), 1);
        assert_eq!(p.eval(0.3).unwrap(), t);
    }

    #[test]
    fn fk_negation_needs_a_flip() {
        let t1 = m(2, 2, &[1., 0., 0., 0.]);
        let t2 = -&t1;
        let p = connect_fk(&t1, &t2, &tol()).unwrap();
        check_ends(&p, &t2, &t1);
        check_rank(&p, 1, 1001);
        assert!(p
            .segments()
            .iter()
            .any(|s| matches!(s.kind, super::super::SegmentKind::RotationFlip { .. })));
    }

    #[test]
    fn fk_rank_mismatch() {
        let err = connect_fk(&Mat::<f64>::identity(2, 2), &m(2, 2, &[1., 0., 0., 0.]), &tol()).unwrap_err();
        assert!(matches!(err, StrataError::RankMismatch { .. }));
    }

    #[test]
    fn fk_full_rank_square_opposite_signs_is_disconnected() {
        let err = connect_fk(&Mat::<f64>::identity(2, 2), &m(2, 2, &[-1., 0., 0., 1.]), &tol()).unwrap_err();
        assert!(matches!(err, StrataError::DisconnectedComponents { dim: 2 }));
        let p = connect_fk(&Mat::<f64>::identity(2, 2), &m(2, 2, &[2., 1., 0., 3.]), &tol()).unwrap();
        check_rank(&p, 2, 201);
    }

    #[test]
    fn fk_wide_full_row_rank_uses_kernel_side() {
        let t1 = m(2, 3, &[1., 0., 0., 0., 1., 0.]);
        let t2 = m(2, 3, &[-1., 0., 0., 0., 1., 0.]);
        let p = connect_fk(&t1, &t2, &tol()).unwrap();
        check_ends(&p, &t2, &t1);
        check_rank(&p, 2, 1001);
    }

    #[test]
    fn fk_generic_three_by_four() {
        let t1 = m(3, 4, &[1., 2., 0., -1., 0., 1., 1., 0., 1., 3., 1., -1.]);
        let t2 = m(3, 4, &[0., 1., -2., 1., 2., 0., 1., 1., 2., 1., -1., 2.]);
        assert_eq!(rank_of(&t1, &tol()), 2);
        assert_eq!(rank_of(&t2, &tol()), 2);
        let p = connect_fk(&t1, &t2, &tol()).unwrap();
        check_ends(&p, &t2, &t1);
        check_rank(&p, 2, 1001);
    }

    #[test]
    fn phi_surjective_wide() {
        let t1 = m(2, 3, &[1., 0., 0., 0., 1., 0.]);
        let t2 = m(2, 3, &[0., 1., 0., 0., 0., 1.]);
        let p = connect_phi(&t1, &t2, 1, 0, &tol()).unwrap();
        check_ends(&p, &t2, &t1);
        for j in 0..=200 {
            assert_eq!(phi_indices(&p.eval(j as f64 / 200.0).unwrap(), &tol()), (1, 0));
        }
    }

    #[test]
    fn phi_rejects_invertible_stratum() {
        let i = Mat::<f64>::identity(2, 2);
        assert!(matches!(connect_phi(&i, &i, 0, 0, &tol()), Err(StrataError::InvertibleStratum)));
    }

    #[test]
    fn phi_equal_is_constant() {
        let t = m(3, 3, &[1., 0., 0., 0., 1., 0., 0., 0., 0.]);
        let p = connect_phi(&t, &t, 1, 1, &tol()).unwrap();
        assert_eq!(p.segments().len(), 1);
    }

    #[test]
    fn phi_membership_is_checked() {
        let t = m(3, 3, &[1., 0., 0., 0., 1., 0., 0., 0., 0.]);
        assert!(matches!(connect_phi(&t, &t, 2, 2, &tol()), Err(StrataError::Precondition(_))));
    }

    #[test]
    fn phi_injective_tall_with_sign_change() {
        let t1 = m(3, 2, &[1., 0., 0., 1., 0., 0.]);
        let t2 = m(3, 2, &[0., 1., 1., 0., 1., 1.]);
        let p = connect_phi(&t1, &t2, 0, 1, &tol()).unwrap();
        check_ends(&p, &t2, &t1);
        for j in 0..=300 {
            assert_eq!(phi_indices(&p.eval(j as f64 / 300.0).unwrap(), &tol()), (0, 1));
        }
    }
}
