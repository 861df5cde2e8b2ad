//! Paths inside the invertible group.
//!
//! `A = QS` (polar form). The first piece slides `S` to `I` along the line of
//! symmetric positive definite matrices; the second runs `Q` to
//! `D = diag(sign det A, 1, …, 1)` through `exp((1 - t)K)·D` with `K` a real
//! logarithm of `QD`.

use nalgebra::Schur;

use super::{OperatorPath, PathSegment, SegmentKind};
use crate::error::{Result, StrataError};
use crate::linalg::{self, Mat};
use crate::scalar::Scalar;
use crate::subspace::ToleranceConfig;

/// Polar factors `(Q, S)` of a square matrix: `A = QS`, `Q` orthogonal, `S`
/// symmetric positive semidefinite.
pub fn polar<T: Scalar>(a: &Mat<T>) -> Result<(Mat<T>, Mat<T>)> {
    if a.nrows() != a.ncols() {
        return Err(StrataError::ShapeMismatch { left: a.shape(), right: (a.ncols(), a.nrows()) });
    }
    let d = linalg::svd(a);
    let v = d.v_t.transpose();
    let q = &d.u * &d.v_t;
    let sig = Mat::from_diagonal(&linalg::Vector::from_vec(d.sigma.clone()));
    let s = &v * sig * &d.v_t;
    let s = (&s + s.transpose()) * T::lit(0.5);
    Ok((q, s))
}

/// A real skew-symmetric `K` with `exp(K) = r`, for `r` orthogonal with
/// determinant `+1`. Built from the real Schur form: each 2×2 rotation block
/// contributes its angle, and the `-1` eigenvalues are paired up as rotations
/// by `π`.
pub fn orthogonal_log<T: Scalar>(r: &Mat<T>) -> Result<Mat<T>> {
    let n = r.nrows();
    if n != r.ncols() {
        return Err(StrataError::ShapeMismatch { left: r.shape(), right: (n, n) });
    }
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let orth = linalg::max_abs_diff(&(r.transpose() * r), &Mat::identity(n, n));
    if orth > T::lit(1e-8) {
        return Err(StrataError::Precondition("matrix is not orthogonal".into()));
    }
    if linalg::det_sign(r) < 0 {
        return Err(StrataError::Precondition("orthogonal matrix has determinant -1".into()));
    }
    let schur = Schur::try_new(r.clone(), T::eps(), 0)
        .ok_or(StrataError::Decomposition("real Schur form did not converge"))?;
    let (z, t) = schur.unpack();
    let split = T::lit(1e3) * T::eps();
    let mut kb = Mat::zeros(n, n);
    let mut negatives = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > split {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let theta = (c - b).atan2(a + d);
            kb[(i, i + 1)] = -theta;
            kb[(i + 1, i)] = theta;
            i += 2;
        } else {
            if t[(i, i)] < T::zero() {
                negatives.push(i);
            }
            i += 1;
        }
    }
    if negatives.len() % 2 == 1 {
        return Err(StrataError::Decomposition("unpaired -1 eigenvalue in orthogonal logarithm"));
    }
    for pair in negatives.chunks(2) {
        kb[(pair[0], pair[1])] = -T::pi();
        kb[(pair[1], pair[0])] = T::pi();
    }
    let k = &z * kb * z.transpose();
    let k = (&k - k.transpose()) * T::lit(0.5);
    let err = linalg::max_abs_diff(&k.clone().exp(), r);
    if err > T::lit(1e-8) {
        return Err(StrataError::Inconsistent { what: "orthogonal logarithm", discrepancy: err.as_f64() });
    }
    Ok(k)
}

/// Joins `A` (at `t = 0`) to `D = diag(sign det A, 1, …, 1)` (at `t = 1`)
/// through invertible matrices. Returns the path and the sign.
pub fn gl_connect<T: Scalar>(a: &Mat<T>, tol: &ToleranceConfig<T>) -> Result<(OperatorPath<T>, i8)> {
    gl_sandwiched(a, None, None, tol)
}

/// `left · γ(t) · right` where `γ` is the [`gl_connect`] path of `a`.
pub(crate) fn gl_sandwiched<T: Scalar>(
    a: &Mat<T>,
    left: Option<&Mat<T>>,
    right: Option<&Mat<T>>,
    tol: &ToleranceConfig<T>,
) -> Result<(OperatorPath<T>, i8)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(StrataError::ShapeMismatch { left: a.shape(), right: (n, n) });
    }
    let wrap = |m: &Mat<T>| -> Mat<T> {
        let x = match left {
            Some(l) => l * m,
            None => m.clone(),
        };
        match right {
            Some(r) => x * r,
            None => x,
        }
    };
    if n == 0 {
        let z = wrap(a);
        return Ok((OperatorPath::constant(z), 1));
    }
    let sigma = linalg::singular_values(a);
    let smax = sigma[0];
    let smin = sigma[n - 1];
    if smax == T::zero() || smin <= tol.rank_rel_tol * smax {
        let ratio = if smax == T::zero() { 0.0 } else { (smin / smax).as_f64() };
        return Err(StrataError::Singular { ratio });
    }
    let (q, s) = polar(a)?;
    let sign = linalg::det_sign(&q);
    let mut d = Mat::identity(n, n);
    if sign < 0 {
        d[(0, 0)] = -T::one();
    }
    let tiny = T::lit(64.0) * T::eps();
    let id = Mat::identity(n, n);
    let mut segments = Vec::new();
    if linalg::max_abs_diff(&s, &id) > tiny * (T::one() + linalg::max_abs(&s)) {
        segments.push(PathSegment::new(SegmentKind::SpdLine {
            q: q.clone(),
            s,
            left: left.cloned(),
            right: right.cloned(),
        }));
    }
    if linalg::max_abs_diff(&q, &d) > tiny {
        let k = orthogonal_log(&(&q * &d))?;
        segments.push(PathSegment::new(SegmentKind::RotationLog {
            k,
            m: d.clone(),
            left: left.cloned(),
            right: right.cloned(),
        }));
    }
    let start = wrap(a);
    let end = wrap(&d);
    let path = if segments.is_empty() {
        OperatorPath::constant(start.clone())
    } else {
        OperatorPath::new(segments)?
    };
    Ok((path.with_endpoints(start, end)?, sign))
}
