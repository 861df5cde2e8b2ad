//! Dense helpers on top of nalgebra: sorted SVDs, full orthonormal bases,
//! Gram-Schmidt and a handful of norms.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

pub type Mat<T> = DMatrix<T>;
pub type Vector<T> = DVector<T>;

/// Thin SVD with singular values sorted in descending order.
#[derive(Debug, Clone)]
pub struct SortedSvd<T: Scalar> {
    pub u: Mat<T>,
    pub sigma: Vec<T>,
    pub v_t: Mat<T>,
}

/// Thin SVD by one-sided Jacobi rotations, singular values descending.
///
/// Used instead of nalgebra's bidiagonal SVD, which can lose most relative
/// accuracy on nearly rank-deficient inputs; rank decisions here hinge on
/// exactly those.
pub fn svd<T: Scalar>(a: &Mat<T>) -> SortedSvd<T> {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return SortedSvd {
            u: Mat::zeros(r, 0),
            sigma: Vec::new(),
            v_t: Mat::zeros(0, c),
        };
    }
    if r < c {
        let t = jacobi_tall(&a.transpose());
        return SortedSvd { u: t.v_t.transpose(), sigma: t.sigma, v_t: t.u.transpose() };
    }
    jacobi_tall(a)
}

/// One-sided Jacobi on the columns of a matrix with `rows >= cols`.
fn jacobi_tall<T: Scalar>(a: &Mat<T>) -> SortedSvd<T> {
    let (r, c) = a.shape();
    let mut w = a.clone();
    let mut v = Mat::<T>::identity(c, c);
    let tol = T::eps() * T::lit(c as f64);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma * T::lit(2.0));
                let sgn = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sgn / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut w, p, q, cs, sn);
                rotate(&mut v, p, q, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..c).collect();
    let norms: Vec<T> = (0..c).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite matrix").then(i.cmp(&j)));
    let mut u = Mat::zeros(r, c);
    let mut vs = Mat::zeros(c, c);
    let mut sigma = Vec::with_capacity(c);
    let mut filled = 0;
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        vs.set_column(dst, &v.column(src));
        if s > T::zero() {
            u.set_column(dst, &(w.column(src) / s));
            filled += 1;
        }
    }
    if filled < c {
        let done = u.columns(0, filled).into_owned();
        let extra = complete_basis(&done);
        for j in filled..c {
            u.set_column(j, &extra.column(j - filled));
        }
    }
    SortedSvd { u, sigma, v_t: vs.transpose() }
}

fn rotate<T: Scalar>(m: &mut Mat<T>, p: usize, q: usize, c: T, s: T) {
    for i in 0..m.nrows() {
        let x = m[(i, p)];
        let y = m[(i, q)];
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

/// Singular values in descending order (empty for an empty matrix).
pub fn singular_values<T: Scalar>(a: &Mat<T>) -> Vec<T> {
    svd(a).sigma
}

/// Number of singular values strictly above `rel_tol * sigma_max`.
pub fn numerical_rank<T: Scalar>(sigma: &[T], rel_tol: T) -> usize {
    let smax = match sigma.first() {
        Some(&s) if s > T::zero() => s,
        _ => return 0,
    };
    sigma.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Right singular vectors completed to an orthonormal basis of the domain,
/// as the columns of a `cols x cols` matrix, together with the singular values.
pub fn full_right<T: Scalar>(a: &Mat<T>) -> (Vec<T>, Mat<T>) {
    let (r, c) = a.shape();
    if c == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let padded = if r >= c {
        a.clone()
    } else {
        let mut p = Mat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    };
    let d = svd(&padded);
    (d.sigma, d.v_t.transpose())
}

/// Left singular vectors completed to an orthonormal basis of the codomain.
pub fn full_left<T: Scalar>(a: &Mat<T>) -> (Vec<T>, Mat<T>) {
    let (s, v) = full_right(&a.transpose());
    (s, v)
}

/// Two passes of modified Gram-Schmidt over the columns of `a`.
///
/// Returns `None` when a column collapses below `floor` relative to its
/// original norm.
pub fn gram_schmidt<T: Scalar>(a: &Mat<T>, floor: T) -> Option<Mat<T>> {
    let (n, d) = a.shape();
    let mut q = Mat::zeros(n, d);
    for j in 0..d {
        let mut v = a.column(j).into_owned();
        let norm0 = v.norm();
        if norm0 == T::zero() {
            return None;
        }
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let proj = qi.dot(&v);
                v.axpy(-proj, &qi, T::one());
            }
        }
        let norm = v.norm();
        if norm <= floor * norm0 {
            return None;
        }
        q.set_column(j, &(v / norm));
    }
    Some(q)
}

/// Greedy completion of the orthonormal columns `q` to a basis of the ambient
/// space: at each step the standard basis vector with the largest residual
/// (lowest index on ties) is orthogonalized and appended.
pub fn complete_basis<T: Scalar>(q: &Mat<T>) -> Mat<T> {
    let (n, d) = q.shape();
    let mut basis: Vec<Vector<T>> = (0..d).map(|j| q.column(j).into_owned()).collect();
    let mut out = Vec::with_capacity(n - d);
    for _ in d..n {
        let mut best: Option<(T, Vector<T>)> = None;
        for j in 0..n {
            let mut v = Vector::zeros(n);
            v[j] = T::one();
            for _ in 0..2 {
                for b in &basis {
                    let p = b.dot(&v);
                    v.axpy(-p, b, T::one());
                }
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn * T::lit(1.0 + 1e-12)) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("ambient space is nonempty");
        let v = v / norm;
        basis.push(v.clone());
        out.push(v);
    }
    let mut c = Mat::zeros(n, n - d);
    for (j, v) in out.iter().enumerate() {
        c.set_column(j, v);
    }
    c
}

pub fn max_abs<T: Scalar>(a: &Mat<T>) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

pub fn max_abs_diff<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> T {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

/// `[a b]`
pub fn hcat<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn hcat_all<T: Scalar>(rows: usize, parts: &[&Mat<T>]) -> Mat<T> {
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows);
        out.view_mut((0, at), p.shape()).copy_from(*p);
        at += p.ncols();
    }
    out
}

/// Solves `a x = b` for square nonsingular `a`.
pub fn solve<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Option<Mat<T>> {
    if a.nrows() == 0 {
        return Some(Mat::zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b)
}

pub fn inverse<T: Scalar>(a: &Mat<T>) -> Option<Mat<T>> {
    solve(a, &Mat::identity(a.nrows(), a.ncols()))
}

/// Moore-Penrose inverse of a matrix with full row rank.
pub fn right_inverse<T: Scalar>(a: &Mat<T>) -> Option<Mat<T>> {
    let gram = a * a.transpose();
    let inv = inverse(&gram)?;
    Some(a.transpose() * inv)
}

/// Sign of the determinant of a square matrix; `+1` for the empty matrix.
pub fn det_sign<T: Scalar>(a: &Mat<T>) -> i8 {
    if a.nrows() == 0 {
        return 1;
    }
    let d = a.clone().lu().determinant();
    if d < T::zero() {
        -1
    } else {
        1
    }
}

pub fn unit<T: Scalar>(n: usize, i: usize) -> Vector<T> {
    let mut v = Vector::zeros(n);
    v[i] = T::one();
    v
}
