//! Closed-form piecewise operator paths and the builders that produce them.
//!
//! An [`OperatorPath`] is a nonempty chain of [`PathSegment`]s. The global
//! parameter `t ∈ [0, 1]` is split into equal sub-intervals, one per segment,
//! and every segment is evaluated in closed form.

mod chain;
mod connect;
mod flip;
mod gl;
mod project;

pub use chain::{chain_connect, discover_chain, ChainWitness};
pub use connect::{connect_fk, connect_phi, phi_indices};
pub use flip::{audit_flip_path, corrected_flip_path, literal_flip_path, preferred_side, AuditPoint, AuditReport, FlipMembership};
pub use gl::{gl_connect, orthogonal_log, polar};
pub use project::{left_project_path, right_project_path};

use serde::{Deserialize, Serialize};

use crate::error::{Result, StrataError};
use crate::io::{matrix_format, opt_matrix_format};
use crate::linalg::{self, Mat};
use crate::scalar::Scalar;

/// Tolerance for consecutive segments to meet, relative to `1 + ‖A‖_max`.
pub const CHAIN_TOL: f64 = 1e-10;

/// Which side of an operator a rotation flip acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipSide {
    /// Rotate a unit vector of the range through a direction outside it.
    Range,
    /// Rotate a unit vector of the row space through a kernel direction.
    Kernel,
}

/// The closed-form families a segment can take. Local parameter `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound(deserialize = "T: Scalar"))]
pub enum SegmentKind<T: Scalar> {
    /// `A`
    Constant {
        #[serde(with = "matrix_format")]
        a: Mat<T>,
    },
    /// `A + tB`
    Affine {
        #[serde(with = "matrix_format")]
        a: Mat<T>,
        #[serde(with = "matrix_format")]
        b: Mat<T>,
    },
    /// `(A + tB) C`
    LeftAffine {
        #[serde(with = "matrix_format")]
        a: Mat<T>,
        #[serde(with = "matrix_format")]
        b: Mat<T>,
        #[serde(with = "matrix_format")]
        c: Mat<T>,
    },
    /// `C (A + tB)`
    RightAffine {
        #[serde(with = "matrix_format")]
        c: Mat<T>,
        #[serde(with = "matrix_format")]
        a: Mat<T>,
        #[serde(with = "matrix_format")]
        b: Mat<T>,
    },
    /// With `θ = πt`: range side `(I + (cos θ - 1)uuᵀ + sin θ·wuᵀ)·base`,
    /// kernel side `base·(I + (cos θ - 1)uuᵀ + sin θ·uwᵀ)`.
    RotationFlip {
        #[serde(with = "matrix_format")]
        base: Mat<T>,
        #[serde(with = "matrix_format")]
        u: Mat<T>,
        #[serde(with = "matrix_format")]
        w: Mat<T>,
        side: FlipSide,
    },
    /// `left · Q((1 - t)S + tI) · right`
    SpdLine {
        #[serde(with = "matrix_format")]
        q: Mat<T>,
        #[serde(with = "matrix_format")]
        s: Mat<T>,
        #[serde(default, with = "opt_matrix_format", skip_serializing_if = "Option::is_none")]
        left: Option<Mat<T>>,
        #[serde(default, with = "opt_matrix_format", skip_serializing_if = "Option::is_none")]
        right: Option<Mat<T>>,
    },
    /// `left · exp((1 - t)K) M · right` with `K` skew-symmetric.
    RotationLog {
        #[serde(with = "matrix_format")]
        k: Mat<T>,
        #[serde(with = "matrix_format")]
        m: Mat<T>,
        #[serde(default, with = "opt_matrix_format", skip_serializing_if = "Option::is_none")]
        left: Option<Mat<T>>,
        #[serde(default, with = "opt_matrix_format", skip_serializing_if = "Option::is_none")]
        right: Option<Mat<T>>,
    },
}

/// One piece of an operator path; `reversed` runs the family from `t = 1` to `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct PathSegment<T: Scalar> {
    #[serde(flatten)]
    pub kind: SegmentKind<T>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reversed: bool,
}

impl<T: Scalar> PathSegment<T> {
    pub fn new(kind: SegmentKind<T>) -> Self {
        Self { kind, reversed: false }
    }

    pub fn constant(a: Mat<T>) -> Self {
        Self::new(SegmentKind::Constant { a })
    }

    pub fn affine(a: Mat<T>, b: Mat<T>) -> Result<Self> {
        same_shape(&a, &b)?;
        Ok(Self::new(SegmentKind::Affine { a, b }))
    }

    pub fn left_affine(a: Mat<T>, b: Mat<T>, c: Mat<T>) -> Result<Self> {
        same_shape(&a, &b)?;
        if a.ncols() != c.nrows() {
            return Err(StrataError::ShapeMismatch { left: a.shape(), right: c.shape() });
        }
        Ok(Self::new(SegmentKind::LeftAffine { a, b, c }))
    }

    pub fn right_affine(c: Mat<T>, a: Mat<T>, b: Mat<T>) -> Result<Self> {
        same_shape(&a, &b)?;
        if c.ncols() != a.nrows() {
            return Err(StrataError::ShapeMismatch { left: c.shape(), right: a.shape() });
        }
        Ok(Self::new(SegmentKind::RightAffine { c, a, b }))
    }

    /// Rotation of the unit vector `u` towards the unit vector `w ⊥ u` and on
    /// to `-u`.
    pub fn rotation_flip(base: Mat<T>, u: Mat<T>, w: Mat<T>, side: FlipSide) -> Result<Self> {
        let dim = match side {
            FlipSide::Range => base.nrows(),
            FlipSide::Kernel => base.ncols(),
        };
        if u.shape() != (dim, 1) || w.shape() != (dim, 1) {
            return Err(StrataError::ShapeMismatch { left: u.shape(), right: (dim, 1) });
        }
        let tiny = T::lit(1e-12);
        let dot = u.dot(&w).abs();
        if (u.norm() - T::one()).abs() > tiny || (w.norm() - T::one()).abs() > tiny || dot > tiny {
            return Err(StrataError::Precondition(format!(
                "rotation flip needs orthonormal u, w (u·w = {:e})",
                dot.as_f64()
            )));
        }
        Ok(Self::new(SegmentKind::RotationFlip { base, u, w, side }))
    }

    /// Output shape of the segment.
    pub fn shape(&self) -> (usize, usize) {
        use SegmentKind::*;
        match &self.kind {
            Constant { a } | Affine { a, .. } => a.shape(),
            LeftAffine { a, c, .. } => (a.nrows(), c.ncols()),
            RightAffine { c, a, .. } => (c.nrows(), a.ncols()),
            RotationFlip { base, .. } => base.shape(),
            SpdLine { q, left, right, .. } | RotationLog { k: q, left, right, .. } => (
                left.as_ref().map_or(q.nrows(), |l| l.nrows()),
                right.as_ref().map_or(q.ncols(), |r| r.ncols()),
            ),
        }
    }

    /// Whether the kind is one of the affine families.
    pub fn is_affine(&self) -> bool {
        matches!(
            self.kind,
            SegmentKind::Affine { .. } | SegmentKind::LeftAffine { .. } | SegmentKind::RightAffine { .. }
        )
    }

    /// Evaluates at local parameter `t ∈ [0, 1]`.
    pub fn eval(&self, t: T) -> Mat<T> {
        let t = if self.reversed { T::one() - t } else { t };
        use SegmentKind::*;
        match &self.kind {
            Constant { a } => a.clone(),
            Affine { a, b } => a + b * t,
            LeftAffine { a, b, c } => (a + b * t) * c,
            RightAffine { c, a, b } => c * (a + b * t),
            RotationFlip { base, u, w, side } => {
                let theta = T::pi() * t;
                let (s, c) = theta.sin_cos();
                let c1 = c - T::one();
                match side {
                    FlipSide::Range => {
                        let ub = u.transpose() * base;
                        let dir = u * c1 + w * s;
                        base + dir * ub
                    }
                    FlipSide::Kernel => {
                        let bu = base * u;
                        let dir = u.transpose() * c1 + w.transpose() * s;
                        base + bu * dir
                    }
                }
            }
            SpdLine { q, s, left, right } => {
                let n = s.nrows();
                let inner = s * (T::one() - t) + Mat::identity(n, n) * t;
                sandwich(left, q * inner, right)
            }
            RotationLog { k, m, left, right } => {
                let e = (k * (T::one() - t)).exp();
                sandwich(left, e * m, right)
            }
        }
    }

    pub fn start(&self) -> Mat<T> {
        self.eval(T::zero())
    }

    pub fn end(&self) -> Mat<T> {
        self.eval(T::one())
    }

    pub fn reversed(mut self) -> Self {
        self.reversed = !self.reversed;
        self
    }
}

fn sandwich<T: Scalar>(left: &Option<Mat<T>>, core: Mat<T>, right: &Option<Mat<T>>) -> Mat<T> {
    let x = match left {
        Some(l) => l * core,
        None => core,
    };
    match right {
        Some(r) => x * r,
        None => x,
    }
}

fn same_shape<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(StrataError::ShapeMismatch { left: a.shape(), right: b.shape() });
    }
    Ok(())
}

/// Where a global parameter lands: segment index and local parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleLocation {
    pub t: f64,
    pub segment: usize,
    pub local_t: f64,
}

/// A chain of segments with declared endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct OperatorPath<T: Scalar> {
    shape: (usize, usize),
    segments: Vec<PathSegment<T>>,
    #[serde(with = "matrix_format")]
    start: Mat<T>,
    #[serde(with = "matrix_format")]
    end: Mat<T>,
}

impl<T: Scalar> OperatorPath<T> {
    /// Chains `segments`, checking shapes and continuity. The declared
    /// endpoints default to the evaluated ones.
    pub fn new(segments: Vec<PathSegment<T>>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| StrataError::Precondition("a path needs at least one segment".into()))?;
        let shape = first.shape();
        for s in &segments {
            if s.shape() != shape {
                return Err(StrataError::ShapeMismatch { left: shape, right: s.shape() });
            }
        }
        for pair in segments.windows(2) {
            check_meet(&pair[0].end(), &pair[1].start())?;
        }
        let start = segments[0].start();
        let end = segments[segments.len() - 1].end();
        Ok(Self { shape, segments, start, end })
    }

    pub fn constant(a: Mat<T>) -> Self {
        Self {
            shape: a.shape(),
            start: a.clone(),
            end: a.clone(),
            segments: vec![PathSegment::constant(a)],
        }
    }

    /// Replaces the declared endpoints (what the construction claims to join).
    pub fn with_endpoints(mut self, start: Mat<T>, end: Mat<T>) -> Result<Self> {
        if start.shape() != self.shape || end.shape() != self.shape {
            return Err(StrataError::ShapeMismatch { left: self.shape, right: start.shape() });
        }
        self.start = start;
        self.end = end;
        Ok(self)
    }

    /// Re-validates a deserialized path.
    pub fn validate(self) -> Result<Self> {
        let (start, end) = (self.start.clone(), self.end.clone());
        let checked = Self::new(self.segments)?;
        if checked.shape != self.shape {
            return Err(StrataError::ShapeMismatch { left: self.shape, right: checked.shape });
        }
        checked.with_endpoints(start, end)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn segments(&self) -> &[PathSegment<T>] {
        &self.segments
    }

    pub fn declared_start(&self) -> &Mat<T> {
        &self.start
    }

    pub fn declared_end(&self) -> &Mat<T> {
        &self.end
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn then(self, other: Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(StrataError::ShapeMismatch { left: self.shape, right: other.shape });
        }
        let start = self.start;
        let end = other.end;
        let mut segments = self.segments;
        segments.extend(other.segments);
        Self::new(segments)?.with_endpoints(start, end)
    }

    /// Concatenates, dropping constant pieces when something else remains.
    pub fn concat(parts: Vec<Self>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let mut acc = iter
            .next()
            .ok_or_else(|| StrataError::Precondition("nothing to concatenate".into()))?;
        for p in iter {
            acc = acc.then(p)?;
        }
        Ok(acc.without_constants())
    }

    fn without_constants(self) -> Self {
        let keep: Vec<_> = self
            .segments
            .iter()
            .filter(|s| !matches!(s.kind, SegmentKind::Constant { .. }))
            .cloned()
            .collect();
        if keep.is_empty() || keep.len() == self.segments.len() {
            return self;
        }
        // Dropping constants never breaks continuity: each one equals its neighbours' ends.
        match Self::new(keep) {
            Ok(p) => Self { start: self.start, end: self.end, ..p },
            Err(_) => self,
        }
    }

    pub fn reversed(self) -> Self {
        let segments = self.segments.into_iter().rev().map(PathSegment::reversed).collect();
        Self { shape: self.shape, segments, start: self.end, end: self.start }
    }

    /// Maps a global parameter to `(segment, local parameter)`.
    pub fn locate(&self, t: f64) -> Result<SampleLocation> {
        if !(0.0..=1.0).contains(&t) {
            return Err(StrataError::ParameterOutOfRange(t));
        }
        let n = self.segments.len();
        let s = t * n as f64;
        let segment = (s.floor() as usize).min(n - 1);
        let local_t = (s - segment as f64).clamp(0.0, 1.0);
        Ok(SampleLocation { t, segment, local_t })
    }

    /// Global parameter of local `local_t` inside `segment`.
    pub fn global_t(&self, segment: usize, local_t: f64) -> f64 {
        (segment as f64 + local_t) / self.segments.len() as f64
    }

    pub fn eval_at(&self, loc: &SampleLocation) -> Mat<T> {
        self.segments[loc.segment].eval(T::lit(loc.local_t))
    }

    pub fn eval(&self, t: f64) -> Result<Mat<T>> {
        let loc = self.locate(t)?;
        Ok(self.eval_at(&loc))
    }

    /// Largest chaining discrepancy between consecutive segments.
    pub fn max_chain_gap(&self) -> T {
        self.segments
            .windows(2)
            .map(|p| linalg::max_abs_diff(&p[0].end(), &p[1].start()))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// Evaluates `p` at global parameter `t ∈ [0, 1]`.
pub fn eval_path<T: Scalar>(p: &OperatorPath<T>, t: f64) -> Result<Mat<T>> {
    p.eval(t)
}

fn check_meet<T: Scalar>(end: &Mat<T>, start: &Mat<T>) -> Result<()> {
    let gap = linalg::max_abs_diff(end, start);
    let bound = T::lit(CHAIN_TOL) * (T::one() + linalg::max_abs(end));
    if gap > bound {
        return Err(StrataError::Inconsistent { what: "segment chaining", discrepancy: gap.as_f64() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(r: usize, c: usize, d: &[f64]) -> Mat<f64> {
        Mat::from_row_slice(r, c, d)
    }

    #[test]
    fn constant_segment_ignores_t() {
        let a = m(2, 2, &[1., 2., 3., 4.]);
        let p = OperatorPath::constant(a.clone());
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(eval_path(&p, t).unwrap(), a);
        }
    }

    #[test]
    fn affine_midpoint() {
        let p = OperatorPath::new(vec![PathSegment::affine(Mat::zeros(2, 2), Mat::identity(2, 2)).unwrap()]).unwrap();
        assert_eq!(p.eval(0.5).unwrap(), Mat::identity(2, 2) * 0.5);
    }

    #[test]
    fn chained_segments_meet_at_half() {
        let a = Mat::<f64>::zeros(2, 2);
        let b = Mat::identity(2, 2);
        let s1 = PathSegment::affine(a.clone(), b.clone()).unwrap();
        let s2 = PathSegment::affine(b.clone(), -&b).unwrap();
        let p = OperatorPath::new(vec![s1.clone(), s2.clone()]).unwrap();
        assert_eq!(p.eval(0.5).unwrap(), s1.end());
        assert_eq!(p.eval(0.5).unwrap(), s2.start());
        assert_eq!(p.eval(1.0).unwrap(), a);
    }

    #[test]
    fn broken_chain_is_rejected() {
        let s1 = PathSegment::constant(Mat::<f64>::zeros(2, 2));
        let s2 = PathSegment::constant(Mat::identity(2, 2));
        assert!(matches!(OperatorPath::new(vec![s1, s2]), Err(StrataError::Inconsistent { .. })));
    }

    #[test]
    fn out_of_range_parameter() {
        let p = OperatorPath::constant(Mat::<f64>::zeros(1, 1));
        assert_eq!(p.eval(1.5).unwrap_err(), StrataError::ParameterOutOfRange(1.5));
        assert!(p.eval(-0.1).is_err());
    }

    #[test]
    fn reversal_swaps_ends() {
        let s = PathSegment::affine(Mat::<f64>::zeros(1, 1), m(1, 1, &[2.0])).unwrap();
        let p = OperatorPath::new(vec![s]).unwrap().reversed();
        assert_eq!(p.eval(0.0).unwrap(), m(1, 1, &[2.0]));
        assert_eq!(p.eval(0.25).unwrap(), m(1, 1, &[1.5]));
        assert_eq!(p.declared_start(), &m(1, 1, &[2.0]));
    }

    #[test]
    fn rotation_flip_requires_orthonormal_pair() {
        let base = m(2, 1, &[1., 0.]);
        let u = m(2, 1, &[1., 0.]);
        let w = m(2, 1, &[1., 1.]);
        assert!(PathSegment::rotation_flip(base, u, w, FlipSide::Range).is_err());
    }

    #[test]
    fn json_round_trip_preserves_path() {
        let s = PathSegment::rotation_flip(
            m(2, 2, &[1., 0., 0., 0.]),
            m(2, 1, &[1., 0.]),
            m(2, 1, &[0., 1.]),
            FlipSide::Range,
        )
        .unwrap();
        let p = OperatorPath::new(vec![s, PathSegment::constant(m(2, 2, &[-1., 0., 0., 0.]))]).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: OperatorPath<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
