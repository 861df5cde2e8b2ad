//! Paths joining an operator to its negative.
//!
//! [`literal_flip_path`] is the two-piece affine family through
//! `P + tαP` and `(1 - 2t)P + (1 - t)αP`. Its second piece collapses into the
//! complement at its midpoint, which [`audit_flip_path`] detects.
//! [`corrected_flip_path`] instead rotates one singular vector at a time
//! through a direction outside the range (or row space), which keeps the rank
//! fixed.

use serde::{Deserialize, Serialize};

use super::{FlipSide, OperatorPath, PathSegment, SampleLocation};
use crate::error::{Result, StrataError};
use crate::io::subspace_format;
use crate::linalg::{self, Mat};
use crate::projection::{oblique_projection, GraphParam};
use crate::scalar::Scalar;
use crate::subspace::{
    is_direct_sum, kernel_basis, orthogonal_complement, range_basis, rank_of, Subspace, ToleranceConfig,
};

/// Builds `P -> P + αP -> -P` where `P` projects onto `E*` along `R`.
pub fn literal_flip_path<T: Scalar>(
    estar: &Subspace<T>,
    r: &Subspace<T>,
    alpha: &GraphParam<T>,
    tol: &ToleranceConfig<T>,
) -> Result<OperatorPath<T>> {
    if r.is_zero() {
        return Err(StrataError::Precondition("complement R must be nonzero".into()));
    }
    let n = estar.ambient_dim();
    if estar.is_zero() {
        return Ok(OperatorPath::constant(Mat::zeros(n, n)));
    }
    if !alpha.domain().same_as(estar) || !alpha.codomain().same_as(r) {
        return Err(StrataError::Precondition("α must map E* into R".into()));
    }
    if alpha.is_zero() {
        return Err(StrataError::Precondition("α must be nonzero when E* is nonzero".into()));
    }
    let p = oblique_projection(estar, r, tol)?.into_projector();
    let alpha_p = alpha.ambient_operator() * &p;
    let graph = &p + &alpha_p;
    let rise = PathSegment::affine(p.clone(), alpha_p.clone())?;
    let flip = PathSegment::affine(graph, -(&p * T::lit(2.0)) - &alpha_p)?;
    OperatorPath::new(vec![rise, flip])?.with_endpoints(p.clone(), -p)
}

/// The target set of the literal flip: kernel equal to `kernel`, range
/// complementary to `complement`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct FlipMembership<T: Scalar> {
    #[serde(with = "subspace_format")]
    pub kernel: Subspace<T>,
    #[serde(with = "subspace_format")]
    pub complement: Subspace<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditPoint {
    #[serde(flatten)]
    pub at: SampleLocation,
    pub rank: usize,
    pub range_complementary: bool,
    pub kernel_matches: bool,
    pub condition: f64,
    pub kernel_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub points: Vec<AuditPoint>,
    pub failures: Vec<SampleLocation>,
    pub degenerate: bool,
}

impl AuditReport {
    /// Whether some failure sits at local parameter `local_t` of any segment.
    pub fn fails_at_local(&self, local_t: f64) -> bool {
        self.failures.iter().any(|f| (f.local_t - local_t).abs() < 1e-12)
    }
}

/// Checks membership of the literal flip path pointwise on a uniform grid plus
/// the midpoint of every affine segment.
pub fn audit_flip_path<T: Scalar>(
    p: &OperatorPath<T>,
    set: &FlipMembership<T>,
    grid: usize,
    tol: &ToleranceConfig<T>,
) -> Result<AuditReport> {
    let samples = p.sample_locations(grid)?;
    let evals: Vec<Mat<T>> = samples.iter().map(|s| p.eval_at(s)).collect();
    let degenerate = evals.iter().all(|m| m.iter().all(|&x| x == T::zero()));
    let mut points = Vec::with_capacity(samples.len());
    let mut failures = Vec::new();
    for (at, op) in samples.into_iter().zip(evals) {
        let range = range_basis(&op, tol);
        let kernel = kernel_basis(&op, tol);
        let ds = is_direct_sum(&[&range, &set.complement], tol)?;
        let kernel_angle = kernel.max_angle(&set.kernel);
        let kernel_matches = kernel.same_as(&set.kernel);
        let ok = degenerate || (ds.direct && kernel_matches);
        if !ok {
            failures.push(at);
        }
        points.push(AuditPoint {
            at,
            rank: range.dim(),
            range_complementary: ds.direct,
            kernel_matches,
            condition: ds.condition.as_f64(),
            kernel_angle: kernel_angle.as_f64(),
        });
    }
    Ok(AuditReport { points, failures, degenerate })
}

/// Range side when the range is not everything, else kernel side.
pub fn preferred_side(shape: (usize, usize), k: usize) -> Option<FlipSide> {
    if shape.0 > k {
        Some(FlipSide::Range)
    } else if shape.1 > k {
        Some(FlipSide::Kernel)
    } else {
        None
    }
}

/// Joins `T` (rank `k`) to `-T` by rotating each of its `k` left (or right)
/// singular vectors through a fixed unit direction orthogonal to the range
/// (or row space), one segment per vector.
pub fn corrected_flip_path<T: Scalar>(
    op: &Mat<T>,
    k: usize,
    side: FlipSide,
    tol: &ToleranceConfig<T>,
) -> Result<OperatorPath<T>> {
    let rank = rank_of(op, tol);
    if rank != k {
        return Err(StrataError::RankMismatch { left: rank, right: k });
    }
    let (rows, cols) = op.shape();
    if k == 0 {
        return Ok(OperatorPath::constant(op.clone()));
    }
    let room = match side {
        FlipSide::Range => rows > k,
        FlipSide::Kernel => cols > k,
    };
    if !room {
        return Err(StrataError::NoComplementDirection { rank: k, rows, cols });
    }
    let d = linalg::svd(op);
    let vectors = match side {
        FlipSide::Range => d.u.columns(0, k).into_owned(),
        FlipSide::Kernel => d.v_t.rows(0, k).transpose(),
    };
    let w = orthogonal_complement(&Subspace::from_orthonormal(vectors.clone()))
        .basis()
        .column(0)
        .into_owned();
    let w = Mat::from_column_slice(w.len(), 1, w.as_slice());
    let mut segments = Vec::with_capacity(k);
    let mut base = op.clone();
    for i in 0..k {
        let u = vectors.column(i).into_owned();
        let u = Mat::from_column_slice(u.len(), 1, u.as_slice());
        let seg = PathSegment::rotation_flip(base, u, w.clone(), side)?;
        base = seg.end();
        segments.push(seg);
    }
    OperatorPath::new(segments)?.with_endpoints(op.clone(), -op)
}

impl<T: Scalar> OperatorPath<T> {
    /// `grid` uniform global parameters (both ends included) merged with the
    /// exact midpoint of every affine segment, in increasing order.
    pub fn sample_locations(&self, grid: usize) -> Result<Vec<SampleLocation>> {
        if grid < 2 {
            return Err(StrataError::DegenerateGrid(format!("need at least 2 samples, got {grid}")));
        }
        let mut out: Vec<SampleLocation> = (0..grid)
            .map(|j| self.locate(j as f64 / (grid - 1) as f64))
            .collect::<Result<_>>()?;
        for (i, s) in self.segments().iter().enumerate() {
            if s.is_affine() {
                let mid = SampleLocation { t: self.global_t(i, 0.5), segment: i, local_t: 0.5 };
                let dup = out.iter().any(|o| o.segment == i && o.local_t == 0.5);
                if !dup {
                    out.push(mid);
                }
            }
        }
        out.sort_by(|a, b| {
            (a.segment, a.local_t)
                .partial_cmp(&(b.segment, b.local_t))
                .expect("finite sample parameters")
        });
        Ok(out)
    }
}
