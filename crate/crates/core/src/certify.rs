//! Seeded instance generation and sampled path certificates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StrataError};
use crate::io::{matrix_format, subspace_format, subspace_list_format};
use crate::linalg::{self, Mat};
use crate::path::{OperatorPath, SampleLocation};
use crate::projection::GraphParam;
use crate::scalar::Scalar;
use crate::subspace::{is_direct_sum, kernel_basis, range_basis, Subspace, ToleranceConfig};

/// Smallest accepted `σ_k / σ_1` of a generated factor product.
pub const GEN_MIN_RATIO: f64 = 1e-3;
/// Smallest accepted `σ_k / σ_{k+1}` along a certified path.
pub const GAP_MIN: f64 = 1e6;
/// Endpoint tolerance, relative to `1 + ‖end‖_max`.
pub const ENDPOINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    FkPair,
    PhiPair,
    SubspacePair,
    Gl,
}

impl std::str::FromStr for InstanceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fk-pair" => Ok(Self::FkPair),
            "phi-pair" => Ok(Self::PhiPair),
            "subspace-pair" => Ok(Self::SubspacePair),
            "gl" => Ok(Self::Gl),
            _ => Err(format!("unknown instance kind {s:?}")),
        }
    }
}

/// Operators are `n × m` (maps from `R^m` to `R^n`) of rank `k`. Subspace
/// pairs are two `k`-dimensional subspaces of `R^n`; `gl` draws an invertible
/// `n × n` matrix and ignores `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub kind: InstanceKind,
}

impl InstanceSpec {
    pub fn new(m: usize, n: usize, k: usize, seed: u64, kind: InstanceKind) -> Result<Self> {
        let s = Self { m, n, k, seed, kind };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(StrataError::Precondition("shapes must be positive".into()));
        }
        if self.k > self.m.min(self.n) {
            return Err(StrataError::Precondition(format!(
                "rank {} exceeds min({}, {})",
                self.k, self.m, self.n
            )));
        }
        match self.kind {
            InstanceKind::PhiPair if self.k == self.m && self.k == self.n => Err(StrataError::InvertibleStratum),
            InstanceKind::Gl if self.m != self.n => {
                Err(StrataError::Precondition("gl instances are square (m = n)".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct OperatorPair<T: Scalar> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSpec>,
    #[serde(with = "matrix_format")]
    pub t1: Mat<T>,
    #[serde(with = "matrix_format")]
    pub t2: Mat<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct SubspacePair<T: Scalar> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSpec>,
    #[serde(with = "subspace_format")]
    pub e1: Subspace<T>,
    #[serde(with = "subspace_format")]
    pub e2: Subspace<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct SingleOperator<T: Scalar> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSpec>,
    #[serde(with = "matrix_format")]
    pub a: Mat<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, bound(deserialize = "T: Scalar"))]
pub enum Instance<T: Scalar> {
    Pair(OperatorPair<T>),
    Subspaces(SubspacePair<T>),
    Single(SingleOperator<T>),
}

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat<f64> {
    Mat::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// A rank-exactly-`k` `n × m` product of uniform factors with `σ_k/σ_1` bounded below.
fn low_rank(rng: &mut ChaCha8Rng, n: usize, m: usize, k: usize) -> Mat<f64> {
    if k == 0 {
        return Mat::zeros(n, m);
    }
    loop {
        let t = uniform(rng, n, k) * uniform(rng, k, m);
        let s = linalg::singular_values(&t);
        if s[k - 1] >= GEN_MIN_RATIO * s[0] {
            return t;
        }
    }
}

fn cast<T: Scalar>(a: &Mat<f64>) -> Mat<T> {
    a.map(T::lit)
}

/// Deterministic in the spec: a ChaCha stream seeded with `seed`.
pub fn gen_instance<T: Scalar>(spec: &InstanceSpec) -> Result<Instance<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (m, n, k) = (spec.m, spec.n, spec.k);
    let instance = Some(*spec);
    Ok(match spec.kind {
        InstanceKind::FkPair | InstanceKind::PhiPair => {
            let t1 = low_rank(&mut rng, n, m, k);
            let t2 = low_rank(&mut rng, n, m, k);
            Instance::Pair(OperatorPair { instance, t1: cast(&t1), t2: cast(&t2) })
        }
        InstanceKind::Gl => Instance::Single(SingleOperator { instance, a: cast(&low_rank(&mut rng, n, n, n)) }),
        InstanceKind::SubspacePair => {
            let tol = ToleranceConfig::default();
            let e1 = range_basis(&low_rank(&mut rng, n, k.max(1), k), &tol);
            let e2 = range_basis(&low_rank(&mut rng, n, k.max(1), k), &tol);
            let conv = |s: &Subspace<f64>| Subspace::new(cast::<T>(s.basis()), &ToleranceConfig::default());
            if k == 0 {
                Instance::Subspaces(SubspacePair { instance, e1: Subspace::zero(n), e2: Subspace::zero(n) })
            } else {
                Instance::Subspaces(SubspacePair { instance, e1: conv(&e1)?, e2: conv(&e2)? })
            }
        }
    })
}

/// Largest accepted condition number of `[E* | R]` in [`gen_split`].
pub const SPLIT_COND_MAX: f64 = 1e3;

/// A seeded random splitting `R^n = E* ⊕ R` with `dim E* = d` and a graph
/// parameter `α: E* -> R` with uniform(-1, 1) coefficients.
pub fn gen_split<T: Scalar>(n: usize, d: usize, seed: u64) -> Result<GraphParam<T>> {
    if n == 0 || d > n {
        return Err(StrataError::Precondition(format!("cannot split R^{n} with a {d}-dimensional part")));
    }
    let tol = ToleranceConfig::<f64>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let estar = Subspace::new(uniform(&mut rng, n, d), &tol);
        let r = Subspace::new(uniform(&mut rng, n, n - d), &tol);
        let coeff = uniform(&mut rng, n - d, d);
        let (Ok(estar), Ok(r)) = (estar, r) else { continue };
        let split = is_direct_sum(&[&estar, &r], &tol)?;
        if !split.direct || split.condition > SPLIT_COND_MAX {
            continue;
        }
        let conv = |s: &Subspace<f64>| Subspace::new(cast::<T>(s.basis()), &ToleranceConfig::default());
        let (estar, r) = (conv(&estar)?, conv(&r)?);
        let coeff = Mat::from_fn(n - d, d, |i, j| T::lit(coeff[(i, j)]));
        return GraphParam::new(estar, r, coeff, &ToleranceConfig::default());
    }
}

/// Optional pointwise membership conditions: the range must complement each
/// of `range_complements`, the kernel each of `kernel_complements`, and
/// kernel or range may be pinned to a fixed subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Membership<T: Scalar> {
    #[serde(default, with = "subspace_list_format")]
    pub range_complements: Vec<Subspace<T>>,
    #[serde(default, with = "subspace_list_format")]
    pub kernel_complements: Vec<Subspace<T>>,
    #[serde(default, with = "opt_subspace", skip_serializing_if = "Option::is_none")]
    pub kernel_equals: Option<Subspace<T>>,
    #[serde(default, with = "opt_subspace", skip_serializing_if = "Option::is_none")]
    pub range_equals: Option<Subspace<T>>,
}

mod opt_subspace {
    use super::*;
    use crate::io::SubspaceRecord;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &Option<Subspace<T>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(SubspaceRecord::from_subspace).serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Subspace<T>>, D::Error> {
        Option::<SubspaceRecord<T>>::deserialize(d)?
            .map(|r| r.to_subspace(&ToleranceConfig::default()).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl<T: Scalar> Default for Membership<T> {
    fn default() -> Self {
        Self { range_complements: vec![], kernel_complements: vec![], kernel_equals: None, range_equals: None }
    }
}

impl<T: Scalar> Membership<T> {
    pub fn is_empty(&self) -> bool {
        self.range_complements.is_empty()
            && self.kernel_complements.is_empty()
            && self.kernel_equals.is_none()
            && self.range_equals.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate,
}

impl Verdict {
    /// 0 pass, 1 fail, 2 degenerate.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Degenerate => 2,
        }
    }
}

/// Evidence at one sample. `membership_residuals` lists, in order, the
/// condition numbers of `[range | C]` for each range complement, of
/// `[kernel | C]` for each kernel complement, then the largest principal
/// angle to the pinned kernel and to the pinned range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub t: f64,
    pub segment: usize,
    pub local_t: f64,
    pub rank: usize,
    pub sigma_k: Option<f64>,
    pub sigma_k_plus_1: Option<f64>,
    pub membership_residuals: Vec<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCertificate {
    pub instance: Option<InstanceSpec>,
    pub k: usize,
    pub grid_size: usize,
    pub rank_rel_tol: f64,
    pub per_sample: Vec<SampleRecord>,
    pub endpoint_errors: [f64; 2],
    pub verdict: Verdict,
    pub failures: Vec<f64>,
}

impl PathCertificate {
    pub fn with_instance(mut self, instance: Option<InstanceSpec>) -> Self {
        self.instance = instance;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn sample<T: Scalar>(
    p: &OperatorPath<T>,
    at: &SampleLocation,
    k: usize,
    tol: &ToleranceConfig<T>,
    membership: &Membership<T>,
) -> Result<SampleRecord> {
    let op = p.eval_at(at);
    let sigma = linalg::singular_values(&op);
    let rank = linalg::numerical_rank(&sigma, tol.rank_rel_tol);
    let s1 = sigma.first().copied().unwrap_or(T::zero());
    let sigma_k = if k >= 1 { sigma.get(k - 1).copied() } else { None };
    let sigma_k_plus_1 = sigma.get(k).copied();
    let mut ok = rank == k;
    if let Some(sk) = sigma_k {
        let floor = T::eps() * s1;
        let next = sigma_k_plus_1.unwrap_or(T::zero()).max(floor);
        ok &= next > T::zero() && sk / next >= T::lit(GAP_MIN);
    }
    let mut residuals = Vec::new();
    if !membership.is_empty() {
        let range = range_basis(&op, tol);
        let kernel = kernel_basis(&op, tol);
        for c in &membership.range_complements {
            let d = is_direct_sum(&[&range, c], tol)?;
            ok &= d.direct;
            residuals.push(d.condition.as_f64());
        }
        for c in &membership.kernel_complements {
            let d = is_direct_sum(&[&kernel, c], tol)?;
            ok &= d.direct;
            residuals.push(d.condition.as_f64());
        }
        if let Some(s) = &membership.kernel_equals {
            ok &= kernel.same_as(s);
            residuals.push(kernel.max_angle(s).as_f64());
        }
        if let Some(s) = &membership.range_equals {
            ok &= range.same_as(s);
            residuals.push(range.max_angle(s).as_f64());
        }
    }
    Ok(SampleRecord {
        t: at.t,
        segment: at.segment,
        local_t: at.local_t,
        rank,
        sigma_k: sigma_k.map(Scalar::as_f64),
        sigma_k_plus_1: sigma_k_plus_1.map(Scalar::as_f64),
        membership_residuals: residuals,
        ok,
    })
}

/// Samples `grid` uniform parameters plus every affine midpoint and checks
/// rank `k`, the singular-value gap, the optional membership conditions and
/// both endpoints. Rank-zero targets are reported as degenerate.
pub fn certify_path<T: Scalar>(
    p: &OperatorPath<T>,
    k: usize,
    grid: usize,
    tol: &ToleranceConfig<T>,
    membership: Option<&Membership<T>>,
) -> Result<PathCertificate> {
    let empty = Membership::default();
    let membership = membership.unwrap_or(&empty);
    let locations = p.sample_locations(grid)?;
    let per_sample = locations
        .par_iter()
        .map(|at| sample(p, at, k, tol, membership))
        .collect::<Result<Vec<_>>>()?;
    let start_err = linalg::max_abs_diff(&p.eval(0.0)?, p.declared_start());
    let end_err = linalg::max_abs_diff(&p.eval(1.0)?, p.declared_end());
    let bound = |m: &Mat<T>| T::lit(ENDPOINT_TOL) * (T::one() + linalg::max_abs(m));
    let ends_ok = start_err <= bound(p.declared_start()) && end_err <= bound(p.declared_end());
    let mut failures: Vec<f64> = per_sample.iter().filter(|s| !s.ok).map(|s| s.t).collect();
    if !ends_ok {
        if start_err > bound(p.declared_start()) {
            failures.insert(0, 0.0);
        }
        if end_err > bound(p.declared_end()) {
            failures.push(1.0);
        }
    }
    let verdict = if k == 0 {
        Verdict::Degenerate
    } else if failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(PathCertificate {
        instance: None,
        k,
        grid_size: grid,
        rank_rel_tol: tol.rank_rel_tol.as_f64(),
        per_sample,
        endpoint_errors: [start_err.as_f64(), end_err.as_f64()],
        verdict,
        failures,
    })
}
