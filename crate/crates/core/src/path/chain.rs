//! Paths along complement chains.
//!
//! A witness lists kernels `N_1..N_m` with complements `R_1..R_{m+1}` and
//! ranges `F_1..F_n` with complements `S_1..S_{n+1}`, where `R_k` complements
//! both `N_{k-1}` and `N_k` (`N_0 = N(T0)`, `N_{m+1} = N(T*)`) and likewise
//! `S_i` complements `F_{i-1}` and `F_i` (`F_0 = R(T0)`, `F_{n+1} = R(T*)`).

use serde::{Deserialize, Serialize};

use super::connect::bridge;
use super::{left_project_path, right_project_path, OperatorPath};
use crate::error::{Result, StrataError};
use crate::io::subspace_list_format;
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::subspace::{
    common_complement, is_direct_sum, kernel_basis, orthogonal_complement, range_basis, rank_of, Subspace,
    ToleranceConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct ChainWitness<T: Scalar> {
    #[serde(with = "subspace_list_format")]
    pub kernels: Vec<Subspace<T>>,
    #[serde(with = "subspace_list_format")]
    pub kernel_complements: Vec<Subspace<T>>,
    #[serde(with = "subspace_list_format")]
    pub ranges: Vec<Subspace<T>>,
    #[serde(with = "subspace_list_format")]
    pub range_complements: Vec<Subspace<T>>,
}

impl<T: Scalar> ChainWitness<T> {
    /// Chain length `(m, n)`.
    pub fn len(&self) -> (usize, usize) {
        (self.kernels.len(), self.ranges.len())
    }

    /// Checks every link against `T0` and `T*`; the error names the first
    /// broken one.
    pub fn check(&self, t0: &Mat<T>, tstar: &Mat<T>, tol: &ToleranceConfig<T>) -> Result<()> {
        let (m, n) = self.len();
        if self.kernel_complements.len() != m + 1 {
            return Err(StrataError::WitnessViolation(format!(
                "{} kernels need {} kernel complements, got {}",
                m,
                m + 1,
                self.kernel_complements.len()
            )));
        }
        if self.range_complements.len() != n + 1 {
            return Err(StrataError::WitnessViolation(format!(
                "{} ranges need {} range complements, got {}",
                n,
                n + 1,
                self.range_complements.len()
            )));
        }
        let mut ks = vec![kernel_basis(t0, tol)];
        ks.extend(self.kernels.iter().cloned());
        ks.push(kernel_basis(tstar, tol));
        let mut fs = vec![range_basis(t0, tol)];
        fs.extend(self.ranges.iter().cloned());
        fs.push(range_basis(tstar, tol));
        links("R", "N", &ks, &self.kernel_complements, tol)?;
        links("S", "F", &fs, &self.range_complements, tol)
    }
}

fn links<T: Scalar>(
    c: &str,
    s: &str,
    spaces: &[Subspace<T>],
    complements: &[Subspace<T>],
    tol: &ToleranceConfig<T>,
) -> Result<()> {
    for (j, r) in complements.iter().enumerate() {
        for (idx, x) in [(j, &spaces[j]), (j + 1, &spaces[j + 1])] {
            let ok = x.ambient_dim() == r.ambient_dim()
                && is_direct_sum(&[x, r], tol).map(|d| d.direct).unwrap_or(false);
            if !ok {
                return Err(StrataError::WitnessViolation(format!(
                    "{c}_{} does not complement {s}_{idx}",
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// A path from `tstar` (at `t = 0`) to `t0` (at `t = 1`) following the chain.
pub fn chain_connect<T: Scalar>(
    t0: &Mat<T>,
    tstar: &Mat<T>,
    w: &ChainWitness<T>,
    tol: &ToleranceConfig<T>,
) -> Result<OperatorPath<T>> {
    if t0.shape() != tstar.shape() {
        return Err(StrataError::ShapeMismatch { left: t0.shape(), right: tstar.shape() });
    }
    let k0 = rank_of(t0, tol);
    let ks = rank_of(tstar, tol);
    if k0 != ks {
        return Err(StrataError::RankMismatch { left: k0, right: ks });
    }
    w.check(t0, tstar, tol)?;
    if k0 == 0 || t0 == tstar {
        return OperatorPath::constant(tstar.clone()).with_endpoints(tstar.clone(), t0.clone());
    }
    let (m, n) = w.len();

    // Kernel chain: T_k = T_{k-1} P^{N_k}_{R_k}, path from T_k to T_{k-1}.
    let mut stages: Vec<OperatorPath<T>> = Vec::with_capacity(m + n);
    let mut cur = t0.clone();
    for k in 0..m {
        let p = right_project_path(&cur, &w.kernels[k], &w.kernel_complements[k], tol)?;
        cur = p.declared_start().clone();
        stages.push(p);
    }
    // Range chain: T_{m+i} = P^{S_i}_{F_i} T_{m+i-1}.
    for i in 0..n {
        let s = &w.range_complements[i];
        let p = if s.is_zero() {
            OperatorPath::constant(cur.clone())
        } else {
            left_project_path(&cur, &w.ranges[i], s, tol)?
        };
        cur = p.declared_start().clone();
        stages.push(p);
    }
    let last = cur;

    let n_m = if m == 0 { kernel_basis(t0, tol) } else { w.kernels[m - 1].clone() };
    let f_n = if n == 0 { range_basis(t0, tol) } else { w.ranges[n - 1].clone() };

    // T* -> T* P^{N_m}_{R_{m+1}} -> P^{S_{n+1}}_{F_n}(…): same kernel and range as the last stage.
    let close_a = right_project_path(tstar, &n_m, &w.kernel_complements[m], tol)?.reversed();
    let x1 = close_a.declared_end().clone();
    let s_last = &w.range_complements[n];
    let close_b = if s_last.is_zero() {
        OperatorPath::constant(x1.clone())
    } else {
        left_project_path(&x1, &f_n, s_last, tol)?.reversed()
    };
    let kk = close_b.declared_end().clone();
    let v = orthogonal_complement(&n_m).basis().transpose();
    let mid = bridge(&kk, &last, f_n.basis(), &v, tol)?;

    let mut parts = vec![close_a, close_b, mid];
    parts.extend(stages.into_iter().rev());
    OperatorPath::concat(parts)?.with_endpoints(tstar.clone(), t0.clone())
}

/// The shortest witness: no interior kernels or ranges, with `R_1` and `S_1`
/// common complements of the two kernels and of the two ranges.
pub fn discover_chain<T: Scalar>(t0: &Mat<T>, tstar: &Mat<T>, tol: &ToleranceConfig<T>) -> Result<ChainWitness<T>> {
    if t0.shape() != tstar.shape() {
        return Err(StrataError::ShapeMismatch { left: t0.shape(), right: tstar.shape() });
    }
    let k0 = rank_of(t0, tol);
    let ks = rank_of(tstar, tol);
    if k0 != ks {
        return Err(StrataError::RankMismatch { left: k0, right: ks });
    }
    let r1 = common_complement(&kernel_basis(t0, tol), &kernel_basis(tstar, tol), tol)?;
    let s1 = common_complement(&range_basis(t0, tol), &range_basis(tstar, tol), tol)?;
    Ok(ChainWitness { kernels: vec![], kernel_complements: vec![r1], ranges: vec![], range_complements: vec![s1] })
}
