//! Oblique projections and the graph parametrization of complements.
//!
//! Fix a splitting `E = E* ⊕ R`. Every other complement `E1` of `R` is the
//! graph `{x + αx : x ∈ E*}` of a unique linear map `α: E* → R`, and the
//! projector onto `E1` along `R` is `P + αP` where `P` projects onto `E*`
//! along `R`. [`GraphParam`] holds `α` as a coefficient matrix in the stored
//! orthonormal bases of `E*` and `R`.

use crate::error::{Result, StrataError};
use crate::linalg::{self, Mat};
use crate::scalar::Scalar;
use crate::subspace::{is_direct_sum, Subspace, ToleranceConfig};

/// Relative tolerance on projector identities (idempotency, range, kernel).
pub const PROJECTOR_TOL: f64 = 1e-9;

/// A linear map `α: domain → codomain` between two complementary subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphParam<T: Scalar> {
    domain: Subspace<T>,
    codomain: Subspace<T>,
    coeff: Mat<T>,
}

impl<T: Scalar> GraphParam<T> {
    pub fn new(
        domain: Subspace<T>,
        codomain: Subspace<T>,
        coeff: Mat<T>,
        tol: &ToleranceConfig<T>,
    ) -> Result<Self> {
        if coeff.shape() != (codomain.dim(), domain.dim()) {
            return Err(StrataError::ShapeMismatch {
                left: coeff.shape(),
                right: (codomain.dim(), domain.dim()),
            });
        }
        is_direct_sum(&[&domain, &codomain], tol)?.into_result()?;
        Ok(Self { domain, codomain, coeff })
    }

    /// The zero map, whose graph is the domain itself.
    pub fn zero(
        domain: Subspace<T>,
        codomain: Subspace<T>,
        tol: &ToleranceConfig<T>,
    ) -> Result<Self> {
        let coeff = Mat::zeros(codomain.dim(), domain.dim());
        Self::new(domain, codomain, coeff, tol)
    }

    pub fn domain(&self) -> &Subspace<T> {
        &self.domain
    }

    pub fn codomain(&self) -> &Subspace<T> {
        &self.codomain
    }

    pub fn coeff(&self) -> &Mat<T> {
        &self.coeff
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.iter().all(|&x| x == T::zero())
    }

    /// `α` as an ambient matrix acting on `domain` (zero on its orthogonal
    /// complement). Only ever used composed with a projector onto `domain`.
    pub fn ambient_operator(&self) -> Mat<T> {
        self.codomain.basis() * &self.coeff * self.domain.basis().transpose()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            coeff: &self.coeff * s,
        }
    }
}

/// A splitting `E = part ⊕ complement` together with its projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T: Scalar> {
    part: Subspace<T>,
    complement: Subspace<T>,
    projector: Mat<T>,
}

impl<T: Scalar> Decomposition<T> {
    pub fn part(&self) -> &Subspace<T> {
        &self.part
    }

    pub fn complement(&self) -> &Subspace<T> {
        &self.complement
    }

    /// Projector onto `part` along `complement`.
    pub fn projector(&self) -> &Mat<T> {
        &self.projector
    }

    /// Projector onto `complement` along `part`.
    pub fn complementary_projector(&self) -> Mat<T> {
        let n = self.projector.nrows();
        Mat::identity(n, n) - &self.projector
    }

    pub fn into_projector(self) -> Mat<T> {
        self.projector
    }

    /// Checks idempotency and the action on both bases.
    pub fn check_invariants(&self) -> Result<()> {
        let p = &self.projector;
        let scale = T::one() + linalg::max_abs(p);
        let bound = T::lit(PROJECTOR_TOL) * scale;
        let idem = linalg::max_abs_diff(&(p * p), p);
        if idem > bound {
            return Err(StrataError::Inconsistent { what: "projector idempotency", discrepancy: idem.as_f64() });
        }
        let keep = linalg::max_abs_diff(&(p * self.part.basis()), self.part.basis());
        if keep > bound {
            return Err(StrataError::Inconsistent { what: "projector range", discrepancy: keep.as_f64() });
        }
        let kill = linalg::max_abs(&(p * self.complement.basis()));
        if kill > bound {
            return Err(StrataError::Inconsistent { what: "projector kernel", discrepancy: kill.as_f64() });
        }
        Ok(())
    }
}

/// Projector onto `part` along `complement`:
/// `[B_part B_comp] · diag(I, 0) · [B_part B_comp]^-1`.
pub fn oblique_projection<T: Scalar>(
    part: &Subspace<T>,
    complement: &Subspace<T>,
    tol: &ToleranceConfig<T>,
) -> Result<Decomposition<T>> {
    is_direct_sum(&[part, complement], tol)?.into_result()?;
    let n = part.ambient_dim();
    let m = linalg::hcat(part.basis(), complement.basis());
    let inv = linalg::inverse(&m).ok_or(StrataError::Singular { ratio: 0.0 })?;
    let d = part.dim();
    let projector = if d == 0 {
        Mat::zeros(n, n)
    } else {
        part.basis() * inv.rows(0, d)
    };
    Ok(Decomposition { part: part.clone(), complement: complement.clone(), projector })
}

/// The unique `α: E* → R` whose graph is `E1`, given `E = E1 ⊕ R = E* ⊕ R`.
pub fn alpha_from_complements<T: Scalar>(
    e1: &Subspace<T>,
    estar: &Subspace<T>,
    r: &Subspace<T>,
    tol: &ToleranceConfig<T>,
) -> Result<GraphParam<T>> {
    is_direct_sum(&[e1, r], tol)?.into_result()?;
    is_direct_sum(&[estar, r], tol)?.into_result()?;
    let ds = estar.dim();
    if ds == 0 {
        return GraphParam::zero(estar.clone(), r.clone(), tol);
    }
    // Coordinates of each E1 basis vector in [B_E* B_R].
    let m = linalg::hcat(estar.basis(), r.basis());
    let coords = linalg::solve(&m, e1.basis()).ok_or(StrataError::Singular { ratio: 0.0 })?;
    let c = coords.rows(0, ds).into_owned();
    let rr = coords.rows(ds, r.dim()).into_owned();
    // E1 basis = B_E* c + B_R rr, so α B_E* c = B_R rr.
    let c_inv = linalg::inverse(&c).ok_or(StrataError::Singular { ratio: 0.0 })?;
    GraphParam::new(estar.clone(), r.clone(), rr * c_inv, tol)
}

/// `{x + αx : x ∈ domain}`.
pub fn graph_subspace<T: Scalar>(g: &GraphParam<T>, tol: &ToleranceConfig<T>) -> Result<Subspace<T>> {
    if g.domain.is_zero() {
        return Ok(Subspace::zero(g.domain.ambient_dim()));
    }
    let b = g.domain.basis() + g.codomain.basis() * &g.coeff;
    Subspace::new(b, tol)
}

/// Projector onto `graph(α)` along `R` via `P + αP`, cross-checked against a
/// direct oblique projection; the complementary projector is checked against
/// `(I - P) - αP`.
pub fn projection_update<T: Scalar>(
    base: &Decomposition<T>,
    g: &GraphParam<T>,
    tol: &ToleranceConfig<T>,
) -> Result<Decomposition<T>> {
    if !base.part.same_as(&g.domain) || !base.complement.same_as(&g.codomain) {
        return Err(StrataError::Precondition(
            "graph parameter does not match the base decomposition".into(),
        ));
    }
    let p = &base.projector;
    let alpha_p = g.ambient_operator() * p;
    let updated = p + &alpha_p;

    let e1 = graph_subspace(g, tol)?;
    let direct = oblique_projection(&e1, &base.complement, tol)?;
    let scale = T::one() + linalg::max_abs(direct.projector());
    let bound = T::lit(PROJECTOR_TOL) * scale;
    let gap = linalg::max_abs_diff(&updated, direct.projector());
    if gap > bound {
        return Err(StrataError::Inconsistent { what: "projection update formula", discrepancy: gap.as_f64() });
    }
    let comp = base.complementary_projector() - &alpha_p;
    let gap_c = linalg::max_abs_diff(&comp, &direct.complementary_projector());
    if gap_c > bound {
        return Err(StrataError::Inconsistent {
            what: "complementary projection update formula",
            discrepancy: gap_c.as_f64(),
        });
    }
    Ok(Decomposition { part: e1, complement: base.complement.clone(), projector: updated })
}
