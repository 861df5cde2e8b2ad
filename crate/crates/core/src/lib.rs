//! Subspace splittings, oblique projections and explicit paths inside the
//! rank strata of real matrix spaces, with sampled certificates.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the precision.

pub mod certify;
pub mod error;
pub mod io;
pub mod linalg;
pub mod path;
pub mod projection;
pub mod scalar;
pub mod strata;
pub mod subspace;

pub use certify::{certify_path, gen_instance, Instance, InstanceKind, InstanceSpec, Membership, PathCertificate, Verdict};
pub use error::{Result, StrataError};
pub use linalg::Mat;
pub use path::{eval_path, ChainWitness, FlipSide, OperatorPath, PathSegment, SegmentKind};
pub use projection::{Decomposition, GraphParam};
pub use scalar::Scalar;
pub use strata::{dim_fk, tangent_basis, tangency_order, StratumPoint, Tangency, TangentBasis};
pub use subspace::{Subspace, ToleranceConfig};

pub type Matrix64 = Mat<f64>;
pub type Subspace64 = Subspace<f64>;
pub type Tolerance64 = ToleranceConfig<f64>;
pub type GraphParam64 = GraphParam<f64>;
pub type Decomposition64 = Decomposition<f64>;
pub type OperatorPath64 = OperatorPath<f64>;
pub type ChainWitness64 = ChainWitness<f64>;
pub type StratumPoint64 = StratumPoint<f64>;
pub type TangentBasis64 = TangentBasis<f64>;

pub type Matrix32 = Mat<f32>;
pub type Subspace32 = Subspace<f32>;
pub type Tolerance32 = ToleranceConfig<f32>;
pub type GraphParam32 = GraphParam<f32>;
pub type Decomposition32 = Decomposition<f32>;
pub type OperatorPath32 = OperatorPath<f32>;
pub type ChainWitness32 = ChainWitness<f32>;
pub type StratumPoint32 = StratumPoint<f32>;
pub type TangentBasis32 = TangentBasis<f32>;
