#![allow(dead_code)]

use proptest::prelude::*;
use strata_core::certify::{gen_instance, Instance, InstanceKind, InstanceSpec};
use strata_core::linalg::Mat;
use strata_core::subspace::{Subspace, ToleranceConfig};

pub fn tol() -> ToleranceConfig<f64> {
    ToleranceConfig::default()
}

/// An `r × c` matrix with entries in `[-1, 1]`.
pub fn matrix(r: usize, c: usize) -> impl Strategy<Value = Mat<f64>> {
    proptest::collection::vec(-1.0f64..1.0, r * c).prop_map(move |d| Mat::from_row_slice(r, c, &d))
}

/// A matrix of shape up to 8×8 whose rank is at most the drawn inner size.
pub fn low_rank_matrix() -> impl Strategy<Value = Mat<f64>> {
    (1usize..=8, 1usize..=8, 0usize..=8).prop_flat_map(|(r, c, k)| {
        let k = k.min(r).min(c);
        (matrix(r, k.max(1)), matrix(k.max(1), c)).prop_map(move |(a, b)| if k == 0 { Mat::zeros(r, c) } else { a * b })
    })
}

pub fn fk_pair(m: usize, n: usize, k: usize, seed: u64) -> (Mat<f64>, Mat<f64>) {
    let spec = InstanceSpec::new(m, n, k, seed, InstanceKind::FkPair).unwrap();
    match gen_instance(&spec).unwrap() {
        Instance::Pair(p) => (p.t1, p.t2),
        _ => unreachable!(),
    }
}

pub fn subspace_pair(n: usize, k: usize, seed: u64) -> (Subspace<f64>, Subspace<f64>) {
    let spec = InstanceSpec::new(n, n, k, seed, InstanceKind::SubspacePair).unwrap();
    match gen_instance(&spec).unwrap() {
        Instance::Subspaces(p) => (p.e1, p.e2),
        _ => unreachable!(),
    }
}

/// `(m, n, k)` with `2 <= m, n <= 6` and `1 <= k < min(m, n)`.
pub fn fk_shape() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..=6, 2usize..=6).prop_flat_map(|(m, n)| (Just(m), Just(n), 1..m.min(n)))
}

pub fn max_rel_gap(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    strata_core::linalg::max_abs_diff(a, b) / (1.0 + strata_core::linalg::max_abs(b))
}
