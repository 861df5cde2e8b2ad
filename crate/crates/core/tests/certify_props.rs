mod common;

use common::*;
use proptest::prelude::*;
use strata_core::certify::{certify_path, gen_instance, InstanceKind, InstanceSpec, Verdict};
use strata_core::path::connect_fk;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn certificates_are_deterministic((m, n, k) in fk_shape(), seed in any::<u64>()) {
        let (t1, t2) = fk_pair(m, n, k, seed);
        let p = connect_fk(&t1, &t2, &tol()).unwrap();
        let a = serde_json::to_string(&certify_path(&p, k, 101, &tol(), None).unwrap()).unwrap();
        let p2 = connect_fk(&t1, &t2, &tol()).unwrap();
        let b = serde_json::to_string(&certify_path(&p2, k, 101, &tol(), None).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn passing_certificates_replay((m, n, k) in fk_shape(), seed in any::<u64>(), picks in proptest::collection::vec(any::<prop::sample::Index>(), 10)) {
        let (t1, t2) = fk_pair(m, n, k, seed);
        let p = connect_fk(&t1, &t2, &tol()).unwrap();
        let c = certify_path(&p, k, 1001, &tol(), None).unwrap();
        prop_assert_eq!(c.verdict, Verdict::Pass);
        for ix in picks {
            let rec = ix.get(&c.per_sample);
            let s = strata_core::linalg::singular_values(&p.eval(rec.t).unwrap());
            prop_assert_eq!(strata_core::linalg::numerical_rank(&s, 1e-10), rec.rank);
            prop_assert!((s[k - 1] - rec.sigma_k.unwrap()).abs() <= 1e-12);
            let next = s.get(k).copied();
            match (next, rec.sigma_k_plus_1) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
                (None, None) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }

    #[test]
    fn generation_is_reproducible(m in 1usize..=6, n in 1usize..=6, kk in 0usize..=6, seed in any::<u64>()) {
        let k = kk % (m.min(n) + 1);
        for kind in [InstanceKind::FkPair, InstanceKind::SubspacePair] {
            let spec = InstanceSpec::new(m, n, k, seed, kind).unwrap();
            let a = serde_json::to_string(&gen_instance::<f64>(&spec).unwrap()).unwrap();
            let b = serde_json::to_string(&gen_instance::<f64>(&spec).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }
        let (t1, t2) = fk_pair(m, n, k, seed);
        prop_assert_eq!(strata_core::subspace::rank_of(&t1, &tol()), k);
        prop_assert_eq!(strata_core::subspace::rank_of(&t2, &tol()), k);
    }
}
