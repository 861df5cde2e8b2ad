//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use strata_core::certify::{certify_path, gen_instance, gen_split, Instance, InstanceKind, InstanceSpec, Verdict};
use strata_core::linalg::{self, Mat};
use strata_core::path::{
    audit_flip_path, chain_connect, connect_fk, connect_phi, corrected_flip_path, discover_chain, gl_connect,
    literal_flip_path, phi_indices, preferred_side, ChainWitness, FlipMembership,
};
use strata_core::projection::{graph_subspace, oblique_projection, projection_update};
use strata_core::strata::{default_tangency_grid, dim_fk, tangency_order, tangent_basis, StratumPoint, Tangency};
use strata_core::subspace::{common_complement, is_direct_sum, Subspace, ToleranceConfig};
use strata_core::StrataError;

type Outcome = Result<String, String>;

fn tol() -> ToleranceConfig<f64> {
    ToleranceConfig::default()
}

fn pair(m: usize, n: usize, k: usize, seed: u64, kind: InstanceKind) -> (Mat<f64>, Mat<f64>) {
    let spec = InstanceSpec::new(m, n, k, seed, kind).expect("valid spec");
    match gen_instance(&spec).expect("generated") {
        Instance::Pair(p) => (p.t1, p.t2),
        _ => unreachable!(),
    }
}

fn gl_matrix(n: usize, seed: u64) -> Mat<f64> {
    let spec = InstanceSpec::new(n, n, n, seed, InstanceKind::Gl).expect("valid spec");
    match gen_instance(&spec).expect("generated") {
        Instance::Single(s) => s.a,
        _ => unreachable!(),
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dimension_formula() -> Outcome {
    let mut cases = 0;
    for m in 1..=6 {
        for n in 1..=6 {
            for k in 0..=m.min(n) {
                let (x, _) = pair(m, n, k, (100 * m + 10 * n + k) as u64, InstanceKind::FkPair);
                let point = StratumPoint::new(x, &tol());
                check(point.rank() == k, || format!("generated rank {} != {k}", point.rank()))?;
                let b = tangent_basis(&point);
                let want = dim_fk(m, n, k).map_err(|e| e.to_string())?;
                check(b.dim() == want && want == (m + n - k) * k, || {
                    format!("(m,n,k)=({m},{n},{k}): basis {} vs formula {want}", b.dim())
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (m,n,k) triples exact"))
}

fn projection_calculus() -> Outcome {
    let mut worst = 0f64;
    for n in 2..=8usize {
        for s in 0..100u64 {
            let d = 1 + (s as usize) % (n - 1);
            let g = gen_split::<f64>(n, d, 1000 * n as u64 + s).map_err(|e| e.to_string())?;
            let base = oblique_projection(g.domain(), g.codomain(), &tol()).map_err(|e| e.to_string())?;
            let e1 = graph_subspace(&g, &tol()).map_err(|e| e.to_string())?;
            let direct = oblique_projection(&e1, g.codomain(), &tol()).map_err(|e| e.to_string())?;
            let p = base.projector();
            let formula = p + g.ambient_operator() * p;
            let r = linalg::max_abs_diff(direct.projector(), &formula);
            worst = worst.max(r);
            check(r <= 1e-9, || format!("n={n} seed={s}: residual {r:e}"))?;
            projection_update(&base, &g, &tol()).map_err(|e| format!("n={n} seed={s}: {e}"))?;
        }
    }
    Ok(format!("700 instances, max residual {worst:.2e}"))
}

fn common_complements() -> Outcome {
    let mut worst = 0f64;
    for n in 2..=8usize {
        for s in 0..100u64 {
            let k = (s as usize) % (n + 1);
            let spec = InstanceSpec::new(n, n, k, 2000 * n as u64 + s, InstanceKind::SubspacePair).unwrap();
            let Instance::Subspaces(p) = gen_instance::<f64>(&spec).unwrap() else { unreachable!() };
            let c = common_complement(&p.e1, &p.e2, &tol()).map_err(|e| e.to_string())?;
            for e in [&p.e1, &p.e2] {
                let d = is_direct_sum(&[e, &c], &tol()).map_err(|e| e.to_string())?;
                worst = worst.max(d.condition);
                check(d.direct, || format!("n={n} k={k} seed={s}: not complementary (cond {:e})", d.condition))?;
            }
        }
    }
    Ok(format!("700 pairs, worst condition {worst:.2e}"))
}

fn fk_shapes(i: usize) -> (usize, usize, usize) {
    let m = 2 + i % 5;
    let n = 2 + (i / 5) % 5;
    let k = 1 + (i / 25) % (m.min(n) - 1);
    (m, n, k)
}

fn fk_connectivity() -> Outcome {
    let mut worst_end = 0f64;
    for i in 0..200usize {
        let (m, n, k) = fk_shapes(i);
        let (t1, t2) = pair(m, n, k, 3000 + i as u64, InstanceKind::FkPair);
        let p = connect_fk(&t1, &t2, &tol()).map_err(|e| format!("instance {i}: {e}"))?;
        let c = certify_path(&p, k, 1001, &tol(), None).map_err(|e| e.to_string())?;
        let e0 = linalg::max_abs_diff(&p.eval(0.0).unwrap(), &t2) / (1.0 + linalg::max_abs(&t2));
        let e1 = linalg::max_abs_diff(&p.eval(1.0).unwrap(), &t1) / (1.0 + linalg::max_abs(&t1));
        worst_end = worst_end.max(e0).max(e1);
        check(c.verdict == Verdict::Pass && e0 <= 1e-9 && e1 <= 1e-9, || {
            format!("instance {i} ({n}x{m}, k={k}): {:?}, failures {:?}", c.verdict, &c.failures[..c.failures.len().min(5)])
        })?;
    }
    Ok(format!("200/200 certified, worst endpoint error {worst_end:.2e}"))
}

fn phi_connectivity() -> Outcome {
    let mut shapes = Vec::new();
    for m in 1..=5usize {
        for n in 1..=5usize {
            for k in 1..=m.min(n) {
                if !(k == m && k == n) {
                    shapes.push((m, n, k));
                }
            }
        }
    }
    for i in 0..50usize {
        let (m, n, k) = shapes[(i * 7) % shapes.len()];
        let (t1, t2) = pair(m, n, k, 4000 + i as u64, InstanceKind::PhiPair);
        let (m_, n_) = (m - k, n - k);
        let p = connect_phi(&t1, &t2, m_, n_, &tol()).map_err(|e| format!("instance {i}: {e}"))?;
        let c = certify_path(&p, k, 1001, &tol(), None).map_err(|e| e.to_string())?;
        check(c.verdict == Verdict::Pass, || format!("instance {i} ({n}x{m}, k={k}): {:?}", c.failures))?;
        for j in 0..=100 {
            let idx = phi_indices(&p.eval(j as f64 / 100.0).unwrap(), &tol());
            check(idx == (m_, n_), || format!("instance {i}: indices {idx:?} at t={}", j as f64 / 100.0))?;
        }
    }
    Ok("50/50 certified in their Φ stratum".into())
}

fn span(cols: &[&[f64]]) -> Subspace<f64> {
    let n = cols[0].len();
    let data: Vec<f64> = cols.iter().flat_map(|c| c.iter().copied()).collect();
    Subspace::new(Mat::from_column_slice(n, cols.len(), &data), &tol()).unwrap()
}

fn chain_equivalence() -> Outcome {
    for i in 0..50usize {
        let (m, n, k) = fk_shapes(i * 3 + 1);
        let (t0, ts) = pair(m, n, k, 5000 + i as u64, InstanceKind::FkPair);
        let w = discover_chain(&t0, &ts, &tol()).map_err(|e| format!("instance {i}: {e}"))?;
        let p = chain_connect(&t0, &ts, &w, &tol()).map_err(|e| format!("instance {i}: {e}"))?;
        let c = certify_path(&p, k, 1001, &tol(), None).map_err(|e| e.to_string())?;
        check(c.verdict == Verdict::Pass, || format!("instance {i}: {:?}", c.failures))?;
    }
    // Kernels N(T0) = ⟨e2,e3⟩ -> ⟨e1,e3⟩ -> ⟨e1,e2⟩ -> N(T*) = ⟨e1-e2, e3⟩.
    let t0 = Mat::from_row_slice(3, 3, &[1., 0., 0., 0., 0., 0., 0., 0., 0.]);
    let ts = Mat::from_row_slice(3, 3, &[0., 0., 0., 0., 0., 0., 1., 1., 0.]);
    let w = ChainWitness {
        kernels: vec![span(&[&[1., 0., 0.], &[0., 0., 1.]]), span(&[&[1., 0., 0.], &[0., 1., 0.]])],
        kernel_complements: vec![span(&[&[1., 1., 0.]]), span(&[&[0., 1., 1.]]), span(&[&[1., 1., 1.]])],
        ranges: vec![],
        range_complements: vec![span(&[&[0., 1., 0.], &[1., 0., 1.]])],
    };
    let p = chain_connect(&t0, &ts, &w, &tol()).map_err(|e| format!("length-2 chain: {e}"))?;
    let c = certify_path(&p, 1, 1001, &tol(), None).map_err(|e| e.to_string())?;
    check(c.verdict == Verdict::Pass, || format!("length-2 chain: {:?}", c.failures))?;
    Ok(format!("50/50 discovered chains and the length-2 kernel chain ({} segments) certified", p.segments().len()))
}

fn literal_flip_audit() -> Outcome {
    for i in 0..100usize {
        let n = 2 + i % 7;
        let d = 1 + i % (n - 1);
        let g = gen_split::<f64>(n, d, 6000 + i as u64).map_err(|e| e.to_string())?;
        let p = literal_flip_path(g.domain(), g.codomain(), &g, &tol()).map_err(|e| e.to_string())?;
        let set = FlipMembership { kernel: g.codomain().clone(), complement: g.codomain().clone() };
        let report = audit_flip_path(&p, &set, 101, &tol()).map_err(|e| e.to_string())?;
        let flagged = report.failures.iter().any(|f| f.segment == 1 && f.local_t == 0.5);
        check(flagged && !report.degenerate, || format!("instance {i}: midpoint not flagged"))?;

        let proj = oblique_projection(g.domain(), g.codomain(), &tol()).unwrap().into_projector();
        let side = preferred_side(proj.shape(), d).expect("R is nonzero");
        let fixed = corrected_flip_path(&proj, d, side, &tol()).map_err(|e| e.to_string())?;
        let c = certify_path(&fixed, d, 1001, &tol(), None).map_err(|e| e.to_string())?;
        check(c.verdict == Verdict::Pass, || format!("instance {i}: corrected path {:?}", c.failures))?;
        let e = linalg::max_abs_diff(&fixed.eval(1.0).unwrap(), &(-&proj));
        check(e <= 1e-12, || format!("instance {i}: corrected end error {e:e}"))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (dim, seed) in [(2, 1), (3, 2), (5, 3)] {
        let out = dir.path().join(format!("audit-{dim}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_strata"))
            .args(["audit-thm12", "--dim", &dim.to_string(), "--seed", &seed.to_string(), "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        check(status.code() == Some(1), || format!("audit-thm12 --dim {dim} exited with {status}"))?;
    }
    Ok("100/100 literal paths flagged at the midpoint, 100/100 corrected paths certified, audit-thm12 exits 1".into())
}

fn gl_components() -> Outcome {
    let mut worst = f64::INFINITY;
    for i in 0..100usize {
        let n = 1 + i % 6;
        let a = gl_matrix(n, 7000 + i as u64);
        let floor = 0.5 * linalg::singular_values(&a)[n - 1].min(1.0);
        let (p, sign) = gl_connect(&a, &tol()).map_err(|e| format!("instance {i}: {e}"))?;
        check(sign == linalg::det_sign(&a), || format!("instance {i}: wrong sign"))?;
        for j in 0..=1000 {
            let s = linalg::singular_values(&p.eval(j as f64 / 1000.0).unwrap())[n - 1];
            worst = worst.min(s / floor);
            check(s >= floor, || format!("instance {i}: σ_min {s:e} below {floor:e} at t={}", j as f64 / 1000.0))?;
        }
        let mut d = Mat::identity(n, n);
        d[(0, 0)] = sign as f64;
        let e = linalg::max_abs_diff(&p.eval(1.0).unwrap(), &d);
        check(e <= 1e-9, || format!("instance {i}: end error {e:e}"))?;
    }
    for n in 1..=5 {
        let t1 = gl_matrix(n, 7500 + n as u64);
        let mut t2 = gl_matrix(n, 7600 + n as u64);
        if linalg::det_sign(&t1) == linalg::det_sign(&t2) {
            let row = -t2.row(0).into_owned();
            t2.set_row(0, &row);
        }
        let first = connect_fk(&t1, &t2, &tol());
        let second = connect_fk(&t1, &t2, &tol());
        check(matches!(first, Err(StrataError::DisconnectedComponents { dim }) if dim == n), || {
            format!("n={n}: expected disconnected components, got {:?}", first.as_ref().map(|p| p.segments().len()))
        })?;
        check(first.err() == second.err(), || format!("n={n}: error not deterministic"))?;
    }
    Ok(format!("100/100 invertible paths, min σ_min/bound {worst:.3}; opposite-sign square pairs rejected"))
}

fn tangency_dichotomy() -> Outcome {
    let grid = default_tangency_grid();
    let (mut exact, mut lo2, mut hi2, mut lo1, mut hi1) = (0, f64::INFINITY, 0f64, f64::INFINITY, 0f64);
    for i in 0..100usize {
        let (m, n, k) = fk_shapes(i);
        let (x, z) = pair(m, n, k, 8000 + i as u64, InstanceKind::FkPair);
        let (_, z2) = pair(m, n, m.min(n), 8500 + i as u64, InstanceKind::FkPair);
        let z = z + z2;
        let point = StratumPoint::new(x, &tol());
        let basis = tangent_basis(&point);
        // Directions are scaled to a tenth of σ_k(X), so that t ≤ 0.1 stays in
        // the regime where the leading power of t dominates.
        let sk = linalg::singular_values(point.op())[k - 1];
        let v = basis.project(&z);
        let v = &v * (0.1 * sk / v.norm());
        match tangency_order(&point, &v, &grid).map_err(|e| format!("instance {i}: {e}"))? {
            Tangency::Exact => exact += 1,
            Tangency::Slope(s) => {
                lo2 = lo2.min(s);
                hi2 = hi2.max(s);
                check((1.8..=2.2).contains(&s), || format!("tangent instance {i}: slope {s}"))?;
            }
        }
        let normal = &z - basis.project(&z);
        let bad = &v + &normal * (0.1 * v.norm() / normal.norm());
        check(!point.is_tangent(&bad).unwrap(), || format!("instance {i}: perturbation did not leave tangent space"))?;
        match tangency_order(&point, &bad, &grid).map_err(|e| format!("instance {i}: {e}"))? {
            Tangency::Exact => return Err(format!("non-tangent instance {i}: reported exact")),
            Tangency::Slope(s) => {
                lo1 = lo1.min(s);
                hi1 = hi1.max(s);
                check((0.9..=1.1).contains(&s), || format!("non-tangent instance {i}: slope {s}"))?;
            }
        }
    }
    Ok(format!(
        "tangent slopes in [{lo2:.3}, {hi2:.3}] ({exact} exact), perturbed slopes in [{lo1:.3}, {hi1:.3}]"
    ))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("dimension formula", Duration::from_secs(5), dimension_formula),
        ("projection update", Duration::from_secs(5), projection_calculus),
        ("common complements", Duration::from_secs(5), common_complements),
        ("F_k connectivity", Duration::from_secs(60), fk_connectivity),
        ("Φ_{m,n} connectivity", Duration::from_secs(30), phi_connectivity),
        ("chain equivalence", Duration::from_secs(30), chain_equivalence),
        ("literal flip audit", Duration::from_secs(60), literal_flip_audit),
        ("GL components", Duration::from_secs(60), gl_components),
        ("tangency dichotomy", Duration::from_secs(20), tangency_dichotomy),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > *budget => Err(format!("{msg}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("criterion {} {name}: PASS ({msg}; {took:.2?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({msg}; {took:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {}/9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
