//! Schwarz smoothers against dense brute-force realizations.

use dgpmg::basis::ReferenceBasis;
use dgpmg::mesh::{CartesianMesh2D, FieldShape, NodalField};
use dgpmg::operator::project_null_space;
use dgpmg::schwarz::{
    build_subdomains, build_weights, element_coordinates, overlap_width, restrict_operator_1d,
    solve_subdomain, SchwarzMethod, SchwarzSmoother, SmootherConfig, SubdomainFamily, SubdomainKind,
    SubdomainSpec, WeightingKind,
};
use dgpmg::{DgParams, SystemOperator};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn setup(nel: usize, p: usize, beta: f64) -> (CartesianMesh2D, ReferenceBasis, SystemOperator) {
    let mesh = CartesianMesh2D::uniform(2.0, 2.0, nel, nel).unwrap();
    let basis = ReferenceBasis::new(p).unwrap();
    let op = SystemOperator::assemble(&mesh, &basis, DgParams::new(1.0, [beta, beta]).unwrap()).unwrap();
    (mesh, basis, op)
}

/// Storage offsets of a subdomain's nodes, direction 1 fastest.
fn subdomain_offsets(spec: &SubdomainSpec, shape: FieldShape) -> Vec<usize> {
    let [n1, n2] = shape.dims();
    let g1: Vec<usize> = spec.ranges[0].indices(n1).collect();
    let g2: Vec<usize> = spec.ranges[1].indices(n2).collect();
    let mut out = Vec::new();
    for &gj in &g2 {
        for &gi in &g1 {
            out.push(shape.offset_global(gi, gj));
        }
    }
    out
}

fn dense_local(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, k| a[(idx[i], idx[k])])
}

fn config(method: SchwarzMethod, family: SubdomainFamily, overlap: usize, weighting: WeightingKind) -> SmootherConfig {
    SmootherConfig {
        method,
        family,
        overlap,
        weighting,
    }
}

fn kinds(family: SubdomainFamily) -> Vec<SubdomainKind> {
    match family {
        SubdomainFamily::ElementCentered => vec![SubdomainKind::ElementCentered],
        SubdomainFamily::FaceCentered => vec![SubdomainKind::FaceCentered(0), SubdomainKind::FaceCentered(1)],
    }
}

#[test]
fn restriction_matches_dense_submatrix() {
    let (_, basis, op) = setup(4, 2, 0.25);
    let dense = op.dir(0).to_dense();
    let mesh = CartesianMesh2D::uniform(2.0, 2.0, 4, 4).unwrap();
    for kind in [SubdomainKind::ElementCentered, SubdomainKind::FaceCentered(0)] {
        for spec in build_subdomains(&mesh, &basis, kind, 1).unwrap() {
            let r = spec.ranges[0];
            let idx: Vec<usize> = r.indices(12).collect();
            let (mass, stiff) = restrict_operator_1d(op.dir(0), r).unwrap();
            let reference = dense_local(&dense, &idx);
            assert!((stiff.clone() - reference).abs().max() <= 1e-13);
            for (a, &g) in idx.iter().enumerate() {
                assert_eq!(mass[a], op.dir(0).mass()[g]);
            }
            let ev = nalgebra::SymmetricEigen::new(stiff).eigenvalues;
            assert!(ev.min() > 0.0);
        }
    }
    let whole = dgpmg::schwarz::Range1D { start: 0, len: 12 };
    assert!(restrict_operator_1d(op.dir(0), whole).is_err());
}

#[test]
fn fdm_equals_dense_inverse_on_every_subdomain() {
    for p in [2, 4] {
        let (_, basis, op) = setup(4, p, 0.0);
        let dense = op.to_dense();
        let shape = op.shape();
        for family in [SubdomainFamily::ElementCentered, SubdomainFamily::FaceCentered] {
            for overlap in [0, 1, 2] {
                let cfg = config(SchwarzMethod::Additive, family, overlap, WeightingKind::Quintic);
                let sm = SchwarzSmoother::new(&op, &basis, cfg).unwrap();
                for part in 0..sm.num_partitions() {
                    for (s, spec) in sm.subdomains(part).enumerate() {
                        let idx = subdomain_offsets(spec, shape);
                        let ass = dense_local(&dense, &idx);
                        let r = DVector::from_fn(idx.len(), |i, _| ((i * 7 + s) % 11) as f64 - 5.0);
                        let x = ass.clone().lu().solve(&r).unwrap();
                        let y = solve_subdomain(sm.factor(part, s), r.as_slice()).unwrap();
                        let err = (DVector::from_vec(y) - &x).norm() / x.norm();
                        assert!(err <= 1e-10, "P={p} {family:?} n_o={overlap} sd {s}: {err}");
                    }
                }
            }
        }
    }
}

#[test]
fn subdomain_eigenvalues_are_positive() {
    for p in [2, 4, 8] {
        let (_, basis, op) = setup(8, p, 0.0);
        for family in [SubdomainFamily::ElementCentered, SubdomainFamily::FaceCentered] {
            let overlap = 1 + p / 8;
            let cfg = config(SchwarzMethod::Multiplicative, family, overlap, WeightingKind::Unweighted);
            let sm = SchwarzSmoother::new(&op, &basis, cfg).unwrap();
            for part in 0..sm.num_partitions() {
                for s in 0..sm.subdomains(part).count() {
                    for d in 0..2 {
                        assert!(sm.factor(part, s).factor(d).eigenvalues().iter().all(|&l| l > 0.0));
                    }
                }
            }
        }
    }
}

/// One additive sweep realized with explicit restrictions and dense solves.
fn brute_additive(
    op: &SystemOperator,
    basis: &ReferenceBasis,
    mesh: &CartesianMesh2D,
    cfg: SmootherConfig,
    u: &NodalField,
    f: &NodalField,
) -> NodalField {
    let dense = op.to_dense();
    let mut x = DVector::from_column_slice(u.as_slice());
    let fv = DVector::from_column_slice(f.as_slice());
    for kind in kinds(cfg.family) {
        let r = &fv - &dense * &x;
        let mut dx = DVector::zeros(x.len());
        for spec in build_subdomains(mesh, basis, kind, cfg.overlap).unwrap() {
            let idx = subdomain_offsets(&spec, op.shape());
            let w = build_weights(&spec, basis, cfg.weighting);
            let rs = DVector::from_fn(idx.len(), |i, _| r[idx[i]]);
            let ds = dense_local(&dense, &idx).lu().solve(&rs).unwrap();
            let n1 = spec.ranges[0].len;
            for (k, &g) in idx.iter().enumerate() {
                dx[g] += w.at(k % n1, k / n1) * ds[k];
            }
        }
        x += dx;
    }
    NodalField::from_vec(op.shape(), x.as_slice().to_vec()).unwrap()
}

/// Sequential block Gauss-Seidel over the subdomains.
fn brute_multiplicative(
    op: &SystemOperator,
    basis: &ReferenceBasis,
    mesh: &CartesianMesh2D,
    cfg: SmootherConfig,
    u: &NodalField,
    f: &NodalField,
    reverse: bool,
) -> NodalField {
    let dense = op.to_dense();
    let mut x = DVector::from_column_slice(u.as_slice());
    let fv = DVector::from_column_slice(f.as_slice());
    let mut order = kinds(cfg.family);
    if reverse {
        order.reverse();
    }
    for kind in order {
        let mut specs = build_subdomains(mesh, basis, kind, cfg.overlap).unwrap();
        if reverse {
            specs.reverse();
        }
        for spec in specs {
            let idx = subdomain_offsets(&spec, op.shape());
            let r = &fv - &dense * &x;
            let rs = DVector::from_fn(idx.len(), |i, _| r[idx[i]]);
            let ds = dense_local(&dense, &idx).lu().solve(&rs).unwrap();
            for (k, &g) in idx.iter().enumerate() {
                x[g] += ds[k];
            }
        }
    }
    NodalField::from_vec(op.shape(), x.as_slice().to_vec()).unwrap()
}

fn max_diff(a: &NodalField, b: &NodalField) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn additive_sweep_matches_brute_force() {
    let (mesh, basis, op) = setup(4, 2, 0.0);
    let u = NodalField::random(op.shape(), 1);
    let f = project_null_space(&NodalField::random(op.shape(), 2));
    for family in [SubdomainFamily::ElementCentered, SubdomainFamily::FaceCentered] {
        for (overlap, weighting) in [
            (0, WeightingKind::Unweighted),
            (1, WeightingKind::Arithmetic),
            (1, WeightingKind::Cubic),
            (2, WeightingKind::Quintic),
        ] {
            let cfg = config(SchwarzMethod::Additive, family, overlap, weighting);
            let sm = SchwarzSmoother::new(&op, &basis, cfg).unwrap();
            let mut got = u.clone();
            sm.additive_sweep(&op, &mut got, &f, false).unwrap();
            let want = brute_additive(&op, &basis, &mesh, cfg, &u, &f);
            let d = max_diff(&got, &want);
            assert!(d <= 1e-11, "{family:?} n_o={overlap} {weighting:?}: {d}");
        }
    }
}

#[test]
fn multiplicative_sweep_matches_brute_force() {
    let (mesh, basis, op) = setup(4, 2, 0.0);
    let u = NodalField::random(op.shape(), 3);
    let f = project_null_space(&NodalField::random(op.shape(), 4));
    for family in [SubdomainFamily::ElementCentered, SubdomainFamily::FaceCentered] {
        for overlap in [0, 1] {
            for reverse in [false, true] {
                let cfg = config(SchwarzMethod::Multiplicative, family, overlap, WeightingKind::Unweighted);
                let sm = SchwarzSmoother::new(&op, &basis, cfg).unwrap();
                let mut got = u.clone();
                sm.multiplicative_sweep(&op, &mut got, &f, reverse).unwrap();
                let want = brute_multiplicative(&op, &basis, &mesh, cfg, &u, &f, reverse);
                let d = max_diff(&got, &want);
                assert!(d <= 1e-11, "{family:?} n_o={overlap} reverse={reverse}: {d}");
            }
        }
    }
}

#[test]
fn exact_solution_is_a_fixed_point() {
    let (_, basis, op) = setup(4, 4, 0.0);
    let u = NodalField::random(op.shape(), 9);
    let f = op.apply(&u).unwrap();
    for method in [SchwarzMethod::Additive, SchwarzMethod::Multiplicative] {
        for family in [SubdomainFamily::ElementCentered, SubdomainFamily::FaceCentered] {
            let sm = SchwarzSmoother::new(&op, &basis, config(method, family, 1, WeightingKind::Quintic)).unwrap();
            let mut v = u.clone();
            sm.smooth(&op, &mut v, &f, 2, false).unwrap();
            assert!(max_diff(&u, &v) <= 1e-12 * u.norm2());
        }
    }
}

#[test]
fn local_residual_vanishes_after_a_visit() {
    let (_, basis, op) = setup(4, 4, 0.0);
    let cfg = config(SchwarzMethod::Multiplicative, SubdomainFamily::ElementCentered, 2, WeightingKind::Unweighted);
    let sm = SchwarzSmoother::new(&op, &basis, cfg).unwrap();
    let f = project_null_space(&NodalField::random(op.shape(), 5));
    let mut u = NodalField::zeros(op.shape());
    sm.multiplicative_sweep(&op, &mut u, &f, false).unwrap();
    let last = sm.subdomains(0).last().unwrap().clone();
    let mut r = f.clone();
    r.axpy(-1.0, &op.apply(&u).unwrap()).unwrap();
    let local = subdomain_offsets(&last, op.shape());
    let worst = local.iter().map(|&g| r[g].abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-12 * f.norm2(), "{worst}");
}

#[test]
fn two_steps_equal_forward_then_reversed() {
    let (_, basis, op) = setup(4, 2, 0.0);
    let f = project_null_space(&NodalField::random(op.shape(), 6));
    for family in [SubdomainFamily::ElementCentered, SubdomainFamily::FaceCentered] {
        let cfg = config(SchwarzMethod::Multiplicative, family, 1, WeightingKind::Unweighted);
        let sm = SchwarzSmoother::new(&op, &basis, cfg).unwrap();
        let mut a = NodalField::random(op.shape(), 7);
        let mut b = a.clone();
        let before = a.clone();
        sm.smooth(&op, &mut a, &f, 2, false).unwrap();
        sm.multiplicative_sweep(&op, &mut b, &f, false).unwrap();
        sm.multiplicative_sweep(&op, &mut b, &f, true).unwrap();
        assert_eq!(a, b);
        let mut c = before.clone();
        sm.smooth(&op, &mut c, &f, 0, false).unwrap();
        assert_eq!(c, before);
    }
}

/// The map rhs -> (forward then reversed sweep from zero) must be symmetric.
/// Weighted additive corrections are not, so only unweighted ones are checked.
#[test]
fn symmetric_double_sweep() {
    let (_, basis, op) = setup(4, 2, 0.0);
    for (method, family) in [
        (SchwarzMethod::Multiplicative, SubdomainFamily::ElementCentered),
        (SchwarzMethod::Multiplicative, SubdomainFamily::FaceCentered),
        (SchwarzMethod::Additive, SubdomainFamily::FaceCentered),
    ] {
        let sm = SchwarzSmoother::new(&op, &basis, config(method, family, 1, WeightingKind::Unweighted)).unwrap();
        let apply = |g: &NodalField| {
            let mut x = NodalField::zeros(op.shape());
            sm.smooth(&op, &mut x, g, 2, false).unwrap();
            x
        };
        for seed in 0..3 {
            let u = NodalField::random(op.shape(), 10 + seed);
            let v = NodalField::random(op.shape(), 20 + seed);
            let lhs = v.dot(&apply(&u)).unwrap();
            let rhs = u.dot(&apply(&v)).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0), "{method:?} {family:?}: {lhs} {rhs}");
        }
    }
}

fn coverage(sm: &SchwarzSmoother, shape: FieldShape, part: usize) -> Vec<f64> {
    let mut acc = vec![0.0; shape.len()];
    let w = sm.weights(part);
    for spec in sm.subdomains(part) {
        let n1 = spec.ranges[0].len;
        for (k, g) in subdomain_offsets(spec, shape).into_iter().enumerate() {
            acc[g] += w.at(k % n1, k / n1);
        }
    }
    acc
}

#[test]
fn weights_form_a_partition_of_unity() {
    for p in [4, 8, 16] {
        let (_, basis, op) = setup(4, p, 0.0);
        let mut overlaps = vec![1, 2, 1 + p / 8];
        overlaps.dedup();
        for overlap in overlaps {
            for weighting in [WeightingKind::Arithmetic, WeightingKind::Cubic, WeightingKind::Quintic] {
                for family in [SubdomainFamily::ElementCentered, SubdomainFamily::FaceCentered] {
                    let cfg = config(SchwarzMethod::Additive, family, overlap, weighting);
                    let sm = SchwarzSmoother::new(&op, &basis, cfg).unwrap();
                    for part in 0..sm.num_partitions() {
                        let acc = coverage(&sm, op.shape(), part);
                        let worst = acc.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
                        assert!(worst <= 1e-12, "P={p} n_o={overlap} {weighting:?} {family:?}: {worst}");
                    }
                }
            }
        }
    }
}

#[test]
fn weight_profile_shapes() {
    let basis = ReferenceBasis::new(16).unwrap();
    let mesh = CartesianMesh2D::uniform(2.0, 2.0, 4, 4).unwrap();
    let spec = build_subdomains(&mesh, &basis, SubdomainKind::ElementCentered, 3).unwrap()[0].clone();
    let w = build_weights(&spec, &basis, WeightingKind::Quintic);
    let xi = element_coordinates(&basis, 3);
    let delta = overlap_width(&basis, 3);
    for (k, &x) in xi.iter().enumerate() {
        let v = w.weights[0][k];
        assert!((0.0..=1.0).contains(&v));
        if x.abs() <= 1.0 - delta {
            assert_eq!(v, 1.0);
        }
        if x.abs() > 1.0 - delta && x.abs() < 1.0 + delta {
            assert!(v > 0.0 && v < 1.0, "xi={x} w={v}");
        }
        let mirror = xi.len() - 1 - k;
        assert!((v - w.weights[0][mirror]).abs() < 1e-15);
    }
    let fc = build_subdomains(&mesh, &basis, SubdomainKind::FaceCentered(1), 3).unwrap()[0].clone();
    let wf = build_weights(&fc, &basis, WeightingKind::Cubic);
    let normal = &wf.weights[1];
    let half = normal.len() / 2;
    assert_eq!(normal[half], 1.0);
    assert!(normal[..half].windows(2).all(|s| s[0] <= s[1]));
    assert!(normal[half..].windows(2).all(|s| s[0] >= s[1]));
    // Unweighted profiles are identically one; arithmetic halves shared nodes.
    let unw = build_weights(&spec, &basis, WeightingKind::Unweighted);
    assert!(unw.weights.iter().flatten().all(|&v| v == 1.0));
    let ar = build_weights(&spec, &basis, WeightingKind::Arithmetic);
    for (k, &v) in ar.weights[0].iter().enumerate() {
        let shared = k < 6 || k >= xi.len() - 6;
        assert_eq!(v, if shared { 0.5 } else { 1.0 }, "k={k}");
    }
}

/// Largest jump of the nodal field across any element interface.
fn max_jump(u: &NodalField) -> f64 {
    let s = u.shape();
    let np = s.np;
    let [nel1, nel2] = s.nel;
    let mut worst: f64 = 0.0;
    for m2 in 0..nel2 {
        for m1 in 0..nel1 {
            for t in 0..np {
                let r = u.get((m1 + 1) % nel1, m2, 0, t) - u.get(m1, m2, np - 1, t);
                let up = u.get(m1, (m2 + 1) % nel2, t, 0) - u.get(m1, m2, t, np - 1);
                worst = worst.max(r.abs()).max(up.abs());
            }
        }
    }
    worst
}

fn jump_ratio(overlap: usize, weighting: WeightingKind) -> f64 {
    let (_, basis, op) = setup(8, 16, 0.0);
    let sm = SchwarzSmoother::new(
        &op,
        &basis,
        config(SchwarzMethod::Additive, SubdomainFamily::ElementCentered, overlap, weighting),
    )
    .unwrap();
    let mut e = NodalField::random(op.shape(), 42);
    let before = max_jump(&e);
    sm.additive_sweep(&op, &mut e, &NodalField::zeros(op.shape()), false).unwrap();
    max_jump(&e) / before
}

#[test]
fn overlap_smooths_interface_jumps() {
    let smooth = jump_ratio(3, WeightingKind::Cubic);
    assert!(smooth <= 0.1, "cubic n_o=3 ratio {smooth}");
    let rough = jump_ratio(0, WeightingKind::Cubic);
    assert!(rough >= 0.5, "n_o=0 ratio {rough}");
}

#[test]
fn weighted_additive_reduces_residual_monotonically() {
    let (_, basis, op) = setup(16, 8, 0.0);
    let cfg = config(SchwarzMethod::Additive, SubdomainFamily::ElementCentered, 2, WeightingKind::Quintic);
    let sm = SchwarzSmoother::new(&op, &basis, cfg).unwrap();
    let f = project_null_space(&NodalField::random(op.shape(), 8));
    let mut u = NodalField::zeros(op.shape());
    let mut prev = f.norm2();
    for it in 0..10 {
        sm.additive_sweep(&op, &mut u, &f, false).unwrap();
        let mut r = f.clone();
        r.axpy(-1.0, &op.apply(&u).unwrap()).unwrap();
        let now = r.norm2();
        assert!(now < prev, "iteration {it}: {now} >= {prev}");
        prev = now;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn subdomain_solve_is_linear(seed in 0u64..500, alpha in -10.0f64..10.0) {
        let (_, basis, op) = setup(3, 3, 0.0);
        let cfg = config(SchwarzMethod::Additive, SubdomainFamily::FaceCentered, 1, WeightingKind::Quintic);
        let sm = SchwarzSmoother::new(&op, &basis, cfg).unwrap();
        let f = sm.factor(1, (seed % 9) as usize);
        let [n1, n2] = f.dims();
        let r = NodalField::random(FieldShape { nel: [1, 1], np: 1 }, seed);
        let base: Vec<f64> = (0..n1 * n2).map(|k| ((k as f64 + 1.0) * r[0]).sin()).collect();
        let scaled: Vec<f64> = base.iter().map(|v| alpha * v).collect();
        let x = solve_subdomain(f, &base).unwrap();
        let y = solve_subdomain(f, &scaled).unwrap();
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((alpha * a - b).abs() <= 1e-13 * (1.0 + b.abs()) * 10.0);
        }
    }
}
