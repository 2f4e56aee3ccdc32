//! Conjugate gradient solvers on the DG operator.

use dgpmg::basis::ReferenceBasis;
use dgpmg::krylov::{cg, inexact_pcg, mg_solve, mgcg, IdentityPreconditioner};
use dgpmg::mesh::{CartesianMesh2D, NodalField};
use dgpmg::multigrid::{build_hierarchy, CycleConfig, OverlapPolicy, SmootherPolicy};
use dgpmg::schwarz::{SchwarzMethod, SubdomainFamily, WeightingKind};
use dgpmg::{DgParams, SystemOperator};

fn setup(nel: usize, p: usize) -> (CartesianMesh2D, SystemOperator, NodalField) {
    let mesh = CartesianMesh2D::uniform(2.0, 2.0, nel, nel).unwrap();
    let basis = ReferenceBasis::new(p).unwrap();
    let op = SystemOperator::assemble(&mesh, &basis, DgParams::default()).unwrap();
    let f = NodalField::random(op.shape(), 9);
    (mesh, op, f)
}

fn policy(method: SchwarzMethod, family: SubdomainFamily, overlap: OverlapPolicy) -> SmootherPolicy {
    SmootherPolicy {
        method,
        family,
        overlap,
        weighting: WeightingKind::Quintic,
    }
}

#[test]
fn cg_matches_dense_minimum_norm_solution() {
    let (_, op, f) = setup(3, 2);
    let zero = vec![0.0; f.len()];
    let (u, rep) = cg(&op, f.as_slice(), &zero, 1e13, 2000).unwrap();
    assert!(rep.converged);
    let pinv = op.to_dense().pseudo_inverse(1e-10).unwrap();
    let mut fc = nalgebra::DVector::from_column_slice(f.as_slice());
    let mean = fc.mean();
    fc.add_scalar_mut(-mean);
    let expected = pinv * fc;
    let scale = expected.amax();
    for (x, y) in u.iter().zip(expected.iter()) {
        assert!((x - y).abs() <= 1e-9 * scale, "{x} vs {y}");
    }
}

#[test]
fn identity_preconditioned_pcg_is_cg() {
    // Exact agreement holds while r stays orthogonal to r_old, so the
    // instance is small and the iteration count short.
    let (_, op, f) = setup(2, 2);
    let u0 = NodalField::random(op.shape(), 2);
    let (u1, r1) = cg(&op, f.as_slice(), u0.as_slice(), 1e12, 6).unwrap();
    let (u2, r2) = inexact_pcg(&op, &IdentityPreconditioner, f.as_slice(), u0.as_slice(), 6, 0.0).unwrap();
    assert_eq!(r1.history.len(), r2.history.len());
    for (a, b) in r1.history.iter().zip(&r2.history) {
        assert!((a - b).abs() <= 1e-12 * r1.history[0], "{a} vs {b}");
    }
    let scale = u1.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for (a, b) in u1.iter().zip(&u2) {
        assert!((a - b).abs() <= 1e-12 * scale);
    }
}

#[test]
fn mgcg_reaches_ten_decades_without_residual_growth() {
    let (mesh, op, f) = setup(8, 8);
    let u0 = NodalField::random(op.shape(), 1);
    let r0 = {
        let mut fc = f.clone();
        let mean = fc.mean();
        fc.as_mut_slice().iter_mut().for_each(|v| *v -= mean);
        let mut r = op.apply(&u0).unwrap();
        r.scale(-1.0);
        r.axpy(1.0, &fc).unwrap();
        r.norm2()
    };
    for (method, family, overlap) in [
        (SchwarzMethod::Additive, SubdomainFamily::ElementCentered, OverlapPolicy::LevelDependent),
        (SchwarzMethod::Multiplicative, SubdomainFamily::ElementCentered, OverlapPolicy::Fixed(0)),
        (SchwarzMethod::Additive, SubdomainFamily::FaceCentered, OverlapPolicy::Fixed(0)),
    ] {
        let h = build_hierarchy(&mesh, 8, DgParams::default(), policy(method, family, overlap), CycleConfig::default())
            .unwrap();
        let (u, rep) = mgcg(&h, &f, &u0, 100, 1e-10 * r0).unwrap();
        assert!(rep.converged, "{method:?} {family:?}");
        assert!((rep.history[0] - r0).abs() <= 1e-12 * r0);
        assert!(rep.history.iter().all(|&r| r <= 10.0 * r0));
        assert!(rep.iterations <= 25, "{method:?} {family:?}: {}", rep.iterations);
        // The recursive residual agrees with the true one.
        let mut r = op.apply(&u).unwrap();
        let mut fc = f.clone();
        let mean = fc.mean();
        fc.as_mut_slice().iter_mut().for_each(|v| *v -= mean);
        r.scale(-1.0);
        r.axpy(1.0, &fc).unwrap();
        assert!(r.norm2() <= 2e-10 * r0);
    }
}

#[test]
fn stand_alone_multigrid_converges() {
    let (mesh, op, f) = setup(4, 4);
    let h = build_hierarchy(
        &mesh,
        4,
        DgParams::default(),
        policy(SchwarzMethod::Additive, SubdomainFamily::FaceCentered, OverlapPolicy::LevelDependent),
        CycleConfig::default(),
    )
    .unwrap();
    let u0 = NodalField::zeros(op.shape());
    let (_, rep) = mg_solve(&h, &f, &u0, 30, 1e-10 * f.norm2()).unwrap();
    assert!(rep.converged);
    assert!(rep.history.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn iteration_cap_is_reported() {
    let (_, op, f) = setup(4, 4);
    let zero = vec![0.0; f.len()];
    let (_, rep) = cg(&op, f.as_slice(), &zero, 1e10, 3).unwrap();
    assert!(!rep.converged);
    assert_eq!(rep.iterations, 3);
    assert_eq!(rep.history.len(), 4);
}
