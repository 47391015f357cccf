use ua_core::harness::{fit_slope, relative_error};
use ua_core::reference::{
    averaged_rhs, build_reference, integrate_averaged, recipe, run_splitting, Recipe,
    ReferencePolicy, ReferenceSolver, SplittingOrder, Strang,
};
use ua_core::spectral::hs_norm;
use ua_core::{Model, ModelId, SpatialField};

#[test]
fn published_recipes() {
    let r = recipe(ReferencePolicy::Paper, ModelId::Nkg, 1e-2, 0.4, 200, 64);
    assert_eq!(r.solver, ReferenceSolver::Yoshida4);
    assert!((r.dt(0.4) - 1e-2 * 0.4 / 2000.0).abs() < 1e-18);
    assert_eq!(r.nx, 256);
    let r = recipe(ReferencePolicy::Paper, ModelId::Nls, 1e-4, 0.4, 64, 2048);
    assert_eq!(r.solver, ReferenceSolver::Ua2);
    assert_eq!((r.ntau, r.nx), (4096, 128));
    // Δt = 2π/512000 rounded to a whole number of steps
    assert_eq!(r.n_steps, 32595);
    let d = recipe(ReferencePolicy::Desk, ModelId::Nls, 1e-4, 0.4, 64, 2048);
    assert_eq!(
        d,
        Recipe {
            solver: ReferenceSolver::Ua2,
            n_steps: 1 << 14,
            nx: 64,
            ntau: 2048
        }
    );
}

#[test]
fn repeated_builds_agree() {
    for (id, nx, ntau, eps) in [(ModelId::Nls, 16, 128, 0.1), (ModelId::Nkg, 32, 16, 1e-3)] {
        let m = Model::paper(id, nx, eps).unwrap();
        let u0 = m.paper_initial_data().unwrap();
        let a = build_reference(&m, &u0, 0.02, ReferencePolicy::Desk, ntau).unwrap();
        let b = build_reference(&m, &u0, 0.02, ReferencePolicy::Desk, ntau).unwrap();
        assert!(relative_error(&a.physical(), &b.physical(), 1.0).unwrap() <= 1e-8);
        assert_eq!(a.checksum.to_bits(), b.checksum.to_bits());
        assert!(a.self_error.is_finite() && a.self_error >= 0.0);
    }
}

#[test]
fn strang_halving_differs_at_third_order() {
    for id in [ModelId::Nls, ModelId::Nkg] {
        let m = Model::paper(id, 32, 0.5).unwrap();
        let u = m.paper_initial_data().unwrap();
        let mut diffs = Vec::new();
        let dts = [0.02, 0.01, 0.005];
        for dt in dts {
            let one = Strang::new(&m, dt).unwrap().step(&u);
            let half = Strang::new(&m, dt / 2.0).unwrap();
            let two = half.step(&half.step(&u));
            diffs.push(hs_norm(&(&one - &two), 0.0));
        }
        let s = fit_slope(&dts, &diffs).unwrap();
        assert!((s - 3.0).abs() < 0.2, "{id}: slope {s}");
    }
}

#[test]
fn nkg_strang_stays_real_over_a_run() {
    let m = Model::paper(ModelId::Nkg, 64, 0.05).unwrap();
    let v = run_splitting(
        &m,
        &m.paper_initial_data().unwrap(),
        0.4,
        400,
        SplittingOrder::Strang,
    )
    .unwrap();
    let u = m.physical(&v);
    let im = SpatialField::new(
        *u.grid(),
        1,
        u.values()
            .iter()
            .map(|z| ua_core::Complex64::new(z.im, 0.0))
            .collect(),
    )
    .unwrap();
    assert!(hs_norm(&im, 1.0) <= 1e-8 * hs_norm(&u, 1.0));
}

#[test]
fn nls_strang_conserves_mass_over_a_run() {
    let m = Model::paper(ModelId::Nls, 64, 0.01).unwrap();
    let u0 = m.paper_initial_data().unwrap();
    let u = run_splitting(&m, &u0, 0.4, 2000, SplittingOrder::Strang).unwrap();
    assert!((hs_norm(&u, 0.0) - hs_norm(&u0, 0.0)).abs() <= 1e-12);
}

#[test]
fn averaged_integration_is_fourth_order() {
    let m = Model::paper(ModelId::Nls, 16, 0.1).unwrap();
    let w0 = m.paper_initial_data().unwrap();
    let fine = integrate_averaged(&m, &w0, 0.4, 256, 128).unwrap();
    let e: Vec<f64> = [8, 16]
        .iter()
        .map(|&n| {
            relative_error(
                &integrate_averaged(&m, &w0, 0.4, n, 128).unwrap(),
                &fine,
                1.0,
            )
            .unwrap()
        })
        .collect();
    let ratio = e[0] / e[1];
    assert!((ratio / 16.0).log2().abs() < 0.3, "ratio {ratio}");
    let zero = SpatialField::zeros(*w0.grid(), 1);
    assert_eq!(
        integrate_averaged(&m, &zero, 0.4, 4, 128)
            .unwrap()
            .max_abs(),
        0.0
    );
}

#[test]
fn averaged_quadrature_is_converged() {
    let m = Model::paper(ModelId::Nls, 16, 0.1).unwrap();
    let w = m.paper_initial_data().unwrap();
    let a = averaged_rhs(&m, &w, 512).unwrap();
    let b = averaged_rhs(&m, &w, 1024).unwrap();
    assert!((&a - &b).max_abs() <= 1e-12);
    let k = Model::paper(ModelId::Nkg, 32, 0.1).unwrap();
    let v = k.paper_initial_data().unwrap();
    let a = averaged_rhs(&k, &v, 16).unwrap();
    let b = averaged_rhs(&k, &v, 32).unwrap();
    assert!((&a - &b).max_abs() <= 1e-12);
}
