use std::f64::consts::PI;

use proptest::prelude::*;
use vortexlab::asymptotics::{
    classify_first, classify_second, detect_blowup_points, diagnose, gradient_bounds, local_mass,
    mass_integrals, pohozaev_residual, DiagnosticsOptions, FirstClass, PohozaevOptions,
    SecondClass, DEFAULT_BLOWUP_MARGIN,
};
use vortexlab::solver::{
    continuation, newton_solve, schedule_from_eps, seed_state, BranchTag, CouplingParams,
    GudnasonSystem, NewtonOptions, Seed, SigmaRule, SolutionPair,
};
use vortexlab::torus::{Point, ScalarField, TorusGrid, VortexSet};
use vortexlab::Error;

/// A pair with `u₀ ≡ 0` and the given `u₁`, `u₂` (only sampled fields are used).
fn synthetic(grid: TorusGrid, eps: f64, u1: ScalarField, u2: ScalarField) -> SolutionPair {
    SolutionPair {
        params: CouplingParams::from_eps_sigma(eps, eps * eps, 1.0).unwrap(),
        vortices: VortexSet::single(Point::new(0.05, 0.05), 1).unwrap(),
        v1: u1,
        u2,
        u0: ScalarField::zeros(grid),
        residual_inf: 0.0,
        iterations: 0,
        branch: BranchTag::Unspecified,
        spurious: false,
        trace: Vec::new(),
    }
}

/// `u₁ = 2 ln ε + ln Σ 8λ²/(1 + λ²|x - q|²)²`, one Liouville bubble of
/// width `1/λ` and mass `8π` per centre in the local-mass density
/// `e^{u₁}(1 - e^{u₁})/ε²`.
fn bubbles(grid: TorusGrid, eps: f64, width: f64, centers: &[Point]) -> ScalarField {
    let l2 = 1.0 / (width * width);
    ScalarField::from_fn(grid, |p| {
        let density: f64 = centers
            .iter()
            .map(|q| 8.0 * l2 / (1.0 + l2 * grid.distance(p, *q).powi(2)).powi(2))
            .sum();
        2.0 * eps.ln() + density.ln()
    })
}

/// Local mass of one bubble on `B_d`, `R = d/width`:
/// `8π R²/(1+R²) - (64π/3) ε²λ² (1 - (1+R²)⁻³)`.
fn bubble_mass(eps: f64, width: f64, d: f64) -> f64 {
    let r2 = (d / width).powi(2);
    let el2 = (eps / width).powi(2);
    8.0 * PI * r2 / (1.0 + r2) - 64.0 * PI / 3.0 * el2 * (1.0 - (1.0 + r2).powi(-3))
}

fn topological_run(eps: &[f64], n: usize) -> Vec<SolutionPair> {
    let grid = TorusGrid::new(3.0, 3.0, n, n).unwrap();
    let vortices = VortexSet::single(Point::new(0.75, 0.75), 1).unwrap();
    let schedule = schedule_from_eps(eps, SigmaRule::Quadratic { factor: 1.0 }, 1.0).unwrap();
    continuation(
        &grid,
        &vortices,
        &schedule,
        &Seed::default(),
        &NewtonOptions::default(),
    )
    .unwrap()
    .solutions
}

#[test]
fn local_mass_of_a_liouville_bubble() {
    let grid = TorusGrid::unit(512).unwrap();
    let (eps, width) = (0.005, 0.02);
    let q = Point::new(0.6, 0.4);
    let u1 = bubbles(grid, eps, width, &[q]);
    let sol = synthetic(grid, eps, u1, ScalarField::constant(grid, -1.0));
    for d in [0.05, 0.1, 0.2] {
        let m = local_mass(&sol, q, d).unwrap();
        let exact = bubble_mass(eps, width, d);
        assert!((m - exact).abs() < 2e-3, "d = {d}: {m} vs {exact}");
    }
    assert!(local_mass(&sol, q, 0.3).is_err());
}

#[test]
fn seeded_bubbles_are_recovered() {
    let grid = TorusGrid::unit(256).unwrap();
    let (eps, width) = (0.005, 0.02);
    let one = [Point::new(0.3, 0.7)];
    let sol = synthetic(
        grid,
        eps,
        bubbles(grid, eps, width, &one),
        ScalarField::constant(grid, -1.0),
    );
    let sites = detect_blowup_points(&sol, DEFAULT_BLOWUP_MARGIN);
    assert_eq!(sites.len(), 1);
    assert!(grid.distance(sites[0].point, one[0]) < 0.05);

    let two = [Point::new(0.25, 0.5), Point::new(0.75, 0.5)];
    let sol = synthetic(
        grid,
        eps,
        bubbles(grid, eps, width, &two),
        ScalarField::constant(grid, -1.0),
    );
    let sites = detect_blowup_points(&sol, DEFAULT_BLOWUP_MARGIN);
    assert_eq!(sites.len(), 2);
    for q in two {
        assert!(sites.iter().any(|s| grid.distance(s.point, q) < 0.05));
    }

    let flat = synthetic(
        grid,
        eps,
        ScalarField::constant(grid, -0.2),
        ScalarField::constant(grid, -1.0),
    );
    assert!(detect_blowup_points(&flat, DEFAULT_BLOWUP_MARGIN).is_empty());
}

#[test]
fn diagnose_shrinks_overlapping_balls() {
    let grid = TorusGrid::unit(1024).unwrap();
    let (eps, width) = (1e-4, 0.004);
    let two = [Point::new(0.4, 0.5), Point::new(0.65, 0.5)];
    let sol = synthetic(
        grid,
        eps,
        bubbles(grid, eps, width, &two),
        ScalarField::constant(grid, -1.0),
    );
    let report = diagnose(&[sol], &DiagnosticsOptions::default()).unwrap();
    assert_eq!(report.blowup_sites.len(), 2);
    for s in &report.blowup_sites {
        assert!(s.radius < 0.125 && s.radius > 0.1);
        assert!(s.quantized, "{s:?}");
    }
    assert!(report.notes.iter().any(|n| n.contains("shrunk")));
    assert_eq!(report.first_class, FirstClass::Undetermined);
}

#[test]
fn pohozaev_separates_solutions_from_non_solutions() {
    let grid = TorusGrid::unit(256).unwrap();
    let q = Point::new(0.5, 0.5);
    let opts = PohozaevOptions::default();
    // constant fields carry no gradient terms and balance trivially off the vortices
    let flat = synthetic(
        grid,
        0.1,
        ScalarField::constant(grid, -0.4),
        ScalarField::constant(grid, -0.3),
    );
    let r = pohozaev_residual(&flat, q, 0.2, SecondClass::S1, &opts).unwrap();
    assert!(r.relative() < 1e-12, "{r:?}");
    // a standing wave is not a solution and fails
    let bump = ScalarField::from_fn(grid, |p| -1.0 + 0.9 * (2.0 * PI * (p.x - q.x)).cos());
    let sol = synthetic(grid, 0.3, bump, ScalarField::constant(grid, -0.3));
    let r = pohozaev_residual(&sol, q, 0.2, SecondClass::S1, &opts).unwrap();
    assert!(r.relative() > 0.1, "{r:?}");
    // a constant v₁ at a vortex is not a solution either
    let params = CouplingParams::from_eps_sigma(0.1, 0.01, 1.0).unwrap();
    let system = GudnasonSystem::new(grid, params, VortexSet::single(q, 1).unwrap());
    let at_vortex = SolutionPair {
        params,
        vortices: system.vortices().clone(),
        v1: ScalarField::constant(grid, -0.5),
        u2: ScalarField::constant(grid, -0.3),
        u0: system.u0().clone(),
        residual_inf: f64::NAN,
        iterations: 0,
        branch: BranchTag::Unspecified,
        spurious: false,
        trace: Vec::new(),
    };
    let r = pohozaev_residual(&at_vortex, q, 0.2, SecondClass::S1, &opts).unwrap();
    assert_eq!(r.m, 1);
    assert!(r.relative() > 1e-2, "{r:?}");
}

#[test]
fn pohozaev_rejects_bad_discs() {
    let grid = TorusGrid::unit(64).unwrap();
    let sol = synthetic(
        grid,
        0.1,
        ScalarField::constant(grid, -1.0),
        ScalarField::constant(grid, -1.0),
    );
    let opts = PohozaevOptions::default();
    let q = Point::new(0.5, 0.5);
    assert!(pohozaev_residual(&sol, q, 0.25, SecondClass::S1, &opts).is_err());
    assert!(pohozaev_residual(&sol, q, 0.0, SecondClass::S1, &opts).is_err());
    // the synthetic vortex sits at (0.05, 0.05)
    let near = Point::new(0.2, 0.2);
    assert!(pohozaev_residual(&sol, near, 0.2, SecondClass::S1, &opts).is_err());
}

#[test]
fn pohozaev_scalar_reduction() {
    // σ = 0, u₂ ≡ 0: every σ and u₂ term drops out and the scalar balance holds
    let grid = TorusGrid::new(3.0, 3.0, 256, 256).unwrap();
    let q = Point::new(0.75, 0.75);
    let params = CouplingParams::decoupled(0.1).unwrap();
    let system = GudnasonSystem::new(grid, params, VortexSet::single(q, 1).unwrap());
    let mut init = seed_state(&system, &Seed::default()).unwrap();
    init.u2 = ScalarField::zeros(grid);
    let sol = newton_solve(
        &system,
        init,
        BranchTag::Topological,
        &NewtonOptions::default(),
    )
    .unwrap();
    let opts = PohozaevOptions::default();
    let a = pohozaev_residual(&sol, q, 0.2, SecondClass::S1, &opts).unwrap();
    let b = pohozaev_residual(&sol, q, 0.2, SecondClass::Undetermined, &opts).unwrap();
    assert_eq!(a.boundary_cross, 0.0);
    assert!(a.relative() < 1e-4, "{a:?}");
    // the potential constants cancel between boundary and bulk
    assert!((a.residual - b.residual).abs() < 1e-9 * a.scale);
}

#[test]
fn short_and_frozen_runs_are_undetermined() {
    let run = topological_run(&[0.2, 0.15, 0.1], 96);
    assert!(matches!(
        classify_second(&run),
        Err(Error::TooFewSteps { .. })
    ));
    assert!(matches!(
        classify_first(&run, 0.4),
        Err(Error::TooFewSteps { .. })
    ));
    let report = diagnose(&run, &DiagnosticsOptions::default()).unwrap();
    assert_eq!(report.first_class, FirstClass::Undetermined);
    assert_eq!(report.second_class, SecondClass::Undetermined);
    assert!(report.gradient.is_some());

    let frozen = vec![run[2].clone(); 4];
    assert_eq!(
        classify_second(&frozen).unwrap().class,
        SecondClass::Undetermined
    );
    assert_eq!(
        classify_first(&frozen, 0.4).unwrap().class,
        FirstClass::Undetermined
    );

    assert!(matches!(
        gradient_bounds(&run[..1]),
        Err(Error::TooFewSteps { .. })
    ));
    let reversed: Vec<SolutionPair> = run.iter().rev().cloned().collect();
    assert!(classify_second(&[reversed.clone(), reversed].concat()).is_err());
}

#[test]
fn topological_labels_and_reproducibility() {
    let run = topological_run(&[0.2, 0.15, 0.1, 0.07, 0.05], 256);
    let opts = DiagnosticsOptions {
        vortex_radius: 0.4,
        ..Default::default()
    };
    let a = diagnose(&run, &opts).unwrap();
    assert_eq!(a.first_class, FirstClass::F1);
    assert_eq!(a.second_class, SecondClass::S1);
    let b = diagnose(&run, &opts).unwrap();
    assert_eq!(a, b);
    let back: vortexlab::asymptotics::DiagnosticsReport =
        serde_json::from_str(&a.to_json().unwrap()).unwrap();
    assert_eq!(back, a);

    // local mass away from the vortex is far below 8π
    let last = run.last().unwrap();
    let m = local_mass(last, Point::new(2.0, 2.0), 0.2).unwrap();
    assert!((0.0..1.0).contains(&m), "{m}");
    let (i1, i2) = mass_integrals(last);
    assert!(i1 > 0.0 && i2 > 0.0);
    assert!(a.violations(1e-6).is_empty(), "{:?}", a.violations(1e-6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mass_integrals_nonnegative_for_negative_fields(
        c1 in -6.0..-1e-3f64, c2 in -6.0..-1e-3f64, amp in 0.0..1.0f64, eps in 0.03..0.3f64
    ) {
        let grid = TorusGrid::unit(32).unwrap();
        let u1 = ScalarField::from_fn(grid, |p| c1 - amp * (6.0 * p.x).sin().powi(2));
        let u2 = ScalarField::from_fn(grid, |p| c2 - amp * (4.0 * p.y).cos().powi(2));
        let (i1, i2) = mass_integrals(&synthetic(grid, eps, u1, u2));
        prop_assert!(i1 >= 0.0 && i2 >= 0.0);
    }

    #[test]
    fn sigma_zero_gives_zero_second_mass(c1 in -4.0..-0.01f64, eps in 0.03..0.3f64) {
        let grid = TorusGrid::unit(32).unwrap();
        let mut sol = synthetic(grid, eps, ScalarField::constant(grid, c1), ScalarField::zeros(grid));
        sol.params = CouplingParams::decoupled(eps).unwrap();
        prop_assert_eq!(mass_integrals(&sol).1, 0.0);
    }
}
