mod common;

use common::{gaussian, random_bumps, rng};
use nlslab::conserved::{energy, kinetic_bound_check, mass, mixed_sign_constant, ConservedRecord, KineticBound};
use nlslab::integrator::{evolve, InitialDataSpec, Nonlinearity, RunOutcome, SimulationConfig, Stepping};
use nlslab::spectral::{free_propagate, ComplexField, Grid};

/// `max (|λ₁|s^{p₁+2}/(p₁+2) − |λ₂|s^{p₂+2}/(p₂+2))/s²` by brute force on
/// `s ∈ [0, 10⁴]`: uniform steps of 1e−5 up to 10, then geometric.
fn scanned_constant(nl: &Nonlinearity) -> f64 {
    let f = |s: f64| {
        nl.lambda1.abs() * s.powf(nl.p1) / (nl.p1 + 2.0) - nl.lambda2.abs() * s.powf(nl.p2) / (nl.p2 + 2.0)
    };
    let mut best: f64 = 0.0;
    for k in 0..=1_000_000 {
        best = best.max(f(1e-5 * k as f64));
    }
    let mut s = 10.0;
    while s <= 1e4 {
        best = best.max(f(s));
        s *= 1.0001;
    }
    best
}

#[test]
fn mixed_sign_constant_matches_dense_scan() {
    for nl in [
        Nonlinearity::new(-1.0, 2.0, 1.0, 4.0),
        Nonlinearity::new(-3.0, 1.0, 0.5, 4.0),
        Nonlinearity::new(-0.2, 0.5, 2.0, 1.5),
    ] {
        let c = mixed_sign_constant(&nl);
        let scan = scanned_constant(&nl);
        assert!(c >= scan * (1.0 - 1e-12), "{nl:?}: {c} < {scan}");
        assert!((c - scan).abs() <= 1e-6 * c, "{nl:?}: {c} vs {scan}");
    }
}

#[test]
fn free_flow_preserves_mass() {
    let grid = Grid::new(3, 16.0, 32).unwrap();
    let u = random_bumps(&grid, &mut rng(2), 3, 1.0);
    for t in [0.1, 1.0, 10.0] {
        let m = mass(&free_propagate(&u, t).unwrap());
        assert!((m - mass(&u)).abs() <= 1e-12 * mass(&u));
    }
}

#[test]
fn record_components_add_up() {
    let grid = Grid::new(3, 16.0, 32).unwrap();
    let nl = Nonlinearity::new(-1.0, 1.0, 2.0, 4.0);
    let u = random_bumps(&grid, &mut rng(4), 3, 1.0);
    let r = energy(&u, &nl).unwrap();
    assert_eq!(r.energy, r.kinetic + r.potential[0] + r.potential[1]);
    assert!(r.mass > 0.0 && r.kinetic > 0.0);
    assert!(r.potential[0] < 0.0 && r.potential[1] > 0.0);
}

fn run_series(nl: Nonlinearity, init: InitialDataSpec, grid: Grid, t_end: f64) -> Vec<ConservedRecord> {
    let mut cfg = SimulationConfig::new(grid, nl, t_end, Stepping::fixed(0.01), init);
    cfg.snapshot_times = (0..=20).map(|k| k as f64 * t_end / 20.0).collect();
    let mut out = Vec::new();
    let mut obs = |t: f64, u: &ComplexField| -> nlslab::Result<()> {
        out.push(energy(u, &nl)?.at(t));
        Ok(())
    };
    let ev = evolve(&cfg, &mut [&mut obs]).unwrap();
    assert_eq!(ev.outcome, RunOutcome::Completed);
    out
}

#[test]
fn defocusing_kinetic_energy_stays_below_twice_the_energy() {
    let grid = Grid::new(3, 24.0, 32).unwrap();
    let nl = Nonlinearity::new(1.0, 2.0, 1.0, 4.0);
    let series = run_series(nl, InitialDataSpec::gaussian(0.6, 2.5), grid.clone(), 1.0);
    let report = kinetic_bound_check(&series, &nl, &grid).unwrap();
    assert_eq!(report.bound, KineticBound::Defocusing);
    assert!(report.holds(), "{report:?}");
    let e0 = series[0].energy;
    assert!(series.iter().all(|r| r.gradient_sq() <= 2.0 * e0 * (1.0 + 1e-6)));
}

#[test]
fn mixed_sign_kinetic_bound_holds_along_a_run() {
    let grid = Grid::new(3, 24.0, 32).unwrap();
    let nl = Nonlinearity::new(-1.0, 2.0, 1.0, 4.0);
    let series = run_series(nl, InitialDataSpec::gaussian(1.0, 2.0), grid.clone(), 1.0);
    let report = kinetic_bound_check(&series, &nl, &grid).unwrap();
    assert!(matches!(report.bound, KineticBound::MixedSign { .. }));
    assert!(report.holds(), "{report:?}");
    assert!(report.max_violation < 0.0);
}

#[test]
fn doubly_focusing_subcritical_bound_is_finite_and_holds() {
    let grid = Grid::new(3, 24.0, 32).unwrap();
    let nl = Nonlinearity::new(-1.0, 0.5, -1.0, 1.0);
    let series = run_series(nl, InitialDataSpec::gaussian(0.5, 2.0), grid.clone(), 1.0);
    let report = kinetic_bound_check(&series, &nl, &grid).unwrap();
    match &report.bound {
        KineticBound::Interpolation { gn_constants, .. } => assert!(gn_constants.iter().all(|c| *c > 0.0)),
        other => panic!("unexpected bound {other:?}"),
    }
    assert!(report.gradient_sq_bound.is_finite() && report.gradient_sq_bound > 0.0);
    assert!(report.holds(), "{report:?}");
}

#[test]
fn supercritical_focusing_has_no_bound() {
    let grid = Grid::new(3, 16.0, 16).unwrap();
    let nl = Nonlinearity::new(1.0, 2.0, -1.0, 4.0);
    let u = gaussian(&grid, 1.0, 1.5, &[]);
    let report = kinetic_bound_check(&[energy(&u, &nl).unwrap()], &nl, &grid).unwrap();
    assert!(matches!(report.bound, KineticBound::None { .. }));
    assert!(report.holds());
}

#[test]
fn zero_field_satisfies_every_bound() {
    let grid = Grid::new(3, 16.0, 16).unwrap();
    let zero = ComplexField::zeros(&grid);
    for nl in [
        Nonlinearity::new(1.0, 2.0, 1.0, 4.0),
        Nonlinearity::new(-1.0, 2.0, 1.0, 4.0),
        Nonlinearity::new(-1.0, 0.5, -1.0, 1.0),
    ] {
        let report = kinetic_bound_check(&[energy(&zero, &nl).unwrap()], &nl, &grid).unwrap();
        assert!(report.holds(), "{nl:?}: {report:?}");
    }
}

#[test]
fn empty_series_is_rejected() {
    let grid = Grid::new(3, 16.0, 16).unwrap();
    assert!(kinetic_bound_check(&[], &Nonlinearity::new(1.0, 2.0, 1.0, 4.0), &grid).is_err());
}
