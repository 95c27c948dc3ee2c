mod common;

use std::f64::consts::PI;

use common::{gaussian, rng};
use nlslab::integrator::{evolve, InitialDataSpec, Nonlinearity, RunOutcome, SimulationConfig, Stepping};
use nlslab::spectral::{free_propagate, gradient_norm_sq, ComplexField, Grid};
use nlslab::virial::{
    blowup_criteria, blowup_monitor, mass_current_y, variance, virial_consistency, virial_record, BlowupCase,
    VerdictStatus, VirialRecord,
};
use rand::Rng;

fn chirped(grid: &Grid, a: f64, sigma: f64, b: f64) -> ComplexField {
    InitialDataSpec::chirped_gaussian(a, sigma, b).sample(grid).unwrap()
}

/// `∫|x|² A²e^{−|x|²/σ²} = A²(πσ²)^{n/2} nσ²/2`.
fn gaussian_variance(n: usize, a: f64, sigma: f64) -> f64 {
    a * a * (PI * sigma * sigma).powf(n as f64 / 2.0) * n as f64 * sigma * sigma / 2.0
}

#[test]
fn zero_field_has_zero_moments() {
    let grid = Grid::new(3, 8.0, 8).unwrap();
    let zero = ComplexField::zeros(&grid);
    assert_eq!(variance(&zero).unwrap().value, 0.0);
    assert_eq!(mass_current_y(&zero).unwrap().value, 0.0);
}

#[test]
fn centred_gaussian_variance_matches_closed_form() {
    for (n, len, pts) in [(1, 40.0, 256), (2, 24.0, 64), (3, 16.0, 32)] {
        let grid = Grid::new(n, len, pts).unwrap();
        let v = variance(&gaussian(&grid, 1.3, 1.4, &[])).unwrap();
        let exact = gaussian_variance(n, 1.3, 1.4);
        assert!((v.value - exact).abs() <= 1e-8 * exact, "n = {n}");
        assert!(!v.untrusted);
    }
}

#[test]
fn translation_adds_the_shifted_moment() {
    let grid = Grid::new(3, 20.0, 32).unwrap();
    let x0 = [1.25, -0.625, 0.5];
    let (a, sigma) = (0.9, 1.3);
    let v = variance(&gaussian(&grid, a, sigma, &x0)).unwrap().value;
    let m = a * a * (PI * sigma * sigma).powf(1.5);
    let shift: f64 = x0.iter().map(|c| c * c).sum();
    let exact = gaussian_variance(3, a, sigma) + shift * m;
    assert!((v - exact).abs() <= 1e-8 * exact);
}

#[test]
fn chirp_sets_sign_and_size_of_the_current() {
    let grid = Grid::new(3, 16.0, 64).unwrap();
    for b in [-0.3, -0.05, 0.02, 0.2] {
        let u = chirped(&grid, 1.0, 1.2, b);
        let y = mass_current_y(&u).unwrap().value;
        let exact = -2.0 * b * gaussian_variance(3, 1.0, 1.2);
        assert_eq!(y.signum(), (-b).signum());
        assert!((y - exact).abs() <= 1e-6 * exact.abs(), "b = {b}: {y} vs {exact}");
    }
}

#[test]
fn spreading_gaussian_has_negative_current() {
    let grid = Grid::new(3, 24.0, 32).unwrap();
    let u0 = gaussian(&grid, 1.0, 1.5, &[]);
    assert!(mass_current_y(&u0).unwrap().value.abs() < 1e-12);
    for t in [0.1, 0.5, 2.0] {
        assert!(mass_current_y(&free_propagate(&u0, t).unwrap()).unwrap().value < 0.0);
    }
}

#[test]
fn free_variance_is_the_exact_quadratic() {
    let grid = Grid::new(3, 32.0, 64).unwrap();
    let u0 = InitialDataSpec {
        offset: vec![0.5, 0.0, -0.25],
        ..InitialDataSpec::chirped_gaussian(1.0, 1.5, 0.1)
    }
    .sample(&grid)
    .unwrap();
    let v0 = variance(&u0).unwrap().value;
    let y0 = mass_current_y(&u0).unwrap().value;
    let g2 = gradient_norm_sq(&u0).unwrap();
    for t in [0.25, 1.0, 2.0] {
        let v = variance(&free_propagate(&u0, t).unwrap()).unwrap().value;
        let exact = v0 - 4.0 * y0 * t + 4.0 * g2 * t * t;
        assert!((v - exact).abs() <= 1e-6 * exact, "t = {t}: {v} vs {exact}");
    }
}

fn free_series(u0: &ComplexField, spacing: f64, count: usize) -> Vec<VirialRecord> {
    (0..count)
        .map(|k| {
            let t = k as f64 * spacing;
            virial_record(t, &free_propagate(u0, t).unwrap(), &Nonlinearity::free(), None).unwrap()
        })
        .collect()
}

#[test]
fn free_evolution_satisfies_the_virial_identities() {
    let grid = Grid::new(3, 24.0, 32).unwrap();
    let u0 = chirped(&grid, 1.0, 1.5, 0.05);
    let series = free_series(&u0, 1e-2, 11);
    let c = virial_consistency(&series).unwrap();
    assert!(c.first_mismatch <= 1e-4, "{c:?}");
    assert!(c.second_mismatch <= 1e-4, "{c:?}");
    assert!(c.initial_current_mismatch <= 1e-3, "{c:?}");
    let v2 = 8.0 * gradient_norm_sq(&u0).unwrap();
    assert!(series.iter().all(|r| (r.v_second - v2).abs() <= 1e-9 * v2));
}

#[test]
fn too_few_records_are_rejected() {
    let grid = Grid::new(3, 8.0, 8).unwrap();
    let series = free_series(&gaussian(&grid, 1.0, 1.0, &[]), 0.1, 4);
    assert!(virial_consistency(&series).is_err());
}

fn defocusing_series(spacing: f64, t_end: f64) -> Vec<VirialRecord> {
    let grid = Grid::new(3, 24.0, 32).unwrap();
    let nl = Nonlinearity::new(1.0, 2.0, 1.0, 4.0);
    let mut cfg = SimulationConfig::new(grid, nl, t_end, Stepping::fixed(1e-3), InitialDataSpec::chirped_gaussian(0.6, 2.5, 0.02));
    let count = (t_end / spacing).round() as usize;
    cfg.snapshot_times = (0..=count).map(|k| k as f64 * spacing).collect();
    let mut series = Vec::new();
    let mut obs = |t: f64, u: &ComplexField| -> nlslab::Result<()> {
        series.push(virial_record(t, u, &nl, None)?);
        Ok(())
    };
    assert_eq!(evolve(&cfg, &mut [&mut obs]).unwrap().outcome, RunOutcome::Completed);
    series
}

#[test]
fn defocusing_run_satisfies_the_virial_identities_at_second_order() {
    let fine = defocusing_series(1e-2, 0.2);
    let coarse: Vec<VirialRecord> = fine.iter().step_by(2).copied().collect();
    let cf = virial_consistency(&fine).unwrap();
    let cc = virial_consistency(&coarse).unwrap();
    assert!(cf.first_mismatch <= 1e-3 && cf.second_mismatch <= 1e-3, "{cf:?}");
    for (a, b) in [(cc.first_mismatch, cf.first_mismatch), (cc.second_mismatch, cf.second_mismatch)] {
        let order = (a / b).log2();
        assert!(order >= 1.7, "order {order} ({a:e} -> {b:e})");
    }
}

#[test]
fn case_one_verdict_for_negative_energy_chirp() {
    let grid = Grid::new(3, 8.0, 64).unwrap();
    let nl = Nonlinearity::new(1.0, 2.0, -1.0, 4.0);
    let (b, u0): (f64, _) = (-0.05, chirped(&grid, 2.7, 1.0, -0.05));
    let v = blowup_criteria(&u0, &nl).unwrap();
    assert_eq!(v.status, VerdictStatus::Applies, "{v:?}");
    assert_eq!(v.case, Some(BlowupCase::DefocusingLower));
    assert_eq!(v.c, 4.0);
    assert!(v.energy < 0.0 && v.y0 > 0.0);
    let bound = v.time_bound.unwrap();
    assert!((bound - 1.0 / (8.0 * b.abs())).abs() <= 1e-6 * bound);
}

#[test]
fn real_data_is_inconclusive() {
    let grid = Grid::new(3, 8.0, 64).unwrap();
    let nl = Nonlinearity::new(1.0, 2.0, -1.0, 4.0);
    let v = blowup_criteria(&gaussian(&grid, 2.7, 1.0, &[]), &nl).unwrap();
    assert_eq!(v.status, VerdictStatus::Inconclusive);
    assert!(v.time_bound.is_none());
}

#[test]
fn focusing_lower_power_cases() {
    let grid = Grid::new(3, 8.0, 64).unwrap();
    let u0 = chirped(&grid, 2.7, 1.0, -0.05);
    let v = blowup_criteria(&u0, &Nonlinearity::new(-1.0, 2.0, -1.0, 4.0)).unwrap();
    assert_eq!(v.case, Some(BlowupCase::FocusingSupercriticalLower));
    assert_eq!(v.c, 1.0);
    let nl = Nonlinearity::new(-0.2, 1.0, -1.0, 4.0);
    let v = blowup_criteria(&u0, &nl).unwrap();
    assert_eq!(v.case, Some(BlowupCase::FocusingSubcriticalLower), "{v:?}");
    assert!(v.mass_coefficient > 0.0);
    assert!(v.energy + v.mass_coefficient * v.mass < 0.0);
    assert_eq!(v.status, VerdictStatus::Applies);
}

#[test]
fn mass_critical_top_power_has_no_criterion() {
    let grid = Grid::new(3, 8.0, 16).unwrap();
    let nl = Nonlinearity::new(1.0, 1.0, -1.0, 4.0 / 3.0);
    let v = blowup_criteria(&chirped(&grid, 3.0, 1.0, -0.1), &nl).unwrap();
    assert_eq!(v.status, VerdictStatus::NoCriterion);
    assert!(!v.reasons.is_empty());
}

#[test]
fn monitor_is_inapplicable_without_a_case() {
    let grid = Grid::new(3, 24.0, 32).unwrap();
    let u0 = gaussian(&grid, 1.0, 1.5, &[]);
    let v = blowup_criteria(&u0, &Nonlinearity::free()).unwrap();
    let report = blowup_monitor(&free_series(&u0, 0.1, 6), &v, None);
    assert!(!report.applicable);
    assert_eq!(report.critical_violations(), 0);
}

#[test]
fn monitor_flags_a_current_that_fails_to_grow() {
    let grid = Grid::new(3, 8.0, 64).unwrap();
    let nl = Nonlinearity::new(1.0, 2.0, -1.0, 4.0);
    let v = blowup_criteria(&chirped(&grid, 2.7, 1.0, -0.05), &nl).unwrap();
    let mut r = rng(5);
    let series: Vec<VirialRecord> = (0..8)
        .map(|k| VirialRecord {
            t: k as f64 * 0.01,
            variance: 10.0 - k as f64 * 0.1,
            y: 1.0 + r.gen_range(-0.1..0.1),
            v_second: -1.0,
            y_prime_lower_bound: 5.0,
            untrusted: false,
        })
        .collect();
    let report = blowup_monitor(&series, &v, Some(0.07));
    assert!(report.applicable);
    assert!(!report.derivative_violations.is_empty());
    assert!(!report.monotonicity_violations.is_empty());
    assert_eq!(report.within_bound, Some(true));
}

#[test]
fn record_bound_is_c_times_gradient_energy() {
    let grid = Grid::new(3, 16.0, 32).unwrap();
    let u = gaussian(&grid, 1.0, 1.5, &[]);
    let nl = Nonlinearity::new(1.0, 2.0, 1.0, 4.0);
    let r = virial_record(0.0, &u, &nl, Some(2.0)).unwrap();
    let g2 = gradient_norm_sq(&u).unwrap();
    assert!((r.y_prime_lower_bound - 2.0 * g2).abs() <= 1e-12 * g2);
    assert!(virial_record(0.0, &u, &nl, None).unwrap().y_prime_lower_bound.is_nan());
}
