use nlslab::conserved::{energy, mass, mixed_sign_constant};
use nlslab::integrator::{strang_step_with, Nonlinearity};
use nlslab::morawetz::{admissible_pair, Exponent};
use nlslab::scattering::decay_fit;
use nlslab::spectral::{
    dyadic_range, free_propagate, lp_project, transform, weighted_l2, ComplexField, Direction, Grid, Projection,
};
use nlslab::virial::variance;
use num_complex::Complex64;
use proptest::prelude::*;

fn field(grid: &Grid, values: &[(f64, f64)]) -> ComplexField {
    ComplexField::from_values(grid, values.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
}

fn samples(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
}

/// A smooth bump with random centre, width, amplitude and momentum on 32².
fn smooth_field() -> impl Strategy<Value = ComplexField> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.6..1.5f64, 0.1..2.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(cx, cy, w, a, kx, ky)| {
        let grid = Grid::new(2, 12.0, 32).unwrap();
        ComplexField::from_fn(&grid, |x| {
            let r2 = (x[0] - cx).powi(2) + (x[1] - cy).powi(2);
            Complex64::from_polar(a * (-r2 / (2.0 * w * w)).exp(), kx * x[0] + ky * x[1])
        })
    })
}

fn nonlinearity() -> impl Strategy<Value = Nonlinearity> {
    (0.2..2.0f64, 0.0..1.0f64, prop::bool::ANY, prop::bool::ANY).prop_map(|(p1, gap, s1, s2)| {
        let sign = |b: bool| if b { 1.0 } else { -1.0 };
        Nonlinearity::new(sign(s1), p1, sign(s2), p1 + 0.1 + gap)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip(values in samples(512)) {
        let grid = Grid::new(3, 2.5, 8).unwrap();
        let f = field(&grid, &values);
        let back = transform(&transform(&f, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
        prop_assert!(back.relative_distance(&f).unwrap() <= 1e-12);
    }

    #[test]
    fn free_flow_is_a_unitary_group(values in samples(256), s in -3.0..3.0f64, t in -3.0..3.0f64) {
        let grid = Grid::new(2, 4.0, 16).unwrap();
        let f = field(&grid, &values);
        let split = free_propagate(&free_propagate(&f, s).unwrap(), t).unwrap();
        let joint = free_propagate(&f, s + t).unwrap();
        prop_assert!(split.relative_distance(&joint).unwrap() <= 1e-12);
        prop_assert!((mass(&joint) - mass(&f)).abs() <= 1e-12 * mass(&f));
    }

    #[test]
    fn bands_telescope(values in samples(256)) {
        let grid = Grid::new(2, 4.0, 16).unwrap();
        let f = field(&grid, &values);
        let mean: Complex64 = f.values().iter().sum::<Complex64>() / grid.len() as f64;
        let target = f.map(|z| z - mean);
        let mut total = ComplexField::zeros(&grid);
        for b in dyadic_range(&grid) {
            total = total.add_scaled(&lp_project(&f, Projection::Band(b)).unwrap(), Complex64::from(1.0)).unwrap();
        }
        prop_assert!(total.relative_distance(&target).unwrap() <= 1e-10);
    }

    #[test]
    fn split_step_preserves_mass_and_reverses(u in smooth_field(), nl in nonlinearity(), dt in 1e-4..2e-2f64) {
        let v = strang_step_with(&u, dt, &nl).unwrap();
        prop_assert!((mass(&v) - mass(&u)).abs() <= 1e-12 * mass(&u));
        let back = strang_step_with(&v, -dt, &nl).unwrap();
        prop_assert!(back.relative_distance(&u).unwrap() <= 1e-10);
    }

    #[test]
    fn energy_parts_add_up(u in smooth_field(), nl in nonlinearity()) {
        let r = energy(&u, &nl).unwrap();
        prop_assert_eq!(r.energy, r.kinetic + r.potential[0] + r.potential[1]);
        prop_assert!(r.kinetic >= 0.0 && r.mass >= 0.0);
        for (pot, &(l, _)) in r.potential.iter().zip(nl.terms().iter()) {
            prop_assert!(pot * l >= 0.0);
        }
    }

    #[test]
    fn variance_is_weighted_mass(u in smooth_field()) {
        let v = variance(&u).unwrap().value;
        let w = weighted_l2(&u);
        prop_assert!(v >= 0.0);
        prop_assert!((v - w * w).abs() <= 1e-12 * v.max(1e-300));
    }

    #[test]
    fn mixed_sign_constant_dominates(l1 in 0.1..3.0f64, p1 in 0.2..2.0f64, l2 in 0.1..3.0f64, gap in 0.1..2.0f64, s in 0.0..50.0f64) {
        let nl = Nonlinearity::new(-l1, p1, l2, p1 + gap);
        let c = mixed_sign_constant(&nl);
        let g = l1 * s.powf(p1) / (p1 + 2.0) - l2 * s.powf(p1 + gap) / (p1 + gap + 2.0);
        prop_assert!(c >= g - 1e-12 * c.abs().max(1.0));
        prop_assert!(c > 0.0);
    }

    #[test]
    fn admissibility_is_the_scaling_relation(q in 2i64..40, r in 2i64..40, n in 1usize..6) {
        let n64 = n as i64;
        // 2/q + n/r = n/2 times qr
        let exact = 4 * r + 2 * n64 * q == n64 * q * r;
        prop_assert_eq!(admissible_pair(Exponent::int(q), Exponent::int(r), n), exact);
    }

    #[test]
    fn decay_fit_recovers_power_laws(slope in -4.0..-0.1f64, c in 0.01..100.0f64, p in 0.1..4.0f64, n in 1usize..6) {
        let t: Vec<f64> = (0..40).map(|k| 1.0 + k as f64).collect();
        let v: Vec<f64> = t.iter().map(|t| c * t.powf(slope)).collect();
        let fit = decay_fit(&t, &v, (2.0, 35.0), p, n).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() <= 1e-9);
        prop_assert_eq!(fit.pass, fit.slope <= fit.bound_slope + 0.2);
        prop_assert!(fit.bound_slope >= -2.0);
    }
}
