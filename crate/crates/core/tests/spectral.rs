mod common;

use std::f64::consts::PI;

use common::{free_gaussian, gaussian, random_bumps, rel, rng};
use nlslab::spectral::{
    dyadic_range, fractional_derivative, fractional_derivative_zero_mean, free_propagate, gradient_norm_sq, laplacian,
    lebesgue_norm, lp_project, sobolev_norm, transform, ComplexField, Direction, Grid, Norm, Projection,
};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random Fourier coefficients on every mode, real space result.
fn white_noise(grid: &Grid, r: &mut ChaCha8Rng) -> ComplexField {
    let values = (0..grid.len()).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    ComplexField::from_values(grid, values).unwrap()
}

fn l2_sq(f: &ComplexField) -> f64 {
    f.sum_sq() * f.grid().cell_volume()
}

#[test]
fn parseval_holds_in_every_dimension() {
    for (n, pts) in [(1, 256), (2, 32), (3, 16), (4, 8), (5, 4)] {
        let grid = Grid::new(n, 3.0, pts).unwrap();
        let f = white_noise(&grid, &mut rng(n as u64));
        let spec = transform(&f, Direction::Forward).unwrap();
        let hat = spec.sum_sq() / grid.length().powi(n as i32);
        assert!((l2_sq(&f) - hat).abs() <= 1e-12 * hat, "n = {n}");
        assert!(rel(&transform(&spec, Direction::Inverse).unwrap(), &f) <= 1e-12);
    }
}

#[test]
fn gaussian_l2_norm_matches_closed_form() {
    for (n, pts) in [(1, 128), (2, 64), (3, 32)] {
        let grid = Grid::new(n, 16.0, pts).unwrap();
        let sigma = 1.3;
        let norm = sobolev_norm(&gaussian(&grid, 1.0, sigma, &[]), Norm::L2).unwrap();
        let exact = (PI * sigma * sigma).powf(n as f64 / 4.0);
        assert!((norm - exact).abs() <= 1e-8 * exact, "n = {n}");
    }
}

#[test]
fn h1_norm_is_l2_plus_gradient() {
    let grid = Grid::new(3, 16.0, 32).unwrap();
    let f = random_bumps(&grid, &mut rng(9), 3, 1.0);
    let h1 = sobolev_norm(&f, Norm::H1).unwrap();
    let l2 = sobolev_norm(&f, Norm::L2).unwrap();
    let g = sobolev_norm(&f, Norm::HomogeneousH1).unwrap();
    assert!((h1 * h1 - l2 * l2 - g * g).abs() <= 1e-12 * h1 * h1);
    assert!((g * g - gradient_norm_sq(&f).unwrap()).abs() <= 1e-12 * g * g);
}

#[test]
fn free_gaussian_matches_closed_form_on_64_cubed() {
    let grid = Grid::new(3, 24.0, 64).unwrap();
    let u0 = free_gaussian(&grid, 1.0, 0.0);
    let edge: f64 = {
        let r2 = grid.radius_squared();
        let h = 0.5 * grid.length() - grid.dx();
        let outer: f64 =
            u0.values().iter().zip(&r2).filter(|(_, r)| r.sqrt() >= h).map(|(z, _)| z.norm_sqr()).sum();
        outer / u0.sum_sq()
    };
    assert!(edge < 1e-10);
    for t in [0.1, 0.5, 1.0] {
        let err = rel(&free_propagate(&u0, t).unwrap(), &free_gaussian(&grid, 1.0, t));
        assert!(err <= 1e-6, "t = {t}: {err:e}");
    }
}

#[test]
fn free_propagation_preserves_sobolev_norms() {
    let grid = Grid::new(3, 16.0, 32).unwrap();
    let f = random_bumps(&grid, &mut rng(12), 4, 0.8);
    for s in [-0.5, 0.5, 1.0, 2.0] {
        let before = sobolev_norm(&f, Norm::HomogeneousSobolev(s)).unwrap();
        for t in [0.3, 5.0] {
            let after = sobolev_norm(&free_propagate(&f, t).unwrap(), Norm::HomogeneousSobolev(s)).unwrap();
            assert!((after - before).abs() <= 1e-11 * before, "s = {s}, t = {t}");
        }
    }
}

#[test]
fn sup_norm_decays_dispersively() {
    // σ = 1 bump; the decade [σ², 10σ²] is past the focal time z₀ = σ²/2
    for (n, pts) in [(1, 128), (2, 128), (3, 128)] {
        let grid = Grid::new(n, 64.0, pts).unwrap();
        let u0 = gaussian(&grid, 1.0, 1.0, &[]);
        let l1 = u0.values().iter().map(|z| z.norm()).sum::<f64>() * grid.cell_volume();
        let u0 = u0.scale(Complex64::from(1.0 / l1));
        let times: Vec<f64> = (0..=8).map(|k| 10f64.powf(k as f64 / 8.0)).collect();
        let (lx, ly): (Vec<f64>, Vec<f64>) =
            times.iter().map(|&t| (t.ln(), free_propagate(&u0, t).unwrap().max_modulus().ln())).unzip();
        let k = lx.len() as f64;
        let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        assert!((slope + n as f64 / 2.0).abs() <= 0.1, "n = {n}: slope {slope}");
    }
}

#[test]
fn second_power_of_gradient_is_minus_laplacian() {
    let grid = Grid::new(3, 8.0, 16).unwrap();
    // band-limited: no Nyquist content
    let raw = white_noise(&grid, &mut rng(4));
    let f = lp_project(&raw, Projection::Low(0.25)).unwrap();
    let d2 = fractional_derivative(&f, 2.0).unwrap();
    // −Δ as 4π²|ξ|², applied by hand in frequency space
    let spec = transform(&f, Direction::Forward).unwrap();
    let xi2 = grid.frequency_squared();
    let scaled: Vec<Complex64> = spec.values().iter().zip(&xi2).map(|(v, k)| v * 4.0 * PI * PI * k).collect();
    let by_hand =
        transform(&ComplexField::with_domain(&grid, spec.domain(), scaled).unwrap(), Direction::Inverse).unwrap();
    assert!(rel(&d2, &by_hand) <= 1e-10);
    assert!(rel(&d2, &laplacian(&f).unwrap().scale(Complex64::from(-1.0))) <= 1e-10);
    assert!(rel(&fractional_derivative(&f, 0.0).unwrap(), &f) <= 1e-15);
}

/// A few point masses with random complex weights near the centre,
/// projected onto band `N`.
fn band_field(grid: &Grid, r: &mut ChaCha8Rng, big_n: f64) -> ComplexField {
    let mut f = ComplexField::zeros(grid);
    let p = grid.points();
    for _ in 0..r.gen_range(1..4) {
        let idx: Vec<usize> = (0..grid.dim()).map(|_| r.gen_range(3 * p / 8..5 * p / 8)).collect();
        f.values_mut()[grid.ravel(&idx)] += Complex64::from_polar(r.gen_range(0.2..1.0), r.gen_range(0.0..2.0 * PI));
    }
    lp_project(&f, Projection::Band(big_n)).unwrap()
}

/// Worst `‖P_N f‖_q / (N^{n/p − n/q} ‖P_N f‖_p)` over 100 random fields.
fn bernstein_constant(grid: &Grid, big_n: f64, p: f64, q: f64, seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = grid.dim() as f64;
    let gain = big_n.powf(n / p - if q.is_infinite() { 0.0 } else { n / q });
    (0..100)
        .map(|_| {
            let f = band_field(grid, &mut r, big_n);
            lebesgue_norm(&f, q).unwrap() / (gain * lebesgue_norm(&f, p).unwrap())
        })
        .fold(0.0, f64::max)
}

#[test]
fn bernstein_constant_is_stable_under_doubling() {
    let grid = Grid::new(2, 16.0, 128).unwrap();
    for (p, q) in [(2.0, 4.0), (2.0, f64::INFINITY), (1.0, 2.0)] {
        let c1 = bernstein_constant(&grid, 0.5, p, q, 1);
        let c2 = bernstein_constant(&grid, 1.0, p, q, 2);
        assert!(c1 > 0.0 && ((c2 - c1) / c1).abs() <= 0.1, "p = {p}, q = {q}: {c1} vs {c2}");
    }
}

#[test]
fn band_limited_derivatives_scale_like_the_band() {
    let grid = Grid::new(2, 16.0, 128).unwrap();
    let mut r = rng(30);
    for big_n in [0.5, 1.0, 2.0] {
        for _ in 0..10 {
            let f = band_field(&grid, &mut r, big_n);
            for s in [1.0, -1.0, 0.5, -0.5] {
                for p in [2.0, 4.0] {
                    let d = fractional_derivative_zero_mean(&f, s).unwrap();
                    let ratio = lebesgue_norm(&d, p).unwrap() / ((2.0 * PI * big_n).powf(s) * lebesgue_norm(&f, p).unwrap());
                    assert!((0.125..=8.0).contains(&ratio), "N = {big_n}, s = {s}, p = {p}: {ratio}");
                }
            }
        }
    }
}

#[test]
fn littlewood_paley_pieces_are_almost_orthogonal() {
    let mut r = rng(77);
    for (n, len, pts) in [(1, 16.0, 256), (2, 8.0, 64), (3, 8.0, 32)] {
        let grid = Grid::new(n, len, pts).unwrap();
        let bands = dyadic_range(&grid);
        for _ in 0..5 {
            let raw = if r.gen_bool(0.5) { white_noise(&grid, &mut r) } else { random_bumps(&grid, &mut r, 3, 0.3) };
            let mean: Complex64 = raw.values().iter().sum::<Complex64>() / grid.len() as f64;
            let f = raw.map(|z| z - mean);
            let pieces: f64 = bands.iter().map(|&b| l2_sq(&lp_project(&f, Projection::Band(b)).unwrap())).sum();
            let ratio = l2_sq(&f) / pieces;
            assert!((1.0 / 3.0..=3.0).contains(&ratio), "n = {n}: {ratio}");
        }
    }
}
