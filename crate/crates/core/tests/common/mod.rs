#![allow(dead_code)]

use nlslab::spectral::{ComplexField, Grid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `a e^{−|x−x₀|²/(2σ²)}`.
pub fn gaussian(grid: &Grid, a: f64, sigma: f64, x0: &[f64]) -> ComplexField {
    ComplexField::from_fn(grid, |x| {
        let r2: f64 = x.iter().zip(x0.iter().chain(std::iter::repeat(&0.0))).map(|(a, b)| (a - b) * (a - b)).sum();
        Complex64::new(a * (-r2 / (2.0 * sigma * sigma)).exp(), 0.0)
    })
}

/// Closed-form free evolution of `e^{−|x|²/(2σ²)}` under `i u_t + Δu = 0`:
/// `(z₀/(z₀+it))^{n/2} e^{−|x|²/(4(z₀+it))}` with `z₀ = σ²/2`.
pub fn free_gaussian(grid: &Grid, sigma: f64, t: f64) -> ComplexField {
    let n = grid.dim() as f64;
    let z0 = Complex64::new(0.5 * sigma * sigma, 0.0);
    let z = z0 + Complex64::new(0.0, t);
    let pre = (z0 / z).powf(0.5 * n);
    ComplexField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        pre * (-r2 / (4.0 * z)).exp()
    })
}

/// Sum of a few randomly placed, randomly phased Gaussian bumps of width
/// between `w` and `2w`, all well inside the box.
pub fn random_bumps(grid: &Grid, rng: &mut ChaCha8Rng, count: usize, w: f64) -> ComplexField {
    let l = grid.length();
    let n = grid.dim();
    let bumps: Vec<(Vec<f64>, f64, Complex64, Vec<f64>)> = (0..count)
        .map(|_| {
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.15 * l..0.15 * l)).collect();
            let s = rng.gen_range(w..2.0 * w);
            let amp = Complex64::from_polar(rng.gen_range(0.3..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            let k: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5) / s).collect();
            (c, s, amp, k)
        })
        .collect();
    ComplexField::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|(c, s, amp, k)| {
                let r2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                let phase: f64 = x.iter().zip(k).map(|(a, b)| a * b).sum();
                amp * (-r2 / (2.0 * s * s)).exp() * Complex64::from_polar(1.0, phase)
            })
            .sum()
    })
}

/// Relative L² distance `‖a − b‖/‖b‖`.
pub fn rel(a: &ComplexField, b: &ComplexField) -> f64 {
    a.relative_distance(b).unwrap()
}
