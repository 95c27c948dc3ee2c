//! Grids, Fourier transforms, the free propagator and Fourier multipliers.
//!
//! Conventions: `\hat f(ξ) = ∫ e^{-2πi x·ξ} f(x) dx`, so the free flow is the
//! multiplier `e^{-4π² i t |ξ|²}` and `|∇|^s` is the multiplier `(2π|ξ|)^s`.
//! With the `2π` inside the multiplier `|∇|² = -Δ` holds exactly and the
//! kinetic energy `½‖∇u‖²` needs no convention factors. Operators that the
//! literature writes with a bare `|ξ|^s` differ from these by `(2π)^s`.

mod fft;
mod field;
mod grid;
mod littlewood_paley;
mod norms;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use field::{ComplexField, Domain};
pub use grid::{Grid, MAX_DIM};
pub use littlewood_paley::{bump, lp_project, dyadic_range, Projection};
pub use norms::{lebesgue_norm, power_integral, sobolev_norm, weighted_l2, Norm};

pub(crate) use fft::{apply_multiplier, fft_nd};

use crate::error::{NlsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// `(-1)^{k_0 + … + k_{n-1}}` for FFT index `flat`; the phase that moves
/// the DFT origin from the box corner to the box centre.
fn centring_sign(grid: &Grid, flat: usize) -> f64 {
    let idx = grid.unravel(flat);
    let parity: usize = idx[..grid.dim()].iter().sum();
    if parity % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Fourier transform under the `e^{-2πi x·ξ}` convention.
///
/// `Forward` returns `dx^n`-weighted DFT samples of `\hat f` on the frequency
/// lattice (FFT order); `Inverse` undoes it exactly up to roundoff.
pub fn transform(f: &ComplexField, direction: Direction) -> Result<ComplexField> {
    f.check_finite()?;
    let grid = f.grid();
    let mut data = f.values().to_vec();
    match direction {
        Direction::Forward => {
            f.expect_domain(Domain::Position)?;
            fft_nd(grid, &mut data, true);
            let w = grid.cell_volume();
            for (k, v) in data.iter_mut().enumerate() {
                *v *= w * centring_sign(grid, k);
            }
            ComplexField::with_domain(grid, Domain::Frequency, data)
        }
        Direction::Inverse => {
            f.expect_domain(Domain::Frequency)?;
            for (k, v) in data.iter_mut().enumerate() {
                *v *= centring_sign(grid, k);
            }
            fft_nd(grid, &mut data, false);
            let w = grid.length().powi(grid.dim() as i32).recip();
            for v in data.iter_mut() {
                *v *= w;
            }
            ComplexField::with_domain(grid, Domain::Position, data)
        }
    }
}

/// Applies a Fourier multiplier given as a function of the FFT flat index.
pub fn apply_fourier_multiplier(
    f: &ComplexField,
    multiplier: impl Fn(usize) -> Complex64,
) -> Result<ComplexField> {
    f.expect_domain(Domain::Position)?;
    f.check_finite()?;
    let mut data = f.values().to_vec();
    apply_multiplier(f.grid(), &mut data, multiplier);
    ComplexField::from_values(f.grid(), data)
}

/// Free Schrödinger evolution `e^{itΔ} f` via the exact multiplier
/// `e^{-4π² i t |ξ|²}`.
pub fn free_propagate(f: &ComplexField, t: f64) -> Result<ComplexField> {
    if !t.is_finite() {
        return Err(NlsError::InvalidArgument(format!("time {t} is not finite")));
    }
    if t == 0.0 {
        f.expect_domain(Domain::Position)?;
        f.check_finite()?;
        return Ok(f.clone());
    }
    let xi2 = f.grid().frequency_squared();
    let a = -4.0 * PI * PI * t;
    apply_fourier_multiplier(f, |k| Complex64::from_polar(1.0, a * xi2[k]))
}

fn mean_mode_magnitude(f: &ComplexField) -> f64 {
    let sum: Complex64 = f.values().iter().sum();
    sum.norm() / f.grid().len() as f64
}

/// `|∇|^s f` with multiplier `(2π|ξ|)^s`.
///
/// For `s < 0` the zero mode is singular; a field with a nonzero mean is
/// rejected. Use [`fractional_derivative_zero_mean`] to drop that mode.
pub fn fractional_derivative(f: &ComplexField, s: f64) -> Result<ComplexField> {
    if s < 0.0 {
        let mean = mean_mode_magnitude(f);
        let scale = f.max_modulus();
        if mean > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(NlsError::SingularMode(mean));
        }
    }
    fractional_derivative_zero_mean(f, s)
}

/// `|∇|^s f` with the `ξ = 0` mode set to zero whenever `s < 0`.
pub fn fractional_derivative_zero_mean(f: &ComplexField, s: f64) -> Result<ComplexField> {
    if !s.is_finite() {
        return Err(NlsError::InvalidArgument(format!("exponent {s} is not finite")));
    }
    if s == 0.0 {
        f.check_finite()?;
        return Ok(f.clone());
    }
    let xi2 = f.grid().frequency_squared();
    apply_fourier_multiplier(f, |k| {
        let m = 4.0 * PI * PI * xi2[k];
        if m == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(m.powf(0.5 * s), 0.0)
        }
    })
}

/// `Δf` via the multiplier `-4π²|ξ|²`.
pub fn laplacian(f: &ComplexField) -> Result<ComplexField> {
    let xi2 = f.grid().frequency_squared();
    apply_fourier_multiplier(f, |k| Complex64::new(-4.0 * PI * PI * xi2[k], 0.0))
}

/// Multiplier of `∂_axis` at every FFT index, Nyquist mode zeroed.
pub(crate) fn derivative_symbol(grid: &Grid, axis: usize) -> Vec<Complex64> {
    let n = grid.points();
    let stride = grid.stride(axis);
    (0..grid.len())
        .map(|flat| {
            let k = (flat / stride) % n;
            if k == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, 2.0 * PI * grid.frequency(k))
            }
        })
        .collect()
}

/// Spectral gradient, one field per axis.
///
/// The odd-order multiplier is antisymmetric in `ξ`, so the unpaired Nyquist
/// mode gets the average of `±N/2`, which is zero.
pub fn gradient(f: &ComplexField) -> Result<Vec<ComplexField>> {
    f.expect_domain(Domain::Position)?;
    f.check_finite()?;
    let grid = f.grid();
    let mut spectrum = f.values().to_vec();
    fft_nd(grid, &mut spectrum, true);
    let norm = 1.0 / grid.len() as f64;
    (0..grid.dim())
        .map(|axis| {
            let symbol = derivative_symbol(grid, axis);
            let mut data: Vec<Complex64> = spectrum
                .iter()
                .zip(&symbol)
                .map(|(v, m)| v * m * norm)
                .collect();
            fft_nd(grid, &mut data, false);
            ComplexField::from_values(grid, data)
        })
        .collect()
}

/// `‖∇f‖₂²` by Parseval, `L^{-n} ∑ 4π²|ξ|² |\hat f|²`.
pub fn gradient_norm_sq(f: &ComplexField) -> Result<f64> {
    f.expect_domain(Domain::Position)?;
    let grid = f.grid();
    let mut data = f.values().to_vec();
    fft_nd(grid, &mut data, true);
    let xi2 = grid.frequency_squared();
    let sum: f64 = data
        .iter()
        .zip(&xi2)
        .map(|(v, k2)| v.norm_sqr() * k2)
        .sum();
    // |\hat f|² = dx^{2n}|DFT|², weighted by L^{-n}: overall dx^n / N^n.
    Ok(4.0 * PI * PI * sum * grid.cell_volume() / grid.len() as f64)
}
