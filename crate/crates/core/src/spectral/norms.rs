use super::{fractional_derivative_zero_mean, gradient_norm_sq, ComplexField};
use crate::error::{NlsError, Result};

/// Spatial norms evaluated with the `dx^n` cell quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    L2,
    /// `‖∇f‖₂`.
    HomogeneousH1,
    /// `(‖f‖₂² + ‖∇f‖₂²)^{1/2}`.
    H1,
    /// `‖|∇|^s f‖₂`; the zero mode is dropped for `s < 0`.
    HomogeneousSobolev(f64),
    /// `L^r` for `r ∈ [1, ∞]`; `r = ∞` is the largest sample modulus.
    Lebesgue(f64),
    /// `‖x f‖₂` with centred coordinates.
    Weight,
    /// `‖f‖_{H¹} + ‖x f‖₂`.
    Sigma,
}

/// `∫ |f|^q dx`. Moduli below `1e-300` count as zero so that fractional
/// powers never see `log 0`.
pub fn power_integral(f: &ComplexField, q: f64) -> f64 {
    let half = 0.5 * q;
    let even = (half - half.round()).abs() < 1e-15 && half >= 0.0;
    let sum: f64 = if even {
        let k = half.round() as i32;
        f.values().iter().map(|z| z.norm_sqr().powi(k)).sum()
    } else {
        f.values()
            .iter()
            .map(|z| {
                let m = z.norm();
                if m < 1e-300 {
                    0.0
                } else {
                    (q * m.ln()).exp()
                }
            })
            .sum()
    };
    sum * f.grid().cell_volume()
}

pub fn lebesgue_norm(f: &ComplexField, r: f64) -> Result<f64> {
    if r.is_infinite() && r > 0.0 {
        return Ok(f.max_modulus());
    }
    if !(r >= 1.0) {
        return Err(NlsError::InvalidArgument(format!("L^r needs r >= 1, got {r}")));
    }
    Ok(power_integral(f, r).powf(1.0 / r))
}

/// `‖x f‖₂`.
pub fn weighted_l2(f: &ComplexField) -> f64 {
    let r2 = f.grid().radius_squared();
    let sum: f64 = f
        .values()
        .iter()
        .zip(&r2)
        .map(|(z, w)| z.norm_sqr() * w)
        .sum();
    (sum * f.grid().cell_volume()).sqrt()
}

pub fn sobolev_norm(f: &ComplexField, norm: Norm) -> Result<f64> {
    f.expect_domain(super::Domain::Position)?;
    let l2 = || (f.sum_sq() * f.grid().cell_volume()).sqrt();
    Ok(match norm {
        Norm::L2 => l2(),
        Norm::HomogeneousH1 => gradient_norm_sq(f)?.sqrt(),
        Norm::H1 => (l2().powi(2) + gradient_norm_sq(f)?).sqrt(),
        Norm::HomogeneousSobolev(s) => {
            let d = fractional_derivative_zero_mean(f, s)?;
            (d.sum_sq() * f.grid().cell_volume()).sqrt()
        }
        Norm::Lebesgue(r) => lebesgue_norm(f, r)?,
        Norm::Weight => weighted_l2(f),
        Norm::Sigma => (l2().powi(2) + gradient_norm_sq(f)?).sqrt() + weighted_l2(f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn gaussian(grid: &Grid, sigma: f64) -> ComplexField {
        ComplexField::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new((-r2 / (2.0 * sigma * sigma)).exp(), 0.0)
        })
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let grid = Grid::new(2, 4.0, 16).unwrap();
        let f = ComplexField::zeros(&grid);
        for norm in [
            Norm::L2,
            Norm::HomogeneousH1,
            Norm::H1,
            Norm::HomogeneousSobolev(0.5),
            Norm::HomogeneousSobolev(-0.5),
            Norm::Lebesgue(1.0),
            Norm::Lebesgue(3.5),
            Norm::Lebesgue(f64::INFINITY),
            Norm::Weight,
            Norm::Sigma,
        ] {
            assert_eq!(sobolev_norm(&f, norm).unwrap(), 0.0, "{norm:?}");
        }
    }

    #[test]
    fn gaussian_l2_matches_closed_form() {
        // ∫ e^{-|x|²/σ²} = (πσ²)^{n/2}
        let sigma = 1.3;
        let grid = Grid::new(3, 16.0, 64).unwrap();
        let f = gaussian(&grid, sigma);
        let expected = (PI * sigma * sigma).powf(0.75);
        let got = sobolev_norm(&f, Norm::L2).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-8);
        // ‖∇f‖² = (n/2σ²)·M for this profile
        let m = expected * expected;
        let kin = sobolev_norm(&f, Norm::HomogeneousH1).unwrap().powi(2);
        let kin_exact = 1.5 / (sigma * sigma) * m;
        assert!(((kin - kin_exact) / kin_exact).abs() < 1e-8);
        // ‖x f‖² = (nσ²/2)·M
        let w = sobolev_norm(&f, Norm::Weight).unwrap().powi(2);
        assert!(((w - 1.5 * sigma * sigma * m) / w).abs() < 1e-8);
    }

    #[test]
    fn h1_is_pythagorean() {
        let grid = Grid::new(2, 10.0, 32).unwrap();
        let f = gaussian(&grid, 1.0).map(|z| z * Complex64::new(0.3, 0.8));
        let h1 = sobolev_norm(&f, Norm::H1).unwrap();
        let l2 = sobolev_norm(&f, Norm::L2).unwrap();
        let g = sobolev_norm(&f, Norm::HomogeneousH1).unwrap();
        assert!((h1 * h1 - l2 * l2 - g * g).abs() < 1e-12 * h1 * h1);
        let sigma = sobolev_norm(&f, Norm::Sigma).unwrap();
        let w = sobolev_norm(&f, Norm::Weight).unwrap();
        assert!((sigma - h1 - w).abs() < 1e-12);
    }

    #[test]
    fn lebesgue_power_agrees_with_fractional_route() {
        let grid = Grid::new(1, 20.0, 256).unwrap();
        let f = gaussian(&grid, 1.0);
        // ∫ e^{-q x²/2} = sqrt(2π/q)
        for q in [2.0, 3.0, 4.0, 2.5] {
            let got = power_integral(&f, q);
            let exact = (2.0 * PI / q).sqrt();
            assert!(((got - exact) / exact).abs() < 1e-10, "q = {q}");
        }
        assert!(lebesgue_norm(&f, 0.5).is_err());
        assert_eq!(lebesgue_norm(&f, f64::INFINITY).unwrap(), 1.0);
    }
}
