use num_complex::Complex64;

use super::{apply_fourier_multiplier, ComplexField, Grid};
use crate::error::{NlsError, Result};

/// Smooth radial bump: 1 on `r <= 1`, 0 on `r >= 2`, C^∞ in between.
pub fn bump(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let g = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
        let a = g(2.0 - r);
        a / (a + g(r - 1.0))
    }
}

/// Littlewood–Paley frequency cut-offs, `N` and `M` dyadic in units of `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// `P_N`, multiplier `φ(ξ/N) − φ(2ξ/N)`.
    Band(f64),
    /// `P_{≤N}`, multiplier `φ(ξ/N)`.
    Low(f64),
    /// `P_{>N}`, multiplier `1 − φ(ξ/N)`.
    High(f64),
    /// `P_{M<·≤N} = P_{≤N} − P_{≤M}`.
    Annulus { low: f64, high: f64 },
}

fn check_dyadic(n: f64) -> Result<()> {
    let e = n.log2();
    if n > 0.0 && n.is_finite() && (e - e.round()).abs() < 1e-12 {
        Ok(())
    } else {
        Err(NlsError::InvalidArgument(format!("{n} is not a dyadic number")))
    }
}

impl Projection {
    fn validate(&self) -> Result<()> {
        match *self {
            Projection::Band(n) | Projection::Low(n) | Projection::High(n) => check_dyadic(n),
            Projection::Annulus { low, high } => {
                check_dyadic(low)?;
                check_dyadic(high)?;
                if low >= high {
                    return Err(NlsError::InvalidArgument(format!(
                        "annulus needs M < N, got M = {low}, N = {high}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Multiplier value at frequency magnitude `xi`.
    pub fn symbol(&self, xi: f64) -> f64 {
        match *self {
            Projection::Band(n) => bump(xi / n) - bump(2.0 * xi / n),
            Projection::Low(n) => bump(xi / n),
            Projection::High(n) => 1.0 - bump(xi / n),
            Projection::Annulus { low, high } => bump(xi / high) - bump(xi / low),
        }
    }
}

pub fn lp_project(f: &ComplexField, projection: Projection) -> Result<ComplexField> {
    projection.validate()?;
    let xi2 = f.grid().frequency_squared();
    apply_fourier_multiplier(f, |k| Complex64::new(projection.symbol(xi2[k].sqrt()), 0.0))
}

/// Dyadic `N` whose bands `P_N` telescope to `f − mean` on this grid.
pub fn dyadic_range(grid: &Grid) -> Vec<f64> {
    let lowest = grid.dxi().log2().floor() as i32;
    let top = (grid.dim() as f64).sqrt() * grid.points() as f64 * 0.5 * grid.dxi();
    let highest = top.log2().ceil() as i32;
    (lowest..=highest).map(|e| 2f64.powi(e)).collect()
}
