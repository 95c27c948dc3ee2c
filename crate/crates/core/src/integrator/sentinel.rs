use crate::error::Result;
use crate::spectral::{fft_nd, ComplexField, Domain};

/// Thresholds deciding whether a periodic-box run still stands in for ℝⁿ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentinelThresholds {
    /// Largest allowed mass fraction in the outer frequency octave.
    pub tail: f64,
    /// Largest allowed mass fraction within `L/8` of the box faces.
    pub boundary: f64,
}

impl Default for SentinelThresholds {
    fn default() -> Self {
        Self {
            tail: 1e-4,
            boundary: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentinelReading {
    pub tail_fraction: f64,
    pub boundary_fraction: f64,
    pub ok: bool,
}

/// Mass fraction with some coordinate `|x_a| > 3L/8`.
pub fn boundary_fraction(u: &ComplexField) -> f64 {
    let grid = u.grid();
    let n = grid.points();
    // samples j with |x_j| > 3L/8  <=>  |j - N/2| > 3N/8
    let outer: Vec<bool> = (0..n)
        .map(|j| (j as f64 - (n / 2) as f64).abs() > 0.375 * n as f64)
        .collect();
    let mut total = 0.0;
    let mut edge = 0.0;
    for (flat, z) in u.values().iter().enumerate() {
        let m = z.norm_sqr();
        total += m;
        let idx = grid.unravel(flat);
        if idx[..grid.dim()].iter().any(|&j| outer[j]) {
            edge += m;
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

/// Fraction of `∑|DFT|²` with some wavenumber `|k_a| ≥ N/4`.
pub(crate) fn tail_fraction_of_spectrum(grid: &crate::spectral::Grid, spectrum: &[num_complex::Complex64]) -> f64 {
    let n = grid.points() as i64;
    let outer: Vec<bool> = (0..grid.points())
        .map(|k| grid.wavenumber(k).abs() >= n / 4)
        .collect();
    let mut total = 0.0;
    let mut tail = 0.0;
    for (flat, z) in spectrum.iter().enumerate() {
        let m = z.norm_sqr();
        total += m;
        let idx = grid.unravel(flat);
        if idx[..grid.dim()].iter().any(|&k| outer[k]) {
            tail += m;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Spectral-tail and boundary-mass monitors.
///
/// The tail is the outer frequency octave per axis, `|ξ_a| ≥ N/(4L)`; the
/// boundary layer is everything within `L/8` of a face.
pub fn resolution_sentinel(u: &ComplexField, thresholds: &SentinelThresholds) -> Result<SentinelReading> {
    u.expect_domain(Domain::Position)?;
    u.check_finite()?;
    let mut spectrum = u.values().to_vec();
    fft_nd(u.grid(), &mut spectrum, true);
    let tail_fraction = tail_fraction_of_spectrum(u.grid(), &spectrum);
    let boundary_fraction = boundary_fraction(u);
    Ok(SentinelReading {
        tail_fraction,
        boundary_fraction,
        ok: tail_fraction <= thresholds.tail && boundary_fraction <= thresholds.boundary,
    })
}
