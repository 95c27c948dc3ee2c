use std::f64::consts::PI;

use num_complex::Complex64;

use super::nonlinearity::{rotate_phase, Nonlinearity};
use super::config::SimulationConfig;
use crate::error::{NlsError, Result};
use crate::spectral::{fft_nd, ComplexField, Domain, Grid};

/// Reusable Strang splitting workspace for one grid and nonlinearity.
///
/// The kinetic multiplier is separable, `∏_a e^{-4π² i t ξ_a²}`, so it is
/// assembled from per-axis tables instead of evaluating `n`-dimensional
/// phases pointwise. The last two multipliers are cached by step size.
pub(crate) struct SplitStepper {
    grid: Grid,
    nl: Nonlinearity,
    axis_xi2: Vec<f64>,
    cache: Vec<(u64, Vec<Complex64>)>,
    tail_mask: Vec<bool>,
    boundary_mask: Vec<bool>,
}

impl SplitStepper {
    pub fn new(grid: &Grid, nl: &Nonlinearity) -> Self {
        let axis_xi2 = grid.frequencies().iter().map(|k| k * k).collect();
        Self {
            grid: grid.clone(),
            nl: *nl,
            axis_xi2,
            cache: Vec::with_capacity(3),
            tail_mask: tail_mask(grid),
            boundary_mask: boundary_mask(grid),
        }
    }

    fn build_multiplier(&self, t: f64) -> Vec<Complex64> {
        let norm = (self.grid.len() as f64).recip().powf(1.0 / self.grid.dim() as f64);
        let table: Vec<Complex64> = self
            .axis_xi2
            .iter()
            .map(|k2| Complex64::from_polar(norm, -4.0 * PI * PI * t * k2))
            .collect();
        let mut m = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..self.grid.dim() {
            m = m
                .iter()
                .flat_map(|a| table.iter().map(move |b| a * b))
                .collect();
        }
        m
    }

    fn multiplier_slot(&mut self, t: f64) -> usize {
        let key = t.to_bits();
        if let Some(pos) = self.cache.iter().position(|(k, _)| *k == key) {
            return pos;
        }
        if self.cache.len() >= 3 {
            self.cache.remove(0);
        }
        let m = self.build_multiplier(t);
        self.cache.push((key, m));
        self.cache.len() - 1
    }

    /// Exact free flow over `t`, in place. Returns the outer-octave mass
    /// fraction of the spectrum, which the flow leaves unchanged.
    pub fn kinetic(&mut self, data: &mut [Complex64], t: f64) -> f64 {
        let grid = self.grid.clone();
        fft_nd(&grid, data, true);
        let slot = self.multiplier_slot(t);
        let m = &self.cache[slot].1;
        let (mut total, mut tail) = (0.0, 0.0);
        for ((v, w), &outer) in data.iter_mut().zip(m).zip(&self.tail_mask) {
            let a = v.norm_sqr();
            total += a;
            if outer {
                tail += a;
            }
            *v *= w;
        }
        fft_nd(&grid, data, false);
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }

    /// Mass fraction in the boundary layer; unchanged by the potential flow.
    pub fn boundary_fraction(&self, data: &[Complex64]) -> f64 {
        let (mut total, mut edge) = (0.0, 0.0);
        for (v, &outer) in data.iter().zip(&self.boundary_mask) {
            let a = v.norm_sqr();
            total += a;
            if outer {
                edge += a;
            }
        }
        if total > 0.0 {
            edge / total
        } else {
            0.0
        }
    }

    pub fn potential(&self, data: &mut [Complex64], tau: f64) -> Result<()> {
        rotate_phase(data, tau, &self.nl)
    }

    /// Potential half step, kinetic full step, potential half step.
    pub fn step(&mut self, data: &mut [Complex64], dt: f64) -> Result<f64> {
        self.potential(data, 0.5 * dt)?;
        let tail = self.kinetic(data, dt);
        self.potential(data, 0.5 * dt)?;
        Ok(tail)
    }
}

fn expand_mask(grid: &Grid, axis: &[bool]) -> Vec<bool> {
    (0..grid.len())
        .map(|flat| grid.unravel(flat)[..grid.dim()].iter().any(|&j| axis[j]))
        .collect()
}

/// FFT indices with some `|k_a| ≥ N/4`.
pub(crate) fn tail_mask(grid: &Grid) -> Vec<bool> {
    let quarter = grid.points() as i64 / 4;
    let axis: Vec<bool> = (0..grid.points()).map(|k| grid.wavenumber(k).abs() >= quarter).collect();
    expand_mask(grid, &axis)
}

/// Sample indices with some `|x_a| > 3L/8`.
pub(crate) fn boundary_mask(grid: &Grid) -> Vec<bool> {
    let n = grid.points() as f64;
    let axis: Vec<bool> = (0..grid.points())
        .map(|j| (j as f64 - 0.5 * n).abs() > 0.375 * n)
        .collect();
    expand_mask(grid, &axis)
}

/// One Strang step: `P(dt/2) ∘ e^{i dt Δ} ∘ P(dt/2)` where `P` is the exact
/// nonlinear phase flow. `dt` must lie in the configured step range.
pub fn strang_step(u: &ComplexField, dt: f64, cfg: &SimulationConfig) -> Result<ComplexField> {
    let s = &cfg.stepping;
    if !(dt.abs() >= s.dt_min * (1.0 - 1e-12) && dt.abs() <= s.dt_max * (1.0 + 1e-12)) {
        return Err(NlsError::InvalidArgument(format!(
            "|dt| = {} outside [{}, {}]",
            dt.abs(),
            s.dt_min,
            s.dt_max
        )));
    }
    u.expect_same_grid_as(&cfg.grid)?;
    strang_step_with(u, dt, &cfg.nonlinearity)
}

/// [`strang_step`] without a config.
pub fn strang_step_with(u: &ComplexField, dt: f64, nl: &Nonlinearity) -> Result<ComplexField> {
    u.check_finite()?;
    u.expect_domain(Domain::Position)?;
    let mut stepper = SplitStepper::new(u.grid(), nl);
    let mut data = u.values().to_vec();
    stepper.step(&mut data, dt)?;
    ComplexField::from_values(u.grid(), data)
}
