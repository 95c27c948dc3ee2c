use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{NlsError, Result};

/// Which lattice the samples of a [`ComplexField`] live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Samples at the centred coordinates `x_j`.
    Position,
    /// Samples of `\hat f` at `ξ_k`, stored in FFT index order.
    Frequency,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Position => "position",
            Domain::Frequency => "frequency",
        }
    }
}

/// Complex samples over a [`Grid`], row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    domain: Domain,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
            domain: Domain::Position,
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        Self::with_domain(grid, Domain::Position, values)
    }

    pub fn with_domain(grid: &Grid, domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NlsError::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            domain,
            values,
        })
    }

    /// Samples `f(x)` at every grid point; `f` receives the coordinate slice.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let coords = grid.coordinates();
        let dim = grid.dim();
        let mut x = vec![0.0; dim];
        let values = (0..grid.len())
            .map(|flat| {
                let idx = grid.unravel(flat);
                for a in 0..dim {
                    x[a] = coords[idx[a]];
                }
                f(&x)
            })
            .collect();
        Self {
            grid: grid.clone(),
            domain: Domain::Position,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Errors if any sample is NaN or infinite.
    pub fn check_finite(&self) -> Result<()> {
        let mut bad = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, z)| !(z.re.is_finite() && z.im.is_finite()));
        match bad.next() {
            None => Ok(()),
            Some((first, _)) => Err(NlsError::NonFinite {
                count: 1 + bad.count(),
                first,
            }),
        }
    }

    pub(crate) fn expect_domain(&self, expected: Domain) -> Result<()> {
        if self.domain == expected {
            Ok(())
        } else {
            Err(NlsError::WrongDomain {
                expected: expected.name(),
                found: self.domain.name(),
            })
        }
    }

    pub(crate) fn expect_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid && self.domain == other.domain {
            Ok(())
        } else {
            Err(NlsError::GridMismatch)
        }
    }

    pub(crate) fn expect_same_grid_as(&self, grid: &Grid) -> Result<()> {
        if &self.grid == grid {
            Ok(())
        } else {
            Err(NlsError::GridMismatch)
        }
    }

    /// Pointwise map preserving grid and domain.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            domain: self.domain,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map(|z| z * factor)
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: Complex64) -> Result<Self> {
        self.expect_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            domain: self.domain,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + factor * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    /// `|f|^2` at every sample.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Largest sample modulus.
    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Plain discrete `∑|f|^2` without quadrature weight.
    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Relative L2 distance `‖self − other‖ / ‖other‖` in sample space.
    pub fn relative_distance(&self, other: &Self) -> Result<f64> {
        self.expect_same_grid(other)?;
        let diff: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let base = other.sum_sq();
        Ok(if base == 0.0 {
            diff.sqrt()
        } else {
            (diff / base).sqrt()
        })
    }
}
