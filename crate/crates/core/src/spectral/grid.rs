use crate::error::{NlsError, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 5;

/// Periodic box `[-L/2, L/2)^n` sampled with `N` points per axis.
///
/// Spatial samples sit at `x_j = -L/2 + j·dx`, so the centre of the box is
/// the sample with index `N/2` on every axis. The dual lattice is
/// `ξ_k = k/L` with `k` in FFT order `0, 1, …, N/2-1, -N/2, …, -1`, which
/// makes it the exact dual of the sample lattice under `e^{-2πi x·ξ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    length: f64,
    points: usize,
}

impl Grid {
    pub fn new(dim: usize, length: f64, points: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(NlsError::InvalidGrid(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(NlsError::InvalidGrid(format!(
                "box length must be positive, got {length}"
            )));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(NlsError::InvalidGrid(format!(
                "points per axis must be a power of two >= 2, got {points}"
            )));
        }
        if points.checked_pow(dim as u32).is_none() {
            return Err(NlsError::InvalidGrid("grid too large".into()));
        }
        Ok(Self {
            dim,
            length,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Quadrature weight of one cell, `dx^n`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Spacing of the frequency lattice, `1/L`.
    pub fn dxi(&self) -> f64 {
        1.0 / self.length
    }

    /// Coordinate of sample `j` along one axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    /// Signed integer wavenumber for FFT index `k`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        let n = self.points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Frequency `ξ = k/L` of FFT index `k` along one axis.
    pub fn frequency(&self, k: usize) -> f64 {
        self.wavenumber(k) as f64 / self.length
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coordinate(j)).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.frequency(k)).collect()
    }

    /// Stride of `axis` in the row-major flat layout (axis 0 slowest).
    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dim - 1 - axis) as u32)
    }

    /// Multi-index of a flat position, row-major with axis 0 slowest.
    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .take(self.dim)
            .fold(0, |acc, &i| acc * self.points + i)
    }

    /// Flat index of the sample at the origin `x = 0`.
    pub fn origin_index(&self) -> usize {
        let mid = [self.points / 2; MAX_DIM];
        self.ravel(&mid[..self.dim])
    }

    /// Sum over axes of a per-axis table, evaluated at every flat index.
    ///
    /// Used to build separable quantities such as `|x|^2` and `|ξ|^2`.
    pub fn separable_sum(&self, table: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for axis in 0..self.dim {
            let stride = self.stride(axis);
            for (flat, o) in out.iter_mut().enumerate() {
                *o += table[(flat / stride) % self.points];
            }
        }
        out
    }

    /// `|x|^2` at every sample.
    pub fn radius_squared(&self) -> Vec<f64> {
        let sq: Vec<f64> = self.coordinates().iter().map(|x| x * x).collect();
        self.separable_sum(&sq)
    }

    /// `|ξ|^2` at every FFT index.
    pub fn frequency_squared(&self) -> Vec<f64> {
        let sq: Vec<f64> = self.frequencies().iter().map(|k| k * k).collect();
        self.separable_sum(&sq)
    }

    /// Coordinate along `axis` at every sample.
    pub fn axis_coordinate(&self, axis: usize) -> Vec<f64> {
        let coords = self.coordinates();
        let stride = self.stride(axis);
        (0..self.len())
            .map(|flat| coords[(flat / stride) % self.points])
            .collect()
    }

    /// Frequency along `axis` at every FFT index.
    pub fn axis_frequency(&self, axis: usize) -> Vec<f64> {
        let freqs = self.frequencies();
        let stride = self.stride(axis);
        (0..self.len())
            .map(|flat| freqs[(flat / stride) % self.points])
            .collect()
    }

    /// Same lattice rescaled by `factor` in length.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim, self.length * factor, self.points)
    }
}
