use std::path::PathBuf;

use num_complex::Complex64;

use super::nonlinearity::Nonlinearity;
use super::sample_file;
use super::sentinel::SentinelThresholds;
use crate::error::{NlsError, Result};
use crate::spectral::{ComplexField, Grid};

/// Time-step policy. Equal `dt_min` and `dt_max` select fixed stepping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepping {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Relative L² local-error tolerance for step doubling.
    pub accuracy_target: f64,
    /// Largest nonlinear phase `dt·∑|λ_i|‖u‖_∞^{p_i}` allowed in one step.
    pub max_phase: f64,
}

impl Stepping {
    pub fn fixed(dt: f64) -> Self {
        Self {
            dt_init: dt,
            dt_min: dt,
            dt_max: dt,
            accuracy_target: 1e-6,
            max_phase: f64::INFINITY,
        }
    }

    pub fn adaptive(dt_init: f64, dt_min: f64, dt_max: f64, accuracy_target: f64) -> Self {
        Self {
            dt_init,
            dt_min,
            dt_max,
            accuracy_target,
            max_phase: 0.1,
        }
    }

    pub fn is_fixed(&self) -> bool {
        self.dt_min == self.dt_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Gaussian,
    /// Gaussian times `e^{ib|x−x₀|²}`.
    ChirpedGaussian,
    /// Radial shell `A e^{−(|x−x₀|−R)²/(2σ²)}`, chirp applied as for the Gaussian.
    Ring { radius: f64 },
    SampleFile(PathBuf),
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Gaussian => "gaussian",
            Profile::ChirpedGaussian => "chirped-gaussian",
            Profile::Ring { .. } => "ring",
            Profile::SampleFile(_) => "sample-file",
        }
    }
}

/// `A e^{−|x−x₀|²/(2σ²)} e^{ib|x−x₀|²}` and its variants.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDataSpec {
    pub profile: Profile,
    pub amplitude: f64,
    pub width: f64,
    pub chirp: f64,
    pub offset: Vec<f64>,
}

impl InitialDataSpec {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self {
            profile: Profile::Gaussian,
            amplitude,
            width,
            chirp: 0.0,
            offset: Vec::new(),
        }
    }

    pub fn chirped_gaussian(amplitude: f64, width: f64, chirp: f64) -> Self {
        Self {
            profile: Profile::ChirpedGaussian,
            chirp,
            ..Self::gaussian(amplitude, width)
        }
    }

    fn violations(&self, dim: usize, out: &mut Vec<String>) {
        if !(self.width > 0.0 && self.width.is_finite()) {
            out.push(format!("initial_data.width must be positive and finite, got {}", self.width));
        }
        if !self.amplitude.is_finite() {
            out.push("initial_data.amplitude must be finite".into());
        }
        if !self.chirp.is_finite() {
            out.push("initial_data.chirp must be finite".into());
        }
        if !self.offset.is_empty() && self.offset.len() != dim {
            out.push(format!(
                "initial_data.offset has {} entries, expected {} or none",
                self.offset.len(),
                dim
            ));
        }
        if self.offset.iter().any(|v| !v.is_finite()) {
            out.push("initial_data.offset must be finite".into());
        }
        if let Profile::Ring { radius } = self.profile {
            if !(radius >= 0.0 && radius.is_finite()) {
                out.push(format!("initial_data.radius must be nonnegative, got {radius}"));
            }
        }
    }

    /// Samples `u₀` on `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<ComplexField> {
        let mut v = Vec::new();
        self.violations(grid.dim(), &mut v);
        if !v.is_empty() {
            return Err(NlsError::InvalidConfig(v));
        }
        let x0: Vec<f64> = if self.offset.is_empty() {
            vec![0.0; grid.dim()]
        } else {
            self.offset.clone()
        };
        let s2 = 2.0 * self.width * self.width;
        let (a, b) = (self.amplitude, self.chirp);
        let radial = |x: &[f64]| -> f64 {
            x.iter().zip(&x0).map(|(x, c)| (x - c) * (x - c)).sum()
        };
        let field = match &self.profile {
            Profile::Gaussian | Profile::ChirpedGaussian => ComplexField::from_fn(grid, |x| {
                let r2 = radial(x);
                Complex64::from_polar(a * (-r2 / s2).exp(), b * r2)
            }),
            Profile::Ring { radius } => ComplexField::from_fn(grid, |x| {
                let r2 = radial(x);
                let d = r2.sqrt() - radius;
                Complex64::from_polar(a * (-d * d / s2).exp(), b * r2)
            }),
            Profile::SampleFile(path) => {
                let field = sample_file::read_sample_file(path)?;
                if field.grid() != grid {
                    return Err(NlsError::SampleFile(format!(
                        "{} holds a {:?} grid, config expects {:?}",
                        path.display(),
                        field.grid(),
                        grid
                    )));
                }
                field
            }
        };
        field.check_finite()?;
        Ok(field)
    }
}

/// Everything one trajectory needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub grid: Grid,
    pub nonlinearity: Nonlinearity,
    pub t_end: f64,
    pub stepping: Stepping,
    /// Strictly increasing times in `[0, t_end]`; empty means `{0, t_end}`.
    pub snapshot_times: Vec<f64>,
    pub sentinels: SentinelThresholds,
    /// `‖∇u‖₂` growth over its initial value that counts as blowup.
    pub blowup_growth: f64,
    pub initial_data: InitialDataSpec,
}

impl SimulationConfig {
    pub fn new(
        grid: Grid,
        nonlinearity: Nonlinearity,
        t_end: f64,
        stepping: Stepping,
        initial_data: InitialDataSpec,
    ) -> Self {
        Self {
            grid,
            nonlinearity,
            t_end,
            stepping,
            snapshot_times: Vec::new(),
            sentinels: SentinelThresholds::default(),
            blowup_growth: 20.0,
            initial_data,
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// True when `n < 3`, where the power range has no energy-critical cap.
    pub fn out_of_paper_regime(&self) -> bool {
        self.dim() < 3
    }

    pub fn snapshot_schedule(&self) -> Vec<f64> {
        if !self.snapshot_times.is_empty() {
            return self.snapshot_times.clone();
        }
        if self.t_end > 0.0 {
            vec![0.0, self.t_end]
        } else {
            vec![0.0]
        }
    }

    /// Every violated constraint, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let nl = &self.nonlinearity;
        let n = self.dim();
        if nl.lambda1 == 0.0 || nl.lambda2 == 0.0 || !nl.lambda1.is_finite() || !nl.lambda2.is_finite() {
            out.push(format!(
                "couplings must be finite and nonzero, got lambda1={} lambda2={}",
                nl.lambda1, nl.lambda2
            ));
        }
        if !(nl.p1 > 0.0 && nl.p1 < nl.p2 && nl.p2.is_finite()) {
            out.push(format!("powers must satisfy 0 < p1 < p2, got p1={} p2={}", nl.p1, nl.p2));
        }
        if n >= 3 {
            let cap = 4.0 / (n as f64 - 2.0);
            if nl.p2 > cap * (1.0 + 1e-12) {
                out.push(format!("p2={} exceeds the energy-critical power {cap} for n={n}", nl.p2));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            out.push(format!("t_end must be nonnegative and finite, got {}", self.t_end));
        }
        let s = &self.stepping;
        if !(s.dt_min > 0.0 && s.dt_min <= s.dt_init && s.dt_init <= s.dt_max && s.dt_max.is_finite()) {
            out.push(format!(
                "need 0 < dt_min <= dt_init <= dt_max, got {} {} {}",
                s.dt_min, s.dt_init, s.dt_max
            ));
        }
        if !(s.accuracy_target > 0.0 && s.accuracy_target.is_finite()) {
            out.push(format!("accuracy_target must be positive, got {}", s.accuracy_target));
        }
        if !(s.max_phase > 0.0) {
            out.push(format!("max_phase must be positive, got {}", s.max_phase));
        }
        let times = &self.snapshot_times;
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            out.push("snapshot_times must be strictly increasing".into());
        }
        if times.iter().any(|&t| !(t >= 0.0 && t <= self.t_end)) {
            out.push(format!("snapshot_times must lie in [0, {}]", self.t_end));
        }
        let th = &self.sentinels;
        for (name, v) in [("tail", th.tail), ("boundary", th.boundary)] {
            if !(v > 0.0 && v <= 1.0) {
                out.push(format!("sentinel threshold {name} must lie in (0, 1], got {v}"));
            }
        }
        if !(self.blowup_growth > 1.0) {
            out.push(format!("blowup_growth must exceed 1, got {}", self.blowup_growth));
        }
        self.initial_data.violations(n, &mut out);
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(NlsError::InvalidConfig(v))
        }
    }
}
