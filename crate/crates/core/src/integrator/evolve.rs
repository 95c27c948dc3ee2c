use std::f64::consts::PI;

use num_complex::Complex64;

use super::config::SimulationConfig;
use super::nonlinearity::Nonlinearity;
use super::stepper::SplitStepper;
use crate::conserved::{energy, mixed_sign_constant};
use crate::error::{NlsError, Result};
use crate::spectral::{fft_nd, gradient_norm_sq, ComplexField, Domain, Grid};

/// Fixed-step runs measure `‖∇u‖₂` every this many steps.
const FIXED_CHECK_INTERVAL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Time reached by the step.
    pub t: f64,
    pub dt_used: f64,
    /// Relative L² step-doubling discrepancy; zero for fixed stepping.
    pub local_error_estimate: f64,
    /// Outer-octave spectral mass fraction at the step's midpoint stage.
    pub tail_fraction: f64,
    pub boundary_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Completed,
    /// `‖∇u‖₂` passed the growth threshold, and any a-priori bound on it,
    /// while both sentinels were clean.
    BlowupDetected { t: f64, gradient_growth: f64 },
    /// The grid can no longer certify the trajectory.
    ResolutionLost { t: f64, reason: String },
}

impl RunOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            RunOutcome::Completed => "completed",
            RunOutcome::BlowupDetected { .. } => "blowup-detected",
            RunOutcome::ResolutionLost { .. } => "resolution-lost",
        }
    }
}

/// Called with the current field at each snapshot time.
pub trait Observer {
    fn observe(&mut self, t: f64, u: &ComplexField) -> Result<()>;
}

impl<F: FnMut(f64, &ComplexField) -> Result<()>> Observer for F {
    fn observe(&mut self, t: f64, u: &ComplexField) -> Result<()> {
        self(t, u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: ComplexField,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    /// Empty when the run was asked not to keep fields.
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepRecord>,
    pub outcome: RunOutcome,
    /// Field at the time the run stopped.
    pub final_field: ComplexField,
    pub final_time: f64,
    pub rejected_steps: usize,
    pub initial_gradient_norm: f64,
}

/// Exact bound on `‖∇u‖₂²` from conservation: `2E` when both terms defocus,
/// `2E + 2CM` when only the higher power does. Growth below it is not blowup.
fn a_priori_gradient_bound(u0: &ComplexField, nl: &Nonlinearity) -> Result<Option<f64>> {
    let c = if nl.lambda1 >= 0.0 && nl.lambda2 >= 0.0 {
        0.0
    } else if nl.lambda2 > 0.0 {
        mixed_sign_constant(nl)
    } else {
        return Ok(None);
    };
    let rec = energy(u0, nl)?;
    Ok(Some(2.0 * rec.energy + 2.0 * c * rec.mass))
}

/// Evolves the configured initial data, keeping every snapshot field.
pub fn evolve(cfg: &SimulationConfig, observers: &mut [&mut dyn Observer]) -> Result<Evolution> {
    cfg.validate()?;
    let u0 = cfg.initial_data.sample(&cfg.grid)?;
    evolve_from(cfg, u0, observers, true)
}

/// `‖∇u‖₂²` of raw samples, using `scratch` for the transform.
fn gradient_energy(grid: &Grid, xi2: &[f64], data: &[Complex64], scratch: &mut [Complex64]) -> f64 {
    scratch.copy_from_slice(data);
    fft_nd(grid, scratch, true);
    let s: f64 = scratch.iter().zip(xi2).map(|(z, k2)| z.norm_sqr() * k2).sum();
    4.0 * PI * PI * s * grid.cell_volume() / grid.len() as f64
}

fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        num += (x - y).norm_sqr();
        den += y.norm_sqr();
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

fn max_modulus(data: &[Complex64]) -> f64 {
    data.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt()
}

struct Run<'a> {
    cfg: &'a SimulationConfig,
    stepper: SplitStepper,
    data: Vec<Complex64>,
    /// Potential time owed to `data`; consecutive half steps are fused.
    pending: f64,
    t: f64,
}

impl Run<'_> {
    fn flush(&mut self) -> Result<()> {
        let tau = std::mem::take(&mut self.pending);
        self.stepper.potential(&mut self.data, tau)
    }

    fn field(&mut self) -> Result<ComplexField> {
        self.flush()?;
        ComplexField::from_values(&self.cfg.grid, self.data.clone())
    }
}

/// Evolves `u0` under `cfg` from `t = 0`.
///
/// Snapshot times are hit exactly by shortening the step before them.
/// With `dt_min < dt_max` each step is accepted by step doubling against
/// `accuracy_target`, and additionally capped so the nonlinear phase per
/// step stays below `max_phase`.
pub fn evolve_from(
    cfg: &SimulationConfig,
    u0: ComplexField,
    observers: &mut [&mut dyn Observer],
    keep_snapshots: bool,
) -> Result<Evolution> {
    cfg.validate()?;
    u0.expect_same_grid_as(&cfg.grid)?;
    u0.expect_domain(Domain::Position)?;
    u0.check_finite()?;

    let grid = &cfg.grid;
    let stepping = cfg.stepping;
    let adaptive = !stepping.is_fixed();
    let tol = stepping.accuracy_target;
    let th = cfg.sentinels;
    let xi2 = grid.frequency_squared();

    let mut targets = cfg.snapshot_schedule();
    if targets.last().map_or(true, |&t| t < cfg.t_end) {
        targets.push(cfg.t_end);
    }
    let snapshot_set = cfg.snapshot_schedule();

    let initial_gradient_norm = gradient_norm_sq(&u0)?.sqrt();
    let gradient_ceiling = a_priori_gradient_bound(&u0, &cfg.nonlinearity)?;
    let mut run = Run {
        cfg,
        stepper: SplitStepper::new(grid, &cfg.nonlinearity),
        data: u0.into_values(),
        pending: 0.0,
        t: 0.0,
    };
    let mut full = vec![Complex64::default(); grid.len()];
    let mut half = vec![Complex64::default(); grid.len()];
    let mut scratch = vec![Complex64::default(); grid.len()];

    let mut snapshots = Vec::new();
    let mut steps = Vec::new();
    let mut rejected_steps = 0;
    let mut next_target = 0;
    let mut next_snapshot = 0;
    let mut dt = stepping.dt_init;
    let mut since_check = 0;

    let outcome = 'run: loop {
        while next_snapshot < snapshot_set.len() && snapshot_set[next_snapshot] <= run.t {
            let field = run.field()?;
            for obs in observers.iter_mut() {
                obs.observe(run.t, &field)?;
            }
            if keep_snapshots {
                snapshots.push(Snapshot { t: run.t, field });
            }
            next_snapshot += 1;
        }
        while next_target < targets.len() && targets[next_target] <= run.t {
            next_target += 1;
        }
        if next_target == targets.len() {
            break RunOutcome::Completed;
        }
        let target = targets[next_target];

        let mut h = dt;
        if adaptive && stepping.max_phase.is_finite() {
            let freq = cfg.nonlinearity.frequency_bound(max_modulus(&run.data));
            if freq > 0.0 {
                h = h.min(stepping.max_phase / freq).max(stepping.dt_min);
            }
        }
        let remaining = target - run.t;
        let landing = h >= remaining * (1.0 - 1e-9);
        if landing && (h - remaining).abs() > 1e-9 * h {
            h = remaining;
        }

        let (tail, local_error) = if adaptive {
            run.flush()?;
            full.copy_from_slice(&run.data);
            half.copy_from_slice(&run.data);
            let attempt = (|| -> Result<f64> {
                run.stepper.step(&mut full, h)?;
                run.stepper.step(&mut half, 0.5 * h)?;
                run.stepper.step(&mut half, 0.5 * h)
            })();
            let tail = match attempt {
                Ok(tail) => tail,
                Err(NlsError::AmplitudeOverflow(a)) => {
                    break 'run RunOutcome::ResolutionLost {
                        t: run.t,
                        reason: format!("amplitude overflow at |u| = {a:e}"),
                    };
                }
                Err(e) => return Err(e),
            };
            let err = relative_l2(&full, &half);
            if !err.is_finite() {
                break 'run RunOutcome::ResolutionLost {
                    t: run.t,
                    reason: "non-finite step-doubling error".into(),
                };
            }
            let factor = if err > 0.0 {
                (0.9 * (tol / err).cbrt()).clamp(0.5, 2.0)
            } else {
                2.0
            };
            let at_floor = h <= stepping.dt_min * (1.0 + 1e-12);
            if err > tol && !at_floor {
                rejected_steps += 1;
                dt = (h * factor).max(stepping.dt_min);
                continue;
            }
            if err > 10.0 * tol {
                break 'run RunOutcome::ResolutionLost {
                    t: run.t,
                    reason: format!("local error {err:e} at dt_min exceeds 10x accuracy target"),
                };
            }
            std::mem::swap(&mut run.data, &mut half);
            if !landing || h == dt {
                dt = (h * factor).clamp(stepping.dt_min, stepping.dt_max);
            }
            (tail, err)
        } else {
            let tau = run.pending + 0.5 * h;
            run.pending = 0.0;
            match run.stepper.potential(&mut run.data, tau) {
                Ok(()) => {}
                Err(NlsError::AmplitudeOverflow(a)) => {
                    break 'run RunOutcome::ResolutionLost {
                        t: run.t,
                        reason: format!("amplitude overflow at |u| = {a:e}"),
                    };
                }
                Err(e) => return Err(e),
            }
            let tail = run.stepper.kinetic(&mut run.data, h);
            run.pending = 0.5 * h;
            (tail, 0.0)
        };

        run.t = if landing { target } else { run.t + h };
        let boundary = run.stepper.boundary_fraction(&run.data);
        steps.push(StepRecord {
            t: run.t,
            dt_used: h,
            local_error_estimate: local_error,
            tail_fraction: tail,
            boundary_fraction: boundary,
        });

        if !(tail.is_finite() && boundary.is_finite()) {
            break RunOutcome::ResolutionLost {
                t: run.t,
                reason: "non-finite field".into(),
            };
        }
        if tail > th.tail || boundary > th.boundary {
            break RunOutcome::ResolutionLost {
                t: run.t,
                reason: format!("sentinel tripped: tail {tail:e}, boundary {boundary:e}"),
            };
        }

        since_check += 1;
        if initial_gradient_norm > 0.0 && (adaptive || landing || since_check >= FIXED_CHECK_INTERVAL) {
            since_check = 0;
            if let Err(NlsError::AmplitudeOverflow(a)) = run.flush() {
                break RunOutcome::ResolutionLost {
                    t: run.t,
                    reason: format!("amplitude overflow at |u| = {a:e}"),
                };
            }
            let g2 = gradient_energy(grid, &xi2, &run.data, &mut scratch);
            let growth = g2.sqrt() / initial_gradient_norm;
            if growth > cfg.blowup_growth && gradient_ceiling.map_or(true, |c| g2 > c) {
                break RunOutcome::BlowupDetected {
                    t: run.t,
                    gradient_growth: growth,
                };
            }
        }
    };

    let final_field = match run.field() {
        Ok(f) => f,
        Err(NlsError::AmplitudeOverflow(_)) => ComplexField::from_values(grid, run.data.clone())?,
        Err(e) => return Err(e),
    };
    Ok(Evolution {
        snapshots,
        steps,
        outcome,
        final_field,
        final_time: run.t,
        rejected_steps,
        initial_gradient_norm,
    })
}
