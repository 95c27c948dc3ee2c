//! Galilean operator, pseudoconformal energy, Duhamel scattering states and
//! decay-rate fits.

use num_complex::Complex64;

use crate::conserved::energy;
use crate::error::{NlsError, Result};
use crate::integrator::Nonlinearity;
use crate::spectral::{free_propagate, gradient, sobolev_norm, ComplexField, Domain, Norm};
use crate::virial::Weighted;

/// `H(t)u = xu + 2it∇u`, one component per axis.
pub fn galilean_apply(u: &ComplexField, t: f64) -> Result<Vec<ComplexField>> {
    u.expect_domain(Domain::Position)?;
    u.check_finite()?;
    let grid = u.grid();
    let coord = grid.coordinates();
    let n = grid.points();
    let grads = gradient(u)?;
    let c = Complex64::new(0.0, 2.0 * t);
    Ok(grads
        .into_iter()
        .enumerate()
        .map(|(axis, mut g)| {
            let stride = grid.stride(axis);
            for (flat, (v, z)) in g.values_mut().iter_mut().zip(u.values()).enumerate() {
                *v = z * coord[(flat / stride) % n] + c * *v;
            }
            g
        })
        .collect())
}

/// `e^{itΔ} x e^{−itΔ} u`, the conjugated form of the Galilean operator.
pub fn galilean_conjugated(u: &ComplexField, t: f64) -> Result<Vec<ComplexField>> {
    let back = free_propagate(u, -t)?;
    (0..u.grid().dim())
        .map(|axis| {
            let x = u.grid().axis_coordinate(axis);
            let mut w = back.clone();
            for (v, xa) in w.values_mut().iter_mut().zip(&x) {
                *v *= xa;
            }
            free_propagate(&w, t)
        })
        .collect()
}

fn l2_sq(f: &ComplexField) -> f64 {
    f.sum_sq() * f.grid().cell_volume()
}

/// `‖H(t)u‖₂²`, flagged when mass sits near the box faces.
pub fn galilean_norm_sq(u: &ComplexField, t: f64) -> Result<Weighted> {
    let value = galilean_apply(u, t)?.iter().map(l2_sq).sum();
    let b = crate::integrator::boundary_fraction(u);
    Ok(Weighted {
        value,
        boundary_fraction: b,
        untrusted: b > crate::integrator::SentinelThresholds::default().boundary,
    })
}

/// Pseudoconformal energy `h` and the rate `θ` with `h′ = tθ`.
///
/// Only defined for defocusing couplings with an energy-critical upper
/// power and `n ≥ 3`.
pub fn pseudoconformal_energy(u: &ComplexField, t: f64, nl: &Nonlinearity) -> Result<(f64, f64)> {
    let n = u.grid().dim();
    if n < 3 {
        return Err(NlsError::Inapplicable(format!("pseudoconformal law needs n >= 3, got {n}")));
    }
    if !(nl.lambda1 > 0.0 && nl.lambda2 > 0.0) {
        return Err(NlsError::Inapplicable("pseudoconformal law needs defocusing couplings".into()));
    }
    let critical = 4.0 / (n as f64 - 2.0);
    if (nl.p2 - critical).abs() > 1e-12 * critical {
        return Err(NlsError::Inapplicable(format!(
            "pseudoconformal law needs p2 = 4/(n-2) = {critical}, got {}",
            nl.p2
        )));
    }
    let rec = energy(u, nl)?;
    let hu = galilean_norm_sq(u, t)?.value;
    let h = hu + 8.0 * t * t * (rec.potential[0] + rec.potential[1]);
    // 4λ(4−pn)/(p+2)·N = 4(4−pn)·P
    let theta: f64 = nl
        .terms()
        .iter()
        .zip(rec.potential)
        .map(|(&(_, p), pot)| 4.0 * (4.0 - p * n as f64) * pot)
        .sum();
    Ok((h, theta))
}

/// Streaming trapezoid quadrature of `u₊(t) = u₀ − i∫₀ᵗ e^{−isΔ}F(u(s)) ds`.
#[derive(Debug, Clone)]
pub struct DuhamelAccumulator {
    nl: Nonlinearity,
    u0: ComplexField,
    integral: Vec<Complex64>,
    last: (f64, Vec<Complex64>),
}

impl DuhamelAccumulator {
    pub fn new(u0: &ComplexField, nl: &Nonlinearity) -> Result<Self> {
        let g = free_propagate(&nl.apply(u0), 0.0)?;
        Ok(Self {
            nl: *nl,
            u0: u0.clone(),
            integral: vec![Complex64::default(); u0.grid().len()],
            last: (0.0, g.into_values()),
        })
    }

    pub fn time(&self) -> f64 {
        self.last.0
    }

    /// Adds the panel from the previous sample to `(t, u(t))`.
    pub fn push(&mut self, t: f64, u: &ComplexField) -> Result<()> {
        u.expect_same_grid(&self.u0)?;
        if !(t > self.last.0) {
            return Err(NlsError::InvalidArgument(format!(
                "Duhamel samples must advance in time: {t} after {}",
                self.last.0
            )));
        }
        let g = free_propagate(&self.nl.apply(u), -t)?.into_values();
        let w = 0.5 * (t - self.last.0);
        for ((acc, a), b) in self.integral.iter_mut().zip(&self.last.1).zip(&g) {
            *acc += w * (a + b);
        }
        self.last = (t, g);
        Ok(())
    }

    /// `u₊` at the latest sample time.
    pub fn state(&self) -> ComplexField {
        let mi = Complex64::new(0.0, -1.0);
        let values = self.u0.values().iter().zip(&self.integral).map(|(a, b)| a + mi * b).collect();
        ComplexField::from_values(self.u0.grid(), values).expect("same grid")
    }
}

/// `u₊(t_cut)` by trapezoid quadrature over snapshots on `[0, t_cut]`.
/// The first snapshot must be `u₀` at `t = 0`.
pub fn duhamel_scattering_state(snapshots: &[(f64, &ComplexField)], nl: &Nonlinearity, t_cut: f64) -> Result<ComplexField> {
    let (t0, u0) = snapshots
        .first()
        .ok_or_else(|| NlsError::InvalidArgument("no snapshots".into()))?;
    if *t0 != 0.0 {
        return Err(NlsError::InvalidArgument(format!("first snapshot is at t = {t0}, not 0")));
    }
    let mut acc = DuhamelAccumulator::new(u0, nl)?;
    for (t, u) in &snapshots[1..] {
        if *t > t_cut * (1.0 + 1e-12) {
            break;
        }
        acc.push(*t, u)?;
    }
    Ok(acc.state())
}

/// `‖u₊(t_{k+1}) − u₊(t_k)‖_{H¹}` for consecutive partial states, stamped
/// with the earlier time.
pub fn cauchy_increments(partials: &[(f64, ComplexField)]) -> Result<Vec<(f64, f64)>> {
    partials
        .windows(2)
        .map(|w| Ok((w[0].0, sobolev_norm(&w[1].1.sub(&w[0].1)?, Norm::H1)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringRecord {
    pub t: f64,
    pub u_plus_partial: ComplexField,
    /// `‖e^{−itΔ}u(t) − u₊‖_{H¹}` against the last available `u₊`.
    pub h1_distance: f64,
    /// `h1_distance + ‖H(t)u(t) − e^{itΔ}(x u₊)‖₂`.
    pub sigma_distance: f64,
    /// NaN outside the pseudoconformal regime.
    pub h: f64,
    pub theta: f64,
}

/// Builds records from checkpoints `(t, u(t), u₊(t))`, measuring distances
/// to the final checkpoint's `u₊`.
pub fn scattering_records(checkpoints: Vec<(f64, ComplexField, ComplexField)>, nl: &Nonlinearity) -> Result<Vec<ScatteringRecord>> {
    let limit = match checkpoints.last() {
        Some((_, _, up)) => up.clone(),
        None => return Ok(Vec::new()),
    };
    let grid = limit.grid().clone();
    let mut out = Vec::with_capacity(checkpoints.len());
    for (t, u, up) in checkpoints {
        let linear = free_propagate(&u, -t)?;
        let h1_distance = sobolev_norm(&linear.sub(&limit)?, Norm::H1)?;
        let hu = galilean_apply(&u, t)?;
        let mut weight_sq = 0.0;
        for (axis, comp) in hu.iter().enumerate() {
            let x = grid.axis_coordinate(axis);
            let mut xu = limit.clone();
            for (v, xa) in xu.values_mut().iter_mut().zip(&x) {
                *v *= xa;
            }
            weight_sq += l2_sq(&comp.sub(&free_propagate(&xu, t)?)?);
        }
        let (h, theta) = pseudoconformal_energy(&u, t, nl).unwrap_or((f64::NAN, f64::NAN));
        out.push(ScatteringRecord {
            t,
            u_plus_partial: up,
            h1_distance,
            sigma_distance: h1_distance + weight_sq.sqrt(),
            h,
            theta,
        });
    }
    Ok(out)
}

/// `α(n) = (2 − n + √(n² + 12n + 4))/(2n)`.
pub fn strauss_exponent(n: usize) -> f64 {
    let n = n as f64;
    (2.0 - n + (n * n + 12.0 * n + 4.0).sqrt()) / (2.0 * n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// `−min(2, pn/2)`.
    pub bound_slope: f64,
    pub samples: usize,
    /// `slope ≤ bound_slope + 0.2`.
    pub pass: bool,
}

/// Least-squares slope of `log value` against `log t` inside `window`.
pub fn decay_fit(times: &[f64], values: &[f64], window: (f64, f64), p: f64, n: usize) -> Result<DecayFit> {
    let (t1, t2) = window;
    if t1 < 1.0 || t2 <= t1 {
        return Err(NlsError::InvalidArgument(format!("window must satisfy 1 <= T1 < T2, got ({t1}, {t2})")));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t1 - 1e-9 && **t <= t2 + 1e-9)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 10 {
        return Err(NlsError::DegenerateFit(format!("{} samples in window, need 10", pts.len())));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(NlsError::DegenerateFit(format!("nonpositive value {v} at t = {t}")));
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, v)| (a + t.ln(), b + v.ln()));
    let (mx, my) = (sx / k, sy / k);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, v) in &pts {
        let dx = t.ln() - mx;
        sxy += dx * (v.ln() - my);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    let bound_slope = -(2.0f64).min(p * n as f64 / 2.0);
    Ok(DecayFit {
        slope,
        intercept: my - slope * mx,
        bound_slope,
        samples: pts.len(),
        pass: slope <= bound_slope + 0.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strauss_exponent_in_three_dimensions() {
        let a = strauss_exponent(3);
        assert!((a - (-1.0 + 49f64.sqrt()) / 6.0).abs() < 1e-15);
        // α(n) solves n p² + (n − 2) p − 4 = 0
        assert!((3.0 * a * a + a - 4.0).abs() < 1e-14);
    }

    #[test]
    fn exact_power_law_fits_exactly() {
        let t: Vec<f64> = (0..20).map(|k| 5.0 + k as f64 * 1.5).collect();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-1.7)).collect();
        let fit = decay_fit(&t, &v, (5.0, 40.0), 1.0, 3).unwrap();
        assert!((fit.slope + 1.7).abs() < 1e-12);
        assert_eq!(fit.bound_slope, -1.5);
        assert!(fit.pass);
    }

    #[test]
    fn zero_series_is_degenerate() {
        let t: Vec<f64> = (1..=12).map(f64::from).collect();
        let v = vec![0.0; 12];
        assert!(matches!(decay_fit(&t, &v, (1.0, 12.0), 2.0, 3), Err(NlsError::DegenerateFit(_))));
    }
}
