//! Variance, the weighted mass current and Glassey-type blowup criteria.

use crate::conserved::{energy, mass, power_gap_maximum, ConservedRecord};
use crate::error::{NlsError, Result};
use crate::integrator::{boundary_fraction, Nonlinearity, SentinelThresholds};
use crate::spectral::{gradient, weighted_l2, ComplexField, Domain};

/// A boundary-sensitive quantity together with the mass near the box faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weighted {
    pub value: f64,
    pub boundary_fraction: f64,
    /// Set when `boundary_fraction` exceeds the default sentinel threshold.
    pub untrusted: bool,
}

impl Weighted {
    fn new(value: f64, u: &ComplexField) -> Self {
        let b = boundary_fraction(u);
        Self {
            value,
            boundary_fraction: b,
            untrusted: b > SentinelThresholds::default().boundary,
        }
    }
}

/// `V = ∫|x|²|u|²`.
pub fn variance(u: &ComplexField) -> Result<Weighted> {
    u.expect_domain(Domain::Position)?;
    u.check_finite()?;
    let w = weighted_l2(u);
    Ok(Weighted::new(w * w, u))
}

/// `x·∇u` with spectral derivatives.
pub(crate) fn radial_derivative(u: &ComplexField) -> Result<ComplexField> {
    let grid = u.grid();
    let coord = grid.coordinates();
    let n = grid.points();
    let mut out = ComplexField::zeros(grid);
    for (axis, d) in gradient(u)?.iter().enumerate() {
        let stride = grid.stride(axis);
        for (flat, (o, v)) in out.values_mut().iter_mut().zip(d.values()).enumerate() {
            *o += v * coord[(flat / stride) % n];
        }
    }
    Ok(out)
}

/// `y = −Im∫ ū (x·∇u)`, so that `V′ = −4y`.
pub fn mass_current_y(u: &ComplexField) -> Result<Weighted> {
    u.expect_domain(Domain::Position)?;
    u.check_finite()?;
    let ru = radial_derivative(u)?;
    let s: f64 = u.values().iter().zip(ru.values()).map(|(a, b)| (a.conj() * b).im).sum();
    Ok(Weighted::new(-s * u.grid().cell_volume(), u))
}

/// `8‖∇u‖₂² + ∑ 4nλ_i p_i/(p_i+2) ‖u‖_{p_i+2}^{p_i+2}` from a conserved record.
pub fn variance_second_derivative(record: &ConservedRecord, nl: &Nonlinearity, dim: usize) -> f64 {
    let n = dim as f64;
    let mut v = 8.0 * record.gradient_sq();
    for (i, (l, p)) in nl.terms().into_iter().enumerate() {
        // 4nλp/(p+2)·N = 4np·(λ/(p+2))N
        if l != 0.0 {
            v += 4.0 * n * p * record.potential[i];
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialRecord {
    pub t: f64,
    pub variance: f64,
    pub y: f64,
    pub v_second: f64,
    /// `c‖∇u‖₂²` for the applicable blowup case, NaN when none applies.
    pub y_prime_lower_bound: f64,
    pub untrusted: bool,
}

/// Builds a virial record; `c` is the blowup coefficient if a case applies.
pub fn virial_record(t: f64, u: &ComplexField, nl: &Nonlinearity, c: Option<f64>) -> Result<VirialRecord> {
    let v = variance(u)?;
    let y = mass_current_y(u)?;
    let rec = energy(u, nl)?;
    Ok(VirialRecord {
        t,
        variance: v.value,
        y: y.value,
        v_second: variance_second_derivative(&rec, nl, u.grid().dim()),
        y_prime_lower_bound: c.map_or(f64::NAN, |c| c * rec.gradient_sq()),
        untrusted: v.untrusted,
    })
}

/// Three-point first and second derivatives at interior index `k` for
/// possibly uneven spacing.
fn stencil(t: &[f64], f: &[f64], k: usize) -> (f64, f64) {
    let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
    let d1 = (-h1 / (h0 * (h0 + h1))) * f[k - 1]
        + ((h1 - h0) / (h0 * h1)) * f[k]
        + (h0 / (h1 * (h0 + h1))) * f[k + 1];
    let d2 = 2.0 * (f[k - 1] / (h0 * (h0 + h1)) - f[k] / (h0 * h1) + f[k + 1] / (h1 * (h0 + h1)));
    (d1, d2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialConsistency {
    /// `max|FD(V) + 4y| / max|4y|` over interior records.
    pub first_mismatch: f64,
    /// `max|FD(−4y) − V″| / max|V″|` over interior records.
    pub second_mismatch: f64,
    /// `y(0)` against `−¼·FD(V)` at the first record (one-sided, second order).
    pub initial_current_mismatch: f64,
}

/// Finite-difference check of `V′ = −4y` and `(−4y)′ = V″`.
pub fn virial_consistency(series: &[VirialRecord]) -> Result<VirialConsistency> {
    if series.len() < 5 {
        return Err(NlsError::InvalidArgument(format!(
            "virial_consistency needs at least 5 records, got {}",
            series.len()
        )));
    }
    let t: Vec<f64> = series.iter().map(|r| r.t).collect();
    let v: Vec<f64> = series.iter().map(|r| r.variance).collect();
    let m4y: Vec<f64> = series.iter().map(|r| -4.0 * r.y).collect();
    let (mut d1, mut s1, mut d2, mut s2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 1..series.len() - 1 {
        d1 = d1.max((stencil(&t, &v, k).0 - m4y[k]).abs());
        s1 = s1.max(m4y[k].abs());
        d2 = d2.max((stencil(&t, &m4y, k).0 - series[k].v_second).abs());
        s2 = s2.max(series[k].v_second.abs());
    }
    let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
    // one-sided three-point derivative at t[0]
    let dv0 = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * v[0] + (h0 + h1) / (h0 * h1) * v[1]
        - h0 / (h1 * (h0 + h1)) * v[2];
    let y_fd = -0.25 * dv0;
    let y0 = series[0].y;
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { a };
    Ok(VirialConsistency {
        first_mismatch: ratio(d1, s1),
        second_mismatch: ratio(d2, s2),
        initial_current_mismatch: ratio((y_fd - y0).abs(), y0.abs().max(y_fd.abs())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupCase {
    /// `λ₁ > 0`, `E < 0`.
    DefocusingLower,
    /// `λ₁ < 0`, `p₁ > 4/n`, `E < 0`.
    FocusingSupercriticalLower,
    /// `λ₁ < 0`, `p₁ ≤ 4/n`, `E + CM < 0`.
    FocusingSubcriticalLower,
}

impl BlowupCase {
    pub fn number(self) -> u8 {
        match self {
            BlowupCase::DefocusingLower => 1,
            BlowupCase::FocusingSupercriticalLower => 2,
            BlowupCase::FocusingSubcriticalLower => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    /// A case holds and `y₀ > 0`: blowup is predicted before `time_bound`.
    Applies,
    /// The energy condition of a case holds but `y₀ ≤ 0`.
    Inconclusive,
    NoCriterion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionVerdict {
    pub status: VerdictStatus,
    pub case: Option<BlowupCase>,
    /// Coefficient `c` in `y′ ≥ c‖∇u‖₂²`.
    pub c: f64,
    /// `C` in the condition `E + CM < 0`; zero outside the subcritical case.
    pub mass_coefficient: f64,
    pub energy: f64,
    pub mass: f64,
    pub y0: f64,
    /// `‖xu₀‖₂²`.
    pub variance0: f64,
    /// `‖xu₀‖₂²/(c·y₀)` when the verdict applies.
    pub time_bound: Option<f64>,
    pub reasons: Vec<String>,
}

/// Constants of the subcritical-lower-power case: `(ε, θ, δ, C)`.
pub fn subcritical_case_constants(nl: &Nonlinearity, dim: usize) -> (f64, f64, f64, f64) {
    let n = dim as f64;
    let (l1, p1, l2, p2) = (nl.lambda1.abs(), nl.p1, nl.lambda2.abs(), nl.p2);
    let eps = (0.5 * (p2 * n / 2.0 - 2.0)).min(1.0);
    let theta = 2.0 * (2.0 + eps) / (p2 * n);
    let a = n * l1 * theta * (p2 - p1) / (p1 + 2.0);
    let ceiling = (n * p2 * l2 * (1.0 - theta) / (p2 + 2.0)) / a;
    let delta = 0.5 * ceiling;
    // a^{p₁+2} ≤ C(δ) a² + δ a^{p₂+2}
    let c_delta = power_gap_maximum(1.0, p1, delta, p2);
    let c_mass = a * c_delta / (p2 * n * theta);
    (eps, theta, delta, c_mass)
}

/// Decides which blowup case, if any, `u₀` satisfies.
///
/// The time bound uses `1/c` as the prefactor.
pub fn blowup_criteria(u0: &ComplexField, nl: &Nonlinearity) -> Result<CriterionVerdict> {
    let n = u0.grid().dim() as f64;
    let rec = energy(u0, nl)?;
    let y0 = mass_current_y(u0)?.value;
    let variance0 = variance(u0)?.value;
    let mut verdict = CriterionVerdict {
        status: VerdictStatus::NoCriterion,
        case: None,
        c: 0.0,
        mass_coefficient: 0.0,
        energy: rec.energy,
        mass: mass(u0),
        y0,
        variance0,
        time_bound: None,
        reasons: Vec::new(),
    };
    let reasons = &mut verdict.reasons;
    if nl.lambda2 >= 0.0 {
        reasons.push("higher power is not focusing (lambda2 >= 0)".into());
        return Ok(verdict);
    }
    let crit = 4.0 / n;
    if nl.p2 <= crit {
        reasons.push(format!("p2 = {} is not above the mass-critical power {crit}", nl.p2));
        return Ok(verdict);
    }
    if n > 2.0 && nl.p2 > 4.0 / (n - 2.0) * (1.0 + 1e-12) {
        reasons.push(format!("p2 = {} exceeds the energy-critical power", nl.p2));
        return Ok(verdict);
    }
    let e = rec.energy;
    let (case, c, cm, holds) = if nl.lambda1 > 0.0 {
        (BlowupCase::DefocusingLower, (nl.p2 * n - 4.0) / 2.0, 0.0, e < 0.0)
    } else if nl.p1 > crit {
        (BlowupCase::FocusingSupercriticalLower, (nl.p1 * n - 4.0) / 2.0, 0.0, e < 0.0)
    } else {
        let (eps, _, _, cm) = subcritical_case_constants(nl, u0.grid().dim());
        (BlowupCase::FocusingSubcriticalLower, eps, cm, e + cm * verdict.mass < 0.0)
    };
    verdict.case = Some(case);
    verdict.c = c;
    verdict.mass_coefficient = cm;
    if !holds {
        reasons.push(format!(
            "energy condition of case {} fails: E + C*M = {:e}",
            case.number(),
            e + cm * verdict.mass
        ));
        verdict.case = None;
        return Ok(verdict);
    }
    if y0 <= 0.0 {
        reasons.push(format!("y0 = {y0:e} is not positive"));
        verdict.status = VerdictStatus::Inconclusive;
        return Ok(verdict);
    }
    verdict.status = VerdictStatus::Applies;
    verdict.time_bound = Some(variance0 / (c * y0));
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub applicable: bool,
    /// Interior snapshots where `FD(y)′ < c‖∇u‖₂²(1 − 5%)`.
    pub derivative_violations: Vec<f64>,
    /// Snapshots where `y` fails to increase.
    pub monotonicity_violations: Vec<f64>,
    /// Snapshots with `t > 0` where `V` fails to decrease.
    pub variance_violations: Vec<f64>,
    /// Interior snapshots where the second difference of `V` is not negative
    /// beyond 5% of `|V″|`.
    pub concavity_violations: Vec<f64>,
    pub detected_time: Option<f64>,
    pub time_bound: Option<f64>,
    pub within_bound: Option<bool>,
    pub notes: Vec<String>,
}

impl MonitorReport {
    pub fn critical_violations(&self) -> usize {
        self.derivative_violations.len()
            + self.monotonicity_violations.len()
            + self.variance_violations.len()
            + self.concavity_violations.len()
    }
}

/// Checks the differential inequality behind the blowup argument along a
/// run, and compares the stop time with the predicted bound.
pub fn blowup_monitor(series: &[VirialRecord], verdict: &CriterionVerdict, detected_time: Option<f64>) -> MonitorReport {
    let mut report = MonitorReport {
        applicable: verdict.status == VerdictStatus::Applies,
        derivative_violations: Vec::new(),
        monotonicity_violations: Vec::new(),
        variance_violations: Vec::new(),
        concavity_violations: Vec::new(),
        detected_time,
        time_bound: verdict.time_bound,
        within_bound: None,
        notes: Vec::new(),
    };
    if !report.applicable {
        report.notes.push("no applicable blowup case".into());
        return report;
    }
    report.notes.push(format!(
        "time bound uses ||x u0||^2/(c y0) with c = {}; the bound without c differs by that factor",
        verdict.c
    ));
    let t: Vec<f64> = series.iter().map(|r| r.t).collect();
    let y: Vec<f64> = series.iter().map(|r| r.y).collect();
    let v: Vec<f64> = series.iter().map(|r| r.variance).collect();
    for k in 1..series.len() {
        if y[k] <= y[k - 1] {
            report.monotonicity_violations.push(t[k]);
        }
        if t[k] > 0.0 && v[k] >= v[k - 1] {
            report.variance_violations.push(t[k]);
        }
    }
    for k in 1..series.len().saturating_sub(1) {
        let (dy, _) = stencil(&t, &y, k);
        if dy < series[k].y_prime_lower_bound * 0.95 {
            report.derivative_violations.push(t[k]);
        }
        let (_, d2v) = stencil(&t, &v, k);
        if d2v >= 0.05 * series[k].v_second.abs() {
            report.concavity_violations.push(t[k]);
        }
    }
    if let (Some(td), Some(tb)) = (detected_time, verdict.time_bound) {
        report.within_bound = Some(td <= tb);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use num_complex::Complex64;

    #[test]
    fn real_field_carries_no_current() {
        let grid = Grid::new(2, 12.0, 32).unwrap();
        let u = ComplexField::from_fn(&grid, |x| Complex64::new((-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp(), 0.0));
        assert!(mass_current_y(&u).unwrap().value.abs() < 1e-14);
    }

    #[test]
    fn defocusing_has_no_criterion() {
        let grid = Grid::new(3, 12.0, 16).unwrap();
        let u = ComplexField::from_fn(&grid, |x| Complex64::new((-x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0));
        let v = blowup_criteria(&u, &Nonlinearity::new(1.0, 2.0, 1.0, 4.0)).unwrap();
        assert_eq!(v.status, VerdictStatus::NoCriterion);
    }
}
