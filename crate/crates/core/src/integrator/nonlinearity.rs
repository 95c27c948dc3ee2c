use num_complex::Complex64;

use crate::error::{NlsError, Result};
use crate::spectral::ComplexField;

/// The combined power nonlinearity `F(u) = λ₁|u|^{p₁}u + λ₂|u|^{p₂}u`.
///
/// Positive couplings are defocusing. Zero couplings are representable
/// (free flow), config validation is where they get rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    pub lambda1: f64,
    pub p1: f64,
    pub lambda2: f64,
    pub p2: f64,
}

/// `(|u|²)^{p/2}`, exact integer powers where possible.
#[inline]
pub(crate) fn modulus_power(m2: f64, p: f64) -> f64 {
    let half = 0.5 * p;
    if half == half.trunc() && half.abs() < 64.0 {
        m2.powi(half as i32)
    } else if m2 < f64::MIN_POSITIVE {
        0.0
    } else {
        m2.powf(half)
    }
}

impl Nonlinearity {
    pub fn new(lambda1: f64, p1: f64, lambda2: f64, p2: f64) -> Self {
        Self {
            lambda1,
            p1,
            lambda2,
            p2,
        }
    }

    pub fn free() -> Self {
        Self::new(0.0, 2.0, 0.0, 4.0)
    }

    pub fn terms(&self) -> [(f64, f64); 2] {
        [(self.lambda1, self.p1), (self.lambda2, self.p2)]
    }

    pub fn is_defocusing(&self) -> bool {
        self.lambda1 > 0.0 && self.lambda2 > 0.0
    }

    pub fn is_free(&self) -> bool {
        self.lambda1 == 0.0 && self.lambda2 == 0.0
    }

    /// `λ₁|u|^{p₁} + λ₂|u|^{p₂}` given `|u|²`.
    #[inline]
    pub fn potential(&self, m2: f64) -> f64 {
        let mut v = 0.0;
        if self.lambda1 != 0.0 {
            v += self.lambda1 * modulus_power(m2, self.p1);
        }
        if self.lambda2 != 0.0 {
            v += self.lambda2 * modulus_power(m2, self.p2);
        }
        v
    }

    /// Largest nonlinear frequency `∑|λ_i| a^{p_i}` at amplitude `a`.
    pub fn frequency_bound(&self, amplitude: f64) -> f64 {
        let m2 = amplitude * amplitude;
        self.terms()
            .iter()
            .map(|&(l, p)| l.abs() * modulus_power(m2, p))
            .sum()
    }

    /// `F(u)` sampled pointwise.
    pub fn apply(&self, u: &ComplexField) -> ComplexField {
        u.map(|z| z * self.potential(z.norm_sqr()))
    }
}

/// Rotates every sample by `exp(-iτ(λ₁|u|^{p₁} + λ₂|u|^{p₂}))` in place.
///
/// This is the exact flow of `i u_t = F(u)` over time `τ` since `|u|` is
/// constant along it.
pub(crate) fn rotate_phase(values: &mut [Complex64], tau: f64, nl: &Nonlinearity) -> Result<()> {
    if tau == 0.0 || nl.is_free() {
        return Ok(());
    }
    for z in values.iter_mut() {
        let m2 = z.norm_sqr();
        let phase = -tau * nl.potential(m2);
        if !phase.is_finite() || phase.abs() > 1e12 {
            return Err(NlsError::AmplitudeOverflow(m2.sqrt()));
        }
        let (s, c) = phase.sin_cos();
        *z *= Complex64::new(c, s);
    }
    Ok(())
}

/// Exact potential substep `u ↦ u·exp(-iτ(λ₁|u|^{p₁} + λ₂|u|^{p₂}))`.
pub fn nonlinear_phase_step(u: &ComplexField, tau: f64, nl: &Nonlinearity) -> Result<ComplexField> {
    u.check_finite()?;
    let mut out = u.clone();
    rotate_phase(out.values_mut(), tau, nl)?;
    Ok(out)
}
