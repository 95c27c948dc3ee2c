//! Interaction Morawetz functionals, Coulomb-type convolutions, spacetime
//! norms and Schrödinger admissibility.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;

use crate::conserved::mass;
use crate::error::{NlsError, Result};
use crate::integrator::{modulus_power, Nonlinearity};
use crate::spectral::{fft_nd, gradient, gradient_norm_sq, lebesgue_norm, ComplexField, Domain, Grid};

/// A Lebesgue exponent in `[1, ∞]`, finite values exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    Finite(Ratio<i64>),
    Infinite,
}

impl Exponent {
    pub fn int(k: i64) -> Self {
        Exponent::Finite(Ratio::from_integer(k))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Exponent::Finite(Ratio::new(num, den))
    }

    /// `1/q`, zero at infinity.
    pub fn reciprocal(self) -> Ratio<i64> {
        match self {
            Exponent::Finite(q) => q.recip(),
            Exponent::Infinite => Ratio::from_integer(0),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Exponent::Finite(q) => *q.numer() as f64 / *q.denom() as f64,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

/// `2/q + n/r = n/2` with `2 ≤ q, r ≤ ∞`, decided in exact arithmetic.
pub fn admissible_pair(q: Exponent, r: Exponent, n: usize) -> bool {
    let two = Ratio::from_integer(2);
    let at_least_two = |e: Exponent| match e {
        Exponent::Finite(v) => v >= two,
        Exponent::Infinite => true,
    };
    if !at_least_two(q) || !at_least_two(r) {
        return false;
    }
    let n = Ratio::from_integer(n as i64);
    two * q.reciprocal() + n * r.reciprocal() == n / two
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Average of `|x|^{-s}` over the cube `[-h, h]ⁿ`, `s < n`.
///
/// The cube splits into `2n` pyramids with apex at the origin; along each
/// ray the radial integral is exact, leaving a smooth face integral.
pub fn cell_average_inverse_power(n: usize, s: f64, h: f64) -> f64 {
    let (x, w) = gauss_legendre(24);
    let m = x.len();
    let dims = n - 1;
    let mut face = 0.0;
    let total = m.pow(dims as u32);
    for flat in 0..total {
        let mut rest = flat;
        let (mut r2, mut weight) = (h * h, 1.0);
        for _ in 0..dims {
            let i = rest % m;
            rest /= m;
            let y = h * x[i];
            r2 += y * y;
            weight *= h * w[i];
        }
        face += weight * r2.powf(-0.5 * s);
    }
    let integral = 2.0 * n as f64 * h / (n as f64 - s) * face;
    integral / (2.0 * h).powi(n as i32)
}

/// Minimum-image displacement of FFT offset `flat`.
fn displacement(grid: &Grid, flat: usize, out: &mut [f64]) {
    let idx = grid.unravel(flat);
    for a in 0..grid.dim() {
        out[a] = grid.wavenumber(idx[a]) as f64 * grid.dx();
    }
}

/// The DFT of a kernel sampled at minimum-image offsets, truncated beyond
/// radius `L/2`, ready for circular convolution.
#[derive(Debug, Clone)]
pub struct ConvolutionKernel {
    grid: Grid,
    spectrum: Vec<Complex64>,
}

impl ConvolutionKernel {
    fn from_samples(grid: &Grid, origin: f64, f: impl Fn(&[f64], f64) -> f64) -> Self {
        let cutoff = 0.5 * grid.length();
        let mut d = vec![0.0; grid.dim()];
        let mut data: Vec<Complex64> = (0..grid.len())
            .map(|flat| {
                if flat == 0 {
                    return Complex64::new(origin, 0.0);
                }
                displacement(grid, flat, &mut d);
                let r = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r >= cutoff {
                    Complex64::default()
                } else {
                    Complex64::new(f(&d, r), 0.0)
                }
            })
            .collect();
        fft_nd(grid, &mut data, true);
        let w = grid.cell_volume() / grid.len() as f64;
        for v in data.iter_mut() {
            *v *= w;
        }
        Self {
            grid: grid.clone(),
            spectrum: data,
        }
    }

    /// `|x|^{-s}`, origin cell set to its cell average.
    pub fn inverse_power(grid: &Grid, s: u32) -> Result<Self> {
        if s as usize >= grid.dim() {
            return Err(NlsError::NonIntegrableKernel {
                power: s,
                dim: grid.dim(),
            });
        }
        let sf = s as f64;
        let origin = cell_average_inverse_power(grid.dim(), sf, 0.5 * grid.dx());
        Ok(Self::from_samples(grid, origin, |_, r| r.powf(-sf)))
    }

    /// `x_a/|x|`, zero at the origin by odd symmetry.
    pub fn unit_component(grid: &Grid, axis: usize) -> Self {
        Self::from_samples(grid, 0.0, |d, r| d[axis] / r)
    }

    /// `∑_j ρ_j K(x_i − x_j) dxⁿ` for real or complex samples `rho`.
    pub fn convolve_raw(&self, rho_spectrum: &[Complex64], out: &mut [Complex64]) {
        for ((o, a), b) in out.iter_mut().zip(rho_spectrum).zip(&self.spectrum) {
            *o = a * b;
        }
        fft_nd(&self.grid, out, false);
    }

    pub fn convolve(&self, rho: &ComplexField) -> Result<ComplexField> {
        rho.expect_same_grid_as(&self.grid)?;
        rho.expect_domain(Domain::Position)?;
        rho.check_finite()?;
        let mut spec = rho.values().to_vec();
        fft_nd(&self.grid, &mut spec, true);
        let mut out = vec![Complex64::default(); self.grid.len()];
        self.convolve_raw(&spec, &mut out);
        ComplexField::from_values(&self.grid, out)
    }
}

/// `ρ * |·|^{-s}` on the box.
pub fn coulomb_convolve(rho: &ComplexField, s: u32) -> Result<ComplexField> {
    ConvolutionKernel::inverse_power(rho.grid(), s)?.convolve(rho)
}

/// Kernels needed for interaction Morawetz records on one grid.
#[derive(Debug, Clone)]
pub struct MorawetzKernels {
    grid: Grid,
    coulomb: ConvolutionKernel,
    cubic: Option<ConvolutionKernel>,
    unit: Vec<ConvolutionKernel>,
}

impl MorawetzKernels {
    pub fn new(grid: &Grid) -> Result<Self> {
        if grid.dim() < 3 {
            return Err(NlsError::OutOfRegime(format!(
                "interaction Morawetz terms need n >= 3, got n = {}",
                grid.dim()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            coulomb: ConvolutionKernel::inverse_power(grid, 1)?,
            cubic: if grid.dim() >= 4 {
                Some(ConvolutionKernel::inverse_power(grid, 3)?)
            } else {
                None
            },
            unit: (0..grid.dim()).map(|a| ConvolutionKernel::unit_component(grid, a)).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorawetzRecord {
    pub t: f64,
    /// `2 Im∬ |u(y)|² (x−y)/|x−y| · ∇u(x) ū(x)`.
    pub m_interact: f64,
    /// `−∬ Δ(1/|x−y|) |u(y)|²|u(x)|²`.
    pub term_a: f64,
    /// `2(n−1)λ_i p_i/(p_i+2) ∬ |u(y)|²|u(x)|^{p_i+2}/|x−y|`.
    pub term_b: [f64; 2],
    pub mass: f64,
    pub gradient_norm: f64,
    pub dim: usize,
}

impl MorawetzRecord {
    /// `(n−1)·term_A + ∑ term_B_i`.
    pub fn integrand(&self) -> f64 {
        (self.dim as f64 - 1.0) * self.term_a + self.term_b[0] + self.term_b[1]
    }

    pub fn h1_norm(&self) -> f64 {
        (self.mass + self.gradient_norm * self.gradient_norm).sqrt()
    }

    /// `2M^{3/2}‖u‖_{Ḣ¹}`.
    pub fn easy_bound(&self) -> f64 {
        2.0 * self.mass.powf(1.5) * self.gradient_norm
    }
}

/// Interaction Morawetz quantities of `u` at time `t`.
pub fn interaction_terms(t: f64, u: &ComplexField, nl: &Nonlinearity, kernels: &MorawetzKernels) -> Result<MorawetzRecord> {
    u.expect_same_grid_as(&kernels.grid)?;
    u.expect_domain(Domain::Position)?;
    u.check_finite()?;
    let grid = u.grid();
    let n = grid.dim();
    let vol = grid.cell_volume();
    let density: Vec<f64> = u.values().iter().map(|z| z.norm_sqr()).collect();
    let mut rho_hat: Vec<Complex64> = density.iter().map(|&d| Complex64::new(d, 0.0)).collect();
    fft_nd(grid, &mut rho_hat, true);
    let mut conv = vec![Complex64::default(); grid.len()];

    let term_a = match &kernels.cubic {
        None => 4.0 * PI * density.iter().map(|d| d * d).sum::<f64>() * vol,
        Some(k) => {
            k.convolve_raw(&rho_hat, &mut conv);
            (n as f64 - 3.0) * density.iter().zip(&conv).map(|(d, c)| d * c.re).sum::<f64>() * vol
        }
    };

    kernels.coulomb.convolve_raw(&rho_hat, &mut conv);
    let mut term_b = [0.0; 2];
    for (slot, (l, p)) in term_b.iter_mut().zip(nl.terms()) {
        if l == 0.0 {
            continue;
        }
        let pairing: f64 = density
            .iter()
            .zip(&conv)
            .map(|(&m2, c)| m2 * modulus_power(m2, p) * c.re)
            .sum::<f64>()
            * vol;
        *slot = 2.0 * (n as f64 - 1.0) * l * p / (p + 2.0) * pairing;
    }

    let grads = gradient(u)?;
    let mut m_interact = 0.0;
    for (axis, g) in grads.iter().enumerate() {
        kernels.unit[axis].convolve_raw(&rho_hat, &mut conv);
        m_interact += u
            .values()
            .iter()
            .zip(g.values())
            .zip(&conv)
            .map(|((z, d), c)| (z.conj() * d).im * c.re)
            .sum::<f64>();
    }
    m_interact *= 2.0 * vol;

    Ok(MorawetzRecord {
        t,
        m_interact,
        term_a,
        term_b,
        mass: mass(u),
        gradient_norm: gradient_norm_sq(u)?.sqrt(),
        dim: n,
    })
}

/// Trapezoid rule over possibly uneven samples.
pub fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorawetzBudget {
    pub applicable: bool,
    /// Time integral of the integrand up to each record.
    pub cumulative: Vec<f64>,
    pub integrated_lhs: f64,
    /// `4·(sup_t ‖u‖_{H¹})⁴`.
    pub budget: f64,
    /// `integrated_lhs / budget`.
    pub ratio: f64,
    pub min_integrand: f64,
    pub satisfied: bool,
}

/// Time-integrates the Morawetz integrand and compares it with
/// `4 sup‖u‖_{H¹}⁴` allowing 5% for quadrature.
pub fn morawetz_budget_check(records: &[MorawetzRecord], nl: &Nonlinearity) -> MorawetzBudget {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let f: Vec<f64> = records.iter().map(MorawetzRecord::integrand).collect();
    let mut cumulative = vec![0.0; records.len()];
    for k in 1..records.len() {
        cumulative[k] = cumulative[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
    }
    let integrated_lhs = cumulative.last().copied().unwrap_or(0.0);
    let sup = records.iter().map(MorawetzRecord::h1_norm).fold(0.0, f64::max);
    let budget = 4.0 * sup.powi(4);
    let applicable = nl.lambda1 >= 0.0 && nl.lambda2 >= 0.0;
    MorawetzBudget {
        applicable,
        cumulative,
        integrated_lhs,
        budget,
        ratio: if budget > 0.0 { integrated_lhs / budget } else { 0.0 },
        min_integrand: f.iter().copied().fold(f64::INFINITY, f64::min),
        satisfied: applicable && integrated_lhs <= budget * 1.05,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimeNormSpec {
    pub q: f64,
    pub r: f64,
    pub interval: (f64, f64),
}

impl SpacetimeNormSpec {
    /// `L^{n+1}_t L^{2(n+1)/(n−1)}_x`.
    pub fn z(n: usize, interval: (f64, f64)) -> Self {
        let n = n as f64;
        Self {
            q: n + 1.0,
            r: 2.0 * (n + 1.0) / (n - 1.0),
            interval,
        }
    }

    /// `L^{2(n+2)/n}_{t,x}`.
    pub fn v(n: usize, interval: (f64, f64)) -> Self {
        let e = 2.0 * (n as f64 + 2.0) / n as f64;
        Self { q: e, r: e, interval }
    }

    /// `L^{2(n+2)/(n−2)}_{t,x}`.
    pub fn w(n: usize, interval: (f64, f64)) -> Self {
        let e = 2.0 * (n as f64 + 2.0) / (n as f64 - 2.0);
        Self { q: e, r: e, interval }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Plain,
    Gradient,
}

/// `‖u(t)‖_r` or `‖∇u(t)‖_r` (Euclidean magnitude of the gradient).
pub fn spatial_norm(u: &ComplexField, r: f64, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Plain => lebesgue_norm(u, r),
        NormKind::Gradient => {
            let grads = gradient(u)?;
            let mut mag = vec![Complex64::default(); u.grid().len()];
            for g in &grads {
                for (m, v) in mag.iter_mut().zip(g.values()) {
                    m.re += v.norm_sqr();
                }
            }
            for m in mag.iter_mut() {
                m.re = m.re.sqrt();
            }
            lebesgue_norm(&ComplexField::from_values(u.grid(), mag)?, r)
        }
    }
}

/// Composes spatial norms sampled at `times` into `L^q_t` over `spec.interval`
/// by trapezoid quadrature; `q = ∞` takes the maximum.
pub fn spacetime_norm_from_series(spec: &SpacetimeNormSpec, times: &[f64], spatial: &[f64]) -> Result<f64> {
    if spec.q < 1.0 || spec.r < 1.0 {
        return Err(NlsError::InvalidArgument(format!("exponents must be >= 1, got q={} r={}", spec.q, spec.r)));
    }
    let (a, b) = spec.interval;
    let tol = 1e-9 * (b - a).abs().max(1.0);
    let (t, f): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(spatial)
        .filter(|(t, _)| **t >= a - tol && **t <= b + tol)
        .map(|(t, f)| (*t, *f))
        .unzip();
    if t.is_empty() {
        return Err(NlsError::InvalidArgument("no samples inside the interval".into()));
    }
    if spec.q.is_infinite() {
        return Ok(f.iter().copied().fold(0.0, f64::max));
    }
    let powered: Vec<f64> = f.iter().map(|v| v.powf(spec.q)).collect();
    Ok(trapezoid(&t, &powered).powf(1.0 / spec.q))
}

/// `‖u‖_{L^q_t L^r_x}` (or of `∇u`) from snapshots.
pub fn spacetime_norm(spec: &SpacetimeNormSpec, snapshots: &[(f64, &ComplexField)], kind: NormKind) -> Result<f64> {
    let (a, b) = spec.interval;
    let tol = 1e-9 * (b - a).abs().max(1.0);
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (t, u) in snapshots {
        if *t >= a - tol && *t <= b + tol {
            times.push(*t);
            values.push(spatial_norm(u, spec.r, kind)?);
        }
    }
    spacetime_norm_from_series(spec, &times, &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn cell_average_matches_brute_force() {
        // midpoint rule on an offset lattice avoids the singular origin
        let (n, s, h) = (3, 1.0, 0.5);
        let m = 200;
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let c = |i: usize| -h + (i as f64 + 0.5) * 2.0 * h / m as f64;
                    let r = (c(i).powi(2) + c(j).powi(2) + c(k).powi(2)).sqrt();
                    acc += r.powf(-s);
                }
            }
        }
        let brute = acc / (m * m * m) as f64;
        let exact = cell_average_inverse_power(n, s, h);
        assert!((brute - exact).abs() < 1e-4 * exact, "{brute} {exact}");
    }

    #[test]
    fn rejects_non_integrable_kernel() {
        let grid = Grid::new(3, 4.0, 8).unwrap();
        assert!(matches!(
            ConvolutionKernel::inverse_power(&grid, 3),
            Err(NlsError::NonIntegrableKernel { .. })
        ));
    }
}
