//! One run: evolve, observe every snapshot, post-process, persist.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nlslab::conserved::{energy, kinetic_bound_check, ConservedRecord, KineticBound};
use nlslab::integrator::{evolve_from, resolution_sentinel, Nonlinearity, Observer, RunOutcome, SentinelThresholds};
use nlslab::morawetz::{interaction_terms, morawetz_budget_check, MorawetzKernels, MorawetzRecord, SpacetimeNormSpec};
use nlslab::scattering::{
    decay_fit, pseudoconformal_energy, scattering_records, strauss_exponent, DuhamelAccumulator,
};
use nlslab::spectral::{lebesgue_norm, sobolev_norm, ComplexField, Norm};
use nlslab::virial::{blowup_criteria, blowup_monitor, virial_consistency, virial_record, CriterionVerdict, VerdictStatus, VirialRecord};
use nlslab::NlsError;

use crate::config::{to_flat, to_toml, RunConfig};
use crate::manifest::{
    cauchy_certified, classify_regime, ClassifyInputs, DecaySummary, KineticSummary, Manifest, MonitorSummary,
    MorawetzSummary, OutcomeSummary, PseudoconformalSummary, ScatteringSummary, VerdictSummary, VirialSummary,
    MANIFEST_FILE,
};
use crate::output::{build_table, sha256_hex, ColumnSpec, Staging};

pub const SERIES_COLUMNS: &[ColumnSpec] = &[
    ColumnSpec { name: "t", units: "time", meaning: "snapshot time" },
    ColumnSpec { name: "mass", units: "mass", meaning: "‖u‖₂²" },
    ColumnSpec { name: "energy", units: "energy", meaning: "kinetic plus both potential terms" },
    ColumnSpec { name: "kinetic", units: "energy", meaning: "½‖∇u‖₂²" },
    ColumnSpec { name: "potential1", units: "energy", meaning: "λ₁/(p₁+2)·‖u‖_{p₁+2}^{p₁+2}" },
    ColumnSpec { name: "potential2", units: "energy", meaning: "λ₂/(p₂+2)·‖u‖_{p₂+2}^{p₂+2}" },
    ColumnSpec { name: "power1", units: "1", meaning: "‖u‖_{p₁+2}^{p₁+2}" },
    ColumnSpec { name: "power2", units: "1", meaning: "‖u‖_{p₂+2}^{p₂+2}" },
    ColumnSpec { name: "variance", units: "mass·length²", meaning: "V = ∫|x|²|u|²" },
    ColumnSpec { name: "current_y", units: "mass·length", meaning: "y = −Im∫ ū x·∇u, with V′ = −4y" },
    ColumnSpec { name: "variance_second", units: "mass/time²", meaning: "V″ from kinetic and potential terms" },
    ColumnSpec { name: "y_prime_lower_bound", units: "mass/time", meaning: "c‖∇u‖₂² for the applicable blowup case" },
    ColumnSpec { name: "h", units: "mass·length²", meaning: "pseudoconformal energy ‖H(t)u‖₂² + 8t²·potentials" },
    ColumnSpec { name: "theta", units: "energy", meaning: "rate θ with h′ = tθ" },
    ColumnSpec { name: "morawetz_interaction", units: "1", meaning: "interaction Morawetz action" },
    ColumnSpec { name: "morawetz_a", units: "1", meaning: "−∬Δ(1/|x−y|)|u(y)|²|u(x)|²" },
    ColumnSpec { name: "morawetz_b1", units: "1", meaning: "first potential pairing against |u|²/|x−y|" },
    ColumnSpec { name: "morawetz_b2", units: "1", meaning: "second potential pairing against |u|²/|x−y|" },
    ColumnSpec { name: "morawetz_integrand", units: "1", meaning: "(n−1)·morawetz_a + morawetz_b1 + morawetz_b2" },
    ColumnSpec { name: "v_norm_partial", units: "1", meaning: "‖u‖ in L^{2(n+2)/n} over space and [0, t]" },
    ColumnSpec { name: "tail_fraction", units: "1", meaning: "spectral mass in the outer octave" },
    ColumnSpec { name: "boundary_fraction", units: "1", meaning: "mass within L/8 of a face" },
];

const STEP_COLUMNS: &[ColumnSpec] = &[
    ColumnSpec { name: "t", units: "time", meaning: "time reached by the step" },
    ColumnSpec { name: "dt", units: "time", meaning: "step size used" },
    ColumnSpec { name: "local_error", units: "1", meaning: "relative step-doubling discrepancy" },
    ColumnSpec { name: "tail_fraction", units: "1", meaning: "spectral mass in the outer octave" },
    ColumnSpec { name: "boundary_fraction", units: "1", meaning: "mass within L/8 of a face" },
];

const SCATTERING_COLUMNS: &[ColumnSpec] = &[
    ColumnSpec { name: "t", units: "time", meaning: "checkpoint time" },
    ColumnSpec { name: "u_plus_h1", units: "1", meaning: "‖u₊(t)‖_{H¹} of the partial Duhamel state" },
    ColumnSpec { name: "h1_distance", units: "1", meaning: "‖e^{−itΔ}u(t) − u₊‖_{H¹} against the last u₊" },
    ColumnSpec { name: "sigma_distance", units: "1", meaning: "h1_distance + ‖H(t)u(t) − e^{itΔ}(x u₊)‖₂" },
    ColumnSpec { name: "h", units: "mass·length²", meaning: "pseudoconformal energy" },
    ColumnSpec { name: "theta", units: "energy", meaning: "rate θ with h′ = tθ" },
];

const CAUCHY_COLUMNS: &[ColumnSpec] = &[
    ColumnSpec { name: "t", units: "time", meaning: "earlier checkpoint" },
    ColumnSpec { name: "t_next", units: "time", meaning: "later checkpoint, t + lag" },
    ColumnSpec { name: "increment", units: "1", meaning: "‖u₊(t_next) − u₊(t)‖_{H¹}" },
];

#[derive(Debug, Clone)]
pub struct RunResult {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl RunResult {
    pub fn exit_code(&self) -> i32 {
        outcome_exit_code(&self.manifest.outcome.label)
    }
}

pub fn outcome_exit_code(label: &str) -> i32 {
    match label {
        "completed" => 0,
        "blowup-detected" => 2,
        _ => 3,
    }
}

/// Per-snapshot measurements; one entry per column of `SERIES_COLUMNS`.
struct Recorder<'a> {
    nl: Nonlinearity,
    thresholds: SentinelThresholds,
    c: Option<f64>,
    kernels: Option<&'a MorawetzKernels>,
    v_exponent: f64,
    v_accum: f64,
    last_v: Option<(f64, f64)>,
    columns: Vec<Vec<f64>>,
    conserved: Vec<ConservedRecord>,
    virial: Vec<VirialRecord>,
    morawetz: Vec<MorawetzRecord>,
    sentinel_trips: usize,
    duhamel: Option<DuhamelAccumulator>,
    checkpoint_spacing: f64,
    checkpoints: Vec<(f64, ComplexField, ComplexField)>,
}

impl Observer for Recorder<'_> {
    fn observe(&mut self, t: f64, u: &ComplexField) -> nlslab::Result<()> {
        let nl = &self.nl;
        let rec = energy(u, nl)?.at(t);
        let vir = virial_record(t, u, nl, self.c)?;
        let (h, theta) = match pseudoconformal_energy(u, t, nl) {
            Ok(v) => v,
            Err(NlsError::Inapplicable(_)) => (f64::NAN, f64::NAN),
            Err(e) => return Err(e),
        };
        let mor = self.kernels.map(|k| interaction_terms(t, u, nl, k)).transpose()?;
        let sentinel = resolution_sentinel(u, &self.thresholds)?;
        if !sentinel.ok {
            self.sentinel_trips += 1;
        }

        let q = self.v_exponent;
        let f = lebesgue_norm(u, q)?.powf(q);
        if let Some((t0, f0)) = self.last_v {
            self.v_accum += 0.5 * (t - t0) * (f + f0);
        }
        self.last_v = Some((t, f));

        if let Some(acc) = self.duhamel.as_mut() {
            if t > acc.time() {
                acc.push(t, u)?;
            }
            let k = t / self.checkpoint_spacing;
            if (k - k.round()).abs() <= 1e-9 * k.max(1.0) {
                self.checkpoints.push((t, u.clone(), acc.state()));
            }
        }

        let nan = f64::NAN;
        let row = [
            t,
            rec.mass,
            rec.energy,
            rec.kinetic,
            rec.potential[0],
            rec.potential[1],
            rec.lebesgue_power(0, nl),
            rec.lebesgue_power(1, nl),
            vir.variance,
            vir.y,
            vir.v_second,
            vir.y_prime_lower_bound,
            h,
            theta,
            mor.map_or(nan, |m| m.m_interact),
            mor.map_or(nan, |m| m.term_a),
            mor.map_or(nan, |m| m.term_b[0]),
            mor.map_or(nan, |m| m.term_b[1]),
            mor.map_or(nan, |m| m.integrand()),
            self.v_accum.powf(1.0 / q),
            sentinel.tail_fraction,
            sentinel.boundary_fraction,
        ];
        for (col, v) in self.columns.iter_mut().zip(row) {
            col.push(v);
        }
        self.conserved.push(rec);
        self.virial.push(vir);
        if let Some(m) = mor {
            self.morawetz.push(m);
        }
        Ok(())
    }
}

/// Three-point derivative of `f` at interior samples, compared with `g`:
/// `max|FD(f) − g| / max|g|` over interior indices with `t ≥ from`.
pub fn derivative_mismatch(t: &[f64], f: &[f64], g: &[f64], from: f64) -> Option<f64> {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    let mut any = false;
    for k in 1..t.len().saturating_sub(1) {
        if t[k - 1] < from - 1e-12 || !(f[k - 1].is_finite() && f[k].is_finite() && f[k + 1].is_finite()) {
            continue;
        }
        let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        let d = -h1 / (h0 * (h0 + h1)) * f[k - 1] + (h1 - h0) / (h0 * h1) * f[k] + h0 / (h1 * (h0 + h1)) * f[k + 1];
        num = num.max((d - g[k]).abs());
        den = den.max(g[k].abs());
        any = true;
    }
    match (any, den > 0.0) {
        (false, _) => None,
        (true, true) => Some(num / den),
        (true, false) => Some(num),
    }
}

/// Relative spread of `h(t) − ∫_{from}^t sθ(s) ds` over `t ≥ from`.
pub fn pseudoconformal_balance(t: &[f64], h: &[f64], theta: &[f64], from: f64) -> Option<f64> {
    let idx: Vec<usize> = (0..t.len()).filter(|&k| t[k] >= from - 1e-12 && h[k].is_finite()).collect();
    let first = *idx.first()?;
    let mut integral = 0.0;
    let mut values = vec![h[first]];
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        integral += 0.5 * (t[b] - t[a]) * (t[a] * theta[a] + t[b] * theta[b]);
        values.push(h[b] - integral);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = h[first].abs();
    Some(if scale > 0.0 { (hi - lo) / scale } else { hi - lo })
}

/// `‖u₊(t + lag) − u₊(t)‖_{H¹}` for every checkpoint pair exactly `lag` apart.
fn lagged_increments(checkpoints: &[(f64, ComplexField, ComplexField)], lag: f64) -> Result<Vec<(f64, f64, f64)>> {
    let mut out = Vec::new();
    for (i, (t0, _, a)) in checkpoints.iter().enumerate() {
        for (t1, _, b) in &checkpoints[i + 1..] {
            if (t1 - t0 - lag).abs() <= 1e-9 * lag.max(1.0) {
                out.push((*t0, *t1, sobolev_norm(&b.sub(a)?, Norm::H1)?));
            }
        }
    }
    Ok(out)
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn verdict_summary(v: &CriterionVerdict) -> VerdictSummary {
    VerdictSummary {
        status: format!("{:?}", v.status).to_lowercase(),
        case: v.case.map(|c| c.number()),
        c: v.c,
        mass_coefficient: v.mass_coefficient,
        energy: v.energy,
        mass: v.mass,
        y0: v.y0,
        variance0: v.variance0,
        time_bound: v.time_bound,
        reasons: v.reasons.clone(),
    }
}

/// Content hash of the effective configuration, used in the run id.
pub fn run_id(cfg: &RunConfig) -> String {
    let digest = sha256_hex(to_toml(&to_flat(cfg)).as_bytes());
    format!("{}-{}", cfg.name, &digest[..12])
}

/// Runs `cfg` and writes `<out_root>/<run_id>/`.
pub fn run_scenario(cfg: &RunConfig, out_root: &Path) -> Result<RunResult> {
    let sim = &cfg.sim;
    let nl = sim.nonlinearity;
    let grid = &sim.grid;
    let n = grid.dim();
    let diag = &cfg.diagnostics;
    let flat = to_flat(cfg);
    let config_text = to_toml(&flat);
    let id = run_id(cfg);

    let u0 = sim.initial_data.sample(grid).context("sampling initial data")?;
    let verdict = blowup_criteria(&u0, &nl).ok();
    let c = verdict.as_ref().filter(|v| v.status == VerdictStatus::Applies).map(|v| v.c);
    let kernels = if diag.morawetz && n >= 3 { Some(MorawetzKernels::new(grid)?) } else { None };
    let mut recorder = Recorder {
        nl,
        thresholds: sim.sentinels,
        c,
        kernels: kernels.as_ref(),
        v_exponent: SpacetimeNormSpec::v(n, (0.0, sim.t_end)).r,
        v_accum: 0.0,
        last_v: None,
        columns: vec![Vec::new(); SERIES_COLUMNS.len()],
        conserved: Vec::new(),
        virial: Vec::new(),
        morawetz: Vec::new(),
        sentinel_trips: 0,
        duhamel: if diag.scattering { Some(DuhamelAccumulator::new(&u0, &nl)?) } else { None },
        checkpoint_spacing: diag.checkpoint_spacing,
        checkpoints: Vec::new(),
    };
    let evolution = evolve_from(sim, u0, &mut [&mut recorder], false)?;

    let (outcome, detected) = match &evolution.outcome {
        RunOutcome::Completed => (
            OutcomeSummary { label: "completed".into(), time: evolution.final_time, gradient_growth: None, reason: None },
            None,
        ),
        RunOutcome::BlowupDetected { t, gradient_growth } => (
            OutcomeSummary {
                label: "blowup-detected".into(),
                time: *t,
                gradient_growth: Some(*gradient_growth),
                reason: None,
            },
            Some(*t),
        ),
        RunOutcome::ResolutionLost { t, reason } => (
            OutcomeSummary { label: "resolution-lost".into(), time: *t, gradient_growth: None, reason: Some(reason.clone()) },
            None,
        ),
    };
    let completed = matches!(evolution.outcome, RunOutcome::Completed);

    let kinetic = if recorder.conserved.is_empty() {
        None
    } else {
        let r = kinetic_bound_check(&recorder.conserved, &nl, grid)?;
        Some(KineticSummary {
            bound: match &r.bound {
                KineticBound::Defocusing => "defocusing".into(),
                KineticBound::MixedSign { .. } => "mixed-sign".into(),
                KineticBound::Interpolation { .. } => "interpolation".into(),
                KineticBound::None { reason } => format!("none: {reason}"),
            },
            gradient_sq_bound: finite(r.gradient_sq_bound),
            max_violation: finite(r.max_violation),
            violations: r.violations,
            marginal: r.marginal,
            bounded: r.holds() && !matches!(r.bound, KineticBound::None { .. }),
        })
    };

    let virial = virial_consistency(&recorder.virial).ok().map(|v| VirialSummary {
        first_mismatch: v.first_mismatch,
        second_mismatch: v.second_mismatch,
        initial_current_mismatch: v.initial_current_mismatch,
    });
    let monitor = verdict.as_ref().map(|v| {
        let m = blowup_monitor(&recorder.virial, v, detected);
        MonitorSummary {
            applicable: m.applicable,
            critical_violations: m.critical_violations(),
            derivative_violations: m.derivative_violations.len(),
            monotonicity_violations: m.monotonicity_violations.len(),
            variance_violations: m.variance_violations.len(),
            concavity_violations: m.concavity_violations.len(),
            detected_time: m.detected_time,
            time_bound: m.time_bound,
            within_bound: m.within_bound,
            notes: m.notes,
        }
    });
    let morawetz = (!recorder.morawetz.is_empty()).then(|| {
        let b = morawetz_budget_check(&recorder.morawetz, &nl);
        MorawetzSummary {
            applicable: b.applicable,
            integrated_lhs: b.integrated_lhs,
            budget: b.budget,
            ratio: b.ratio,
            min_integrand: b.min_integrand,
            satisfied: b.satisfied,
        }
    });

    let (series, series_meta) = build_table(SERIES_COLUMNS, std::mem::take(&mut recorder.columns));
    let times = series.time().to_vec();

    let mut scattering = None;
    let mut scattering_table = None;
    let mut cauchy_table = None;
    if diag.scattering && completed && !recorder.checkpoints.is_empty() {
        let incr = lagged_increments(&recorder.checkpoints, diag.cauchy_lag)?;
        let checkpoints = std::mem::take(&mut recorder.checkpoints);
        let records = scattering_records(checkpoints, &nl)?;
        let tail: Vec<f64> =
            records.iter().filter(|r| r.t >= diag.cauchy_start - 1e-9).map(|r| r.h1_distance).collect();
        let pairs: Vec<(f64, f64)> = incr.iter().map(|&(t, _, v)| (t, v)).collect();
        scattering = Some(ScatteringSummary {
            lag: diag.cauchy_lag,
            start: diag.cauchy_start,
            threshold: diag.cauchy_threshold,
            certified: cauchy_certified(&pairs, diag.cauchy_start, diag.cauchy_threshold),
            increments: pairs,
            linear_distance_decreasing: tail.len() >= 2 && tail.windows(2).all(|w| w[1] <= w[0]),
        });
        let mut cols = vec![Vec::new(); SCATTERING_COLUMNS.len()];
        for r in &records {
            let row = [r.t, sobolev_norm(&r.u_plus_partial, Norm::H1)?, r.h1_distance, r.sigma_distance, r.h, r.theta];
            for (c, v) in cols.iter_mut().zip(row) {
                c.push(v);
            }
        }
        scattering_table = Some(build_table(SCATTERING_COLUMNS, cols));
        let cols = vec![
            incr.iter().map(|x| x.0).collect(),
            incr.iter().map(|x| x.1).collect(),
            incr.iter().map(|x| x.2).collect(),
        ];
        cauchy_table = Some(build_table(CAUCHY_COLUMNS, cols));
    }

    let mut decay = Vec::new();
    for (i, (_, p)) in nl.terms().into_iter().enumerate() {
        let column = format!("power{}", i + 1);
        let values = series.column(&column).unwrap_or(&[]);
        let window = diag.decay_window;
        let mut s = DecaySummary { column, p, window, slope: None, bound_slope: None, samples: 0, pass: None, error: None };
        match decay_fit(&times, values, window, p, n) {
            Ok(f) => {
                s.slope = Some(f.slope);
                s.bound_slope = Some(f.bound_slope);
                s.samples = f.samples;
                s.pass = Some(f.pass);
            }
            Err(e) => s.error = Some(e.to_string()),
        }
        decay.push(s);
    }

    let pseudoconformal = match (series.column("h"), series.column("theta")) {
        (Some(h), Some(theta)) => {
            let t_theta: Vec<f64> = times.iter().zip(theta).map(|(t, th)| t * th).collect();
            Some(PseudoconformalSummary {
                fd_mismatch: derivative_mismatch(&times, h, &t_theta, 1.0),
                balance_drift: pseudoconformal_balance(&times, h, theta, 1.0),
            })
        }
        _ => None,
    };

    let mut flags = Vec::new();
    if sim.out_of_paper_regime() {
        flags.push(format!("n = {n} < 3: no energy-critical cap on the powers; outside the analysed range"));
    }
    let alpha = strauss_exponent(n);
    if nl.p1 <= alpha {
        flags.push(format!("p1 = {} <= Strauss exponent {alpha:.6}: outside the decay and Sigma-scattering hypotheses", nl.p1));
    }
    if recorder.sentinel_trips > 0 {
        flags.push(format!("{} snapshot(s) exceeded a sentinel threshold", recorder.sentinel_trips));
    }
    let untrusted_virial = recorder.virial.iter().filter(|v| v.untrusted).count();
    if untrusted_virial > 0 {
        flags.push(format!("{untrusted_virial} virial record(s) have boundary mass above the trust threshold"));
    }
    if cfg.note.is_some() {
        flags.push("conditional".into());
    }

    let increments = scattering.as_ref().map_or(&[][..], |s| s.increments.as_slice());
    let classification = classify_regime(&ClassifyInputs {
        outcome: &outcome.label,
        critical_violations: monitor.as_ref().map_or(0, |m| m.critical_violations),
        increments,
        cauchy_start: diag.cauchy_start,
        cauchy_threshold: diag.cauchy_threshold,
        kinetic_bounded: kinetic.as_ref().is_some_and(|k| k.bounded),
    });

    let mut staging = Staging::new(out_root, &id)?;
    staging.write("config.toml", config_text.as_bytes(), true)?;
    staging.write_table("series", &series, series_meta)?;
    let mut step_cols = vec![Vec::new(); STEP_COLUMNS.len()];
    for s in &evolution.steps {
        for (c, v) in step_cols.iter_mut().zip([s.t, s.dt_used, s.local_error_estimate, s.tail_fraction, s.boundary_fraction]) {
            c.push(v);
        }
    }
    let (steps, steps_meta) = build_table(STEP_COLUMNS, step_cols);
    staging.write_table("steps", &steps, steps_meta)?;
    if let Some((t, meta)) = scattering_table {
        staging.write_table("scattering", &t, meta)?;
    }
    if let Some((t, meta)) = cauchy_table {
        staging.write_table("cauchy", &t, meta)?;
    }

    let manifest = Manifest {
        run_id: id,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        name: cfg.name.clone(),
        note: cfg.note.clone(),
        config: flat,
        outcome,
        steps: evolution.steps.len(),
        rejected_steps: evolution.rejected_steps,
        classification,
        files: staging.files().to_vec(),
        verdict: verdict.as_ref().map(verdict_summary),
        monitor,
        kinetic,
        virial,
        morawetz,
        v_norm: finite(recorder.v_accum.powf(1.0 / recorder.v_exponent)),
        scattering,
        decay,
        pseudoconformal,
        flags,
    };
    staging.write(MANIFEST_FILE, &serde_json::to_vec_pretty(&manifest)?, false)?;
    let dir = staging.commit()?;
    Ok(RunResult { dir, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_mismatch_is_second_order() {
        let err = |h: f64| {
            let t: Vec<f64> = (0..=(2.0 / h).round() as usize).map(|k| k as f64 * h).collect();
            let f: Vec<f64> = t.iter().map(|t| t.sin()).collect();
            let g: Vec<f64> = t.iter().map(|t| t.cos()).collect();
            derivative_mismatch(&t, &f, &g, 0.0).unwrap()
        };
        let order = (err(0.02) / err(0.01)).log2();
        assert!((order - 2.0).abs() < 0.1, "{order}");
    }

    #[test]
    fn balance_of_exact_law_is_flat() {
        // h = 1 + t³/3 has h′ = t·t, so θ = t
        let t: Vec<f64> = (0..=100).map(|k| 1.0 + k as f64 * 0.01).collect();
        let h: Vec<f64> = t.iter().map(|t| 1.0 + t * t * t / 3.0).collect();
        let drift = pseudoconformal_balance(&t, &h, &t, 1.0).unwrap();
        assert!(drift < 1e-4, "{drift}");
    }
}
