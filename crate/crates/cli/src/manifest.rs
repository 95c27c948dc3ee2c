//! The per-run manifest and regime classification.

use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::FlatConfig;
use crate::output::{read_table, verify_files, FileEntry, Table};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    ScatteringLike,
    GlobalBounded,
    Blowup,
    Untrusted,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::ScatteringLike => "scattering-like",
            Classification::GlobalBounded => "global-bounded",
            Classification::Blowup => "blowup",
            Classification::Untrusted => "untrusted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    /// `completed`, `blowup-detected` or `resolution-lost`.
    pub label: String,
    pub time: f64,
    pub gradient_growth: Option<f64>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub status: String,
    pub case: Option<u8>,
    pub c: f64,
    pub mass_coefficient: f64,
    pub energy: f64,
    pub mass: f64,
    pub y0: f64,
    pub variance0: f64,
    pub time_bound: Option<f64>,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub applicable: bool,
    pub critical_violations: usize,
    pub derivative_violations: usize,
    pub monotonicity_violations: usize,
    pub variance_violations: usize,
    pub concavity_violations: usize,
    pub detected_time: Option<f64>,
    pub time_bound: Option<f64>,
    pub within_bound: Option<bool>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticSummary {
    pub bound: String,
    pub gradient_sq_bound: Option<f64>,
    pub max_violation: Option<f64>,
    pub violations: usize,
    pub marginal: usize,
    /// A bound exists and no record exceeds it.
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialSummary {
    pub first_mismatch: f64,
    pub second_mismatch: f64,
    pub initial_current_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorawetzSummary {
    pub applicable: bool,
    pub integrated_lhs: f64,
    pub budget: f64,
    pub ratio: f64,
    pub min_integrand: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSummary {
    pub lag: f64,
    pub start: f64,
    pub threshold: f64,
    /// `(t, ‖u₊(t + lag) − u₊(t)‖_{H¹})` for every checkpoint pair.
    pub increments: Vec<(f64, f64)>,
    pub certified: bool,
    /// `‖e^{−itΔ}u(t) − u₊‖_{H¹}` nonincreasing over the checkpoints.
    pub linear_distance_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySummary {
    pub column: String,
    pub p: f64,
    pub window: (f64, f64),
    pub slope: Option<f64>,
    pub bound_slope: Option<f64>,
    pub samples: usize,
    pub pass: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoconformalSummary {
    /// `max|FD(h) − tθ| / max|tθ|` over interior snapshots with `t ≥ 1`.
    pub fd_mismatch: Option<f64>,
    /// Relative spread of `h − ∫tθ` over snapshots with `t ≥ 1`.
    pub balance_drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub tool_version: String,
    pub name: String,
    pub note: Option<String>,
    pub config: FlatConfig,
    pub outcome: OutcomeSummary,
    pub steps: usize,
    pub rejected_steps: usize,
    pub classification: Classification,
    pub files: Vec<FileEntry>,
    pub verdict: Option<VerdictSummary>,
    pub monitor: Option<MonitorSummary>,
    pub kinetic: Option<KineticSummary>,
    pub virial: Option<VirialSummary>,
    pub morawetz: Option<MorawetzSummary>,
    /// `‖u‖_{L^{2(n+2)/n}_{t,x}}` over the whole run.
    pub v_norm: Option<f64>,
    pub scattering: Option<ScatteringSummary>,
    pub decay: Vec<DecaySummary>,
    pub pseudoconformal: Option<PseudoconformalSummary>,
    pub flags: Vec<String>,
}

/// Everything classification looks at.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyInputs<'a> {
    pub outcome: &'a str,
    pub critical_violations: usize,
    pub increments: &'a [(f64, f64)],
    pub cauchy_start: f64,
    pub cauchy_threshold: f64,
    pub kinetic_bounded: bool,
}

/// Cauchy certificate: increments from `start` on never grow and the
/// smallest one is under `threshold`.
pub fn cauchy_certified(increments: &[(f64, f64)], start: f64, threshold: f64) -> bool {
    let tail: Vec<f64> = increments.iter().filter(|(t, _)| *t >= start - 1e-9).map(|(_, v)| *v).collect();
    !tail.is_empty()
        && tail.windows(2).all(|w| w[1] <= w[0])
        && tail.iter().copied().fold(f64::INFINITY, f64::min) < threshold
}

pub fn classify_regime(inputs: &ClassifyInputs) -> Classification {
    match inputs.outcome {
        "blowup-detected" if inputs.critical_violations == 0 => Classification::Blowup,
        "completed" => {
            if inputs.kinetic_bounded && cauchy_certified(inputs.increments, inputs.cauchy_start, inputs.cauchy_threshold) {
                Classification::ScatteringLike
            } else {
                Classification::GlobalBounded
            }
        }
        _ => Classification::Untrusted,
    }
}

/// A stored run, checksums verified.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub manifest: Manifest,
    pub series: Table,
    pub cauchy: Option<Table>,
}

pub fn load_run(dir: &Path) -> Result<StoredRun> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    verify_files(dir, &manifest.files)?;
    let series = read_table(&dir.join("series.csv"))?;
    let cauchy_path = dir.join("cauchy.csv");
    let cauchy = if manifest.files.iter().any(|f| f.path == "cauchy.csv") {
        Some(read_table(&cauchy_path)?)
    } else {
        None
    };
    Ok(StoredRun { manifest, series, cauchy })
}

impl StoredRun {
    /// Reclassifies from the stored series without touching any file.
    pub fn classify(&self) -> Result<Classification> {
        let m = &self.manifest;
        let cfg = crate::config::from_flat(&m.config).map_err(|e| anyhow::anyhow!("stored config: {e}"))?;
        let increments: Vec<(f64, f64)> = match &self.cauchy {
            Some(t) => t.time().iter().copied().zip(t.column("increment").unwrap_or(&[]).iter().copied()).collect(),
            None => Vec::new(),
        };
        let kinetic_bounded = kinetic_bounded_from_series(&self.series, &cfg)?;
        Ok(classify_regime(&ClassifyInputs {
            outcome: &m.outcome.label,
            critical_violations: m.monitor.as_ref().map_or(0, |x| x.critical_violations),
            increments: &increments,
            cauchy_start: cfg.diagnostics.cauchy_start,
            cauchy_threshold: cfg.diagnostics.cauchy_threshold,
            kinetic_bounded,
        }))
    }
}

fn kinetic_bounded_from_series(series: &Table, cfg: &crate::config::RunConfig) -> Result<bool> {
    use nlslab::conserved::{kinetic_bound_check, ConservedRecord, KineticBound};
    let col = |name: &str| series.column(name).with_context(|| format!("series has no {name} column"));
    let (mass, energy, kinetic) = (col("mass")?, col("energy")?, col("kinetic")?);
    let (p1, p2) = (col("potential1")?, col("potential2")?);
    let records: Vec<ConservedRecord> = (0..series.len())
        .map(|i| ConservedRecord {
            t: series.time()[i],
            mass: mass[i],
            energy: energy[i],
            kinetic: kinetic[i],
            potential: [p1[i], p2[i]],
        })
        .collect();
    if records.is_empty() {
        return Ok(false);
    }
    let report = kinetic_bound_check(&records, &cfg.sim.nonlinearity, &cfg.sim.grid)?;
    Ok(report.holds() && !matches!(report.bound, KineticBound::None { .. }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs<'a>(outcome: &'a str, violations: usize, incr: &'a [(f64, f64)], kinetic: bool) -> ClassifyInputs<'a> {
        ClassifyInputs {
            outcome,
            critical_violations: violations,
            increments: incr,
            cauchy_start: 5.0,
            cauchy_threshold: 1e-3,
            kinetic_bounded: kinetic,
        }
    }

    const GOOD: &[(f64, f64)] = &[(4.5, 3e-3), (5.0, 9e-4), (5.5, 8e-4), (6.0, 7e-4)];

    #[test]
    fn blowup_needs_a_clean_monitor() {
        assert_eq!(classify_regime(&inputs("blowup-detected", 0, &[], false)), Classification::Blowup);
        assert_eq!(classify_regime(&inputs("blowup-detected", 1, &[], false)), Classification::Untrusted);
    }

    #[test]
    fn lost_resolution_is_never_trusted() {
        assert_eq!(classify_regime(&inputs("resolution-lost", 0, GOOD, true)), Classification::Untrusted);
    }

    #[test]
    fn scattering_needs_certificate_and_kinetic_bound() {
        assert_eq!(classify_regime(&inputs("completed", 0, GOOD, true)), Classification::ScatteringLike);
        assert_eq!(classify_regime(&inputs("completed", 0, GOOD, false)), Classification::GlobalBounded);
        assert_eq!(classify_regime(&inputs("completed", 0, &[], true)), Classification::GlobalBounded);
    }

    #[test]
    fn certificate_rules() {
        // growth before the start time is ignored
        assert!(cauchy_certified(GOOD, 5.0, 1e-3));
        assert!(!cauchy_certified(&[(5.0, 9e-4), (5.5, 9.5e-4)], 5.0, 1e-3));
        assert!(!cauchy_certified(&[(5.0, 2e-3), (5.5, 1.5e-3)], 5.0, 1e-3));
        assert!(!cauchy_certified(&[(1.0, 1e-5)], 5.0, 1e-3));
    }
}
