//! Strict dotted-key TOML configuration.
//!
//! Files are flattened to `section.key` pairs before validation so that
//! `[grid]` tables and `grid.dim = 3` lines are interchangeable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nlslab::integrator::{InitialDataSpec, Nonlinearity, Profile, SentinelThresholds, SimulationConfig, Stepping};
use nlslab::spectral::Grid;
use toml::Value;

pub type FlatConfig = BTreeMap<String, Value>;

/// Post-processing knobs that do not affect the trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub morawetz: bool,
    pub scattering: bool,
    /// `u₊` partial integrals are kept at multiples of this time.
    pub checkpoint_spacing: f64,
    pub cauchy_lag: f64,
    /// Increments from this time on must be nonincreasing.
    pub cauchy_start: f64,
    pub cauchy_threshold: f64,
    pub decay_window: (f64, f64),
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            morawetz: true,
            scattering: true,
            checkpoint_spacing: 0.5,
            cauchy_lag: 5.0,
            cauchy_start: 5.0,
            cauchy_threshold: 1e-3,
            decay_window: (5.0, 40.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    /// Free-text caveat carried into the manifest.
    pub note: Option<String>,
    pub sim: SimulationConfig,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("not valid TOML: {0}")]
    Syntax(String),
    #[error("{} violation(s):\n  {}", .0.len(), .0.join("\n  "))]
    Invalid(Vec<String>),
}

const KEYS: &[&str] = &[
    "name",
    "note",
    "grid.dim",
    "grid.length",
    "grid.points",
    "nonlinearity.lambda1",
    "nonlinearity.p1",
    "nonlinearity.lambda2",
    "nonlinearity.p2",
    "time.t_end",
    "time.dt",
    "time.dt_init",
    "time.dt_min",
    "time.dt_max",
    "time.accuracy_target",
    "time.max_phase",
    "time.snapshot_spacing",
    "time.snapshots",
    "time.blowup_growth",
    "initial_data.profile",
    "initial_data.amplitude",
    "initial_data.width",
    "initial_data.chirp",
    "initial_data.offset",
    "initial_data.radius",
    "initial_data.path",
    "sentinels.tail",
    "sentinels.boundary",
    "diagnostics.morawetz",
    "diagnostics.scattering",
    "diagnostics.checkpoint_spacing",
    "diagnostics.cauchy_lag",
    "diagnostics.cauchy_start",
    "diagnostics.cauchy_threshold",
    "diagnostics.decay_window",
];

const ADAPTIVE_DEFAULT: (f64, f64, f64, f64) = (1e-3, 1e-7, 1e-2, 1e-6);

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let mut flat = parse_flat(&text)?;
    // relative sample-file paths are resolved against the config's directory
    if let Some(Value::String(p)) = flat.get("initial_data.path") {
        let p = PathBuf::from(p);
        if p.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            flat.insert("initial_data.path".into(), Value::String(base.join(p).display().to_string()));
        }
    }
    from_flat(&flat)
}

pub fn parse_str(text: &str) -> Result<RunConfig, ConfigError> {
    from_flat(&parse_flat(text)?)
}

/// Parses TOML and flattens nested tables into dotted keys.
pub fn parse_flat(text: &str) -> Result<FlatConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    let mut out = FlatConfig::new();
    flatten("", &table, &mut out);
    Ok(out)
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut FlatConfig) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

struct Reader<'a> {
    flat: &'a FlatConfig,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn float(&mut self, key: &str) -> Option<f64> {
        match self.flat.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.errors.push(format!("{key}: expected a number, got {}", other.type_str()));
                None
            }
        }
    }

    fn required_float(&mut self, key: &str) -> f64 {
        if !self.flat.contains_key(key) {
            self.errors.push(format!("{key}: required"));
        }
        self.float(key).unwrap_or(f64::NAN)
    }

    fn count(&mut self, key: &str) -> Option<usize> {
        match self.flat.get(key)? {
            Value::Integer(i) if *i > 0 => Some(*i as usize),
            other => {
                self.errors.push(format!("{key}: expected a positive integer, got {other}"));
                None
            }
        }
    }

    fn flag(&mut self, key: &str) -> Option<bool> {
        match self.flat.get(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.errors.push(format!("{key}: expected true or false, got {}", other.type_str()));
                None
            }
        }
    }

    fn text(&mut self, key: &str) -> Option<String> {
        match self.flat.get(key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.errors.push(format!("{key}: expected a string, got {}", other.type_str()));
                None
            }
        }
    }

    fn floats(&mut self, key: &str) -> Option<Vec<f64>> {
        let arr = match self.flat.get(key)? {
            Value::Array(a) => a,
            other => {
                self.errors.push(format!("{key}: expected an array of numbers, got {}", other.type_str()));
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for v in arr {
            match v {
                Value::Float(f) => out.push(*f),
                Value::Integer(i) => out.push(*i as f64),
                other => {
                    self.errors.push(format!("{key}: expected numbers, found {}", other.type_str()));
                    return None;
                }
            }
        }
        Some(out)
    }
}

/// Validates a flattened config, reporting every problem at once.
pub fn from_flat(flat: &FlatConfig) -> Result<RunConfig, ConfigError> {
    let mut r = Reader { flat, errors: Vec::new() };
    for key in flat.keys() {
        if !KEYS.contains(&key.as_str()) {
            r.errors.push(format!("{key}: unknown key"));
        }
    }

    let name = r.text("name").unwrap_or_else(|| "run".into());
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.') {
        r.errors.push(format!("name: {name:?} must be nonempty and use only [A-Za-z0-9._-]"));
    }
    let note = r.text("note");

    let dim = r.count("grid.dim");
    let length = r.required_float("grid.length");
    let points = r.count("grid.points");
    if dim.is_none() && !flat.contains_key("grid.dim") {
        r.errors.push("grid.dim: required".into());
    }
    if points.is_none() && !flat.contains_key("grid.points") {
        r.errors.push("grid.points: required".into());
    }
    let grid = match (dim, points) {
        (Some(d), Some(p)) => match Grid::new(d, length, p) {
            Ok(g) => Some(g),
            Err(e) => {
                r.errors.push(format!("grid: {e}"));
                None
            }
        },
        _ => None,
    };

    let nonlinearity = Nonlinearity::new(
        r.required_float("nonlinearity.lambda1"),
        r.required_float("nonlinearity.p1"),
        r.required_float("nonlinearity.lambda2"),
        r.required_float("nonlinearity.p2"),
    );

    let t_end = r.required_float("time.t_end");
    let stepping = match r.float("time.dt") {
        Some(dt) => {
            for k in ["time.dt_init", "time.dt_min", "time.dt_max", "time.accuracy_target", "time.max_phase"] {
                if flat.contains_key(k) {
                    r.errors.push(format!("{k}: conflicts with time.dt (fixed stepping)"));
                }
            }
            Stepping::fixed(dt)
        }
        None => {
            let (init, min, max, target) = ADAPTIVE_DEFAULT;
            let mut s = Stepping::adaptive(
                r.float("time.dt_init").unwrap_or(init),
                r.float("time.dt_min").unwrap_or(min),
                r.float("time.dt_max").unwrap_or(max),
                r.float("time.accuracy_target").unwrap_or(target),
            );
            if let Some(p) = r.float("time.max_phase") {
                s.max_phase = p;
            }
            s
        }
    };
    let snapshot_times = match (r.floats("time.snapshots"), r.float("time.snapshot_spacing")) {
        (Some(_), Some(_)) => {
            r.errors.push("time.snapshots and time.snapshot_spacing are mutually exclusive".into());
            Vec::new()
        }
        (Some(list), None) => list,
        (None, spacing) => {
            let spacing = spacing.unwrap_or(t_end / 100.0);
            if !(t_end.is_finite() && t_end >= 0.0) {
                // t_end itself is already reported
                Vec::new()
            } else if t_end == 0.0 {
                vec![0.0]
            } else if spacing > 0.0 {
                uniform_schedule(t_end, spacing)
            } else {
                r.errors.push(format!("time.snapshot_spacing must be positive, got {spacing}"));
                Vec::new()
            }
        }
    };
    let blowup_growth = r.float("time.blowup_growth").unwrap_or(20.0);

    let profile_name = r.text("initial_data.profile").unwrap_or_else(|| {
        if flat.contains_key("initial_data.chirp") { "chirped-gaussian" } else { "gaussian" }.into()
    });
    let profile = match profile_name.as_str() {
        "gaussian" => Some(Profile::Gaussian),
        "chirped-gaussian" => Some(Profile::ChirpedGaussian),
        "ring" => Some(Profile::Ring { radius: r.required_float("initial_data.radius") }),
        "sample-file" => r.text("initial_data.path").map(|p| Profile::SampleFile(PathBuf::from(p))).or_else(|| {
            r.errors.push("initial_data.path: required for profile sample-file".into());
            None
        }),
        other => {
            r.errors.push(format!(
                "initial_data.profile: unknown profile {other:?} (gaussian, chirped-gaussian, ring, sample-file)"
            ));
            None
        }
    };
    if profile_name != "ring" && flat.contains_key("initial_data.radius") {
        r.errors.push("initial_data.radius: only used by profile ring".into());
    }
    if profile_name != "sample-file" && flat.contains_key("initial_data.path") {
        r.errors.push("initial_data.path: only used by profile sample-file".into());
    }
    let sample_file = matches!(profile, Some(Profile::SampleFile(_)));
    let initial_data = InitialDataSpec {
        profile: profile.unwrap_or(Profile::Gaussian),
        amplitude: if sample_file { r.float("initial_data.amplitude").unwrap_or(1.0) } else { r.required_float("initial_data.amplitude") },
        width: if sample_file { r.float("initial_data.width").unwrap_or(1.0) } else { r.required_float("initial_data.width") },
        chirp: r.float("initial_data.chirp").unwrap_or(0.0),
        offset: r.floats("initial_data.offset").unwrap_or_default(),
    };

    let defaults = SentinelThresholds::default();
    let sentinels = SentinelThresholds {
        tail: r.float("sentinels.tail").unwrap_or(defaults.tail),
        boundary: r.float("sentinels.boundary").unwrap_or(defaults.boundary),
    };

    let d = Diagnostics::default();
    let window = r.floats("diagnostics.decay_window");
    let diagnostics = Diagnostics {
        morawetz: r.flag("diagnostics.morawetz").unwrap_or(d.morawetz),
        scattering: r.flag("diagnostics.scattering").unwrap_or(d.scattering),
        checkpoint_spacing: r.float("diagnostics.checkpoint_spacing").unwrap_or(d.checkpoint_spacing),
        cauchy_lag: r.float("diagnostics.cauchy_lag").unwrap_or(d.cauchy_lag),
        cauchy_start: r.float("diagnostics.cauchy_start").unwrap_or(d.cauchy_start),
        cauchy_threshold: r.float("diagnostics.cauchy_threshold").unwrap_or(d.cauchy_threshold),
        decay_window: match window.as_deref() {
            None => d.decay_window,
            Some(&[a, b]) => (a, b),
            Some(_) => {
                r.errors.push("diagnostics.decay_window: expected [T1, T2]".into());
                d.decay_window
            }
        },
    };
    for (key, v) in [
        ("diagnostics.checkpoint_spacing", diagnostics.checkpoint_spacing),
        ("diagnostics.cauchy_lag", diagnostics.cauchy_lag),
        ("diagnostics.cauchy_threshold", diagnostics.cauchy_threshold),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            r.errors.push(format!("{key}: must be positive, got {v}"));
        }
    }
    let lag_ratio = diagnostics.cauchy_lag / diagnostics.checkpoint_spacing;
    if (lag_ratio - lag_ratio.round()).abs() > 1e-9 {
        r.errors.push("diagnostics.cauchy_lag must be a multiple of diagnostics.checkpoint_spacing".into());
    }

    let mut errors = r.errors;
    if let Some(grid) = grid {
        let sim = SimulationConfig {
            snapshot_times,
            sentinels,
            blowup_growth,
            ..SimulationConfig::new(grid, nonlinearity, t_end, stepping, initial_data)
        };
        errors.extend(sim.violations());
        if errors.is_empty() {
            return Ok(RunConfig { name, note, sim, diagnostics });
        }
    }
    errors.sort();
    errors.dedup();
    Err(ConfigError::Invalid(errors))
}

/// `0, h, 2h, …` up to `t_end`, with `t_end` itself always included.
pub fn uniform_schedule(t_end: f64, spacing: f64) -> Vec<f64> {
    let count = (t_end / spacing * (1.0 + 1e-12)).floor() as usize;
    let mut out: Vec<f64> = (0..=count).map(|k| k as f64 * spacing).collect();
    if let Some(last) = out.last_mut() {
        if (t_end - *last).abs() <= 1e-9 * spacing {
            *last = t_end;
        } else {
            out.push(t_end);
        }
    }
    out
}

/// Every effective setting as dotted keys, defaults included.
pub fn to_flat(cfg: &RunConfig) -> FlatConfig {
    let mut m = FlatConfig::new();
    let mut put = |k: &str, v: Value| {
        m.insert(k.to_string(), v);
    };
    let sim = &cfg.sim;
    let floats = |v: &[f64]| Value::Array(v.iter().map(|x| Value::Float(*x)).collect());
    put("name", Value::String(cfg.name.clone()));
    if let Some(n) = &cfg.note {
        put("note", Value::String(n.clone()));
    }
    put("grid.dim", Value::Integer(sim.grid.dim() as i64));
    put("grid.length", Value::Float(sim.grid.length()));
    put("grid.points", Value::Integer(sim.grid.points() as i64));
    let nl = &sim.nonlinearity;
    put("nonlinearity.lambda1", Value::Float(nl.lambda1));
    put("nonlinearity.p1", Value::Float(nl.p1));
    put("nonlinearity.lambda2", Value::Float(nl.lambda2));
    put("nonlinearity.p2", Value::Float(nl.p2));
    put("time.t_end", Value::Float(sim.t_end));
    let s = &sim.stepping;
    if s.is_fixed() {
        put("time.dt", Value::Float(s.dt_init));
    } else {
        put("time.dt_init", Value::Float(s.dt_init));
        put("time.dt_min", Value::Float(s.dt_min));
        put("time.dt_max", Value::Float(s.dt_max));
        put("time.accuracy_target", Value::Float(s.accuracy_target));
        put("time.max_phase", Value::Float(s.max_phase));
    }
    put("time.snapshots", floats(&sim.snapshot_times));
    put("time.blowup_growth", Value::Float(sim.blowup_growth));
    let init = &sim.initial_data;
    put("initial_data.profile", Value::String(init.profile.name().into()));
    match &init.profile {
        Profile::Ring { radius } => put("initial_data.radius", Value::Float(*radius)),
        Profile::SampleFile(p) => put("initial_data.path", Value::String(p.display().to_string())),
        _ => {}
    }
    put("initial_data.amplitude", Value::Float(init.amplitude));
    put("initial_data.width", Value::Float(init.width));
    put("initial_data.chirp", Value::Float(init.chirp));
    if !init.offset.is_empty() {
        put("initial_data.offset", floats(&init.offset));
    }
    put("sentinels.tail", Value::Float(sim.sentinels.tail));
    put("sentinels.boundary", Value::Float(sim.sentinels.boundary));
    let d = &cfg.diagnostics;
    put("diagnostics.morawetz", Value::Boolean(d.morawetz));
    put("diagnostics.scattering", Value::Boolean(d.scattering));
    put("diagnostics.checkpoint_spacing", Value::Float(d.checkpoint_spacing));
    put("diagnostics.cauchy_lag", Value::Float(d.cauchy_lag));
    put("diagnostics.cauchy_start", Value::Float(d.cauchy_start));
    put("diagnostics.cauchy_threshold", Value::Float(d.cauchy_threshold));
    put("diagnostics.decay_window", floats(&[d.decay_window.0, d.decay_window.1]));
    m
}

/// Renders a flat config back to TOML with one table per section.
pub fn to_toml(flat: &FlatConfig) -> String {
    let mut root = toml::Table::new();
    for (k, v) in flat {
        match k.split_once('.') {
            Some((section, key)) => {
                let t = root
                    .entry(section.to_string())
                    .or_insert_with(|| Value::Table(toml::Table::new()));
                if let Value::Table(t) = t {
                    t.insert(key.to_string(), v.clone());
                }
            }
            None => {
                root.insert(k.clone(), v.clone());
            }
        }
    }
    toml::to_string(&root).expect("flat config is always representable")
}
