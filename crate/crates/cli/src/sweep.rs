//! Cartesian parameter sweeps over dotted config keys.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use toml::Value;

use crate::config::{from_flat, parse_flat, FlatConfig};
use crate::manifest::Classification;
use crate::pipeline::run_scenario;
use crate::presets;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub base: FlatConfig,
    /// Axis key and the values it takes, in file order.
    pub axes: Vec<(String, Vec<Value>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub index: usize,
    pub name: String,
    pub assignments: BTreeMap<String, Value>,
    pub run_id: Option<String>,
    pub dir: Option<PathBuf>,
    pub outcome: Option<String>,
    pub classification: Option<Classification>,
    pub error: Option<String>,
}

/// Reads `name`, `base` (a preset name or a table) and `[axes]`.
pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let table: toml::Table = text.parse().context("sweep spec is not valid TOML")?;
    let mut errors = Vec::new();
    for key in table.keys() {
        if !["name", "base", "axes"].contains(&key.as_str()) {
            errors.push(format!("{key}: unknown key"));
        }
    }
    let name = match table.get("name") {
        None => "sweep".to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => {
            errors.push(format!("name: expected a string, got {}", other.type_str()));
            String::new()
        }
    };
    let base = match table.get("base") {
        Some(Value::String(p)) => match presets::find(p) {
            Some(p) => p.flat(),
            None => {
                errors.push(format!("base: unknown preset {p:?}"));
                FlatConfig::new()
            }
        },
        Some(Value::Table(t)) => parse_flat(&toml::to_string(t)?)?,
        Some(other) => {
            errors.push(format!("base: expected a preset name or a table, got {}", other.type_str()));
            FlatConfig::new()
        }
        None => {
            errors.push("base: required".into());
            FlatConfig::new()
        }
    };
    let mut axes = Vec::new();
    match table.get("axes") {
        None => {}
        Some(Value::Table(t)) => {
            let flat = parse_flat(&toml::to_string(t)?)?;
            for (k, v) in flat {
                match v {
                    Value::Array(values) => axes.push((k, values)),
                    other => errors.push(format!("axes.{k}: expected an array of values, got {}", other.type_str())),
                }
            }
        }
        Some(other) => errors.push(format!("axes: expected a table, got {}", other.type_str())),
    }
    if !errors.is_empty() {
        bail!("sweep spec has {} violation(s):\n  {}", errors.len(), errors.join("\n  "));
    }
    Ok(SweepSpec { name, base, axes })
}

/// Every point of the Cartesian product; empty if any axis is empty.
pub fn expand(spec: &SweepSpec) -> Vec<(String, FlatConfig, BTreeMap<String, Value>)> {
    let mut points: Vec<BTreeMap<String, Value>> = vec![BTreeMap::new()];
    for (key, values) in &spec.axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(key.clone(), v.clone());
                    q
                })
            })
            .collect();
    }
    points
        .into_iter()
        .enumerate()
        .map(|(i, assignments)| {
            let name = format!("{}-{i:03}", spec.name);
            let mut flat = spec.base.clone();
            flat.extend(assignments.clone());
            flat.insert("name".into(), Value::String(name.clone()));
            (name, flat, assignments)
        })
        .collect()
}

fn run_point(index: usize, name: String, flat: &FlatConfig, assignments: BTreeMap<String, Value>, root: &Path) -> IndexEntry {
    let mut entry = IndexEntry {
        index,
        name,
        assignments,
        run_id: None,
        dir: None,
        outcome: None,
        classification: None,
        error: None,
    };
    let result = from_flat(flat).map_err(anyhow::Error::from).and_then(|cfg| run_scenario(&cfg, root));
    match result {
        Ok(r) => {
            entry.run_id = Some(r.manifest.run_id.clone());
            entry.dir = Some(r.dir);
            entry.outcome = Some(r.manifest.outcome.label.clone());
            entry.classification = Some(r.manifest.classification);
        }
        Err(e) => entry.error = Some(format!("{e:#}")),
    }
    entry
}

/// Runs every point on `workers` threads under `<out_root>/<spec.name>/`.
///
/// `index.jsonl` is appended as runs finish; `index.json` holds the entries
/// sorted by point index once all are done.
pub fn run_sweep(spec: &SweepSpec, out_root: &Path, workers: usize) -> Result<Vec<IndexEntry>> {
    let root = out_root.join(&spec.name);
    fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
    let log_path = root.join("index.jsonl");
    let log = OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(true)
        .open(&log_path)
        .with_context(|| format!("opening {}", log_path.display()))?;
    let points = expand(spec);
    let next = AtomicUsize::new(0);
    let shared = Mutex::new((log, Vec::with_capacity(points.len()), None::<anyhow::Error>));

    std::thread::scope(|s| {
        for _ in 0..workers.max(1).min(points.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((name, flat, assignments)) = points.get(i) else { break };
                let entry = run_point(i, name.clone(), flat, assignments.clone(), &root);
                let mut guard = shared.lock().unwrap_or_else(|e| e.into_inner());
                let (log, entries, failure) = &mut *guard;
                let line = serde_json::to_string(&entry).expect("index entries serialize");
                if let Err(e) = writeln!(log, "{line}") {
                    failure.get_or_insert(anyhow::Error::from(e).context("appending to index.jsonl"));
                }
                entries.push(entry);
            });
        }
    });

    let (_, mut entries, failure) = shared.into_inner().unwrap_or_else(|e| e.into_inner());
    if let Some(e) = failure {
        return Err(e);
    }
    entries.sort_by_key(|e| e.index);
    let tmp = root.join("index.json.tmp");
    fs::write(&tmp, serde_json::to_vec_pretty(&entries)?)?;
    fs::rename(&tmp, root.join("index.json"))?;
    Ok(entries)
}
