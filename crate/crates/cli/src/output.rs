//! Series tables, sidecar schemas, checksums and atomic file placement.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy)]
pub struct ColumnSpec {
    pub name: &'static str,
    pub units: &'static str,
    pub meaning: &'static str,
}

/// Named real columns sharing a time axis in column 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    pub fn time(&self) -> &[f64] {
        &self.columns[0]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Sidecar {
    pub file: String,
    pub rows: usize,
    pub columns: Vec<SidecarColumn>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SidecarColumn {
    pub name: String,
    pub units: String,
    pub meaning: String,
}

/// Builds a table from every spec whose column has at least one non-NaN
/// value. The first spec is the time axis and is always kept.
pub fn build_table(specs: &[ColumnSpec], columns: Vec<Vec<f64>>) -> (Table, Vec<SidecarColumn>) {
    assert_eq!(specs.len(), columns.len());
    let mut names = Vec::new();
    let mut kept = Vec::new();
    let mut meta = Vec::new();
    for (i, (spec, col)) in specs.iter().zip(columns).enumerate() {
        if i > 0 && col.iter().all(|v| v.is_nan()) {
            continue;
        }
        names.push(spec.name.to_string());
        meta.push(SidecarColumn {
            name: spec.name.into(),
            units: spec.units.into(),
            meaning: spec.meaning.into(),
        });
        kept.push(col);
    }
    (Table { names, columns: kept }, meta)
}

/// Shortest round-tripping decimal; `nan` for NaN.
fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

pub fn table_to_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.names)?;
    for row in 0..table.len() {
        w.write_record(table.columns.iter().map(|c| format_value(c[row])))?;
    }
    Ok(w.into_inner().context("flushing CSV buffer")?)
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut columns = vec![Vec::new(); names.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != names.len() {
            bail!("{}: row {} has {} fields, header has {}", path.display(), line + 1, rec.len(), names.len());
        }
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            col.push(field.parse::<f64>().with_context(|| format!("{}: bad number {field:?}", path.display()))?);
        }
    }
    Ok(Table { names, columns })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Collects files in a staging directory that is renamed into place at the
/// end, so readers never see a half-written run.
pub struct Staging {
    dir: PathBuf,
    target: PathBuf,
    files: Vec<FileEntry>,
    done: bool,
}

impl Staging {
    pub fn new(root: &Path, name: &str) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating output root {}", root.display()))?;
        let dir = root.join(format!(".{name}.partial"));
        if dir.exists() {
            fs::remove_dir_all(&dir).with_context(|| format!("clearing stale {}", dir.display()))?;
        }
        fs::create_dir(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir,
            target: root.join(name),
            files: Vec::new(),
            done: false,
        })
    }

    /// Writes through a temporary name and renames, recording the checksum.
    pub fn write(&mut self, name: &str, bytes: &[u8], checksum: bool) -> Result<()> {
        let tmp = self.dir.join(format!("{name}.tmp"));
        let path = self.dir.join(name);
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes).with_context(|| format!("writing {}", tmp.display()))?;
        f.sync_all()?;
        fs::rename(&tmp, &path).with_context(|| format!("renaming into {}", path.display()))?;
        if checksum {
            self.files.push(FileEntry {
                path: name.into(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            });
        }
        Ok(())
    }

    pub fn write_table(&mut self, name: &str, table: &Table, meta: Vec<SidecarColumn>) -> Result<()> {
        self.write(&format!("{name}.csv"), &table_to_csv(table)?, true)?;
        let sidecar = Sidecar {
            file: format!("{name}.csv"),
            rows: table.len(),
            columns: meta,
        };
        self.write(&format!("{name}.json"), &serde_json::to_vec_pretty(&sidecar)?, true)
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn target(&self) -> &Path {
        &self.target
    }

    /// Replaces any previous run directory of the same name.
    pub fn commit(mut self) -> Result<PathBuf> {
        if self.target.exists() {
            fs::remove_dir_all(&self.target).with_context(|| format!("replacing {}", self.target.display()))?;
        }
        fs::rename(&self.dir, &self.target).with_context(|| format!("publishing {}", self.target.display()))?;
        self.done = true;
        Ok(self.target.clone())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.done {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}

/// Checks every listed file against its recorded digest.
pub fn verify_files(dir: &Path, files: &[FileEntry]) -> Result<()> {
    for entry in files {
        let path = dir.join(&entry.path);
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let digest = sha256_hex(&bytes);
        if digest != entry.sha256 {
            bail!("checksum mismatch for {}: manifest {}, file {}", entry.path, entry.sha256, digest);
        }
    }
    Ok(())
}
