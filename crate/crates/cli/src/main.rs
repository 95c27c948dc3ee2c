use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlslab_cli::config::{parse_config, to_flat, to_toml, ConfigError, RunConfig};
use nlslab_cli::pipeline::{outcome_exit_code, run_scenario};
use nlslab_cli::sweep::{parse_sweep, run_sweep};
use nlslab_cli::{exit, load_run, presets, report};

#[derive(Parser)]
#[command(name = "nlslab", version, about = "Pseudo-spectral NLS runs with combined power nonlinearities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a config file or preset name.
    Run {
        /// Path to a TOML config, or a preset name.
        scenario: String,
        /// Output root; the run lands in <out>/<run_id>.
        #[arg(long, env = "NLSLAB_OUT", default_value = "nlslab-out")]
        out: PathBuf,
        /// Replace the snapshot schedule, e.g. 0,0.5,1.
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<f64>>,
    },
    /// Run every point of a sweep spec.
    Sweep {
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, env = "NLSLAB_OUT", default_value = "nlslab-out")]
        out: PathBuf,
    },
    /// Verify a stored run and print its regime.
    Classify { run_dir: PathBuf },
    /// Summarise a stored run.
    Report {
        run_dir: PathBuf,
        /// Print these series columns for plotting instead (comma separated; empty for all).
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        columns: Option<Vec<String>>,
    },
    /// List presets, or print one as TOML.
    Presets { name: Option<String> },
}

fn load_scenario(scenario: &str) -> Result<RunConfig, ConfigError> {
    match presets::find(scenario) {
        Some(p) if !Path::new(scenario).exists() => p.config(),
        _ => parse_config(Path::new(scenario)),
    }
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    // clap's own usage-error code (2) would collide with blowup-detected
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { 0 });
        }
    };
    match cli.command {
        Command::Run { scenario, out, snapshots } => {
            let mut cfg = match load_scenario(&scenario) {
                Ok(c) => c,
                Err(ConfigError::Io { path, source }) if presets::find(&scenario).is_none() => {
                    return fail(exit::CONFIG, format!("{} is neither a readable file nor a preset: {source}", path.display()))
                }
                Err(e) => return fail(exit::CONFIG, e),
            };
            if let Some(times) = snapshots {
                cfg.sim.snapshot_times = times;
                let v = cfg.sim.violations();
                if !v.is_empty() {
                    return fail(exit::CONFIG, ConfigError::Invalid(v));
                }
            }
            match run_scenario(&cfg, &out) {
                Ok(r) => {
                    let m = &r.manifest;
                    println!("{}", r.dir.display());
                    println!("outcome {} at t = {}, classification {}", m.outcome.label, m.outcome.time, m.classification);
                    ExitCode::from(outcome_exit_code(&m.outcome.label) as u8)
                }
                Err(e) => fail(exit::IO, format!("{e:#}")),
            }
        }
        Command::Sweep { spec, workers, out } => {
            let text = match std::fs::read_to_string(&spec) {
                Ok(t) => t,
                Err(e) => return fail(exit::CONFIG, format!("reading {}: {e}", spec.display())),
            };
            let spec = match parse_sweep(&text) {
                Ok(s) => s,
                Err(e) => return fail(exit::CONFIG, format!("{e:#}")),
            };
            match run_sweep(&spec, &out, workers) {
                Ok(entries) => {
                    for e in &entries {
                        let class = e.classification.map_or_else(|| "-".into(), |c| c.to_string());
                        let status = e.error.as_deref().unwrap_or("ok");
                        println!("{:>4} {:<32} {:<16} {}", e.index, e.name, class, status);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(exit::IO, format!("{e:#}")),
            }
        }
        Command::Classify { run_dir } => match load_run(&run_dir).and_then(|r| r.classify()) {
            Ok(c) => {
                println!("{c}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(exit::IO, format!("{e:#}")),
        },
        Command::Report { run_dir, columns } => {
            let run = match load_run(&run_dir) {
                Ok(r) => r,
                Err(e) => return fail(exit::IO, format!("{e:#}")),
            };
            let text = match columns {
                Some(names) => match report::columns(&run, &names) {
                    Ok(t) => t,
                    Err(e) => return fail(exit::CONFIG, e),
                },
                None => report::summary(&run),
            };
            print!("{text}");
            ExitCode::SUCCESS
        }
        Command::Presets { name: None } => {
            for p in presets::PRESETS {
                println!("{:<30} {}", p.name, p.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Presets { name: Some(name) } => match presets::find(&name) {
            Some(p) => match p.config() {
                Ok(cfg) => {
                    print!("{}", to_toml(&to_flat(&cfg)));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(exit::CONFIG, e),
            },
            None => fail(exit::CONFIG, format!("unknown preset {name:?}")),
        },
    }
}
