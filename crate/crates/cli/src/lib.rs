//! Configuration, presets, run orchestration and persistence for nlslab.

pub mod config;
pub mod manifest;
pub mod output;
pub mod pipeline;
pub mod presets;
pub mod report;
pub mod sweep;

pub use config::{parse_config, ConfigError, RunConfig};
pub use manifest::{classify_regime, load_run, Classification, Manifest};
pub use pipeline::{run_scenario, RunResult};

/// Process exit codes.
pub mod exit {
    pub const COMPLETED: i32 = 0;
    pub const IO: i32 = 1;
    pub const BLOWUP: i32 = 2;
    pub const RESOLUTION_LOST: i32 = 3;
    pub const CONFIG: i32 = 64;
}
