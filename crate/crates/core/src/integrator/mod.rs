//! Strang split-step integration with adaptive stepping, exact snapshot
//! landing and resolution sentinels.

mod config;
mod evolve;
mod nonlinearity;
mod sample_file;
mod sentinel;
mod stepper;

pub use config::{InitialDataSpec, Profile, SimulationConfig, Stepping};
pub use evolve::{evolve, evolve_from, Evolution, Observer, RunOutcome, Snapshot, StepRecord};
pub use nonlinearity::{nonlinear_phase_step, Nonlinearity};
pub use sample_file::{decode_sample_file, encode_sample_file, read_sample_file, write_sample_file};
pub use sentinel::{boundary_fraction, resolution_sentinel, SentinelReading, SentinelThresholds};
pub use stepper::{strang_step, strang_step_with};

pub(crate) use nonlinearity::modulus_power;
