//! Parameter sweeps, output files and figure reproduction on top of `fpsteady`.

pub mod config;
pub mod emit;
pub mod error;
pub mod figures;
pub mod observable;
pub mod run;
pub mod validate;

pub use config::SweepConfig;
pub use error::{Result, SweepError};
pub use run::{run_sweep, RunOptions, SweepResult};
