//! Monte Carlo experiment harness for [`hybridbf`].
//!
//! An [`ExperimentConfig`] describes one sweep axis, a list of SNRs and the
//! precoder methods to compare. [`run_experiment`] draws `realizations`
//! channels per sweep value, designs a precoder per method and reports the
//! mean spectral efficiency in a [`ResultTable`].

pub mod config;
pub mod experiment;
pub mod presets;
pub mod table;

use std::path::PathBuf;

pub use config::{ExperimentConfig, MethodName, Sweep, SweepAxis, SweepPoint};
pub use experiment::{run_experiment, timing_comparison, RunOptions};
pub use table::{ResultRow, ResultTable};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hybridbf::Error),
    #[error("realization {realization}: degenerate after {attempts} draws: {source}")]
    Aborted {
        realization: usize,
        attempts: u32,
        source: hybridbf::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
