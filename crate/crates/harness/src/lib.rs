//! Experiment plumbing for the online labeling game: JSON experiment specs,
//! single runs with CSV/JSON artifacts, parallel sweeps and growth fits.

pub mod error;
pub mod experiment;
pub mod fit;
pub mod record;
pub mod spec;
pub mod sweep;

pub use error::{exit, HarnessError, Result};
pub use experiment::{run_experiment, run_once, RunResult, RunSummary};
pub use fit::{fit_growth, fit_sweep, FitPoint, FitResult};
pub use spec::ExperimentSpec;
pub use sweep::{sweep, SweepRow};
