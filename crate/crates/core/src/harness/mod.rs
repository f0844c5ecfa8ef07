//! Experiment plumbing: configuration, single runs, epsilon sweeps with rate
//! fits, acoustic decay runs, and file output.

pub mod config;
pub mod decay;
pub mod output;
pub mod plots;
pub mod run;
pub mod sweep;

pub use config::{Family, RunConfig};
pub use decay::{run_decay, DecayResult};
pub use plots::emit_plots;
pub use run::{run_single, run_with_data, InitialData, RunDigest, RunResult, RunRow};
pub use sweep::{fit_rate, run_sweep, run_sweep_with, Execution, RateFit, SweepOutcome, SweepSummary};
