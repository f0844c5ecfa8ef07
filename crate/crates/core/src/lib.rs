//! A pseudo-spectral laboratory for the singular limit of the scaled rotating
//! compressible Euler system.
//!
//! The primitive system
//!
//! ```text
//! d_t rho + div m = 0
//! d_t m + div(m (x) m / rho) + eps^-2 grad p(rho) + eps^-1 b x m = 0,   p = a rho^gamma
//! ```
//!
//! is advanced on a periodic box `[0, lx) x [0, ly) x [0, 1)` and compared,
//! through the scaled relative energy, with the 2D potential-vorticity
//! transport law for the stream function `q` and, for unbalanced data, with
//! the exact linear Rossby-acoustic propagator.
//!
//! Module map:
//! - [`thermo`]: pressure law, pressure potential, ess/res cutoff.
//! - [`grid`]: periodic grid, FFT-based operators, dealiasing, snapshots.
//! - [`euler`]: RK4 integration of the primitive system with monitors.
//! - [`target`]: the limit equation in vorticity-stream form.
//! - [`acoustic`]: per-mode exact exponential of the Rossby-acoustic generator.
//! - [`initdata`]: well- and ill-prepared data, delta regularization, decomposition.
//! - [`relative_energy`]: the convergence functional and its coercivity split.
//! - [`harness`]: config files, single runs, epsilon sweeps, rate fits, plot data.

pub mod acoustic;
pub mod error;
pub mod euler;
pub mod grid;
pub mod harness;
pub mod initdata;
pub mod relative_energy;
pub mod target;
pub mod thermo;
mod timestep;

pub use acoustic::{AcousticPropagator, AcousticState};
pub use error::{LabError, Result};
pub use euler::FlowState;
pub use grid::{Grid, ScalarField, VectorField};
pub use relative_energy::{RelativeEnergyReport, TestState};
pub use target::TargetState;
pub use thermo::{CutoffChi, ScalingParams};
