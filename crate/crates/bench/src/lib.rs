//! Fixtures for the kernel benchmarks in `benches/kernels.rs`.

use std::f64::consts::PI;

use rossby_core::initdata::{self, WellPreparedSpec};
use rossby_core::{FlowState, Grid, ScalingParams};

pub fn params(eps: f64) -> ScalingParams {
    ScalingParams::new(eps, 0.5, 2.0, 1.0).expect("valid pressure law")
}

/// Well-prepared two-mode state on an `n x n` periodic square.
pub fn well_state(n: usize, eps: f64) -> (FlowState, ScalingParams) {
    let p = params(eps);
    let g = Grid::new_2d(n, n, 2.0 * PI, 2.0 * PI).expect("power-of-two grid");
    let q0 = initdata::two_mode_q(&g, 0.05);
    let state = initdata::make_well_prepared(&WellPreparedSpec { q0, params: p }, &g).expect("positive density");
    (state, p)
}
