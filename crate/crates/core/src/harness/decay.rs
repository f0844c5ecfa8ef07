//! Local decay of Rossby-acoustic waves in a large box.
//!
//! A localized density bump with its balanced (kernel) part removed is
//! propagated exactly; the sup-norms over a central window are recorded
//! while the fastest waves have not yet wrapped around the periodic box.

use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use super::output;
use crate::acoustic::{self, AcousticPropagator, AcousticState, DecayRow, Subdomain};
use crate::error::{LabError, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::thermo::ScalingParams;
use crate::timestep;

/// Gaussian width of the initial bump.
pub const BUMP_WIDTH: f64 = 1.0;

/// Wave-only data: a Gaussian density bump of the configured amplitude with the kernel projected out.
pub fn localized_wave_data(grid: &Grid, params: &ScalingParams, amplitude: f64) -> Result<AcousticState> {
    let (cx, cy) = (0.5 * grid.lx(), 0.5 * grid.ly());
    let s = ScalarField::from_fn(grid, |x, y, _| {
        amplitude * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * BUMP_WIDTH * BUMP_WIDTH)).exp()
    });
    let state = AcousticState::new(0.0, s, VectorField::zeros(grid))?;
    let (_, waves) = AcousticPropagator::new(grid, params).split_kernel(&state)?;
    Ok(waves)
}

/// Latest time before the fastest wave front crosses a quarter of the box.
pub fn recurrence_window(grid: &Grid, params: &ScalingParams) -> f64 {
    let speed = params.sound_speed_sq().sqrt() / params.epsilon();
    grid.lx().min(grid.ly()) / (4.0 * speed)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayResult {
    pub epsilon: f64,
    pub window: f64,
    pub rows: Vec<DecayRow>,
    /// `max(sup s, sup |V|)` over the window at the last sample divided by its initial value.
    pub factor: f64,
}

pub fn run_decay(config: &RunConfig) -> Result<DecayResult> {
    let grid = config.grid()?;
    let epsilon = config.epsilons[0];
    let params = config.params(epsilon)?;
    let window = recurrence_window(&grid, &params);
    if config.t_end >= window {
        return Err(LabError::Config(format!(
            "t_end = {} reaches the recurrence window {window}",
            config.t_end
        )));
    }
    let prop = AcousticPropagator::new(&grid, &params);
    let a0 = localized_wave_data(&grid, &params, config.amplitude)?;
    let traj: Vec<AcousticState> = timestep::sample_times(config.t_end, config.sample_dt)
        .into_iter()
        .map(|t| prop.propagate(&a0, t))
        .collect::<Result<_>>()?;
    let sub = Subdomain::centered(&grid, config.decay_window);
    let rows = acoustic::local_decay_profile(&traj, &sub, &params)?;
    let local = |r: &DecayRow| r.local_sup_s.max(r.local_sup_v);
    let (first, last) = (rows.first().expect("samples"), rows.last().expect("samples"));
    let factor = if local(first) > 0.0 {
        local(last) / local(first)
    } else {
        0.0
    };
    Ok(DecayResult {
        epsilon,
        window,
        rows,
        factor,
    })
}

impl DecayResult {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let header: Vec<String> = ["t", "local_sup_s", "local_sup_v", "global_energy"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        output::write_csv(
            &dir.join("decay.csv"),
            &header,
            self.rows
                .iter()
                .map(|r| vec![r.t, r.local_sup_s, r.local_sup_v, r.global_energy]),
        )?;
        output::write_json(&dir.join("decay_summary.json"), self)
    }
}
