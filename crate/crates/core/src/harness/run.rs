//! One epsilon, one trajectory: primitive system, limit system and (for
//! unbalanced data) the acoustic correction, sampled on a common time grid.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Family, RunConfig};
use super::output;
use crate::acoustic::{AcousticPropagator, AcousticState};
use crate::error::{LabError, Result};
use crate::euler::{EulerIntegrator, FlowState, IntegrateOptions};
use crate::grid::{self, Grid, ScalarField, VectorField};
use crate::initdata::{self, DataDecomposition, IllPreparedSpec, WellPreparedSpec};
use crate::relative_energy::{self, TestState};
use crate::target::{self, TargetIntegrator, TargetState};
use crate::thermo::{CutoffChi, ScalingParams};
use crate::timestep;

/// Epsilon-independent initial data.
#[derive(Clone, Debug)]
pub enum InitialData {
    /// Limit stream function on the horizontal grid.
    Well { q0: ScalarField },
    /// Unregularized first-order density and velocity on the full grid.
    Ill { rho1: ScalarField, u0: VectorField },
}

impl InitialData {
    pub fn generate(config: &RunConfig) -> Result<Self> {
        let grid = config.grid()?;
        Ok(match config.family {
            Family::Well => InitialData::Well {
                q0: initdata::well_prepared_q0(&grid.horizontal(), config.amplitude, config.profile, config.seed),
            },
            Family::Ill => {
                let (rho1, u0) = initdata::ill_prepared_fields(&grid, config.amplitude, config.profile, config.seed);
                InitialData::Ill { rho1, u0 }
            }
        })
    }

    pub fn family(&self) -> Family {
        match self {
            InitialData::Well { .. } => Family::Well,
            InitialData::Ill { .. } => Family::Ill,
        }
    }

    /// Write the data fields as binary snapshots under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        match self {
            InitialData::Well { q0 } => grid::write_snapshot(&dir.join("q0"), 0.0, &[("q0", q0)]),
            InitialData::Ill { rho1, u0 } => {
                let (a, b, c) = (u0.component(0), u0.component(1), u0.component(2));
                grid::write_snapshot(
                    &dir.join("ill_data"),
                    0.0,
                    &[("rho1", rho1), ("u1", &a), ("u2", &b), ("u3", &c)],
                )
            }
        }
    }
}

/// One sample of a run.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunRow {
    pub t: f64,
    /// Relative energy against the theorem's test state.
    pub rel_energy: f64,
    /// Relative energy against the geostrophic test state alone (equal to `rel_energy` for well data).
    pub rel_energy_uncorrected: f64,
    pub ess_velocity: f64,
    pub res_kinetic: f64,
    pub ess_density: f64,
    pub res_mass_pressure: f64,
    pub c_eps: f64,
    pub energy_defect: f64,
    pub mass: f64,
    pub energy: f64,
    pub hyper_dissipated: f64,
    /// `|m / sqrt(rho)|_{L2}`
    pub kinetic_norm: f64,
    /// `|(rho - rho_bar)/eps|_{L2}`
    pub rho1_norm: f64,
    pub target_energy: f64,
    pub residuals: Vec<f64>,
}

impl RunRow {
    pub fn header(residual_names: &[String]) -> Vec<String> {
        let mut h: Vec<String> = [
            "t",
            "rel_energy",
            "rel_energy_uncorrected",
            "ess_velocity",
            "res_kinetic",
            "ess_density",
            "res_mass_pressure",
            "c_eps",
            "energy_defect",
            "mass",
            "energy",
            "hyper_dissipated",
            "kinetic_norm",
            "rho1_norm",
            "target_energy",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend(residual_names.iter().cloned());
        h
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![
            self.t,
            self.rel_energy,
            self.rel_energy_uncorrected,
            self.ess_velocity,
            self.res_kinetic,
            self.ess_density,
            self.res_mass_pressure,
            self.c_eps,
            self.energy_defect,
            self.mass,
            self.energy,
            self.hyper_dissipated,
            self.kinetic_norm,
            self.rho1_norm,
            self.target_energy,
        ];
        v.extend_from_slice(&self.residuals);
        v
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub epsilon: f64,
    pub family: Family,
    pub rows: Vec<RunRow>,
    pub residual_names: Vec<String>,
    pub euler_steps: usize,
    pub target_steps: usize,
    pub final_flow: FlowState,
    pub final_target: TargetState,
    pub final_acoustic: Option<AcousticState>,
}

/// Scalar digest of a run, used in sweep summaries.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunDigest {
    pub epsilon: f64,
    pub final_e: f64,
    pub final_e_uncorrected: f64,
    pub max_e: f64,
    /// `max_t |mass(t) - mass(0)|`
    pub mass_drift: f64,
    /// `max(0, max_t (E(t) - E(0)))`
    pub max_energy_rise: f64,
    pub final_energy_defect: f64,
    pub max_kinetic_norm: f64,
    pub max_rho1_norm: f64,
    pub euler_steps: usize,
    pub target_steps: usize,
}

impl RunResult {
    pub fn final_row(&self) -> &RunRow {
        self.rows.last().expect("a run records at least two samples")
    }

    pub fn digest(&self) -> RunDigest {
        let first = &self.rows[0];
        let last = self.final_row();
        let fold = |f: &dyn Fn(&RunRow) -> f64| self.rows.iter().map(f).fold(0.0, f64::max);
        RunDigest {
            epsilon: self.epsilon,
            final_e: last.rel_energy,
            final_e_uncorrected: last.rel_energy_uncorrected,
            max_e: fold(&|r| r.rel_energy),
            mass_drift: fold(&|r| (r.mass - first.mass).abs()),
            max_energy_rise: fold(&|r| r.energy - first.energy),
            final_energy_defect: last.energy_defect,
            max_kinetic_norm: fold(&|r| r.kinetic_norm),
            max_rho1_norm: fold(&|r| r.rho1_norm),
            euler_steps: self.euler_steps,
            target_steps: self.target_steps,
        }
    }

    /// `monitors.csv`, `summary.json` and, if asked, final-state snapshots.
    pub fn write(&self, dir: &Path, snapshots: bool) -> Result<()> {
        output::write_csv(
            &dir.join("monitors.csv"),
            &RunRow::header(&self.residual_names),
            self.rows.iter().map(RunRow::values),
        )?;
        output::write_json(&dir.join("summary.json"), &self.digest())?;
        if snapshots {
            output::write_flow_snapshot(&dir.join("final_flow"), &self.final_flow)?;
            output::write_target_snapshot(&dir.join("final_target"), &self.final_target)?;
            if let Some(a) = &self.final_acoustic {
                output::write_acoustic_snapshot(&dir.join("final_acoustic"), a)?;
            }
        }
        Ok(())
    }
}

/// Subdirectory name for one sweep member.
pub fn member_dir(epsilon: f64) -> String {
    format!("eps_{epsilon:.6e}")
}

fn l2(grid: &Grid, dens: impl Iterator<Item = f64>) -> f64 {
    (dens.sum::<f64>() / grid.len() as f64 * grid.volume()).sqrt()
}

struct Setup {
    flow0: FlowState,
    target0: TargetState,
    acoustic: Option<(AcousticPropagator, AcousticState)>,
}

fn setup(config: &RunConfig, params: &ScalingParams, data: &InitialData) -> Result<Setup> {
    let grid = config.grid()?;
    match data {
        InitialData::Well { q0 } => {
            let spec = WellPreparedSpec {
                q0: q0.clone(),
                params: *params,
            };
            Ok(Setup {
                flow0: initdata::make_well_prepared(&spec, &grid)?,
                target0: TargetState::from_q(0.0, q0.clone(), params)?,
                acoustic: None,
            })
        }
        InitialData::Ill { rho1, u0 } => {
            let spec = IllPreparedSpec {
                rho1_0: rho1.clone(),
                u0: u0.clone(),
                delta: config.delta_for(&grid),
                params: *params,
            };
            let dec: DataDecomposition = initdata::decompose_ill_prepared(&spec, config.convention)?;
            let prop = AcousticPropagator::new(&grid, params);
            Ok(Setup {
                flow0: initdata::make_ill_prepared(&spec)?,
                target0: dec.target_state(params)?,
                acoustic: Some((prop, dec.acoustic_state()?)),
            })
        }
    }
}

/// Run with data generated from the configuration.
pub fn run_single(config: &RunConfig, epsilon: f64) -> Result<RunResult> {
    run_with_data(config, epsilon, &InitialData::generate(config)?)
}

pub fn run_with_data(config: &RunConfig, epsilon: f64, data: &InitialData) -> Result<RunResult> {
    let params = config.params(epsilon)?;
    let grid = config.grid()?;
    let Setup {
        flow0,
        target0,
        acoustic,
    } = setup(config, &params, data)?;
    let opts = IntegrateOptions {
        cfl: config.cfl,
        sample_dt: config.sample_dt,
        symmetry: config.symmetry,
        hyperviscosity: config.hyperviscosity,
        keep_snapshots: false,
        ..IntegrateOptions::default()
    };
    let mut euler = EulerIntegrator::new(flow0, params, opts)?;
    let mut tgt = TargetIntegrator::new(target0, params, config.cfl)?;
    let chi = CutoffChi::new(params.rho_bar());
    let rho_bar = params.rho_bar();

    let mut rows = Vec::new();
    let mut final_acoustic = None;
    for t in timestep::sample_times(config.t_end, config.sample_dt) {
        euler.advance_to(t)?;
        tgt.advance_to(t)?;
        let flow = euler.state();
        let target = tgt.state();
        let uncorrected = relative_energy::build_well_prepared_test(target, &params, &grid)?;
        let test: TestState = match &acoustic {
            Some((prop, a0)) => {
                let a = prop.propagate(a0, t)?;
                let test = relative_energy::build_ill_prepared_test(target, &a, &params)?;
                final_acoustic = Some(a);
                test
            }
            None => uncorrected.clone(),
        };
        let consts = relative_energy::CoercivityConstants::for_test(&test, &params)?;
        let mut report = relative_energy::coercivity_components_with(flow, &test, &params, &chi, &consts)?;
        let monitor = euler.monitor_row()?;
        report.energy_defect = monitor.defect;
        let rel_unc = if acoustic.is_some() {
            relative_energy::relative_energy(flow, &uncorrected, &params)?
        } else {
            report.value
        };
        let n = grid.len();
        let kinetic_norm = l2(
            &grid,
            (0..n).map(|p| (0..3).map(|c| flow.mom.comp(c)[p].powi(2)).sum::<f64>() / flow.rho.data()[p]),
        );
        let rho1_norm = l2(&grid, flow.rho.data().iter().map(|r| ((r - rho_bar) / epsilon).powi(2)));
        rows.push(RunRow {
            t,
            rel_energy: report.value,
            rel_energy_uncorrected: rel_unc,
            ess_velocity: report.ess_velocity,
            res_kinetic: report.res_kinetic,
            ess_density: report.ess_density,
            res_mass_pressure: report.res_mass_pressure,
            c_eps: consts.c_eps(epsilon),
            energy_defect: report.energy_defect,
            mass: monitor.mass,
            energy: monitor.energy,
            hyper_dissipated: monitor.hyper_dissipated,
            kinetic_norm,
            rho1_norm,
            target_energy: target::target_energy(target, &params),
            residuals: monitor.residuals,
        });
    }
    if rows.is_empty() {
        return Err(LabError::domain("run produced no samples"));
    }
    Ok(RunResult {
        epsilon,
        family: data.family(),
        rows,
        residual_names: euler.residual_names().to_vec(),
        euler_steps: euler.steps(),
        target_steps: tgt.steps(),
        final_flow: euler.state().clone(),
        final_target: tgt.state().clone(),
        final_acoustic,
    })
}
