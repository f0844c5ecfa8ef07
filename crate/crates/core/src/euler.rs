//! Pseudo-spectral RK4 integration of the scaled rotating compressible Euler
//! system
//!
//! ```text
//! d_t rho + div m = 0
//! d_t m + div(m (x) m / rho) + eps^-2 grad p(rho) + eps^-1 b x m = 0,   b = (0, 0, 1)
//! ```
//!
//! The time step scales with `eps`, so the stiff acoustic and inertial terms
//! are resolved explicitly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::{self, Grid, ScalarField, VectorField};
use crate::thermo::ScalingParams;
use crate::timestep::{self, Axpy};

/// Density and momentum of the primitive system.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub time: f64,
    pub rho: ScalarField,
    pub mom: VectorField,
}

impl FlowState {
    pub fn new(time: f64, rho: ScalarField, mom: VectorField) -> Result<Self> {
        rho.grid().check_same(mom.grid(), "flow state")?;
        Ok(FlowState { time, rho, mom })
    }

    /// The far-field equilibrium `(rho_bar, 0)`.
    pub fn rest(grid: &Grid, params: &ScalingParams) -> Self {
        FlowState {
            time: 0.0,
            rho: ScalarField::constant(grid, params.rho_bar()),
            mom: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.min()
    }

    pub fn velocity(&self) -> Result<VectorField> {
        self.check_positive()?;
        self.mom.div_scalar(&self.rho)
    }

    /// `int (rho - rho_bar) dx`.
    pub fn mass(&self, params: &ScalingParams) -> f64 {
        self.rho.map(|r| r - params.rho_bar()).integral()
    }

    /// Even density and horizontal momentum, odd vertical momentum in `x3`.
    pub fn project_symmetry(&self) -> FlowState {
        FlowState {
            time: self.time,
            rho: grid::even_part_x3(&self.rho),
            mom: grid::project_symmetry_vector(&self.mom),
        }
    }

    pub(crate) fn check_positive(&self) -> Result<()> {
        let min_rho = self.min_rho();
        if min_rho > 0.0 {
            Ok(())
        } else {
            Err(LabError::Positivity {
                time: self.time,
                min_rho,
                snapshot: None,
            })
        }
    }
}

impl Axpy for FlowState {
    fn axpy(&mut self, alpha: f64, other: &Self) {
        self.rho.axpy(alpha, &other.rho);
        self.mom.axpy(alpha, &other.mom);
    }
}

/// Switches for the individual terms of the momentum equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EulerTerms {
    pub convection: bool,
    pub pressure: bool,
    pub coriolis: bool,
}

impl Default for EulerTerms {
    fn default() -> Self {
        EulerTerms {
            convection: true,
            pressure: true,
            coriolis: true,
        }
    }
}

pub fn euler_rhs(state: &FlowState, params: &ScalingParams) -> Result<(ScalarField, VectorField)> {
    euler_rhs_with(state, params, EulerTerms::default())
}

pub fn euler_rhs_with(
    state: &FlowState,
    params: &ScalingParams,
    terms: EulerTerms,
) -> Result<(ScalarField, VectorField)> {
    state.check_positive()?;
    let grid = state.grid();
    let n = grid.len();
    let eps = params.epsilon();
    let active = |axis: usize| axis < 2 || grid.nz() > 1;
    let i = Complex64::new(0.0, 1.0);
    let modes = grid.modes();

    let drho = grid::dealias(&grid::div(&state.mom)).scaled(-1.0);

    // spectral accumulator for -div(m u) - eps^-2 grad p, one per component
    let mut acc = [
        vec![Complex64::default(); n],
        vec![Complex64::default(); n],
        vec![Complex64::default(); n],
    ];

    if terms.convection {
        let u = state.mom.div_scalar(&state.rho)?;
        for row in 0..3 {
            for col in (0..3).filter(|&c| active(c)) {
                let flux: Vec<f64> = (0..n).map(|p| state.mom.comp(row)[p] * u.comp(col)[p]).collect();
                let s = grid.forward(&flux);
                for m in &modes {
                    acc[row][m.idx] -= i * m.k[col] * s[m.idx];
                }
            }
        }
    }

    if terms.pressure {
        let p0 = params.p(params.rho_bar());
        let pert: Vec<f64> = state.rho.data().iter().map(|&r| params.p(r) - p0).collect();
        let s = grid.forward(&pert);
        let scale = 1.0 / (eps * eps);
        for (row, a) in acc.iter_mut().enumerate().filter(|(r, _)| active(*r)) {
            for m in &modes {
                a[m.idx] -= scale * i * m.k[row] * s[m.idx];
            }
        }
    }

    let mut dmom = VectorField::zeros(grid);
    if terms.convection || terms.pressure {
        for (row, mut a) in acc.into_iter().enumerate() {
            for m in &modes {
                if !grid.keeps_mode(m.m) {
                    a[m.idx] = Complex64::default();
                }
            }
            dmom.comp_mut(row).copy_from_slice(&grid.inverse(a));
        }
    }

    if terms.coriolis {
        // -(1/eps) b x m with b x m = (-m2, m1, 0)
        let (m1, m2) = (state.mom.comp(0).to_vec(), state.mom.comp(1).to_vec());
        for (d, m) in dmom.comp_mut(0).iter_mut().zip(&m2) {
            *d += m / eps;
        }
        for (d, m) in dmom.comp_mut(1).iter_mut().zip(&m1) {
            *d -= m / eps;
        }
    }

    Ok((drho, dmom))
}

/// Explicit step bound covering advection, acoustic speed `sqrt(p')/eps`, and rotation rate `1/eps`.
pub fn stable_dt(state: &FlowState, params: &ScalingParams, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(LabError::domain(format!("cfl = {cfl} must lie in (0, 1]")));
    }
    state.check_positive()?;
    let h = state.grid().min_spacing();
    let eps = params.epsilon();
    let speed = state.mom.norm_sq();
    let umax = speed
        .data()
        .iter()
        .zip(state.rho.data())
        .fold(0.0f64, |m, (s, r)| m.max(s.sqrt() / r));
    let cmax = state
        .rho
        .data()
        .iter()
        .fold(0.0f64, |m, &r| m.max(params.dp(r).sqrt()));
    Ok(cfl * h / (umax + cmax / eps + h / eps))
}

fn rhs_state(state: &FlowState, params: &ScalingParams, terms: EulerTerms) -> Result<FlowState> {
    let (rho, mom) = euler_rhs_with(state, params, terms)?;
    Ok(FlowState {
        time: 0.0,
        rho,
        mom,
    })
}

pub fn step_rk4(state: &FlowState, dt: f64, params: &ScalingParams) -> Result<FlowState> {
    step_rk4_with(state, dt, params, EulerTerms::default())
}

pub fn step_rk4_with(
    state: &FlowState,
    dt: f64,
    params: &ScalingParams,
    terms: EulerTerms,
) -> Result<FlowState> {
    let mut next = timestep::rk4(state, dt, |s| rhs_state(s, params, terms)).map_err(|e| match e {
        LabError::Positivity { min_rho, .. } => LabError::Positivity {
            time: state.time,
            min_rho,
            snapshot: Some(Box::new(state.clone())),
        },
        other => other,
    })?;
    next.time = state.time + dt;
    if next.min_rho() <= 0.0 {
        return Err(LabError::Positivity {
            time: next.time,
            min_rho: next.min_rho(),
            snapshot: Some(Box::new(state.clone())),
        });
    }
    Ok(next)
}

pub fn kinetic_energy(state: &FlowState) -> Result<f64> {
    state.check_positive()?;
    let m2 = state.mom.norm_sq();
    Ok(m2.zip_map(&state.rho, |m, r| 0.5 * m / r)?.integral())
}

/// `int |m|^2/(2 rho) + eps^-2 (P(rho) - P(rho_bar) - P'(rho_bar)(rho - rho_bar)) dx`.
pub fn total_energy(state: &FlowState, params: &ScalingParams) -> Result<f64> {
    let kin = kinetic_energy(state)?;
    let rb = params.rho_bar();
    let eps2 = params.epsilon().powi(2);
    let pot = state.rho.map(|r| params.rel_potential(r, rb)).integral() / eps2;
    Ok(kin + pot)
}

/// Spectral hyperviscosity `-nu (-lap)^4`, applied as an exact filter after each step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperviscosity {
    pub nu: f64,
}

impl Hyperviscosity {
    /// `nu` such that the mode at the dealiasing cutoff decays by `e` over one step `dt`.
    pub fn for_step(grid: &Grid, dt: f64) -> Self {
        let kc = grid.resolved_kmax_h();
        Hyperviscosity {
            nu: 1.0 / (dt * kc.powi(8)),
        }
    }

    pub fn filter(&self, f: &ScalarField, dt: f64) -> ScalarField {
        let nu = self.nu;
        grid::apply_symbol(f, |m| Complex64::new((-nu * m.k2_total().powi(4) * dt).exp(), 0.0))
    }

    fn apply(&self, state: &FlowState, dt: f64) -> FlowState {
        let mut mom = VectorField::zeros(state.grid());
        for c in 0..3 {
            let f = self.filter(&state.mom.component(c), dt);
            mom.comp_mut(c).copy_from_slice(f.data());
        }
        FlowState {
            time: state.time,
            rho: self.filter(&state.rho, dt),
            mom,
        }
    }
}

/// Smooth periodic bumps used as test functions for the weak-form residuals.
#[derive(Clone, Debug)]
struct WeakForm {
    phi: Vec<ScalarField>,
    grad_phi: Vec<[ScalarField; 2]>,
    initial: Vec<f64>,
    accumulated: Vec<f64>,
    last_flux: Vec<f64>,
    names: Vec<String>,
}

const BUMP_SHARPNESS: f64 = 4.0;

impl WeakForm {
    fn new(state: &FlowState, params: &ScalingParams) -> Self {
        let grid = state.grid();
        let (lx, ly) = (grid.lx(), grid.ly());
        let centers = [(0.5 * lx, 0.5 * ly), (0.25 * lx, 0.75 * ly)];
        let mut phi = Vec::new();
        let mut grad_phi = Vec::new();
        let mut names = Vec::new();
        for (n, &(cx, cy)) in centers.iter().enumerate() {
            let (wx, wy) = (2.0 * PI / lx, 2.0 * PI / ly);
            let bump = move |x: f64, y: f64| {
                (BUMP_SHARPNESS * ((wx * (x - cx)).cos() - 1.0)
                    + BUMP_SHARPNESS * ((wy * (y - cy)).cos() - 1.0))
                    .exp()
            };
            phi.push(ScalarField::from_fn(grid, |x, y, _| bump(x, y)));
            grad_phi.push([
                ScalarField::from_fn(grid, |x, y, _| {
                    -BUMP_SHARPNESS * wx * (wx * (x - cx)).sin() * bump(x, y)
                }),
                ScalarField::from_fn(grid, |x, y, _| {
                    -BUMP_SHARPNESS * wy * (wy * (y - cy)).sin() * bump(x, y)
                }),
            ]);
            names.push(format!("res_mass_{n}"));
            names.push(format!("res_mom1_{n}"));
            names.push(format!("res_mom2_{n}"));
        }
        let mut wf = WeakForm {
            phi,
            grad_phi,
            initial: Vec::new(),
            accumulated: Vec::new(),
            last_flux: Vec::new(),
            names,
        };
        wf.initial = wf.pairings(state);
        wf.accumulated = vec![0.0; wf.initial.len()];
        wf.last_flux = wf.fluxes(state, params);
        wf
    }

    fn integrate_product(a: &[f64], b: &[f64], grid: &Grid) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / grid.len() as f64 * grid.volume()
    }

    /// `int rho phi`, `int m_1 phi`, `int m_2 phi` per bump.
    fn pairings(&self, state: &FlowState) -> Vec<f64> {
        let grid = state.grid();
        self.phi
            .iter()
            .flat_map(|phi| {
                [
                    Self::integrate_product(state.rho.data(), phi.data(), grid),
                    Self::integrate_product(state.mom.comp(0), phi.data(), grid),
                    Self::integrate_product(state.mom.comp(1), phi.data(), grid),
                ]
            })
            .collect()
    }

    /// Time derivatives of the pairings implied by the weak formulation.
    fn fluxes(&self, state: &FlowState, params: &ScalingParams) -> Vec<f64> {
        let grid = state.grid();
        let n = grid.len();
        let eps = params.epsilon();
        let p0 = params.p(params.rho_bar());
        let (rho, m) = (state.rho.data(), &state.mom);
        let mut out = Vec::new();
        for (phi, [d1, d2]) in self.phi.iter().zip(&self.grad_phi) {
            let (phi, d1, d2) = (phi.data(), d1.data(), d2.data());
            let mut mass = 0.0;
            let mut mom = [0.0; 2];
            for p in 0..n {
                let (m1, m2) = (m.comp(0)[p], m.comp(1)[p]);
                mass += m1 * d1[p] + m2 * d2[p];
                let pr = (params.p(rho[p]) - p0) / (eps * eps);
                mom[0] += (m1 * m1 * d1[p] + m1 * m2 * d2[p]) / rho[p] + pr * d1[p] + m2 * phi[p] / eps;
                mom[1] += (m2 * m1 * d1[p] + m2 * m2 * d2[p]) / rho[p] + pr * d2[p] - m1 * phi[p] / eps;
            }
            let w = grid.volume() / n as f64;
            out.extend([mass * w, mom[0] * w, mom[1] * w]);
        }
        out
    }

    fn advance(&mut self, state: &FlowState, params: &ScalingParams, dt: f64) {
        let flux = self.fluxes(state, params);
        for ((acc, f0), f1) in self.accumulated.iter_mut().zip(&self.last_flux).zip(&flux) {
            *acc += 0.5 * dt * (f0 + f1);
        }
        self.last_flux = flux;
    }

    fn residuals(&self, state: &FlowState) -> Vec<f64> {
        self.pairings(state)
            .iter()
            .zip(&self.initial)
            .zip(&self.accumulated)
            .map(|((now, start), acc)| now - start - acc)
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub cfl: f64,
    /// Monitor cadence in time units; `0` records only the endpoints.
    pub sample_dt: f64,
    pub symmetry: bool,
    pub hyperviscosity: bool,
    pub keep_snapshots: bool,
    pub terms: EulerTerms,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            cfl: 0.5,
            sample_dt: 0.0,
            symmetry: false,
            hyperviscosity: false,
            keep_snapshots: false,
            terms: EulerTerms::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonitorRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    /// `E(0) - E(t)`.
    pub defect: f64,
    /// Energy removed by the hyperviscous filter so far.
    pub hyper_dissipated: f64,
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<FlowState>,
    pub monitors: Vec<MonitorRow>,
    pub residual_names: Vec<String>,
    pub steps: usize,
}

/// Single-owner stepper that can be advanced to arbitrary sample times.
pub struct EulerIntegrator {
    state: FlowState,
    params: ScalingParams,
    opts: IntegrateOptions,
    weak: WeakForm,
    energy0: f64,
    hyper: Option<Hyperviscosity>,
    hyper_dissipated: f64,
    steps: usize,
}

impl EulerIntegrator {
    pub fn new(state0: FlowState, params: ScalingParams, opts: IntegrateOptions) -> Result<Self> {
        let state0 = if opts.symmetry {
            state0.project_symmetry()
        } else {
            state0
        };
        let energy0 = total_energy(&state0, &params)?;
        let hyper = if opts.hyperviscosity {
            let dt = stable_dt(&state0, &params, opts.cfl)?;
            Some(Hyperviscosity::for_step(state0.grid(), dt))
        } else {
            None
        };
        let weak = WeakForm::new(&state0, &params);
        Ok(EulerIntegrator {
            state: state0,
            params,
            opts,
            weak,
            energy0,
            hyper,
            hyper_dissipated: 0.0,
            steps: 0,
        })
    }

    pub fn state(&self) -> &FlowState {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn residual_names(&self) -> &[String] {
        &self.weak.names
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let tol = 1e-13 * t.abs().max(1.0);
        while self.state.time < t - tol {
            let remaining = t - self.state.time;
            let dt = stable_dt(&self.state, &self.params, self.opts.cfl)?.min(remaining);
            let mut next = step_rk4_with(&self.state, dt, &self.params, self.opts.terms)?;
            if let Some(h) = self.hyper {
                let before = total_energy(&next, &self.params)?;
                next = h.apply(&next, dt);
                self.hyper_dissipated += before - total_energy(&next, &self.params)?;
            }
            if self.opts.symmetry {
                next = next.project_symmetry();
            }
            if remaining - dt <= tol {
                next.time = t;
            }
            self.weak.advance(&next, &self.params, dt);
            self.state = next;
            self.steps += 1;
        }
        Ok(())
    }

    pub fn monitor_row(&self) -> Result<MonitorRow> {
        let energy = total_energy(&self.state, &self.params)?;
        Ok(MonitorRow {
            t: self.state.time,
            mass: self.state.mass(&self.params),
            energy,
            defect: self.energy0 - energy,
            hyper_dissipated: self.hyper_dissipated,
            residuals: self.weak.residuals(&self.state),
        })
    }
}

/// Integrate to `t_end`, recording monitors (and optionally snapshots) at the sample cadence.
pub fn integrate(
    state0: FlowState,
    t_end: f64,
    params: &ScalingParams,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(t_end >= 0.0) {
        return Err(LabError::domain("t_end must be >= 0"));
    }
    let t0 = state0.time;
    let mut integ = EulerIntegrator::new(state0, *params, opts.clone())?;
    let mut snapshots = Vec::new();
    let mut monitors = Vec::new();
    for t in timestep::sample_times(t_end, opts.sample_dt) {
        integ.advance_to(t0 + t)?;
        monitors.push(integ.monitor_row()?);
        if opts.keep_snapshots {
            snapshots.push(integ.state().clone());
        }
    }
    Ok(Trajectory {
        snapshots,
        monitors,
        residual_names: integ.residual_names().to_vec(),
        steps: integ.steps(),
    })
}
