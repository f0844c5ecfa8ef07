//! The 2D limit system in vorticity-stream form.
//!
//! The potential vorticity `omega = lap_h q - q / p'(rho_bar)` is transported
//! by `perp_grad_h q`; `q` is recovered from `omega` by an exact per-mode
//! Helmholtz inversion. The geostrophic velocity is
//! `v = (p'(rho_bar)/rho_bar) perp_grad_h q`.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::{self, ScalarField, VectorField};
use crate::thermo::ScalingParams;
use crate::timestep::{self, Axpy};

#[derive(Clone, Debug)]
pub struct TargetState {
    pub time: f64,
    pub q: ScalarField,
    pub omega: ScalarField,
}

impl TargetState {
    /// Build a consistent state from the stream function.
    pub fn from_q(time: f64, q: ScalarField, params: &ScalingParams) -> Result<Self> {
        if q.grid().nz() != 1 {
            return Err(LabError::dimension("target fields live on a 2D grid"));
        }
        let omega = omega_from_q(&q, params);
        Ok(TargetState { time, q, omega })
    }

    pub fn from_omega(time: f64, omega: ScalarField, params: &ScalingParams) -> Result<Self> {
        if omega.grid().nz() != 1 {
            return Err(LabError::dimension("target fields live on a 2D grid"));
        }
        let q = q_from_omega(&omega, params)?;
        Ok(TargetState { time, q, omega })
    }

    pub fn velocity(&self, params: &ScalingParams) -> VectorField {
        velocity_from_q(&self.q, params)
    }
}

pub fn omega_from_q(q: &ScalarField, params: &ScalingParams) -> ScalarField {
    let c2 = params.sound_speed_sq();
    let mut omega = grid::laplacian_h(q);
    omega.axpy(-1.0 / c2, q);
    omega
}

/// Geostrophic velocity `(p'(rho_bar)/rho_bar) perp_grad_h q`.
pub fn velocity_from_q(q: &ScalarField, params: &ScalingParams) -> VectorField {
    grid::perp_grad_h(q).scaled(params.sound_speed_sq() / params.rho_bar())
}

/// Largest pointwise residual of `(p'/rho_bar) grad_h q + b x v` for velocity `v`.
pub fn balance_residual(q: &ScalarField, v: &VectorField, params: &ScalingParams) -> f64 {
    let g = grid::grad(q);
    let c = params.sound_speed_sq() / params.rho_bar();
    (0..q.grid().len())
        .map(|n| {
            let r1 = c * g.comp(0)[n] - v.comp(1)[n];
            let r2 = c * g.comp(1)[n] + v.comp(0)[n];
            r1.abs().max(r2.abs())
        })
        .fold(0.0, f64::max)
}

/// Solve `lap_h q - q / p'(rho_bar) = omega`.
pub fn q_from_omega(omega: &ScalarField, params: &ScalingParams) -> Result<ScalarField> {
    Ok(grid::solve_helmholtz_h(&omega.scaled(-1.0), 1.0 / params.sound_speed_sq())?.solution)
}

/// `-(perp_grad_h q . grad_h) omega`, dealiased.
pub fn target_rhs(state: &TargetState, _params: &ScalingParams) -> Result<ScalarField> {
    state.q.grid().check_same(state.omega.grid(), "target state")?;
    let adv = grid::perp_grad_h(&state.q);
    let g = grid::grad(&state.omega);
    let prod: Vec<f64> = (0..state.q.grid().len())
        .map(|n| -(adv.comp(0)[n] * g.comp(0)[n] + adv.comp(1)[n] * g.comp(1)[n]))
        .collect();
    Ok(grid::dealias(&ScalarField::from_vec(state.q.grid(), prod)?))
}

/// Advective step bound `cfl * h / max|perp_grad_h q|` (infinite for a state at rest).
pub fn target_stable_dt(state: &TargetState, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(LabError::domain(format!("cfl = {cfl} must lie in (0, 1]")));
    }
    let umax = grid::perp_grad_h(&state.q).max_norm();
    let h = state.q.grid().min_spacing();
    Ok(if umax > 0.0 { cfl * h / umax } else { f64::INFINITY })
}

#[derive(Clone)]
struct Vorticity(ScalarField);

impl Axpy for Vorticity {
    fn axpy(&mut self, alpha: f64, other: &Self) {
        self.0.axpy(alpha, &other.0);
    }
}

pub fn target_step_rk4(state: &TargetState, dt: f64, params: &ScalingParams) -> Result<TargetState> {
    let limit = target_stable_dt(state, 1.0)?;
    if dt > limit {
        return Err(LabError::Stability(format!(
            "target step {dt:e} exceeds advective limit {limit:e}"
        )));
    }
    let omega = timestep::rk4(&Vorticity(state.omega.clone()), dt, |w| {
        let stage = TargetState::from_omega(state.time, w.0.clone(), params)?;
        Ok(Vorticity(target_rhs(&stage, params)?))
    })?;
    TargetState::from_omega(state.time + dt, omega.0, params)
}

/// `int |grad_h q|^2 + q^2 / p'(rho_bar) dx_h`.
pub fn target_energy(state: &TargetState, params: &ScalingParams) -> f64 {
    let g = grid::grad(&state.q);
    let c2 = params.sound_speed_sq();
    let dens: Vec<f64> = (0..state.q.grid().len())
        .map(|n| g.comp(0)[n].powi(2) + g.comp(1)[n].powi(2) + state.q.data()[n].powi(2) / c2)
        .collect();
    ScalarField::from_vec(state.q.grid(), dens)
        .expect("same grid")
        .integral()
}

/// Stepper that can be advanced to arbitrary sample times.
pub struct TargetIntegrator {
    state: TargetState,
    params: ScalingParams,
    cfl: f64,
    max_dt: f64,
    steps: usize,
}

impl TargetIntegrator {
    pub fn new(state0: TargetState, params: ScalingParams, cfl: f64) -> Result<Self> {
        target_stable_dt(&state0, cfl)?;
        Ok(TargetIntegrator {
            state: state0,
            params,
            cfl,
            max_dt: f64::INFINITY,
            steps: 0,
        })
    }

    /// Cap the step size, e.g. to keep time error below the quantity being compared against.
    pub fn with_max_dt(mut self, max_dt: f64) -> Result<Self> {
        if !(max_dt > 0.0) {
            return Err(LabError::domain(format!("max_dt = {max_dt} must be > 0")));
        }
        self.max_dt = max_dt;
        Ok(self)
    }

    pub fn state(&self) -> &TargetState {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let tol = 1e-13 * t.abs().max(1.0);
        while self.state.time < t - tol {
            let remaining = t - self.state.time;
            let dt = target_stable_dt(&self.state, self.cfl)?.min(self.max_dt).min(remaining);
            let mut next = target_step_rk4(&self.state, dt, &self.params)?;
            if remaining - dt <= tol {
                next.time = t;
            }
            self.state = next;
            self.steps += 1;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TargetMonitorRow {
    pub t: f64,
    pub energy: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

#[derive(Clone, Debug)]
pub struct TargetTrajectory {
    pub snapshots: Vec<TargetState>,
    pub monitors: Vec<TargetMonitorRow>,
    pub steps: usize,
}

/// Integrate to `t_end`, keeping a snapshot and a monitor row per sample time.
pub fn target_integrate(
    state0: TargetState,
    t_end: f64,
    params: &ScalingParams,
    cfl: f64,
    sample_dt: f64,
) -> Result<TargetTrajectory> {
    let t0 = state0.time;
    let mut integ = TargetIntegrator::new(state0, *params, cfl)?;
    let mut snapshots = Vec::new();
    let mut monitors = Vec::new();
    for t in timestep::sample_times(t_end, sample_dt) {
        integ.advance_to(t0 + t)?;
        let s = integ.state();
        monitors.push(TargetMonitorRow {
            t: s.time,
            energy: target_energy(s, params),
            omega_min: s.omega.min(),
            omega_max: s.omega.max(),
        });
        snapshots.push(s.clone());
    }
    Ok(TargetTrajectory {
        snapshots,
        monitors,
        steps: integ.steps(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn unit_params() -> ScalingParams {
        // p'(rho_bar) = a gamma rho_bar^(gamma-1) = 1 = rho_bar
        ScalingParams::new(0.1, 0.5, 2.0, 1.0).unwrap()
    }

    fn square(n: usize) -> Grid {
        Grid::new_2d(n, n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn velocity_examples() {
        let g = square(16);
        let p = unit_params();
        assert_eq!(velocity_from_q(&ScalarField::zeros(&g), &p).max_abs(), 0.0);
        let q = ScalarField::from_fn(&g, |_, y, _| y.sin());
        let v = velocity_from_q(&q, &p);
        let expected = VectorField::from_fn(&g, |_, y, _| [-y.cos(), 0.0, 0.0]);
        assert!(v.max_abs_diff(&expected) < 1e-13);
        assert!(balance_residual(&q, &v, &p) < 1e-13);
    }

    #[test]
    fn q_from_omega_examples() {
        let g = square(16);
        let p = ScalingParams::new(0.1, 1.0, 2.0, 1.0).unwrap(); // p' = 2
        let c2 = p.sound_speed_sq();
        let omega = ScalarField::from_fn(&g, |x, _, _| -(1.0 + 1.0 / c2) * x.cos());
        let q = q_from_omega(&omega, &p).unwrap();
        let expected = ScalarField::from_fn(&g, |x, _, _| x.cos());
        assert!(q.max_abs_diff(&expected) < 1e-14);
        assert_eq!(q_from_omega(&ScalarField::zeros(&g), &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn single_mode_is_steady() {
        let g = square(32);
        let p = unit_params();
        let q = ScalarField::from_fn(&g, |x, y, _| 0.3 * (2.0 * x + y).cos());
        let s = TargetState::from_q(0.0, q, &p).unwrap();
        let r = target_rhs(&s, &p).unwrap().max_abs();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn energy_of_cosine() {
        let g = square(16);
        let p = unit_params();
        let s = TargetState::from_q(0.0, ScalarField::from_fn(&g, |x, _, _| x.cos()), &p).unwrap();
        assert!((target_energy(&s, &p) - 4.0 * PI * PI).abs() < 1e-12);
        let z = TargetState::from_q(0.0, ScalarField::zeros(&g), &p).unwrap();
        assert_eq!(target_energy(&z, &p), 0.0);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = square(16);
        let p = unit_params();
        let s = TargetState::from_q(0.0, ScalarField::from_fn(&g, |x, y, _| x.cos() + (2.0 * y).sin()), &p).unwrap();
        let limit = target_stable_dt(&s, 1.0).unwrap();
        assert!(matches!(
            target_step_rk4(&s, 2.0 * limit, &p),
            Err(LabError::Stability(_))
        ));
    }

    #[test]
    fn three_dimensional_q_is_rejected() {
        let g = Grid::new(8, 8, 2, 1.0, 1.0).unwrap();
        assert!(TargetState::from_q(0.0, ScalarField::zeros(&g), &unit_params()).is_err());
    }
}
