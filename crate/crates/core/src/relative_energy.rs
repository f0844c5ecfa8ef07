//! Scaled relative energy between a primitive-system state and a smooth test
//! state,
//!
//! ```text
//! E = int 1/2 rho |m/rho - u~|^2 + eps^-2 (P(rho) - P(r~) - P'(r~)(rho - r~)) dx,
//! ```
//!
//! together with its split into essential and residual components.

use serde::Serialize;

use crate::acoustic::AcousticState;
use crate::error::{LabError, Result};
use crate::euler::FlowState;
use crate::grid::{self, Grid, ScalarField, VectorField};
use crate::target::{self, TargetState};
use crate::thermo::{self, CutoffChi, ScalingParams};

#[derive(Clone, Debug)]
pub struct TestState {
    pub rtilde: ScalarField,
    pub utilde: VectorField,
}

impl TestState {
    pub fn new(rtilde: ScalarField, utilde: VectorField) -> Result<Self> {
        rtilde.grid().check_same(utilde.grid(), "test state")?;
        if rtilde.min() <= 0.0 {
            return Err(LabError::domain(format!(
                "test density must be positive (min {})",
                rtilde.min()
            )));
        }
        Ok(TestState { rtilde, utilde })
    }

    /// `(rho, m/rho)` of a flow state.
    pub fn from_flow(state: &FlowState) -> Result<Self> {
        Self::new(state.rho.clone(), state.velocity()?)
    }

    pub fn grid(&self) -> &Grid {
        self.rtilde.grid()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RelativeEnergyReport {
    pub time: f64,
    pub value: f64,
    /// `int chi(rho) rho |u - u~|^2`
    pub ess_velocity: f64,
    /// `int (1 - chi(rho)) rho |u - u~|^2`
    pub res_kinetic: f64,
    /// `int chi(rho) (rho - r~)^2`
    pub ess_density: f64,
    /// `int (1 - chi(rho)) (1 + rho^gamma)`
    pub res_mass_pressure: f64,
    pub energy_defect: f64,
}

impl RelativeEnergyReport {
    pub fn component_sum(&self) -> f64 {
        self.ess_velocity + self.res_kinetic + self.ess_density + self.res_mass_pressure
    }
}

fn check_pair(state: &FlowState, test: &TestState) -> Result<()> {
    state.grid().check_same(test.grid(), "relative energy")?;
    state.check_positive()?;
    if test.rtilde.min() <= 0.0 {
        return Err(LabError::domain("test density must be positive"));
    }
    Ok(())
}

struct Densities {
    kinetic: Vec<f64>,
    pressure: Vec<f64>,
    rel_speed_sq: Vec<f64>,
}

fn densities(state: &FlowState, test: &TestState, params: &ScalingParams) -> Densities {
    let n = state.grid().len();
    let eps2 = params.epsilon().powi(2);
    let mut kinetic = Vec::with_capacity(n);
    let mut pressure = Vec::with_capacity(n);
    let mut rel_speed_sq = Vec::with_capacity(n);
    for p in 0..n {
        let rho = state.rho.data()[p];
        let du2: f64 = (0..3)
            .map(|c| (state.mom.comp(c)[p] / rho - test.utilde.comp(c)[p]).powi(2))
            .sum();
        rel_speed_sq.push(du2);
        kinetic.push(0.5 * rho * du2);
        pressure.push(params.rel_potential(rho, test.rtilde.data()[p]) / eps2);
    }
    Densities {
        kinetic,
        pressure,
        rel_speed_sq,
    }
}

fn integral(grid: &Grid, vals: impl Iterator<Item = f64>) -> f64 {
    vals.sum::<f64>() / grid.len() as f64 * grid.volume()
}

pub fn relative_energy(state: &FlowState, test: &TestState, params: &ScalingParams) -> Result<f64> {
    check_pair(state, test)?;
    let d = densities(state, test, params);
    Ok(integral(
        state.grid(),
        d.kinetic.iter().zip(&d.pressure).map(|(k, p)| k + p),
    ))
}

/// Constants of the coercivity bound for test densities in `[rtilde_min, rtilde_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoercivityConstants {
    /// Half the minimum of `P''` on the cutoff support.
    pub c_conv: f64,
    /// Lower bound of `(P(rho) - P(r~) - P'(r~)(rho - r~)) / (1 + rho^gamma)` over the residual set.
    pub c_res: f64,
}

const RES_SAFETY: f64 = 1.0 - 1e-6;

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    f(0.5 * (a + b))
}

fn sampled_min(f: &impl Fn(f64) -> f64, points: &[f64]) -> f64 {
    let (best, _) = points
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, f(x)))
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let lo = points[best.saturating_sub(1)];
    let hi = points[(best + 1).min(points.len() - 1)];
    let refined = golden_min(f, lo, hi);
    points.iter().map(|&x| f(x)).fold(refined, f64::min)
}

impl CoercivityConstants {
    pub fn compute(params: &ScalingParams, rtilde_min: f64, rtilde_max: f64) -> Result<Self> {
        let chi = CutoffChi::new(params.rho_bar());
        if rtilde_min < chi.lower_support || rtilde_max > chi.upper_support || rtilde_min > rtilde_max {
            return Err(LabError::domain(format!(
                "test densities [{rtilde_min}, {rtilde_max}] leave the cutoff support"
            )));
        }
        let c_conv = thermo::ess_convexity_constant(params);

        if rtilde_min <= chi.lower_plateau || rtilde_max >= chi.upper_plateau {
            return Ok(CoercivityConstants { c_conv, c_res: 0.0 });
        }
        let gamma = params.gamma();
        let ratio = |rho: f64, rt: f64| params.rel_potential(rho, rt) / (1.0 + rho.powf(gamma));

        // For fixed rho the relative potential is monotone in r~ away from rho,
        // so the extreme test densities are the worst cases.
        let low = |rho: f64| ratio(rho, rtilde_min);
        let lo_pts: Vec<f64> = (0..=2000).map(|i| chi.lower_plateau * i as f64 / 2000.0).collect();
        let c_low = sampled_min(&low, &lo_pts);

        let high = |rho: f64| ratio(rho, rtilde_max);
        let hi_pts: Vec<f64> = (0..=4000)
            .map(|i| chi.upper_plateau * 10f64.powf(8.0 * i as f64 / 4000.0))
            .collect();
        let asymptote = params.a() / (gamma - 1.0);
        let c_high = sampled_min(&high, &hi_pts).min(asymptote);

        Ok(CoercivityConstants {
            c_conv,
            c_res: (c_low.min(c_high) * RES_SAFETY).max(0.0),
        })
    }

    pub fn for_test(test: &TestState, params: &ScalingParams) -> Result<Self> {
        Self::compute(params, test.rtilde.min(), test.rtilde.max())
    }

    /// `min(1/2, c_conv/eps^2, c_res/eps^2)`.
    pub fn c_eps(&self, epsilon: f64) -> f64 {
        let e2 = epsilon * epsilon;
        0.5f64.min(self.c_conv / e2).min(self.c_res / e2)
    }
}

/// Relative energy with its ess/res components; fails if the coercivity bound is violated.
pub fn coercivity_components(
    state: &FlowState,
    test: &TestState,
    params: &ScalingParams,
    chi: &CutoffChi,
) -> Result<RelativeEnergyReport> {
    let consts = CoercivityConstants::for_test(test, params)?;
    coercivity_components_with(state, test, params, chi, &consts)
}

pub fn coercivity_components_with(
    state: &FlowState,
    test: &TestState,
    params: &ScalingParams,
    chi: &CutoffChi,
    consts: &CoercivityConstants,
) -> Result<RelativeEnergyReport> {
    check_pair(state, test)?;
    let grid = state.grid();
    let d = densities(state, test, params);
    let gamma = params.gamma();
    let rho = state.rho.data();
    let rt = test.rtilde.data();
    let weights: Vec<f64> = rho.iter().map(|&r| chi.eval(r)).collect();

    let value = integral(grid, d.kinetic.iter().zip(&d.pressure).map(|(k, p)| k + p));
    let ess_velocity = integral(grid, (0..grid.len()).map(|p| weights[p] * rho[p] * d.rel_speed_sq[p]));
    let res_kinetic = integral(grid, (0..grid.len()).map(|p| (1.0 - weights[p]) * rho[p] * d.rel_speed_sq[p]));
    let ess_density = integral(grid, (0..grid.len()).map(|p| weights[p] * (rho[p] - rt[p]).powi(2)));
    let res_mass_pressure = integral(
        grid,
        (0..grid.len()).map(|p| (1.0 - weights[p]) * (1.0 + rho[p].powf(gamma))),
    );

    let report = RelativeEnergyReport {
        time: state.time,
        value,
        ess_velocity,
        res_kinetic,
        ess_density,
        res_mass_pressure,
        energy_defect: 0.0,
    };
    let bound = consts.c_eps(params.epsilon()) * report.component_sum();
    if value < bound * (1.0 - 1e-12) - 1e-300 {
        return Err(LabError::Coercivity { value, bound });
    }
    Ok(report)
}

/// `r~ = rho_bar + eps q`, `u~ = (v, 0)` with `v` the geostrophic velocity of `q`.
pub fn build_well_prepared_test(target: &TargetState, params: &ScalingParams, grid: &Grid) -> Result<TestState> {
    let q = grid::lift(&target.q, grid)?;
    if params.epsilon() * q.max_abs() >= params.rho_bar() {
        return Err(LabError::domain(format!(
            "eps |q|_inf = {} must stay below rho_bar = {}",
            params.epsilon() * q.max_abs(),
            params.rho_bar()
        )));
    }
    let rtilde = q.map(|x| params.rho_bar() + params.epsilon() * x);
    let utilde = grid::lift_vector(&target::velocity_from_q(&target.q, params), grid)?;
    TestState::new(rtilde, utilde)
}

/// `r~ = rho_bar + eps (q + s)`, `u~ = (v, 0) + V`.
pub fn build_ill_prepared_test(
    target: &TargetState,
    acoustic: &AcousticState,
    params: &ScalingParams,
) -> Result<TestState> {
    let grid = acoustic.grid();
    let mut pert = grid::lift(&target.q, grid)?;
    pert.axpy(1.0, &acoustic.s);
    let rtilde = pert.map(|x| params.rho_bar() + params.epsilon() * x);
    if rtilde.min() <= 0.0 {
        return Err(LabError::domain("corrected test density is not positive"));
    }
    let mut utilde = grid::lift_vector(&target::velocity_from_q(&target.q, params), grid)?;
    utilde.axpy(1.0, &acoustic.v);
    TestState::new(rtilde, utilde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square(n: usize) -> Grid {
        Grid::new_2d(n, n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn identical_state_has_zero_energy() {
        let g = square(16);
        let p = ScalingParams::new(0.1, 1.0, 2.0, 1.0).unwrap();
        let s = FlowState::new(
            0.0,
            ScalarField::from_fn(&g, |x, _, _| 1.0 + 0.2 * x.sin()),
            VectorField::from_fn(&g, |_, y, _| [y.cos(), 0.3, 0.0]),
        )
        .unwrap();
        let t = TestState::from_flow(&s).unwrap();
        assert_eq!(relative_energy(&s, &t, &p).unwrap(), 0.0);
        let r = coercivity_components(&s, &t, &p, &CutoffChi::new(1.0)).unwrap();
        assert_eq!(r.component_sum(), 0.0);
    }

    #[test]
    fn constant_density_gap_example() {
        let g = square(8);
        let p = ScalingParams::new(1.0, 1.0, 2.0, 1.0).unwrap();
        let s = FlowState::new(0.0, ScalarField::constant(&g, 2.0), VectorField::zeros(&g)).unwrap();
        let t = TestState::new(ScalarField::constant(&g, 1.0), VectorField::zeros(&g)).unwrap();
        let e = relative_energy(&s, &t, &p).unwrap();
        assert!((e - g.volume()).abs() < 1e-12);
        let half = relative_energy(&s, &t, &p.with_epsilon(0.5).unwrap()).unwrap();
        assert!((half - 4.0 * e).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_inputs_rejected() {
        let g = square(8);
        let p = ScalingParams::new(1.0, 1.0, 2.0, 1.0).unwrap();
        assert!(TestState::new(ScalarField::zeros(&g), VectorField::zeros(&g)).is_err());
        let mut s = FlowState::rest(&g, &p);
        s.rho.data_mut()[0] = -1.0;
        let t = TestState::new(ScalarField::constant(&g, 1.0), VectorField::zeros(&g)).unwrap();
        assert!(relative_energy(&s, &t, &p).is_err());
    }

    #[test]
    fn plateau_state_has_no_residual_part() {
        let g = square(16);
        let p = ScalingParams::new(0.2, 1.0, 2.0, 1.0).unwrap();
        let s = FlowState::new(
            0.0,
            ScalarField::from_fn(&g, |x, _, _| 1.0 + 0.5 * x.cos()),
            VectorField::from_fn(&g, |x, _, _| [x.sin(), 0.0, 0.0]),
        )
        .unwrap();
        let t = TestState::new(ScalarField::constant(&g, 1.0), VectorField::zeros(&g)).unwrap();
        let r = coercivity_components(&s, &t, &p, &CutoffChi::new(1.0)).unwrap();
        assert_eq!(r.res_kinetic, 0.0);
        assert_eq!(r.res_mass_pressure, 0.0);
        assert!(r.ess_velocity > 0.0 && r.ess_density > 0.0);
    }

    #[test]
    fn residual_constant_is_positive_inside_plateau() {
        let p = ScalingParams::new(0.1, 1.0, 2.0, 1.0).unwrap();
        let c = CoercivityConstants::compute(&p, 0.9, 1.1).unwrap();
        assert!(c.c_res > 0.0);
        assert!((c.c_conv - 1.0).abs() < 1e-15);
        let edge = CoercivityConstants::compute(&p, 0.4, 1.1).unwrap();
        assert_eq!(edge.c_res, 0.0);
        assert!(CoercivityConstants::compute(&p, 0.1, 1.0).is_err());
    }

    #[test]
    fn well_prepared_test_positivity() {
        let g = square(8);
        let p = ScalingParams::new(1.0, 0.5, 2.0, 1.0).unwrap();
        let q = ScalarField::from_fn(&g, |x, _, _| 2.0 * x.cos());
        let target = TargetState::from_q(0.0, q, &p).unwrap();
        assert!(matches!(
            build_well_prepared_test(&target, &p, &g),
            Err(LabError::Domain(_))
        ));
        let zero = TargetState::from_q(0.0, ScalarField::zeros(&g), &p).unwrap();
        let t = build_well_prepared_test(&zero, &p, &g).unwrap();
        assert!(t.rtilde.data().iter().all(|&r| r == 1.0));
        assert_eq!(t.utilde.max_abs(), 0.0);
    }

    #[test]
    fn ill_prepared_test_reduces_to_well_prepared() {
        let g = square(16);
        let p = ScalingParams::new(0.1, 0.5, 2.0, 1.0).unwrap();
        let q = ScalarField::from_fn(&g, |x, y, _| 0.2 * (x.cos() + (2.0 * y).sin()));
        let target = TargetState::from_q(0.0, q, &p).unwrap();
        let a = build_ill_prepared_test(&target, &AcousticState::zeros(&g), &p).unwrap();
        let b = build_well_prepared_test(&target, &p, &g).unwrap();
        assert_eq!(a.rtilde.data(), b.rtilde.data());
        assert!(a.utilde.max_abs_diff(&b.utilde) == 0.0);

        let zero = TargetState::from_q(0.0, ScalarField::zeros(&g), &p).unwrap();
        let s = ScalarField::from_fn(&g, |x, _, _| x.sin());
        let v = VectorField::from_fn(&g, |_, _, _| [0.3, -0.1, 0.0]);
        let t = build_ill_prepared_test(&zero, &AcousticState::new(0.0, s.clone(), v.clone()).unwrap(), &p).unwrap();
        assert!(t.rtilde.max_abs_diff(&s.map(|x| 1.0 + 0.1 * x)) < 1e-15);
        assert_eq!(t.utilde.max_abs_diff(&v), 0.0);
    }
}
