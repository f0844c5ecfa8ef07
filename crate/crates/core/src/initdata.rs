//! Well-prepared and ill-prepared initial data, the Fourier low-pass
//! regularization, and the split of regularized data into a geostrophic part
//! (which seeds the limit system) and an acoustic part (which seeds the
//! Rossby-acoustic propagator).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acoustic::AcousticState;
use crate::error::{LabError, Result};
use crate::euler::FlowState;
use crate::grid::{self, Grid, ScalarField, VectorField};
use crate::target::{self, TargetState};
use crate::thermo::ScalingParams;

const LOCALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct WellPreparedSpec {
    /// Limit stream function at `t = 0`, on a 2D grid.
    pub q0: ScalarField,
    pub params: ScalingParams,
}

fn check_localized(f: &ScalarField, what: &str) -> Result<()> {
    let frac = grid::alias_fraction(f);
    if frac > LOCALIZATION_TOL {
        return Err(LabError::domain(format!(
            "{what} is not spectrally localized (top-third amplitude ratio {frac:e})"
        )));
    }
    Ok(())
}

impl WellPreparedSpec {
    pub fn validate(&self) -> Result<()> {
        if self.q0.grid().nz() != 1 {
            return Err(LabError::dimension("q0 must live on a 2D grid"));
        }
        check_localized(&self.q0, "q0")?;
        let scale = self.q0.max_abs().max(1.0);
        if self.q0.mean().abs() > LOCALIZATION_TOL * scale {
            return Err(LabError::domain("q0 must have zero mean"));
        }
        Ok(())
    }
}

/// Balanced data: `v0 = (p'/rho_bar) perp_grad_h q0`, `rho0 = rho_bar + eps q0`, `m0 = rho0 v0`.
pub fn make_well_prepared(spec: &WellPreparedSpec, grid: &Grid) -> Result<FlowState> {
    spec.validate()?;
    let p = &spec.params;
    let q = grid::lift(&spec.q0, grid)?;
    let v = grid::lift_vector(&target::velocity_from_q(&spec.q0, p), grid)?;
    let rho = q.map(|x| p.rho_bar() + p.epsilon() * x);
    if rho.min() <= 0.0 {
        return Err(LabError::domain(format!(
            "eps = {} too large: initial density reaches {}",
            p.epsilon(),
            rho.min()
        )));
    }
    let mom = v.mul_scalar(&rho)?;
    FlowState::new(0.0, rho, mom)
}

/// Drop every Fourier mode with `|xi| > 1/delta`.
pub fn regularize_delta(f: &ScalarField, delta: f64) -> Result<ScalarField> {
    if !(delta > 0.0) {
        return Err(LabError::domain(format!("delta = {delta} must be > 0")));
    }
    let kmax2 = 1.0 / (delta * delta);
    Ok(grid::filter_modes(f, |m| m.k2_total() <= kmax2 * (1.0 + 1e-12)))
}

pub fn regularize_delta_vector(v: &VectorField, delta: f64) -> Result<VectorField> {
    VectorField::from_components(
        regularize_delta(&v.component(0), delta)?,
        regularize_delta(&v.component(1), delta)?,
        regularize_delta(&v.component(2), delta)?,
    )
}

/// Default regularization: `1/delta` is half the largest resolved horizontal wavenumber.
pub fn default_delta(grid: &Grid) -> f64 {
    2.0 / grid.resolved_kmax_h()
}

#[derive(Clone, Debug)]
pub struct IllPreparedSpec {
    pub rho1_0: ScalarField,
    pub u0: VectorField,
    pub delta: f64,
    pub params: ScalingParams,
}

impl IllPreparedSpec {
    pub fn validate(&self) -> Result<()> {
        self.rho1_0.grid().check_same(self.u0.grid(), "ill-prepared data")?;
        if !(self.delta > 0.0) {
            return Err(LabError::domain("delta must be > 0"));
        }
        let tol = 1e-12 * self.rho1_0.max_abs().max(self.u0.max_abs()).max(1.0);
        let odd_rho = grid::odd_part_x3(&self.rho1_0).max_abs();
        let sym = grid::project_symmetry_vector(&self.u0);
        if odd_rho > tol || sym.max_abs_diff(&self.u0) > tol {
            return Err(LabError::domain(
                "data outside the slip symmetry class (rho, u_h even and u_3 odd in x3)",
            ));
        }
        Ok(())
    }
}

/// Sign/scale convention for the right side of the geostrophic elliptic problem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EllipticConvention {
    /// `-lap q + q/p' = -(rho_bar/p') <curl_h u> + (1/p') <rho1>`; balanced data has no acoustic part.
    #[default]
    BalanceConsistent,
    /// `-lap q + q/p' = rho_bar <curl_h u> + (1/p') <rho1>`, coefficients taken verbatim.
    AsPrinted,
}

#[derive(Clone, Debug)]
pub struct DataDecomposition {
    /// Geostrophic stream function (2D).
    pub q0_delta: ScalarField,
    /// Geostrophic velocity (2D).
    pub v0_delta: VectorField,
    pub s0_delta: ScalarField,
    pub v_acoustic0_delta: VectorField,
    /// The regularized data the parts reconstruct.
    pub rho1_delta: ScalarField,
    pub u0_delta: VectorField,
}

impl DataDecomposition {
    /// Largest error of `rho1_delta = s + q` and `u0_delta = V + (v, 0)`.
    pub fn reconstruction_error(&self) -> Result<f64> {
        let grid = self.rho1_delta.grid();
        let mut rho = grid::lift(&self.q0_delta, grid)?;
        rho.axpy(1.0, &self.s0_delta);
        let mut u = grid::lift_vector(&self.v0_delta, grid)?;
        u.axpy(1.0, &self.v_acoustic0_delta);
        Ok(rho
            .max_abs_diff(&self.rho1_delta)
            .max(u.max_abs_diff(&self.u0_delta)))
    }

    pub fn target_state(&self, params: &ScalingParams) -> Result<TargetState> {
        TargetState::from_q(0.0, self.q0_delta.clone(), params)
    }

    pub fn acoustic_state(&self) -> Result<AcousticState> {
        AcousticState::new(0.0, self.s0_delta.clone(), self.v_acoustic0_delta.clone())
    }
}

pub fn decompose_ill_prepared(
    spec: &IllPreparedSpec,
    convention: EllipticConvention,
) -> Result<DataDecomposition> {
    spec.validate()?;
    let p = &spec.params;
    let grid = spec.rho1_0.grid();
    let c2 = p.sound_speed_sq();
    let rho1 = regularize_delta(&spec.rho1_0, spec.delta)?;
    let u = regularize_delta_vector(&spec.u0, spec.delta)?;

    let curl_avg = grid::vertical_average(&grid::curl_h(&u));
    let rho_avg = grid::vertical_average(&rho1);
    let curl_coeff = match convention {
        EllipticConvention::BalanceConsistent => -p.rho_bar() / c2,
        EllipticConvention::AsPrinted => p.rho_bar(),
    };
    let mut rhs = curl_avg.scaled(curl_coeff);
    rhs.axpy(1.0 / c2, &rho_avg);
    let q = grid::solve_helmholtz_h(&rhs, 1.0 / c2)?.solution;
    let v = target::velocity_from_q(&q, p);

    let mut s = rho1.clone();
    s.axpy(-1.0, &grid::lift(&q, grid)?);
    let mut va = u.clone();
    va.axpy(-1.0, &grid::lift_vector(&v, grid)?);

    Ok(DataDecomposition {
        q0_delta: q,
        v0_delta: v,
        s0_delta: s,
        v_acoustic0_delta: va,
        rho1_delta: rho1,
        u0_delta: u,
    })
}

/// `rho0 = rho_bar + eps rho1`, `m0 = rho0 u0`; no balance imposed.
pub fn make_ill_prepared(spec: &IllPreparedSpec) -> Result<FlowState> {
    spec.validate()?;
    let p = &spec.params;
    let rho = spec.rho1_0.map(|x| p.rho_bar() + p.epsilon() * x);
    if rho.min() <= 0.0 {
        return Err(LabError::domain(format!(
            "eps = {} too large: initial density reaches {}",
            p.epsilon(),
            rho.min()
        )));
    }
    let mom = spec.u0.mul_scalar(&rho)?;
    FlowState::new(0.0, rho, mom)
}

/// Geostrophic balance residual of a flow state, reading `q = (rho - rho_bar)/eps` and `v = m/rho`.
pub fn flow_balance_residual(state: &FlowState, params: &ScalingParams) -> Result<f64> {
    let q = state.rho.map(|r| (r - params.rho_bar()) / params.epsilon());
    let v = state.velocity()?;
    Ok(target::balance_residual(&q, &v, params))
}

/// Shape of the generated data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// A fixed combination of a few lowest modes.
    TwoMode,
    /// Random low-mode Fourier coefficients drawn from the seed.
    Random,
}

fn wavenumbers(grid: &Grid) -> (f64, f64) {
    (2.0 * PI / grid.lx(), 2.0 * PI / grid.ly())
}

/// `amplitude (cos(kx x1) + sin(2 ky x2))`; the two modes have different `|xi|`, so the flow is unsteady.
pub fn two_mode_q(grid2d: &Grid, amplitude: f64) -> ScalarField {
    let (kx, ky) = wavenumbers(grid2d);
    ScalarField::from_fn(grid2d, |x, y, _| amplitude * ((kx * x).cos() + (2.0 * ky * y).sin()))
}

/// Random zero-mean field built from modes with `|m| <= 4`, scaled so `max|f| = amplitude`.
pub fn random_smooth_field(grid: &Grid, amplitude: f64, seed: u64, vertical: bool) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (kx, ky) = wavenumbers(grid);
    let mut terms = Vec::new();
    let mz_max = if vertical && grid.nz() >= 4 { 1 } else { 0 };
    for mx in -4i32..=4 {
        for my in -4i32..=4 {
            for mz in 0..=mz_max {
                if mx == 0 && my == 0 && mz == 0 {
                    continue;
                }
                let r2 = (mx * mx + my * my + mz * mz) as f64;
                if r2 > 16.0 {
                    continue;
                }
                let weight = (-r2 / 4.0).exp();
                let a: f64 = rng.random_range(-1.0..1.0);
                let phase: f64 = rng.random_range(0.0..2.0 * PI);
                terms.push((mx as f64 * kx, my as f64 * ky, mz as f64, weight * a, phase));
            }
        }
    }
    let f = ScalarField::from_fn(grid, |x, y, z| {
        terms
            .iter()
            .map(|&(ax, ay, mz, c, ph)| c * (ax * x + ay * y + ph).cos() * (2.0 * PI * mz * z).cos())
            .sum()
    });
    let mean = f.mean();
    let f = f.map(|v| v - mean);
    let scale = f.max_abs();
    if scale > 0.0 {
        f.scaled(amplitude / scale)
    } else {
        f
    }
}

/// Limit stream function for a well-prepared run.
pub fn well_prepared_q0(grid2d: &Grid, amplitude: f64, profile: Profile, seed: u64) -> ScalarField {
    match profile {
        Profile::TwoMode => two_mode_q(grid2d, amplitude),
        Profile::Random => random_smooth_field(grid2d, amplitude, seed, false),
    }
}

/// Unbalanced `(rho1, u0)` in the slip symmetry class; `x3` structure appears when `nz >= 4`.
pub fn ill_prepared_fields(
    grid: &Grid,
    amplitude: f64,
    profile: Profile,
    seed: u64,
) -> (ScalarField, VectorField) {
    let (kx, ky) = wavenumbers(grid);
    let layered = grid.nz() >= 4;
    match profile {
        Profile::TwoMode => {
            let rho1 = ScalarField::from_fn(grid, |x, y, _| {
                amplitude * ((kx * x).cos() + (2.0 * ky * y).sin())
            });
            let u = VectorField::from_fn(grid, |x, y, z| {
                let mut u1 = amplitude * ((ky * y).sin() + (kx * x).cos());
                let u2 = amplitude * (2.0 * kx * x).sin();
                let mut u3 = 0.0;
                if layered {
                    u1 += amplitude * (2.0 * PI * z).cos() * (kx * x).cos();
                    u3 = amplitude * (2.0 * PI * z).sin() * (ky * y).sin();
                }
                [u1, u2, u3]
            });
            (rho1, u)
        }
        Profile::Random => {
            let rho1 = random_smooth_field(grid, amplitude, seed, layered);
            let u1 = random_smooth_field(grid, amplitude, seed.wrapping_add(1), layered);
            let u2 = random_smooth_field(grid, amplitude, seed.wrapping_add(2), layered);
            let u3 = if layered {
                let base = random_smooth_field(&grid.horizontal(), amplitude, seed.wrapping_add(3), false);
                let lifted = grid::lift(&base, grid).expect("horizontal grid");
                let mut out = lifted.clone();
                for (n, v) in out.data_mut().iter_mut().enumerate() {
                    *v *= (2.0 * PI * grid.coords(n)[2]).sin();
                }
                out
            } else {
                ScalarField::zeros(grid)
            };
            let u = VectorField::from_components(u1, u2, u3).expect("common grid");
            (rho1, u)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params(eps: f64) -> ScalingParams {
        ScalingParams::new(eps, 0.5, 2.0, 1.0).unwrap()
    }

    fn square(n: usize) -> Grid {
        Grid::new_2d(n, n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_q_gives_rest() {
        let g = square(16);
        let p = unit_params(0.1);
        let s = make_well_prepared(&WellPreparedSpec { q0: ScalarField::zeros(&g), params: p }, &g).unwrap();
        assert!(s.rho.data().iter().all(|&r| r == 1.0));
        assert_eq!(s.mom.max_abs(), 0.0);
    }

    #[test]
    fn cosine_well_prepared_example() {
        let g = square(16);
        let p = unit_params(0.1);
        let q0 = ScalarField::from_fn(&g, |x, _, _| x.cos());
        let s = make_well_prepared(&WellPreparedSpec { q0, params: p }, &g).unwrap();
        let rho = ScalarField::from_fn(&g, |x, _, _| 1.0 + 0.1 * x.cos());
        let v = VectorField::from_fn(&g, |x, _, _| [0.0, -x.sin(), 0.0]);
        assert!(s.rho.max_abs_diff(&rho) < 1e-15);
        assert!(s.velocity().unwrap().max_abs_diff(&v) < 1e-13);
        assert!(flow_balance_residual(&s, &p).unwrap() < 1e-13);
        assert!(grid::div(&s.velocity().unwrap()).max_abs() < 1e-13);
    }

    #[test]
    fn unlocalized_or_biased_q_is_rejected() {
        let g = square(16);
        let p = unit_params(0.1);
        let high = ScalarField::from_fn(&g, |x, _, _| (7.0 * x).cos());
        assert!(make_well_prepared(&WellPreparedSpec { q0: high, params: p }, &g).is_err());
        let biased = ScalarField::from_fn(&g, |x, _, _| 1.0 + x.cos());
        assert!(make_well_prepared(&WellPreparedSpec { q0: biased, params: p }, &g).is_err());
    }

    #[test]
    fn regularization_examples() {
        let g = square(32);
        let f = ScalarField::from_fn(&g, |x, _, _| x.cos() + (8.0 * x).cos());
        let r = regularize_delta(&f, 0.25).unwrap();
        assert!(r.max_abs_diff(&ScalarField::from_fn(&g, |x, _, _| x.cos())) < 1e-14);
        assert!(r.l2_norm() <= f.l2_norm());
        let tiny = regularize_delta(&f, 1e-3).unwrap();
        assert!(tiny.max_abs_diff(&f) < 1e-14);
        assert!(regularize_delta(&f, 0.0).is_err());
    }

    #[test]
    fn cosine_density_decomposition() {
        let g = square(16);
        let p = unit_params(0.1);
        let spec = IllPreparedSpec {
            rho1_0: ScalarField::from_fn(&g, |x, _, _| x.cos()),
            u0: VectorField::zeros(&g),
            delta: 0.1,
            params: p,
        };
        for conv in [EllipticConvention::BalanceConsistent, EllipticConvention::AsPrinted] {
            let d = decompose_ill_prepared(&spec, conv).unwrap();
            let half = ScalarField::from_fn(&g, |x, _, _| 0.5 * x.cos());
            assert!(d.q0_delta.max_abs_diff(&half) < 1e-14);
            assert!(d.s0_delta.max_abs_diff(&half) < 1e-14);
            assert!(d.reconstruction_error().unwrap() < 1e-14);
        }
    }

    #[test]
    fn balanced_data_has_no_acoustic_part() {
        let g = square(32);
        let p = unit_params(0.1);
        let q0 = two_mode_q(&g, 0.3);
        let v0 = target::velocity_from_q(&q0, &p);
        let spec = IllPreparedSpec { rho1_0: q0.clone(), u0: v0, delta: default_delta(&g), params: p };
        let d = decompose_ill_prepared(&spec, EllipticConvention::BalanceConsistent).unwrap();
        assert!(d.s0_delta.max_abs() < 1e-12);
        assert!(d.v_acoustic0_delta.max_abs() < 1e-12);
        assert!(d.q0_delta.max_abs_diff(&q0) < 1e-12);

        // taken verbatim, the curl term has the opposite sign and leaves a residue
        let d = decompose_ill_prepared(&spec, EllipticConvention::AsPrinted).unwrap();
        assert!(d.s0_delta.max_abs() > 1e-3);
    }

    #[test]
    fn zero_data_decomposes_to_zero() {
        let g = Grid::new(8, 8, 4, 2.0 * PI, 2.0 * PI).unwrap();
        let spec = IllPreparedSpec {
            rho1_0: ScalarField::zeros(&g),
            u0: VectorField::zeros(&g),
            delta: 0.5,
            params: unit_params(0.1),
        };
        let d = decompose_ill_prepared(&spec, EllipticConvention::default()).unwrap();
        assert_eq!(d.q0_delta.max_abs(), 0.0);
        assert_eq!(d.s0_delta.max_abs(), 0.0);
        assert_eq!(d.v_acoustic0_delta.max_abs(), 0.0);
    }

    #[test]
    fn ill_prepared_construction() {
        let g = square(16);
        let p = unit_params(0.1);
        let zero = IllPreparedSpec {
            rho1_0: ScalarField::zeros(&g),
            u0: VectorField::zeros(&g),
            delta: 0.5,
            params: p,
        };
        let s = make_ill_prepared(&zero).unwrap();
        assert!(s.rho.data().iter().all(|&r| r == 1.0));

        let (rho1, u0) = ill_prepared_fields(&g, 1.0, Profile::TwoMode, 0);
        let unit = rho1.scaled(1.0 / rho1.max_abs());
        let bad = IllPreparedSpec { rho1_0: unit.clone(), u0: u0.clone(), delta: 0.5, params: unit_params(1.0) };
        assert!(matches!(make_ill_prepared(&bad), Err(LabError::Domain(_))));

        let ok = IllPreparedSpec { rho1_0: rho1, u0, delta: 0.5, params: p };
        let st = make_ill_prepared(&ok).unwrap();
        assert!(flow_balance_residual(&st, &p).unwrap() > 1e-2);
    }

    #[test]
    fn asymmetric_data_is_rejected() {
        let g = Grid::new(8, 8, 4, 2.0 * PI, 2.0 * PI).unwrap();
        let spec = IllPreparedSpec {
            rho1_0: ScalarField::from_fn(&g, |_, _, z| (2.0 * PI * z).sin()),
            u0: VectorField::zeros(&g),
            delta: 0.5,
            params: unit_params(0.1),
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn generated_families_are_in_symmetry_class() {
        let g = Grid::new(16, 16, 4, 2.0 * PI, 2.0 * PI).unwrap();
        for profile in [Profile::TwoMode, Profile::Random] {
            let (rho1, u0) = ill_prepared_fields(&g, 0.1, profile, 7);
            let spec = IllPreparedSpec { rho1_0: rho1, u0, delta: 0.5, params: unit_params(0.1) };
            spec.validate().unwrap();
        }
        let q = random_smooth_field(&g.horizontal(), 0.05, 3, false);
        assert!((q.max_abs() - 0.05).abs() < 1e-15);
        assert!(q.mean().abs() < 1e-15);
        assert!(grid::alias_fraction(&q) < 1e-12);
    }
}
