//! Exact propagator for the linear Rossby-acoustic system
//!
//! ```text
//! eps d_t s + rho_bar div V = 0
//! eps d_t V + (p'(rho_bar)/rho_bar) grad s + b x V = 0
//! ```
//!
//! Per Fourier mode the generator `A(xi)` is skew-adjoint for the energy
//! weight `(p'/rho_bar^2)|s|^2 + |V|^2`. After the diagonal rescaling
//! `w = sqrt(p')/rho_bar` of the density slot, `i A` is Hermitian and its
//! eigendecomposition gives `exp(A t)` exactly.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::{self, Grid, ScalarField, VectorField};
use crate::thermo::ScalingParams;

#[derive(Clone, Debug)]
pub struct AcousticState {
    pub time: f64,
    pub s: ScalarField,
    pub v: VectorField,
}

impl AcousticState {
    pub fn new(time: f64, s: ScalarField, v: VectorField) -> Result<Self> {
        s.grid().check_same(v.grid(), "acoustic state")?;
        Ok(AcousticState { time, s, v })
    }

    pub fn zeros(grid: &Grid) -> Self {
        AcousticState {
            time: 0.0,
            s: ScalarField::zeros(grid),
            v: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.s.grid()
    }

    pub fn project_symmetry(&self) -> Self {
        AcousticState {
            time: self.time,
            s: grid::even_part_x3(&self.s),
            v: grid::project_symmetry_vector(&self.v),
        }
    }

    pub fn max_abs_diff(&self, other: &AcousticState) -> f64 {
        self.s.max_abs_diff(&other.s).max(self.v.max_abs_diff(&other.v))
    }
}

/// Generator `A(xi)` acting on `(s_hat, V1_hat, V2_hat, V3_hat)`.
pub fn acoustic_mode_matrix(xi: [f64; 3], params: &ScalingParams) -> Matrix4<Complex64> {
    let eps = params.epsilon();
    let rb = params.rho_bar();
    let c2 = params.sound_speed_sq();
    let i = Complex64::new(0.0, 1.0);
    let mut a = Matrix4::<Complex64>::zeros();
    for j in 0..3 {
        a[(0, j + 1)] = -i * rb * xi[j] / eps;
        a[(j + 1, 0)] = -i * (c2 / rb) * xi[j] / eps;
    }
    // -b x V = (V2, -V1, 0)
    a[(1, 2)] = Complex64::new(1.0 / eps, 0.0);
    a[(2, 1)] = Complex64::new(-1.0 / eps, 0.0);
    a
}

/// Real eigenfrequencies `lambda` with `A = -i lambda` on the eigenvectors, ascending.
pub fn mode_frequencies(xi: [f64; 3], params: &ScalingParams) -> [f64; 4] {
    let eig = hermitian_eigen(xi, params);
    let mut f = [
        eig.eigenvalues[0],
        eig.eigenvalues[1],
        eig.eigenvalues[2],
        eig.eigenvalues[3],
    ];
    f.sort_by(|a, b| a.partial_cmp(b).unwrap());
    f
}

fn energy_weight(params: &ScalingParams) -> f64 {
    params.sound_speed_sq().sqrt() / params.rho_bar()
}

fn hermitian_eigen(xi: [f64; 3], params: &ScalingParams) -> SymmetricEigen<Complex64, nalgebra::U4> {
    let w = energy_weight(params);
    let mut b = acoustic_mode_matrix(xi, params);
    for j in 1..4 {
        b[(0, j)] *= w;
        b[(j, 0)] /= w;
    }
    let h = b * Complex64::new(0.0, 1.0);
    // symmetrize away rounding before the Hermitian solver
    let h = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h)
}

struct ModeEigen {
    vectors: Matrix4<Complex64>,
    freqs: Vector4<f64>,
}

/// Precomputed per-mode eigendecompositions for one grid and parameter set.
pub struct AcousticPropagator {
    grid: Grid,
    params: ScalingParams,
    modes: Vec<ModeEigen>,
}

impl AcousticPropagator {
    pub fn new(grid: &Grid, params: &ScalingParams) -> Self {
        let modes = grid
            .modes()
            .iter()
            .map(|m| {
                let eig = hermitian_eigen(m.k, params);
                ModeEigen {
                    vectors: eig.eigenvectors,
                    freqs: eig.eigenvalues,
                }
            })
            .collect();
        AcousticPropagator {
            grid: grid.clone(),
            params: *params,
            modes,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn to_spectral(&self, state: &AcousticState) -> [Vec<Complex64>; 4] {
        let w = energy_weight(&self.params);
        let mut s = self.grid.forward(state.s.data());
        s.iter_mut().for_each(|c| *c *= w);
        [
            s,
            self.grid.forward(state.v.comp(0)),
            self.grid.forward(state.v.comp(1)),
            self.grid.forward(state.v.comp(2)),
        ]
    }

    fn from_spectral(&self, time: f64, mut z: [Vec<Complex64>; 4]) -> AcousticState {
        let w = energy_weight(&self.params);
        z[0].iter_mut().for_each(|c| *c /= w);
        let [s, v1, v2, v3] = z;
        let s = ScalarField::from_vec(&self.grid, self.grid.inverse(s)).unwrap();
        let mut v = VectorField::zeros(&self.grid);
        v.comp_mut(0).copy_from_slice(&self.grid.inverse(v1));
        v.comp_mut(1).copy_from_slice(&self.grid.inverse(v2));
        v.comp_mut(2).copy_from_slice(&self.grid.inverse(v3));
        AcousticState { time, s, v }
    }

    fn apply(&self, state: &AcousticState, time: f64, per_mode: impl Fn(&ModeEigen) -> Matrix4<Complex64>) -> Result<AcousticState> {
        self.grid.check_same(state.grid(), "acoustic propagator")?;
        let mut z = self.to_spectral(state);
        for (idx, me) in self.modes.iter().enumerate() {
            let x = Vector4::new(z[0][idx], z[1][idx], z[2][idx], z[3][idx]);
            let y = per_mode(me) * x;
            for c in 0..4 {
                z[c][idx] = y[c];
            }
        }
        Ok(self.from_spectral(time, z))
    }

    /// Advance `state` by `t` with the exact exponential of the generator.
    pub fn propagate(&self, state: &AcousticState, t: f64) -> Result<AcousticState> {
        self.apply(state, state.time + t, |me| {
            let phases = Matrix4::from_diagonal(&me.freqs.map(|l| Complex64::new(0.0, -l * t).exp()));
            me.vectors * phases * me.vectors.adjoint()
        })
    }

    /// Split into the zero-frequency (geostrophic) part and the wave part.
    pub fn split_kernel(&self, state: &AcousticState) -> Result<(AcousticState, AcousticState)> {
        let scale = 1.0 / self.params.epsilon();
        let kernel = self.apply(state, state.time, |me| {
            let mask = me
                .freqs
                .map(|l| if l.abs() <= 1e-9 * scale { Complex64::new(1.0, 0.0) } else { Complex64::default() });
            me.vectors * Matrix4::from_diagonal(&mask) * me.vectors.adjoint()
        })?;
        let mut waves = state.clone();
        waves.s.axpy(-1.0, &kernel.s);
        waves.v.axpy(-1.0, &kernel.v);
        Ok((kernel, waves))
    }
}

pub fn acoustic_propagate(state0: &AcousticState, t: f64, params: &ScalingParams) -> Result<AcousticState> {
    AcousticPropagator::new(state0.grid(), params).propagate(state0, t)
}

/// `int (p'(rho_bar)/rho_bar^2) s^2 + |V|^2 dx`.
pub fn acoustic_energy(state: &AcousticState, params: &ScalingParams) -> f64 {
    let w2 = params.sound_speed_sq() / params.rho_bar().powi(2);
    let v2 = state.v.norm_sq();
    let dens = state
        .s
        .zip_map(&v2, |s, v| w2 * s * s + v)
        .expect("acoustic state shares one grid");
    dens.integral()
}

/// Axis-aligned horizontal window `[x0, x1] x [y0, y1]` (all `x3`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Subdomain {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Subdomain {
    /// Square of side `side` centred in the box.
    pub fn centered(grid: &Grid, side: f64) -> Self {
        let (cx, cy) = (0.5 * grid.lx(), 0.5 * grid.ly());
        Subdomain {
            x: (cx - 0.5 * side, cx + 0.5 * side),
            y: (cy - 0.5 * side, cy + 0.5 * side),
        }
    }

    fn nodes(&self, grid: &Grid) -> Result<Vec<usize>> {
        let inside = |(a, b): (f64, f64), len: f64| a >= 0.0 && b <= len && a < b;
        if !inside(self.x, grid.lx()) || !inside(self.y, grid.ly()) {
            return Err(LabError::domain(format!(
                "subdomain {self:?} outside box {} x {}",
                grid.lx(),
                grid.ly()
            )));
        }
        let nodes: Vec<usize> = (0..grid.len())
            .filter(|&n| {
                let [x, y, _] = grid.coords(n);
                x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
            })
            .collect();
        if nodes.is_empty() {
            return Err(LabError::domain("subdomain contains no grid nodes"));
        }
        Ok(nodes)
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DecayRow {
    pub t: f64,
    pub local_sup_s: f64,
    pub local_sup_v: f64,
    pub global_energy: f64,
}

/// Sup-norms of `s` and `|V|` restricted to `sub`, per state.
pub fn local_decay_profile(
    trajectory: &[AcousticState],
    sub: &Subdomain,
    params: &ScalingParams,
) -> Result<Vec<DecayRow>> {
    let Some(first) = trajectory.first() else {
        return Ok(Vec::new());
    };
    let nodes = sub.nodes(first.grid())?;
    trajectory
        .iter()
        .map(|st| {
            first.grid().check_same(st.grid(), "decay profile")?;
            let v2 = st.v.norm_sq();
            Ok(DecayRow {
                t: st.time,
                local_sup_s: nodes.iter().map(|&n| st.s.data()[n].abs()).fold(0.0, f64::max),
                local_sup_v: nodes.iter().map(|&n| v2.data()[n].sqrt()).fold(0.0, f64::max),
                global_energy: acoustic_energy(st, params),
            })
        })
        .collect()
}
