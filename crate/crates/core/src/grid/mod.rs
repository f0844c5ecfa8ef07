//! Periodic grid on `[0, lx) x [0, ly) x [0, 1)` with FFT-based spectral
//! operators.
//!
//! Samples are stored row-major with shape `[nx][ny][nz]`, i.e. the vertical
//! index varies fastest. `nz = 1` represents fields independent of `x3`; the
//! 2D fields of the limit system live on such a grid.

mod ops;
mod snapshot;

pub use ops::*;
pub use snapshot::{read_snapshot, write_snapshot, SnapshotMeta};

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};

/// Vertical period of the box.
pub const LZ: f64 = 1.0;

struct Axis {
    n: usize,
    len: f64,
    /// Wavenumber used for first derivatives (Nyquist entry zeroed).
    k: Vec<f64>,
    /// Squared wavenumber for even-order symbols (Nyquist kept).
    k2: Vec<f64>,
    /// Signed integer mode index.
    m: Vec<i64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Axis {
    fn new(n: usize, len: f64, planner: &mut FftPlanner<f64>) -> Self {
        let base = 2.0 * PI / len;
        let half = (n / 2) as i64;
        let m: Vec<i64> = (0..n as i64)
            .map(|i| if i < half || n == 1 { i } else { i - n as i64 })
            .collect();
        let k = m
            .iter()
            .map(|&mi| {
                if n > 1 && mi == -half {
                    0.0
                } else {
                    base * mi as f64
                }
            })
            .collect();
        let k2 = m.iter().map(|&mi| (base * mi as f64).powi(2)).collect();
        Axis {
            n,
            len,
            k,
            k2,
            m,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    fn cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }
}

struct GridInner {
    axes: [Axis; 3],
}

/// Immutable periodic grid; cheap to clone and shareable across threads.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (nx, ny, nz) = self.shape();
        f.debug_struct("Grid")
            .field("nx", &nx)
            .field("ny", &ny)
            .field("nz", &nz)
            .field("lx", &self.lx())
            .field("ly", &self.ly())
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.shape() == other.shape() && self.lx() == other.lx() && self.ly() == other.ly())
    }
}

/// Wavenumber data for one Fourier mode.
#[derive(Clone, Copy, Debug)]
pub struct Mode {
    /// Flat index into the spectrum.
    pub idx: usize,
    /// Derivative wavenumbers (Nyquist zeroed).
    pub k: [f64; 3],
    /// Squared wavenumbers with the Nyquist entry kept.
    pub k2: [f64; 3],
    /// Signed mode indices.
    pub m: [i64; 3],
}

impl Mode {
    pub fn k2_h(&self) -> f64 {
        self.k2[0] + self.k2[1]
    }

    pub fn k2_total(&self) -> f64 {
        self.k2[0] + self.k2[1] + self.k2[2]
    }
}

fn check_pow2(n: usize, min: usize, name: &str) -> Result<()> {
    if n < min || !n.is_power_of_two() {
        return Err(LabError::domain(format!(
            "{name} = {n} must be a power of two >= {min}"
        )));
    }
    Ok(())
}

impl Grid {
    pub fn new(nx: usize, ny: usize, nz: usize, lx: f64, ly: f64) -> Result<Self> {
        check_pow2(nx, 4, "nx")?;
        check_pow2(ny, 4, "ny")?;
        check_pow2(nz, 1, "nz")?;
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(LabError::domain("box periods must be positive"));
        }
        let mut planner = FftPlanner::new();
        let axes = [
            Axis::new(nx, lx, &mut planner),
            Axis::new(ny, ly, &mut planner),
            Axis::new(nz, LZ, &mut planner),
        ];
        Ok(Grid(Arc::new(GridInner { axes })))
    }

    /// 2D grid with the same horizontal layout (`nz = 1`).
    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(nx, ny, 1, lx, ly)
    }

    pub fn horizontal(&self) -> Grid {
        if self.nz() == 1 {
            return self.clone();
        }
        let (nx, ny, _) = self.shape();
        Grid::new(nx, ny, 1, self.lx(), self.ly()).expect("validated dimensions")
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.nx(), self.ny(), self.nz())
    }

    pub fn nx(&self) -> usize {
        self.0.axes[0].n
    }

    pub fn ny(&self) -> usize {
        self.0.axes[1].n
    }

    pub fn nz(&self) -> usize {
        self.0.axes[2].n
    }

    pub fn lx(&self) -> f64 {
        self.0.axes[0].len
    }

    pub fn ly(&self) -> f64 {
        self.0.axes[1].len
    }

    pub fn lz(&self) -> f64 {
        LZ
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny() * self.nz()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.lx() / self.nx() as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly() / self.ny() as f64
    }

    pub fn dz(&self) -> f64 {
        LZ / self.nz() as f64
    }

    /// Smallest spacing over the resolved axes (the vertical one only if `nz > 1`).
    pub fn min_spacing(&self) -> f64 {
        let h = self.dx().min(self.dy());
        if self.nz() > 1 {
            h.min(self.dz())
        } else {
            h
        }
    }

    pub fn volume(&self) -> f64 {
        self.lx() * self.ly() * LZ
    }

    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny() + j) * self.nz() + k
    }

    /// Node coordinates of flat index `n`.
    pub fn coords(&self, n: usize) -> [f64; 3] {
        let nz = self.nz();
        let ny = self.ny();
        let k = n % nz;
        let j = (n / nz) % ny;
        let i = n / (nz * ny);
        [i as f64 * self.dx(), j as f64 * self.dy(), k as f64 * self.dz()]
    }

    /// Integer indices `(i, j, k)` of flat index `n`.
    pub fn unflatten(&self, n: usize) -> (usize, usize, usize) {
        let nz = self.nz();
        let ny = self.ny();
        (n / (nz * ny), (n / nz) % ny, n % nz)
    }

    /// Highest kept signed mode index per axis under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> [i64; 3] {
        [
            self.0.axes[0].cutoff(),
            self.0.axes[1].cutoff(),
            self.0.axes[2].cutoff(),
        ]
    }

    /// Largest resolved horizontal wavenumber after dealiasing.
    pub fn resolved_kmax_h(&self) -> f64 {
        let [cx, cy, _] = self.dealias_cutoff();
        (2.0 * PI * cx as f64 / self.lx()).min(2.0 * PI * cy as f64 / self.ly())
    }

    pub fn keeps_mode(&self, m: [i64; 3]) -> bool {
        let c = self.dealias_cutoff();
        m[0].abs() <= c[0] && m[1].abs() <= c[1] && m[2].abs() <= c[2]
    }

    /// Visit every Fourier mode in storage order.
    pub fn for_each_mode(&self, mut f: impl FnMut(Mode)) {
        let [ax, ay, az] = &self.0.axes;
        let mut idx = 0;
        for i in 0..ax.n {
            for j in 0..ay.n {
                for k in 0..az.n {
                    f(Mode {
                        idx,
                        k: [ax.k[i], ay.k[j], az.k[k]],
                        k2: [ax.k2[i], ay.k2[j], az.k2[k]],
                        m: [ax.m[i], ay.m[j], az.m[k]],
                    });
                    idx += 1;
                }
            }
        }
    }

    pub fn modes(&self) -> Vec<Mode> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each_mode(|m| out.push(m));
        out
    }

    /// Unnormalized forward transform of real samples.
    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(data.len(), self.len());
        let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut buf, false);
        buf
    }

    /// Inverse transform (normalized by `1/N`), keeping the real part.
    pub fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        debug_assert_eq!(spec.len(), self.len());
        self.transform(&mut spec, true);
        let norm = 1.0 / self.len() as f64;
        spec.into_iter().map(|c| c.re * norm).collect()
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let (nx, ny, nz) = self.shape();
        let plan = |a: &Axis| if inverse { a.inv.clone() } else { a.fwd.clone() };

        if nz > 1 {
            let fft = plan(&self.0.axes[2]);
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(buf, &mut scratch);
        }

        let fft = plan(&self.0.axes[1]);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut line = vec![Complex64::default(); ny];
        for i in 0..nx {
            for k in 0..nz {
                let base = i * ny * nz + k;
                for (j, c) in line.iter_mut().enumerate() {
                    *c = buf[base + j * nz];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, c) in line.iter().enumerate() {
                    buf[base + j * nz] = *c;
                }
            }
        }

        let fft = plan(&self.0.axes[0]);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut line = vec![Complex64::default(); nx];
        let stride = ny * nz;
        for base in 0..stride {
            for (i, c) in line.iter_mut().enumerate() {
                *c = buf[base + i * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (i, c) in line.iter().enumerate() {
                buf[base + i * stride] = *c;
            }
        }
    }

    pub(crate) fn check_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(LabError::dimension(format!(
                "{what}: grid {:?} vs {:?}",
                self, other
            )))
        }
    }
}

/// Real scalar samples on a [`Grid`].
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            data: vec![value; grid.len()],
        }
    }

    pub fn from_vec(grid: &Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(LabError::dimension(format!(
                "{} samples for a grid of {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            data,
        })
    }

    /// Sample `f(x1, x2, x3)` at the grid nodes.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let data = (0..grid.len())
            .map(|n| {
                let [x, y, z] = grid.coords(n);
                f(x, y, z)
            })
            .collect();
        ScalarField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid, "zip_map")?;
        Ok(ScalarField {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|x| alpha * x)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Integral over the box by the spectral mean rule.
    pub fn integral(&self) -> f64 {
        self.mean() * self.grid.volume()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|x| x * x).sum::<f64>() / self.data.len() as f64
            * self.grid.volume())
        .sqrt()
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Three real components on a common [`Grid`].
#[derive(Clone, Debug)]
pub struct VectorField {
    grid: Grid,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            grid: grid.clone(),
            comps: [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]],
        }
    }

    pub fn from_components(c0: ScalarField, c1: ScalarField, c2: ScalarField) -> Result<Self> {
        c0.grid.check_same(&c1.grid, "vector components")?;
        c0.grid.check_same(&c2.grid, "vector components")?;
        Ok(VectorField {
            grid: c0.grid.clone(),
            comps: [c0.data, c1.data, c2.data],
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let mut v = Self::zeros(grid);
        for n in 0..grid.len() {
            let [x, y, z] = grid.coords(n);
            let val = f(x, y, z);
            for c in 0..3 {
                v.comps[c][n] = val[c];
            }
        }
        v
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn component(&self, c: usize) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            data: self.comps[c].clone(),
        }
    }

    pub fn set_component(&mut self, c: usize, f: ScalarField) -> Result<()> {
        self.grid.check_same(&f.grid, "set_component")?;
        self.comps[c] = f.data;
        Ok(())
    }

    pub fn axpy(&mut self, alpha: f64, other: &VectorField) {
        debug_assert_eq!(self.grid, other.grid);
        for c in 0..3 {
            for (a, b) in self.comps[c].iter_mut().zip(&other.comps[c]) {
                *a += alpha * b;
            }
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for x in c.iter_mut() {
                *x *= alpha;
            }
        }
        out
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> Result<Self> {
        self.grid.check_same(&s.grid, "mul_scalar")?;
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for (x, w) in c.iter_mut().zip(&s.data) {
                *x *= w;
            }
        }
        Ok(out)
    }

    /// Pointwise division by a scalar field.
    pub fn div_scalar(&self, s: &ScalarField) -> Result<Self> {
        self.grid.check_same(&s.grid, "div_scalar")?;
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for (x, w) in c.iter_mut().zip(&s.data) {
                *x /= w;
            }
        }
        Ok(out)
    }

    /// Pointwise squared magnitude.
    pub fn norm_sq(&self) -> ScalarField {
        let data = (0..self.grid.len())
            .map(|n| self.comps.iter().map(|c| c[n] * c[n]).sum())
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_norm(&self) -> f64 {
        self.norm_sq().max().max(0.0).sqrt()
    }

    pub fn max_abs_diff(&self, other: &VectorField) -> f64 {
        (0..3)
            .flat_map(|c| self.comps[c].iter().zip(&other.comps[c]))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}
