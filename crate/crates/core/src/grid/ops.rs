use num_complex::Complex64;

use super::{Grid, Mode, ScalarField, VectorField};
use crate::error::{LabError, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn spectrum(f: &ScalarField) -> Vec<Complex64> {
    f.grid().forward(f.data())
}

fn from_spectrum(grid: &Grid, spec: Vec<Complex64>) -> ScalarField {
    ScalarField::from_vec(grid, grid.inverse(spec)).expect("spectrum has grid length")
}

/// Multiply the spectrum of `f` by a per-mode symbol.
pub fn apply_symbol(f: &ScalarField, symbol: impl Fn(&Mode) -> Complex64) -> ScalarField {
    let grid = f.grid();
    let mut spec = spectrum(f);
    grid.for_each_mode(|m| spec[m.idx] *= symbol(&m));
    from_spectrum(grid, spec)
}

/// Partial derivative along axis `axis` (0, 1 or 2).
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    apply_symbol(f, |m| I * m.k[axis])
}

pub fn grad(f: &ScalarField) -> VectorField {
    let grid = f.grid();
    let spec = spectrum(f);
    let mut out = VectorField::zeros(grid);
    for axis in 0..3 {
        if axis == 2 && grid.nz() == 1 {
            continue;
        }
        let mut s = spec.clone();
        grid.for_each_mode(|m| s[m.idx] *= I * m.k[axis]);
        out.comp_mut(axis).copy_from_slice(&grid.inverse(s));
    }
    out
}

pub fn div(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let mut acc = vec![Complex64::default(); grid.len()];
    for axis in 0..3 {
        if axis == 2 && grid.nz() == 1 {
            continue;
        }
        let s = grid.forward(v.comp(axis));
        grid.for_each_mode(|m| acc[m.idx] += I * m.k[axis] * s[m.idx]);
    }
    from_spectrum(grid, acc)
}

/// Horizontal Laplacian `d11 + d22`.
pub fn laplacian_h(f: &ScalarField) -> ScalarField {
    apply_symbol(f, |m| Complex64::new(-m.k2_h(), 0.0))
}

/// Horizontal curl `d1 v2 - d2 v1`.
pub fn curl_h(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let s1 = grid.forward(v.comp(0));
    let s2 = grid.forward(v.comp(1));
    let mut acc = vec![Complex64::default(); grid.len()];
    grid.for_each_mode(|m| acc[m.idx] = I * (m.k[0] * s2[m.idx] - m.k[1] * s1[m.idx]));
    from_spectrum(grid, acc)
}

/// `(-d2 f, d1 f, 0)`.
pub fn perp_grad_h(f: &ScalarField) -> VectorField {
    let g = grad(f);
    let mut out = VectorField::zeros(f.grid());
    out.comp_mut(0)
        .iter_mut()
        .zip(g.comp(1))
        .for_each(|(o, d2)| *o = -d2);
    out.comp_mut(1).copy_from_slice(g.comp(0));
    out
}

/// Solution of `(-lap_h + alpha) q = f`.
#[derive(Clone, Debug)]
pub struct HelmholtzSolution {
    pub solution: ScalarField,
    /// Largest magnitude of the horizontal-mean part removed from `f` (only for `alpha = 0`).
    pub projected_mean: f64,
}

pub fn solve_helmholtz_h(f: &ScalarField, alpha: f64) -> Result<HelmholtzSolution> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(LabError::domain(format!("helmholtz shift {alpha} must be >= 0")));
    }
    let grid = f.grid();
    let mut spec = spectrum(f);
    let norm = 1.0 / grid.len() as f64;
    let mut projected: f64 = 0.0;
    grid.for_each_mode(|m| {
        let denom = m.k2_h() + alpha;
        if denom == 0.0 {
            projected = projected.max(spec[m.idx].norm() * norm);
            spec[m.idx] = Complex64::default();
        } else {
            spec[m.idx] /= denom;
        }
    });
    Ok(HelmholtzSolution {
        solution: from_spectrum(grid, spec),
        projected_mean: projected,
    })
}

/// Keep only the modes for which `keep` returns true.
pub fn filter_modes(f: &ScalarField, keep: impl Fn(&Mode) -> bool) -> ScalarField {
    apply_symbol(f, |m| {
        if keep(m) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    })
}

/// Zero every mode above two thirds of the Nyquist index on any axis.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    filter_modes(f, |m| grid.keeps_mode(m.m))
}

pub fn dealias_vector(v: &VectorField) -> VectorField {
    let mut out = v.clone();
    for c in 0..3 {
        let d = dealias(&v.component(c));
        out.comp_mut(c).copy_from_slice(d.data());
    }
    out
}

/// Largest amplitude (relative to the largest one) carried by modes the 2/3 rule would remove.
pub fn alias_fraction(f: &ScalarField) -> f64 {
    let grid = f.grid();
    let spec = spectrum(f);
    let mut kept: f64 = 0.0;
    let mut dropped: f64 = 0.0;
    grid.for_each_mode(|m| {
        let a = spec[m.idx].norm();
        if grid.keeps_mode(m.m) {
            kept = kept.max(a);
        } else {
            dropped = dropped.max(a);
        }
    });
    if kept == 0.0 && dropped == 0.0 {
        0.0
    } else {
        dropped / kept.max(dropped)
    }
}

/// Mean over `x3`, returned on the horizontal (`nz = 1`) grid.
pub fn vertical_average(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    let nz = grid.nz();
    let h = grid.horizontal();
    let data = f
        .data()
        .chunks_exact(nz)
        .map(|col| col.iter().sum::<f64>() / nz as f64)
        .collect();
    ScalarField::from_vec(&h, data).expect("column count matches horizontal grid")
}

/// Extend a horizontal field constantly in `x3` onto `grid`.
pub fn lift(f: &ScalarField, grid: &Grid) -> Result<ScalarField> {
    let h = f.grid();
    if h.nz() != 1 || h.nx() != grid.nx() || h.ny() != grid.ny() || h.lx() != grid.lx() || h.ly() != grid.ly()
    {
        return Err(LabError::dimension(format!(
            "cannot lift {h:?} onto {grid:?}"
        )));
    }
    let nz = grid.nz();
    let data = f
        .data()
        .iter()
        .flat_map(|&x| std::iter::repeat_n(x, nz))
        .collect();
    ScalarField::from_vec(grid, data)
}

pub fn lift_vector(v: &VectorField, grid: &Grid) -> Result<VectorField> {
    VectorField::from_components(
        lift(&v.component(0), grid)?,
        lift(&v.component(1), grid)?,
        lift(&v.component(2), grid)?,
    )
}

fn parity_part(f: &ScalarField, sign: f64) -> ScalarField {
    let grid = f.grid();
    let nz = grid.nz();
    let src = f.data();
    let mut out = f.clone();
    for (col, dst) in src.chunks_exact(nz).zip(out.data_mut().chunks_exact_mut(nz)) {
        for k in 0..nz {
            let mirror = (nz - k) % nz;
            dst[k] = 0.5 * (col[k] + sign * col[mirror]);
        }
    }
    out
}

/// Even part in `x3`: `(f(x3) + f(-x3)) / 2`.
pub fn even_part_x3(f: &ScalarField) -> ScalarField {
    parity_part(f, 1.0)
}

/// Odd part in `x3`: `(f(x3) - f(-x3)) / 2`.
pub fn odd_part_x3(f: &ScalarField) -> ScalarField {
    parity_part(f, -1.0)
}

/// Project a velocity-like field onto the slip symmetry class:
/// horizontal components even in `x3`, vertical component odd.
pub fn project_symmetry_vector(v: &VectorField) -> VectorField {
    let mut out = v.clone();
    for c in 0..3 {
        let p = if c < 2 {
            even_part_x3(&v.component(c))
        } else {
            odd_part_x3(&v.component(c))
        };
        out.comp_mut(c).copy_from_slice(p.data());
    }
    out
}

/// Pointwise dot product.
pub fn dot(a: &VectorField, b: &VectorField) -> Result<ScalarField> {
    a.grid().check_same(b.grid(), "dot")?;
    let data = (0..a.grid().len())
        .map(|n| (0..3).map(|c| a.comp(c)[n] * b.comp(c)[n]).sum())
        .collect();
    ScalarField::from_vec(a.grid(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square(n: usize) -> Grid {
        Grid::new_2d(n, n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn grad_of_constant_vanishes() {
        let g = square(16);
        let f = ScalarField::constant(&g, 3.5);
        assert!(grad(&f).max_abs() < 1e-14);
    }

    #[test]
    fn curl_of_perp_grad_is_laplacian() {
        let g = square(32);
        let f = ScalarField::from_fn(&g, |x, y, _| x.cos() + (2.0 * y).sin());
        let expected = ScalarField::from_fn(&g, |x, y, _| -x.cos() - 4.0 * (2.0 * y).sin());
        let got = curl_h(&perp_grad_h(&f));
        assert!(got.max_abs_diff(&expected) < 1e-12);
        assert!(laplacian_h(&f).max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn div_of_perp_grad_vanishes() {
        let g = square(32);
        let f = ScalarField::from_fn(&g, |x, y, _| (x + 2.0 * y).sin() * (3.0 * x).cos());
        assert!(div(&perp_grad_h(&f)).max_abs() < 1e-12);
    }

    #[test]
    fn helmholtz_examples() {
        let g = square(16);
        let f = ScalarField::from_fn(&g, |x, _, _| x.cos());
        let q = solve_helmholtz_h(&f, 1.0).unwrap().solution;
        assert!(q.max_abs_diff(&f.scaled(0.5)) < 1e-14);
        let q0 = solve_helmholtz_h(&f, 0.0).unwrap();
        assert!(q0.solution.max_abs_diff(&f) < 1e-14);
        assert!(q0.projected_mean < 1e-15);
        let z = solve_helmholtz_h(&ScalarField::zeros(&g), 0.0).unwrap();
        assert_eq!(z.solution.max_abs(), 0.0);
        assert!(solve_helmholtz_h(&f, -1.0).is_err());
    }

    #[test]
    fn helmholtz_zero_shift_records_mean() {
        let g = square(8);
        let f = ScalarField::from_fn(&g, |x, _, _| 2.0 + x.sin());
        let s = solve_helmholtz_h(&f, 0.0).unwrap();
        assert!((s.projected_mean - 2.0).abs() < 1e-14);
        assert!(s.solution.mean().abs() < 1e-15);
    }

    #[test]
    fn dealias_keeps_low_mode_and_kills_high_mode() {
        let g = square(32);
        let low = ScalarField::from_fn(&g, |x, y, _| (3.0 * x).cos() * y.sin());
        assert!(dealias(&low).max_abs_diff(&low) < 1e-14);
        let high = ScalarField::from_fn(&g, |x, _, _| (12.0 * x).cos());
        assert!(dealias(&high).max_abs() < 1e-14);
        assert!(alias_fraction(&high) > 0.99);
        assert!(alias_fraction(&low) < 1e-14);
    }

    #[test]
    fn vertical_average_and_lift() {
        let g3 = Grid::new(8, 8, 4, 2.0 * PI, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g3, |x, _, z| x.sin() + (2.0 * PI * z).cos());
        let avg = vertical_average(&f);
        let expected = ScalarField::from_fn(&g3.horizontal(), |x, _, _| x.sin());
        assert!(avg.max_abs_diff(&expected) < 1e-14);
        let flat = lift(&expected, &g3).unwrap();
        assert!(vertical_average(&flat).max_abs_diff(&expected) < 1e-15);
        assert!(lift(&f, &g3).is_err());
    }

    #[test]
    fn x3_independent_average_is_identity() {
        let g = square(8);
        let f = ScalarField::from_fn(&g, |x, y, _| x.sin() * y.cos());
        assert_eq!(vertical_average(&f).data(), f.data());
    }

    #[test]
    fn odd_projection_of_even_function_is_zero() {
        let g3 = Grid::new(8, 8, 8, 2.0 * PI, 2.0 * PI).unwrap();
        let v3 = ScalarField::from_fn(&g3, |_, _, z| (2.0 * PI * z).cos());
        assert!(odd_part_x3(&v3).max_abs() < 1e-15);
        let s = ScalarField::from_fn(&g3, |_, _, z| (2.0 * PI * z).sin());
        assert!(even_part_x3(&s).max_abs() < 1e-15);
        assert!(odd_part_x3(&s).max_abs_diff(&s) < 1e-15);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = ScalarField::zeros(&square(8));
        let b = ScalarField::zeros(&square(16));
        assert!(matches!(
            a.zip_map(&b, |x, y| x + y),
            Err(LabError::Dimension(_))
        ));
    }
}
