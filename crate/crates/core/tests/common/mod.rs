//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use rossby_core::acoustic::AcousticState;
use rossby_core::grid::{self, ScalarField, VectorField};
use rossby_core::thermo::ScalingParams;

/// Composite 5-point Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

pub fn load_baselines() -> serde_json::Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/baselines.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[derive(Clone)]
struct Acu {
    s: ScalarField,
    v: VectorField,
}

/// Right side of the linear Rossby-acoustic system in physical space:
/// `eps s_t = -rho_bar div V`, `eps V_t = -(p'/rho_bar) grad s - b x V`, `b x V = (-V2, V1, 0)`.
fn acoustic_rhs(u: &Acu, p: &ScalingParams) -> Acu {
    let eps = p.epsilon();
    let c = p.sound_speed_sq() / p.rho_bar();
    let ds = grid::div(&u.v).scaled(-p.rho_bar() / eps);
    let g = grid::grad(&u.s);
    let mut dv = g.scaled(-c / eps);
    dv.axpy(1.0 / eps, &VectorField::from_components(
        ScalarField::from_vec(u.s.grid(), u.v.comp(1).to_vec()).unwrap(),
        ScalarField::from_vec(u.s.grid(), u.v.comp(0).iter().map(|x| -x).collect()).unwrap(),
        ScalarField::zeros(u.s.grid()),
    )
    .unwrap());
    Acu { s: ds, v: dv }
}

fn combine(u: &Acu, k: &Acu, h: f64) -> Acu {
    let mut s = u.s.clone();
    s.axpy(h, &k.s);
    let mut v = u.v.clone();
    v.axpy(h, &k.v);
    Acu { s, v }
}

/// Classical RK4 with fixed step `dt` (the last step is shortened to land on `t_end`).
pub fn rk4_acoustic(a0: &AcousticState, p: &ScalingParams, t_end: f64, dt: f64) -> AcousticState {
    let mut u = Acu {
        s: a0.s.clone(),
        v: a0.v.clone(),
    };
    let mut t = 0.0;
    while t < t_end - 1e-14 {
        let h = dt.min(t_end - t);
        let k1 = acoustic_rhs(&u, p);
        let k2 = acoustic_rhs(&combine(&u, &k1, 0.5 * h), p);
        let k3 = acoustic_rhs(&combine(&u, &k2, 0.5 * h), p);
        let k4 = acoustic_rhs(&combine(&u, &k3, h), p);
        let mut next = u.clone();
        for (k, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
            next = combine(&next, k, w * h / 6.0);
        }
        u = next;
        t += h;
    }
    AcousticState::new(a0.time + t_end, u.s, u.v).unwrap()
}
