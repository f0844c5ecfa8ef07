use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rossby_bench::{params, well_state};
use rossby_core::acoustic::AcousticState;
use rossby_core::euler;
use rossby_core::relative_energy::{self, TestState};
use rossby_core::{AcousticPropagator, CutoffChi};

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_roundtrip");
    for n in [64, 128, 256] {
        let (state, _) = well_state(n, 0.1);
        let g = state.grid().clone();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| g.inverse(g.forward(black_box(state.rho.data()))));
        });
    }
    group.finish();
}

fn euler_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("euler_rhs");
    for n in [64, 128] {
        let (state, p) = well_state(n, 0.1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| euler::euler_rhs(black_box(&state), &p).unwrap());
        });
    }
    group.finish();
}

fn rk4_step(c: &mut Criterion) {
    let (state, p) = well_state(64, 0.1);
    let dt = euler::stable_dt(&state, &p, 0.5).unwrap();
    c.bench_function("euler_rk4_step_64", |b| {
        b.iter(|| euler::step_rk4(black_box(&state), dt, &p).unwrap());
    });
}

fn acoustic(c: &mut Criterion) {
    let (state, _) = well_state(128, 0.1);
    let p = params(0.1);
    let g = state.grid().clone();
    c.bench_function("acoustic_propagator_setup_128", |b| {
        b.iter(|| AcousticPropagator::new(black_box(&g), &p));
    });
    let prop = AcousticPropagator::new(&g, &p);
    let a0 = AcousticState::new(0.0, state.rho.map(|r| r - 1.0), state.velocity().unwrap()).unwrap();
    c.bench_function("acoustic_propagate_128", |b| {
        b.iter(|| prop.propagate(black_box(&a0), 0.7).unwrap());
    });
}

fn rel_energy(c: &mut Criterion) {
    let (state, p) = well_state(128, 0.1);
    let test = TestState::from_flow(&state).unwrap();
    let chi = CutoffChi::new(p.rho_bar());
    c.bench_function("coercivity_components_128", |b| {
        b.iter(|| relative_energy::coercivity_components(black_box(&state), &test, &p, &chi).unwrap());
    });
}

criterion_group!(benches, fft, euler_rhs, rk4_step, acoustic, rel_energy);
criterion_main!(benches);
