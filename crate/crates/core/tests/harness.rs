mod common;

use std::f64::consts::PI;
use std::fs;

use rossby_core::grid::{self, ScalarField};
use rossby_core::harness::{self, emit_plots, Execution, Family, InitialData, RunConfig};
use rossby_core::initdata;
use rossby_core::target;

fn small(family: Family) -> RunConfig {
    RunConfig {
        nx: 32,
        ny: 32,
        family,
        epsilons: vec![0.4, 0.2, 0.1],
        t_end: 0.2,
        sample_dt: 0.05,
        ..RunConfig::default()
    }
}

#[test]
fn zero_data_gives_identically_zero_energy() {
    let cfg = RunConfig {
        amplitude: 0.0,
        epsilons: vec![1.0],
        ..small(Family::Well)
    };
    let run = harness::run_single(&cfg, 1.0).unwrap();
    assert!(run.rows.len() > 2);
    assert!(run.rows.iter().all(|r| r.rel_energy == 0.0));
}

#[test]
fn zero_data_sweep_is_exact_zero() {
    let cfg = RunConfig {
        amplitude: 0.0,
        ..small(Family::Well)
    };
    let out = harness::run_sweep(&cfg).unwrap();
    assert!(out.summary.exact_zero);
    assert!(out.summary.fit.is_none());
    assert!(out.summary.acceptance_failures().is_empty());
}

#[test]
fn balanced_ill_data_matches_well_run() {
    // Ill-prepared data built from a geostrophic pair carries no acoustic part.
    let cfg = small(Family::Well);
    let grid = cfg.grid().unwrap();
    let params = cfg.params(0.2).unwrap();
    let q0 = initdata::two_mode_q(&grid.horizontal(), cfg.amplitude);
    let rho1 = grid::lift(&q0, &grid).unwrap();
    let u0 = grid::lift_vector(&target::velocity_from_q(&q0, &params), &grid).unwrap();

    let well = harness::run_with_data(&cfg, 0.2, &InitialData::Well { q0 }).unwrap();
    let ill_cfg = RunConfig {
        family: Family::Ill,
        ..cfg.clone()
    };
    let ill = harness::run_with_data(&ill_cfg, 0.2, &InitialData::Ill { rho1, u0 }).unwrap();
    assert_eq!(well.rows.len(), ill.rows.len());
    for (a, b) in well.rows.iter().zip(&ill.rows) {
        assert!((a.rel_energy - b.rel_energy).abs() <= 1e-10, "{} vs {}", a.rel_energy, b.rel_energy);
        assert!((a.rel_energy_uncorrected - b.rel_energy).abs() <= 1e-10);
    }
}

#[test]
fn well_run_matches_pinned_baseline() {
    let base = common::load_baselines();
    let b = &base["well_eps_0_2"];
    let run = harness::run_single(&RunConfig::default(), 0.2).unwrap();
    let d = run.digest();
    let tol = b["rel_tol"].as_f64().unwrap();
    for (got, key) in [(d.final_e, "final_e"), (d.max_e, "max_e")] {
        let want = b[key].as_f64().unwrap();
        assert!((got - want).abs() <= tol * want, "{key}: {got:e} vs pinned {want:e}");
    }
}

#[test]
fn sweep_outputs_are_deterministic() {
    let cfg = RunConfig {
        profile: rossby_core::initdata::Profile::Random,
        seed: 11,
        ..small(Family::Ill)
    };
    let read_all = |dir: &std::path::Path| {
        let mut files: Vec<_> = walk(dir);
        files.sort();
        files
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .map(|p| fs::read(p).unwrap())
            .collect::<Vec<_>>()
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    harness::run_sweep(&cfg).unwrap().write(d1.path(), false).unwrap();
    harness::run_sweep(&cfg).unwrap().write(d2.path(), false).unwrap();
    let (a, b) = (read_all(d1.path()), read_all(d2.path()));
    assert_eq!(a.len(), 4);
    assert_eq!(a, b);
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn serial_and_parallel_sweeps_agree() {
    let cfg = small(Family::Ill);
    let s = harness::run_sweep_with(&cfg, Execution::Serial).unwrap();
    let p = harness::run_sweep_with(&cfg, Execution::Parallel).unwrap();
    assert_eq!(s.summary, p.summary);
    for (a, b) in s.successful_runs().iter().zip(p.successful_runs()) {
        assert_eq!(a.rows, b.rows);
    }
}

#[test]
fn failing_member_marks_sweep_failed() {
    // eps = 0.9 with amplitude 0.6 makes the initial density nonpositive.
    let cfg = RunConfig {
        amplitude: 0.6,
        epsilons: vec![0.9, 0.2, 0.1],
        ..small(Family::Ill)
    };
    let out = harness::run_sweep(&cfg).unwrap();
    assert!(out.summary.failed);
    assert!(out.summary.members[0].error.is_some());
    assert!(out.summary.members[1].digest.is_some());
    assert!(!out.summary.acceptance_failures().is_empty());
}

#[test]
fn plots_for_four_member_sweep() {
    let cfg = RunConfig {
        epsilons: vec![0.4, 0.2, 0.1, 0.05],
        ..small(Family::Well)
    };
    let out = harness::run_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let runs = out.successful_runs();
    let files = emit_plots(Some(&out.summary), &runs, None, dir.path()).unwrap();
    assert_eq!(files.len(), 4);
    let text = fs::read_to_string(dir.path().join("final_vs_eps.dat")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    let fit = out.summary.fit.unwrap();
    for r in rows {
        assert_eq!(r.len(), 3);
        assert!((r[2] - fit.c * r[0].powf(fit.p)).abs() <= 1e-12 * r[2]);
    }
}

#[test]
fn empty_input_writes_no_plots() {
    let dir = tempfile::tempdir().unwrap();
    let files = emit_plots(None, &[], None, &dir.path().join("plots")).unwrap();
    assert!(files.is_empty());
    assert!(!dir.path().join("plots").exists());
}

#[test]
fn run_artifacts_round_trip() {
    let cfg = small(Family::Ill);
    let run = harness::run_single(&cfg, 0.2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run.write(dir.path(), true).unwrap();
    let csv = fs::read_to_string(dir.path().join("monitors.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "t");
    assert!(header.iter().any(|h| h.starts_with("res_mass")));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last.len(), header.len());
    assert_eq!(last[1], run.final_row().rel_energy);

    let (meta, fields) = grid::read_snapshot(&dir.path().join("final_flow")).unwrap();
    assert_eq!(meta.time, run.final_flow.time);
    assert_eq!(fields[0].1.data(), run.final_flow.rho.data());
    assert!(dir.path().join("final_acoustic.bin").exists());
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(
        &path,
        "# tiny well-prepared run\nnx = 16\nny = 16\nlx = 2pi\nly = 2pi\nepsilons = 0.3\nt_end = 0.1\n",
    )
    .unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!(cfg.nx, 16);
    assert!((cfg.lx - 2.0 * PI).abs() < 1e-15);
    let run = harness::run_single(&cfg, cfg.epsilons[0]).unwrap();
    assert!((run.final_row().t - 0.1).abs() < 1e-15);
    let zero = ScalarField::zeros(&cfg.grid().unwrap());
    assert_eq!(zero.max_abs(), 0.0);
}
