//! `rossby`: command-line front end of the laboratory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical abort,
//! 4 acceptance assertion failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rossby_core::euler::{self, IntegrateOptions};
use rossby_core::harness::{self, output, InitialData, RunConfig, SweepSummary};
use rossby_core::initdata::{self, IllPreparedSpec, WellPreparedSpec};
use rossby_core::target::{self, TargetState};
use rossby_core::LabError;

#[derive(Parser)]
#[command(name = "rossby", version, about = "Rotating compressible Euler singular-limit laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Key-value configuration file; defaults apply for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for randomized data (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the initial data fields as binary snapshots.
    GenData(Common),
    /// Integrate the primitive system for the first epsilon and write monitors.
    RunEuler(Common),
    /// Integrate the limit system and write its monitors.
    RunTarget(Common),
    /// Acoustic local-decay run in the configured box.
    RunAcoustic(Common),
    /// Epsilon sweep with rate fit; exits 4 if the acceptance checks fail.
    Sweep(Common),
    /// Re-check a finished sweep from its summary file.
    Report(Common),
}

enum Failure {
    Config(String),
    Numerical(String),
    Acceptance(Vec<String>),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Config(m) => Failure::Config(m),
            e if e.is_numerical() => Failure::Numerical(e.to_string()),
            // Invalid parameter or data choices come from the configuration.
            e @ (LabError::Domain(_) | LabError::Dimension(_)) => Failure::Config(e.to_string()),
            e => Failure::Numerical(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn load(common: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(j) = common.jobs {
        if j == 0 {
            return Err(Failure::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Failure::Config(format!("{}: {e}", cfg.out.display())))?;
    std::fs::write(cfg.out.join("config.txt"), cfg.to_text()).map_err(LabError::from)?;
    Ok(cfg)
}

/// On a positivity abort, keep the last good state for inspection.
fn save_abort(out: &Path, e: &LabError) {
    if let LabError::Positivity {
        snapshot: Some(state), ..
    } = e
    {
        let stem = out.join("abort_state");
        match output::write_flow_snapshot(&stem, state) {
            Ok(()) => log::error!("last positive state written to {}", stem.display()),
            Err(w) => log::error!("could not write abort snapshot: {w}"),
        }
    }
}

fn gen_data(cfg: &RunConfig) -> CliResult {
    let data = InitialData::generate(cfg)?;
    data.write(&cfg.out)?;
    let grid = cfg.grid()?;
    if let InitialData::Ill { rho1, u0 } = &data {
        let params = cfg.params(cfg.epsilons[0])?;
        let spec = IllPreparedSpec {
            rho1_0: rho1.clone(),
            u0: u0.clone(),
            delta: cfg.delta_for(&grid),
            params,
        };
        let dec = initdata::decompose_ill_prepared(&spec, cfg.convention)?;
        output::write_target_snapshot(&cfg.out.join("geostrophic_part"), &dec.target_state(&params)?)?;
        output::write_acoustic_snapshot(&cfg.out.join("acoustic_part"), &dec.acoustic_state()?)?;
        println!("reconstruction error {:e}", dec.reconstruction_error()?);
    }
    println!("data written to {}", cfg.out.display());
    Ok(())
}

fn run_euler(cfg: &RunConfig) -> CliResult {
    let eps = cfg.epsilons[0];
    let params = cfg.params(eps)?;
    let grid = cfg.grid()?;
    let state0 = match InitialData::generate(cfg)? {
        InitialData::Well { q0 } => initdata::make_well_prepared(&WellPreparedSpec { q0, params }, &grid)?,
        InitialData::Ill { rho1, u0 } => initdata::make_ill_prepared(&IllPreparedSpec {
            rho1_0: rho1,
            u0,
            delta: cfg.delta_for(&grid),
            params,
        })?,
    };
    let opts = IntegrateOptions {
        cfl: cfg.cfl,
        sample_dt: cfg.sample_dt,
        symmetry: cfg.symmetry,
        hyperviscosity: cfg.hyperviscosity,
        keep_snapshots: cfg.snapshots,
        ..IntegrateOptions::default()
    };
    let traj = euler::integrate(state0, cfg.t_end, &params, &opts).inspect_err(|e| save_abort(&cfg.out, e))?;
    let mut header: Vec<String> = ["t", "mass", "energy", "defect", "hyper_dissipated"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(traj.residual_names.iter().cloned());
    output::write_csv(
        &cfg.out.join("euler_monitors.csv"),
        &header,
        traj.monitors.iter().map(|m| {
            let mut v = vec![m.t, m.mass, m.energy, m.defect, m.hyper_dissipated];
            v.extend_from_slice(&m.residuals);
            v
        }),
    )?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        output::write_flow_snapshot(&cfg.out.join(format!("flow_{i:04}")), s)?;
    }
    println!("eps = {eps}: {} steps, monitors in {}", traj.steps, cfg.out.display());
    Ok(())
}

fn run_target(cfg: &RunConfig) -> CliResult {
    let params = cfg.params(cfg.epsilons[0])?;
    let grid = cfg.grid()?;
    let state0 = match InitialData::generate(cfg)? {
        InitialData::Well { q0 } => TargetState::from_q(0.0, q0, &params)?,
        InitialData::Ill { rho1, u0 } => initdata::decompose_ill_prepared(
            &IllPreparedSpec {
                rho1_0: rho1,
                u0,
                delta: cfg.delta_for(&grid),
                params,
            },
            cfg.convention,
        )?
        .target_state(&params)?,
    };
    let traj = target::target_integrate(state0, cfg.t_end, &params, cfg.cfl, cfg.sample_dt)?;
    let header: Vec<String> = ["t", "energy", "omega_min", "omega_max"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    output::write_csv(
        &cfg.out.join("target_monitors.csv"),
        &header,
        traj.monitors.iter().map(|m| vec![m.t, m.energy, m.omega_min, m.omega_max]),
    )?;
    if cfg.snapshots {
        for (i, s) in traj.snapshots.iter().enumerate() {
            output::write_target_snapshot(&cfg.out.join(format!("target_{i:04}")), s)?;
        }
    }
    println!("{} steps, monitors in {}", traj.steps, cfg.out.display());
    Ok(())
}

fn run_acoustic(cfg: &RunConfig) -> CliResult {
    let res = harness::run_decay(cfg)?;
    res.write(&cfg.out)?;
    harness::emit_plots(None, &[], Some(&res.rows), &cfg.out.join("plots"))?;
    println!(
        "eps = {}: local decay factor {:.6} over t in [0, {}] (window {:.4})",
        res.epsilon, res.factor, cfg.t_end, res.window
    );
    Ok(())
}

fn print_summary(s: &SweepSummary) {
    for m in &s.members {
        match (&m.digest, &m.error) {
            (Some(d), _) => {
                let ratio = m.ratio.map_or(String::new(), |r| format!("  ratio {r:.4}"));
                println!("eps {:<8} final E {:.6e}{ratio}", m.epsilon, d.final_e);
            }
            (None, Some(e)) => println!("eps {:<8} FAILED: {e}", m.epsilon),
            (None, None) => {}
        }
    }
    if let Some(f) = s.fit {
        println!("fit: E ~ {:.4e} eps^{:.4} (expected p ~ {})", f.c, f.p, s.expected_rate);
    }
    if let Some(f) = s.fit_sup {
        println!("fit of sup_t E: {:.4e} eps^{:.4}", f.c, f.p);
    }
    if s.exact_zero {
        println!("exact-zero sweep: every final relative energy vanishes");
    }
}

fn check(s: &SweepSummary) -> CliResult {
    print_summary(s);
    let fails = s.acceptance_failures();
    if fails.is_empty() {
        println!("acceptance: pass");
        Ok(())
    } else {
        Err(Failure::Acceptance(fails))
    }
}

fn sweep(cfg: &RunConfig) -> CliResult {
    let outcome = harness::run_sweep(cfg)?;
    outcome.write(&cfg.out, cfg.snapshots)?;
    for r in &outcome.runs {
        if let Err(e) = r {
            save_abort(&cfg.out, e);
        }
    }
    let runs = outcome.successful_runs();
    harness::emit_plots(Some(&outcome.summary), &runs, None, &cfg.out.join("plots"))?;
    check(&outcome.summary)
}

fn report(common: &Common) -> CliResult {
    let dir = match (&common.out, &common.config) {
        (Some(o), _) => o.clone(),
        (None, Some(_)) => load(common)?.out,
        (None, None) => RunConfig::default().out,
    };
    let path = dir.join("sweep_summary.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let summary: SweepSummary =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    check(&summary)
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::GenData(c) => gen_data(&load(&c)?),
        Command::RunEuler(c) => run_euler(&load(&c)?),
        Command::RunTarget(c) => run_target(&load(&c)?),
        Command::RunAcoustic(c) => run_acoustic(&load(&c)?),
        Command::Sweep(c) => sweep(&load(&c)?),
        Command::Report(c) => report(&c),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical abort: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Acceptance(fails)) => {
            for f in fails {
                eprintln!("acceptance failure: {f}");
            }
            ExitCode::from(4)
        }
    }
}
