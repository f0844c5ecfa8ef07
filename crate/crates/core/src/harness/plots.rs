//! Gnuplot data files and script stubs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::output::fmt_f64;
use super::run::RunResult;
use super::sweep::SweepSummary;
use crate::acoustic::DecayRow;
use crate::error::Result;

fn write_pair(dir: &Path, name: &str, data: &str, script: &str, out: &mut Vec<PathBuf>) -> Result<()> {
    fs::create_dir_all(dir)?;
    let dat = dir.join(format!("{name}.dat"));
    let gp = dir.join(format!("{name}.gp"));
    fs::write(&dat, data)?;
    fs::write(&gp, script)?;
    out.push(dat);
    out.push(gp);
    Ok(())
}

/// Writes one `.dat`/`.gp` pair per available figure and returns the paths.
/// Nothing is written (and a warning is logged) when there is nothing to plot.
pub fn emit_plots(
    summary: Option<&SweepSummary>,
    runs: &[&RunResult],
    decay: Option<&[DecayRow]>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();

    if !runs.is_empty() {
        let mut data = String::from("# t rel_energy rel_energy_uncorrected\n");
        let mut plot = Vec::new();
        for (i, run) in runs.iter().enumerate() {
            let _ = writeln!(data, "# eps = {}", fmt_f64(run.epsilon));
            for r in &run.rows {
                let _ = writeln!(
                    data,
                    "{} {} {}",
                    fmt_f64(r.t),
                    fmt_f64(r.rel_energy),
                    fmt_f64(r.rel_energy_uncorrected)
                );
            }
            data.push_str("\n\n");
            plot.push(format!(
                "'rel_energy_vs_t.dat' index {i} using 1:2 with lines title 'eps = {}'",
                run.epsilon
            ));
        }
        let script = format!(
            "set xlabel 't'\nset ylabel 'relative energy'\nset logscale y\nplot {}\n",
            plot.join(", \\\n     ")
        );
        write_pair(dir, "rel_energy_vs_t", &data, &script, &mut out)?;
    }

    if let Some(s) = summary {
        let rows: Vec<(f64, f64)> = s
            .members
            .iter()
            .filter_map(|m| m.digest.as_ref().map(|d| (m.epsilon, d.final_e)))
            .collect();
        if !rows.is_empty() {
            let mut data = String::from("# epsilon final_E fitted_line\n");
            for (e, v) in &rows {
                let fitted = s.fit.map_or(f64::NAN, |f| f.eval(*e));
                let _ = writeln!(data, "{} {} {}", fmt_f64(*e), fmt_f64(*v), fmt_f64(fitted));
            }
            let title = s
                .fit
                .map_or("no fit".to_string(), |f| format!("C eps^p, p = {:.3}", f.p));
            let script = format!(
                "set logscale xy\nset xlabel 'epsilon'\nset ylabel 'final relative energy'\n\
                 plot 'final_vs_eps.dat' using 1:2 with points title 'measured', \\\n     \
                 'final_vs_eps.dat' using 1:3 with lines title '{title}'\n"
            );
            write_pair(dir, "final_vs_eps", &data, &script, &mut out)?;
        }
    }

    if let Some(rows) = decay.filter(|r| !r.is_empty()) {
        let mut data = String::from("# t local_sup_s local_sup_v global_energy\n");
        for r in rows {
            let _ = writeln!(
                data,
                "{} {} {} {}",
                fmt_f64(r.t),
                fmt_f64(r.local_sup_s),
                fmt_f64(r.local_sup_v),
                fmt_f64(r.global_energy)
            );
        }
        let script = "set xlabel 't'\nset ylabel 'local sup norm'\n\
                      plot 'decay.dat' using 1:2 with lines title 'sup |s|', \\\n     \
                      'decay.dat' using 1:3 with lines title 'sup |V|'\n";
        write_pair(dir, "decay", &data, script, &mut out)?;
    }

    if out.is_empty() {
        log::warn!("nothing to plot; no files written");
    }
    Ok(out)
}
