//! Output directory layout.
//!
//! Every run directory holds `config.toml` (the resolved configuration),
//! `series.csv` with its schema sidecar, and optionally snapshots, profiles
//! and a plot script.

use std::fs;
use std::path::Path;

use nlch::experiments::{ComparisonReport, LongtimeReport, MonitoredRun, SweepResult};
use nlch::io::config::RunConfig;
use nlch::io::{plots, series, snapshot};
use nlch::{ModelParams, ModelState, Result};

fn time_tag(t: f64) -> String {
    format!("t{t:.6}")
}

fn prepare(cfg: &RunConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml_string())?;
    Ok(())
}

fn write_state(dir: &Path, state: &ModelState, params: &ModelParams) -> Result<()> {
    let tag = time_tag(state.t);
    snapshot::write_snapshot(
        dir.join(format!("snapshot_{tag}.bin")),
        &snapshot::Snapshot::new(state, params),
    )?;
    series::write_profile(&state.u, dir.join(format!("profile_{tag}.csv")))
}

pub fn write_run(cfg: &RunConfig, run: &MonitoredRun) -> Result<()> {
    let dir = &cfg.output_dir;
    prepare(cfg, dir)?;
    series::write_series(&run.records, dir.join("series.csv"))?;
    for state in &run.snapshots {
        write_state(dir, state, &cfg.scenario.params)?;
    }
    if cfg.emit_plots {
        plots::write_script(
            dir.join("plot.py"),
            &plots::series_script(&cfg.scenario.name),
        )?;
    }
    Ok(())
}

pub fn write_sweep(cfg: &RunConfig, result: &SweepResult) -> Result<()> {
    let dir = &cfg.output_dir;
    prepare(cfg, dir)?;
    let mut summary = csv::Writer::from_path(dir.join("sweep_summary.csv"))?;
    summary.write_record([
        "gamma",
        "status",
        "graph_residual",
        "complementarity_residual",
        "pairing",
        "sup_degiorgi_excess",
        "max_mean_excess",
        "l2_distance_to_next",
    ])?;
    let adjacent = result.adjacent_distances();
    let num = |v: f64| format!("{v:.16e}");
    for (k, (gamma, run)) in result.gammas.iter().zip(&result.runs).enumerate() {
        let status = match run {
            Ok(r) => {
                let sub = dir.join(format!("gamma_{gamma}"));
                fs::create_dir_all(&sub)?;
                series::write_series(&r.records, sub.join("series.csv"))?;
                let mut params = cfg.scenario.params;
                params.gamma = *gamma;
                write_state(&sub, &r.final_state, &params)?;
                "ok".to_string()
            }
            Err(e) => format!("failed: {e}"),
        };
        summary.write_record([
            num(*gamma),
            status,
            num(result.graph_residual[k]),
            num(result.complementarity_residual[k]),
            num(result.pairing[k]),
            num(result.sup_degiorgi_excess[k]),
            num(result.max_mean_excess[k]),
            adjacent.get(k).map_or(String::new(), |&d| num(d)),
        ])?;
    }
    summary.flush()?;
    if cfg.emit_plots {
        plots::write_script(dir.join("plot.py"), &plots::sweep_script())?;
    }
    Ok(())
}

pub fn write_longtime(cfg: &RunConfig, report: &LongtimeReport) -> Result<()> {
    let dir = &cfg.output_dir;
    prepare(cfg, dir)?;
    series::write_series(&report.records, dir.join("series.csv"))?;
    let mut w = csv::Writer::from_path(dir.join("decay.csv"))?;
    w.write_record(["t", "l1", "l2", "linf", "ckp_bound"])?;
    for s in &report.samples {
        w.write_record([s.t, s.l1, s.l2, s.linf, s.ckp_bound].map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    let mut text = format!("target = {:.16e}\n", report.target);
    if let Some(slope) = report.entropy_slope {
        text.push_str(&format!("relative_entropy_log_slope = {slope:.16e}\n"));
    }
    fs::write(dir.join("summary.txt"), text)?;
    write_state(dir, &report.final_state, &cfg.scenario.params)?;
    if cfg.emit_plots {
        plots::write_script(
            dir.join("plot.py"),
            &plots::series_script(&cfg.scenario.name),
        )?;
    }
    Ok(())
}

pub fn write_comparison(cfg: &RunConfig, report: &ComparisonReport) -> Result<()> {
    let dir = &cfg.output_dir;
    prepare(cfg, dir)?;
    let mut w = csv::Writer::from_path(dir.join("comparison.csv"))?;
    w.write_record(["eps", "laplacian_coefficient", "l2_gap_to_local"])?;
    for k in 0..report.eps.len() {
        w.write_record(
            [report.eps[k], report.coefficients[k], report.gaps[k]].map(|v| format!("{v:.16e}")),
        )?;
    }
    w.flush()?;
    series::write_series(&report.local_records, dir.join("series_local.csv"))?;
    fs::write(
        dir.join("summary.txt"),
        format!(
            "local_coefficient = {:.16e}\nlocal_entropy_monotone = {}\nlocal_max_entropy_increase = {:.16e}\n",
            report.local_coefficient, report.local_entropy_monotone, report.local_max_entropy_increase
        ),
    )?;
    Ok(())
}
