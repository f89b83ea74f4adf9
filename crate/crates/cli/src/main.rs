//! `nlch` command-line driver.
//!
//! Exit codes: 0 success, 1 invalid input or failed check, 2 runtime abort.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use nlch::experiments::{self, FIGURE1_TIMES};
use nlch::io::config::{self, RunConfig};
use nlch::io::snapshot;
use nlch::{Error, Kernel, ModelParams, Result, Source, Variant};

#[derive(Parser, Debug)]
#[command(
    name = "nlch",
    version,
    about = "Nonlocal degenerate Cahn-Hilliard simulator"
)]
struct Cli {
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Final time (overrides the config).
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the scenario described by a config file.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Double-Gaussian growth scenario with snapshots at the panel times.
    Figure1 {
        #[command(flatten)]
        common: Common,
    },
    /// Same scenario at several γ, compared at the final time.
    SweepGamma {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly increasing, each >= 10.
        #[arg(long, value_delimiter = ',', default_values_t = [10.0, 20.0, 40.0, 80.0])]
        gammas: Vec<f64>,
    },
    /// Long-time relaxation with decay norms.
    Longtime {
        #[command(flatten)]
        common: Common,
    },
    /// Local versus nonlocal model at several ε.
    CompareLocal {
        #[command(flatten)]
        common: Common,
        /// Comma-separated kernel radii.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.25])]
        eps: Vec<f64>,
    },
    /// Evaluate the invariant suite on a snapshot file.
    Check {
        snapshot: PathBuf,
        /// Config supplying source, variant and kernel profile.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Loads `--config` or falls back to the canned scenario `default`, then
/// applies `--out` and `--t-end`.
fn resolve(common: &Common, default: &str) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => config::parse_config(path)?,
        None => RunConfig::for_scenario(config::canned_scenario(default).expect("canned scenario")),
    };
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(t) = common.t_end {
        cfg.scenario.t_end = t;
        cfg.solver.t_end = t;
        let before = cfg.snapshot_times.len();
        cfg.snapshot_times.retain(|&s| s <= t);
        if cfg.snapshot_times.len() < before {
            warn!("dropped snapshot times beyond t_end = {t}");
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(cfg: &RunConfig) -> Result<()> {
    info!(
        "running '{}' to t = {}",
        cfg.scenario.name, cfg.solver.t_end
    );
    let run = experiments::run_monitored(&cfg.scenario, &cfg.solver, &cfg.snapshot_times, false)?;
    info!(
        "{} steps, dt in [{:.3e}, {:.3e}], {} cells clipped",
        run.summary.steps, run.summary.min_dt, run.summary.max_dt, run.summary.clipped
    );
    for v in &run.monitor.violations {
        warn!("invariant: {v}");
    }
    output::write_run(cfg, &run)?;
    info!("wrote {}", cfg.output_dir.display());
    Ok(())
}

fn figure1(common: &Common) -> Result<()> {
    let mut cfg = resolve(common, "figure1")?;
    if common.config.is_none() {
        cfg.output_dir = common
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("runs/figure1"));
        cfg.snapshot_times = FIGURE1_TIMES
            .iter()
            .copied()
            .filter(|&t| t <= cfg.solver.t_end)
            .collect();
    }
    simulate(&cfg)
}

/// Returns whether every run completed.
fn sweep(common: &Common, gammas: &[f64]) -> Result<bool> {
    let cfg = resolve(common, "sweep")?;
    info!(
        "sweeping gamma over {gammas:?} to t* = {}",
        cfg.scenario.t_end
    );
    let result = experiments::run_gamma_sweep(&cfg.scenario, gammas, &cfg.solver)?;
    output::write_sweep(&cfg, &result)?;
    for (g, r) in gammas.iter().zip(&result.runs) {
        if let Err(e) = r {
            warn!("gamma = {g} failed: {e}");
        }
    }
    info!(
        "graph residual decreasing: {}, distances decreasing: {}, De Giorgi respected: {}",
        result.graph_residual_decreasing(),
        result.distances_decreasing(),
        result.degiorgi_respected()
    );
    Ok(result.complete())
}

fn longtime(common: &Common) -> Result<()> {
    let mut cfg = resolve(common, "figure1")?;
    if common.config.is_none() {
        let t = common.t_end.unwrap_or(50.0);
        cfg.scenario.t_end = t;
        cfg.solver.t_end = t;
        cfg.solver.sample_every = t / 500.0;
        cfg.scenario.name = "longtime".into();
        cfg.output_dir = common
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("runs/longtime"));
    }
    info!(
        "long-time run of '{}' to t = {}",
        cfg.scenario.name, cfg.solver.t_end
    );
    let report = experiments::run_longtime(&cfg.scenario, &cfg.solver)?;
    output::write_longtime(&cfg, &report)?;
    if let Some(last) = report.samples.last() {
        info!(
            "final |u - {:.6}|_1 = {:.3e}, |.|_inf = {:.3e}",
            report.target, last.l1, last.linf
        );
    }
    if let Some(slope) = report.entropy_slope {
        info!("log relative entropy slope over the final half: {slope:.6}");
    }
    Ok(())
}

fn compare_local(common: &Common, eps: &[f64]) -> Result<()> {
    let mut cfg = resolve(common, "conservative")?;
    if common.config.is_none() {
        let t = common.t_end.unwrap_or(0.5);
        cfg.scenario.t_end = t;
        cfg.solver.t_end = t;
        cfg.scenario.name = "compare-local".into();
        cfg.output_dir = common
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("runs/compare-local"));
    }
    let report = experiments::run_local_comparison(&cfg.scenario, eps, &cfg.solver)?;
    output::write_comparison(&cfg, &report)?;
    info!(
        "gaps {:?}; decreasing: {}; local entropy monotone: {}",
        report.gaps,
        report.gaps_decreasing(),
        report.local_entropy_monotone
    );
    Ok(())
}

/// Returns the number of failed checks.
fn check(path: &Path, config: Option<&Path>) -> Result<usize> {
    let snap = snapshot::read_snapshot(path)?;
    let (source, variant, profile, kappa) = match config {
        Some(c) => {
            let cfg = config::parse_config(c)?;
            let p = cfg.scenario.params;
            (
                p.source,
                p.variant,
                cfg.scenario.kernel.profile,
                p.local_coefficient,
            )
        }
        None => (Source::Growth, Variant::Nonlocal, Default::default(), 1.0),
    };
    let mut params = ModelParams::new(snap.gamma, snap.p_h, snap.eps, source, variant)?;
    params.local_coefficient = kappa;
    params.validate()?;
    let u = &snap.field;
    let mut failed = 0;
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    };

    let min = u.min();
    report("nonnegative", min >= 0.0, format!("min u = {min:e}"));
    if min < 0.0 {
        return Ok(failed);
    }
    let kernel = Kernel::new(*u.grid(), params.eps, profile)?;
    let state = nlch::ModelState::new(u.clone(), snap.t)?;
    let rec = nlch::functionals::diagnostics(&state, &params, &kernel, 0.0)?;
    report(
        "energy >= 0",
        rec.energy >= 0.0,
        format!("{:e}", rec.energy),
    );
    report(
        "entropy >= 0",
        rec.entropy >= 0.0,
        format!("{:e}", rec.entropy),
    );
    if rec.mass > 0.0 {
        report(
            "ckp gap >= -1e-12",
            rec.ckp_gap >= -experiments::CKP_TOL,
            format!("{:e}", rec.ckp_gap),
        );
    }
    if source == Source::Growth {
        let c = params.homeostatic_density();
        report(
            "mean <= p_H^(1/gamma)",
            rec.mean <= c + experiments::MASS_BOUND_TOL,
            format!("mean {:.12} vs {c:.12}", rec.mean),
        );
    }
    report(
        "De Giorgi bound",
        rec.degiorgi_excess == 0.0,
        format!("excess {:e}", rec.degiorgi_excess),
    );
    println!(
        "t = {}  mass = {:.12e}  graph residual = {:.6e}  complementarity = {:.6e}",
        snap.t, rec.mass, rec.graph_residual, rec.complementarity_residual
    );
    Ok(failed)
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_validation() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Simulate { common } => {
            if common.config.is_none() {
                eprintln!("error: simulate needs --config");
                return ExitCode::from(1);
            }
            resolve(common, "figure1").and_then(|cfg| simulate(&cfg))
        }
        Command::Figure1 { common } => figure1(common),
        Command::SweepGamma { common, gammas } => match sweep(common, gammas) {
            Ok(true) => Ok(()),
            Ok(false) => {
                eprintln!("some sweep runs aborted; see sweep_summary.csv");
                return ExitCode::from(2);
            }
            Err(e) => Err(e),
        },
        Command::Longtime { common } => longtime(common),
        Command::CompareLocal { common, eps } => compare_local(common, eps),
        Command::Check { snapshot, config } => match check(snapshot, config.as_deref()) {
            Ok(0) => Ok(()),
            Ok(n) => {
                eprintln!("{n} check(s) failed");
                return ExitCode::from(1);
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
