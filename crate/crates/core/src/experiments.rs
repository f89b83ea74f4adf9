//! Canned studies: the double-Gaussian growth scenario, the γ-sweep towards
//! the incompressible limit, long-time relaxation and the local/nonlocal
//! comparison.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::functionals::{self, DiagnosticsRecord};
use crate::grid::{Field, TorusGrid};
use crate::io::snapshot;
use crate::kernel::{Kernel, Profile};
use crate::model::{ModelParams, ModelState, Source, Variant};
use crate::stepper::{
    self, RunSummary, Scheme, SeriesSink, Sink, SnapshotSink, SolverConfig, StepReport,
};

/// Panel times of the double-Gaussian growth figure.
pub const FIGURE1_TIMES: [f64; 4] = [0.0, 0.03, 0.14, 0.25];

/// Sweep comparison time.
pub const SWEEP_T_STAR: f64 = 0.2;

/// Slack on the mean bound `ū ≤ p_H^{1/γ}`.
pub const MASS_BOUND_TOL: f64 = 1e-10;

/// Slack on `ckp_gap ≥ 0`.
pub const CKP_TOL: f64 = 1e-12;

/// Relative per-step slack on entropy / energy monotonicity.
pub const MONOTONE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    #[serde(default = "unit_length")]
    pub length: f64,
}

fn unit_length() -> f64 {
    1.0
}

impl GridSpec {
    pub fn build(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.dim, self.n, self.length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(default)]
    pub profile: Profile,
}

/// Deterministic initial data. Positions are in physical units; distances
/// wrap around the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    Uniform {
        value: f64,
    },
    /// Sum of Gaussians `a exp(-|x - c|² / 2w²)`.
    DoubleGaussian {
        centers: Vec<[f64; 2]>,
        widths: Vec<f64>,
        amplitudes: Vec<f64>,
    },
    /// Compactly supported `a (1 - |x - c|²/R²)²` for `|x - c| < R`.
    SingleBump {
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
    },
    /// Density read from a snapshot file.
    Custom {
        path: PathBuf,
    },
}

fn periodic_dist2(grid: &TorusGrid, x: [f64; 2], c: [f64; 2]) -> f64 {
    let l = grid.length();
    (0..grid.dim())
        .map(|k| {
            let d = (x[k] - c[k]).rem_euclid(l);
            let d = d.min(l - d);
            d * d
        })
        .sum()
}

impl InitialCondition {
    pub fn build(&self, grid: TorusGrid) -> Result<Field> {
        let field = match self {
            InitialCondition::Uniform { value } => Field::new(grid, vec![*value; grid.cells()])?,
            InitialCondition::DoubleGaussian {
                centers,
                widths,
                amplitudes,
            } => {
                if centers.len() != widths.len() || centers.len() != amplitudes.len() {
                    return Err(Error::InvalidParams(
                        "double-gaussian needs equally many centers, widths and amplitudes".into(),
                    ));
                }
                if widths.iter().any(|w| !(*w > 0.0)) {
                    return Err(Error::InvalidParams(
                        "gaussian widths must be positive".into(),
                    ));
                }
                Field::from_fn(grid, |x| {
                    centers
                        .iter()
                        .zip(widths)
                        .zip(amplitudes)
                        .map(|((c, w), a)| {
                            a * (-periodic_dist2(&grid, x, *c) / (2.0 * w * w)).exp()
                        })
                        .sum()
                })?
            }
            InitialCondition::SingleBump {
                center,
                radius,
                amplitude,
            } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidParams("bump radius must be positive".into()));
                }
                Field::from_fn(grid, |x| {
                    let s = periodic_dist2(&grid, x, *center) / (radius * radius);
                    if s < 1.0 {
                        amplitude * (1.0 - s).powi(2)
                    } else {
                        0.0
                    }
                })?
            }
            InitialCondition::Custom { path } => {
                let snap = snapshot::read_snapshot(path)?;
                if *snap.field.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                snap.field
            }
        };
        field.check_nonnegative()?;
        Ok(field)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub grid: GridSpec,
    #[serde(default)]
    pub kernel: KernelSpec,
    pub params: ModelParams,
    pub initial_condition: InitialCondition,
    pub t_end: f64,
    pub sample_every: f64,
    /// The initial datum is claimed to satisfy `0 ≤ u₀ ≤ p_H^{1/γ}`.
    #[serde(default)]
    pub admissible: bool,
}

/// Grid, kernel, parameters and initial field of a scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    pub grid: TorusGrid,
    pub kernel: Kernel,
    pub params: ModelParams,
    pub initial: Field,
}

impl ScenarioSpec {
    pub fn build(&self) -> Result<Setup> {
        self.params.validate()?;
        let grid = self.grid.build()?;
        let kernel = Kernel::new(grid, self.params.eps, self.kernel.profile)?;
        let initial = self.initial_condition.build(grid)?;
        if self.admissible {
            let c = self.params.homeostatic_density();
            if initial.max() > c {
                return Err(Error::InvalidParams(format!(
                    "scenario '{}' claims an admissible datum but max u0 = {} > p_H^(1/gamma) = {c}",
                    self.name,
                    initial.max()
                )));
            }
        }
        Ok(Setup {
            grid,
            kernel,
            params: self.params,
            initial,
        })
    }

    /// Solver settings matching this scenario's horizon and cadence.
    pub fn solver(&self, scheme: Scheme) -> SolverConfig {
        SolverConfig {
            scheme,
            t_end: self.t_end,
            sample_every: self.sample_every,
            ..Default::default()
        }
    }

    pub fn with_gamma(&self, gamma: f64) -> ScenarioSpec {
        let mut s = self.clone();
        s.params.gamma = gamma;
        s.name = format!("{}-gamma{gamma}", self.name);
        s
    }
}

/// The double-Gaussian growth scenario: `γ = 10`, `p_H = 0.7`, 1D, `n = 256`.
///
/// The Gaussian centres, widths and peak are a reconstruction chosen to look
/// like the first panel (two separated bumps of height 0.9); they are not
/// published values.
pub fn scenario_figure1() -> ScenarioSpec {
    ScenarioSpec {
        name: "figure1".into(),
        grid: GridSpec {
            dim: 1,
            n: 256,
            length: 1.0,
        },
        kernel: KernelSpec {
            profile: Profile::PolyBump,
        },
        params: ModelParams::new(10.0, 0.7, 0.08, Source::Growth, Variant::Nonlocal)
            .expect("valid parameters"),
        initial_condition: InitialCondition::DoubleGaussian {
            centers: vec![[0.35, 0.0], [0.65, 0.0]],
            widths: vec![0.05, 0.05],
            amplitudes: vec![0.9, 0.9],
        },
        t_end: 0.25,
        sample_every: 0.01,
        admissible: true,
    }
}

/// Compactly supported bump used for γ-sweeps: 1D, `n = 128`, peak 0.9.
pub fn scenario_sweep_base() -> ScenarioSpec {
    ScenarioSpec {
        name: "sweep".into(),
        grid: GridSpec {
            dim: 1,
            n: 128,
            length: 1.0,
        },
        kernel: KernelSpec {
            profile: Profile::PolyBump,
        },
        params: ModelParams::new(10.0, 0.7, 0.08, Source::Growth, Variant::Nonlocal)
            .expect("valid parameters"),
        initial_condition: InitialCondition::SingleBump {
            center: [0.5, 0.0],
            radius: 0.2,
            amplitude: 0.9,
        },
        t_end: SWEEP_T_STAR,
        sample_every: 0.01,
        admissible: true,
    }
}

/// Double Gaussian without source on a longer box, for relaxation to the mean.
pub fn scenario_conservative() -> ScenarioSpec {
    ScenarioSpec {
        name: "conservative".into(),
        grid: GridSpec {
            dim: 1,
            n: 64,
            length: 4.0,
        },
        kernel: KernelSpec {
            profile: Profile::PolyBump,
        },
        params: ModelParams::new(2.0, 0.7, 0.25, Source::None, Variant::Nonlocal)
            .expect("valid parameters"),
        initial_condition: InitialCondition::DoubleGaussian {
            centers: vec![[1.4, 0.0], [2.6, 0.0]],
            widths: vec![0.3, 0.3],
            amplitudes: vec![0.9, 0.9],
        },
        t_end: 2.0,
        sample_every: 0.02,
        admissible: false,
    }
}

/// Spatially uniform growth from `u ≡ 0.5`: 1D, `n = 64`, `γ = 10`.
pub fn scenario_uniform() -> ScenarioSpec {
    ScenarioSpec {
        name: "uniform".into(),
        grid: GridSpec {
            dim: 1,
            n: 64,
            length: 1.0,
        },
        kernel: KernelSpec {
            profile: Profile::PolyBump,
        },
        params: ModelParams::new(10.0, 0.7, 0.08, Source::Growth, Variant::Nonlocal)
            .expect("valid parameters"),
        initial_condition: InitialCondition::Uniform { value: 0.5 },
        t_end: 50.0,
        sample_every: 0.5,
        admissible: true,
    }
}

/// Records violations of the structural laws instead of aborting, so an
/// experiment can report all of them.
#[derive(Debug)]
pub struct InvariantMonitor {
    params: ModelParams,
    kernel: Kernel,
    homeostatic: f64,
    check_mass_bound: bool,
    check_entropy_steps: bool,
    check_energy_steps: bool,
    initial_entropy: Option<f64>,
    initial_energy: Option<f64>,
    pub initial_mass: Option<f64>,
    pub violations: Vec<String>,
    pub max_mass_drift: f64,
    /// Largest per-step rise relative to the initial value.
    pub max_entropy_increase: f64,
    pub max_energy_increase: f64,
    pub min_ckp_gap: f64,
    pub max_mean_excess: f64,
    pub sup_degiorgi_excess: f64,
    pub steps: usize,
}

impl InvariantMonitor {
    /// `mass_bound` enables `ū ≤ p_H^{1/γ}`; `per_step` adds per-step entropy
    /// (and, without source, energy) monotonicity checks.
    pub fn new(params: &ModelParams, kernel: &Kernel, mass_bound: bool, per_step: bool) -> Self {
        InvariantMonitor {
            params: *params,
            kernel: kernel.clone(),
            homeostatic: params.homeostatic_density(),
            check_mass_bound: mass_bound && params.source == Source::Growth,
            check_entropy_steps: per_step,
            check_energy_steps: per_step && params.source == Source::None,
            initial_entropy: None,
            initial_energy: None,
            initial_mass: None,
            violations: Vec::new(),
            max_mass_drift: 0.0,
            max_entropy_increase: f64::NEG_INFINITY,
            max_energy_increase: f64::NEG_INFINITY,
            min_ckp_gap: f64::INFINITY,
            max_mean_excess: f64::NEG_INFINITY,
            sup_degiorgi_excess: 0.0,
            steps: 0,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, msg: String) {
        if self.violations.len() < 64 {
            self.violations.push(msg);
        }
    }
}

impl Sink for InvariantMonitor {
    fn on_step(
        &mut self,
        prev: &ModelState,
        next: &ModelState,
        _report: &StepReport,
    ) -> Result<()> {
        self.steps += 1;
        if self.check_entropy_steps {
            let e0 = *self
                .initial_entropy
                .get_or_insert_with(|| functionals::entropy(&prev.u, &self.params));
            let before = functionals::entropy(&prev.u, &self.params);
            let after = functionals::entropy(&next.u, &self.params);
            let rise = after - before;
            let scale = e0.abs().max(f64::MIN_POSITIVE);
            self.max_entropy_increase = self.max_entropy_increase.max(rise / scale);
            if rise > MONOTONE_TOL * scale {
                self.violation(format!("entropy rose by {rise:e} at t = {}", next.t));
            }
        }
        if self.check_energy_steps {
            let before = functionals::energy(&prev.u, &self.params, &self.kernel)?;
            let e0 = *self.initial_energy.get_or_insert(before);
            let after = functionals::energy(&next.u, &self.params, &self.kernel)?;
            let rise = after - before;
            let scale = e0.abs().max(f64::MIN_POSITIVE);
            self.max_energy_increase = self.max_energy_increase.max(rise / scale);
            if rise > MONOTONE_TOL * scale {
                self.violation(format!("energy rose by {rise:e} at t = {}", next.t));
            }
        }
        Ok(())
    }

    fn on_sample(&mut self, r: &DiagnosticsRecord, _state: &ModelState) -> Result<()> {
        let m0 = *self.initial_mass.get_or_insert(r.mass);
        if r.mass < 0.0 || r.energy < 0.0 || r.entropy < 0.0 || r.min_u < 0.0 {
            self.violation(format!(
                "negative mass/energy/entropy/density at t = {}",
                r.t
            ));
        }
        if self.params.source == Source::None && m0 > 0.0 {
            self.max_mass_drift = self.max_mass_drift.max((r.mass - m0).abs() / m0);
        }
        if r.ckp_gap.is_finite() {
            self.min_ckp_gap = self.min_ckp_gap.min(r.ckp_gap);
            if r.ckp_gap < -CKP_TOL {
                self.violation(format!("ckp gap {} at t = {}", r.ckp_gap, r.t));
            }
        }
        self.max_mean_excess = self.max_mean_excess.max(r.mean - self.homeostatic);
        if self.check_mass_bound && r.mean > self.homeostatic + MASS_BOUND_TOL {
            self.violation(format!(
                "mean {} above p_H^(1/gamma) at t = {}",
                r.mean, r.t
            ));
        }
        self.sup_degiorgi_excess = self.sup_degiorgi_excess.max(r.degiorgi_excess);
        Ok(())
    }
}

/// Output of a single monitored run.
#[derive(Debug)]
pub struct MonitoredRun {
    pub summary: RunSummary,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<ModelState>,
    pub monitor: InvariantMonitor,
}

/// Runs a scenario with the invariant monitor and series collection attached.
pub fn run_monitored(
    spec: &ScenarioSpec,
    config: &SolverConfig,
    snapshot_times: &[f64],
    per_step: bool,
) -> Result<MonitoredRun> {
    let setup = spec.build()?;
    let mut series = SeriesSink::default();
    let mut snaps = SnapshotSink::new(snapshot_times);
    let mut monitor =
        InvariantMonitor::new(&setup.params, &setup.kernel, spec.admissible, per_step);
    let summary = stepper::run_with_times(
        &setup.initial,
        &setup.params,
        &setup.kernel,
        config,
        snapshot_times,
        &mut [&mut series, &mut snaps, &mut monitor],
    )?;
    Ok(MonitoredRun {
        summary,
        records: series.records,
        snapshots: snaps.states,
        monitor,
    })
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySample {
    pub t: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// `√(4|Ω|ū₀Φ(u|ū₀))`, the CKP bound on `l1` (conservative runs only).
    pub ckp_bound: f64,
}

#[derive(Debug)]
pub struct LongtimeReport {
    /// `p_H^{1/γ}` with growth, `ū₀` without.
    pub target: f64,
    pub samples: Vec<DecaySample>,
    /// Slope of `log Φ(u|ū)` over the final half of the run (no source only).
    pub entropy_slope: Option<f64>,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: ModelState,
    pub monitor: InvariantMonitor,
}

/// Long-time relaxation towards `p_H^{1/γ}` (growth) or the initial mean
/// (no source), with norms sampled along the way.
pub fn run_longtime(spec: &ScenarioSpec, config: &SolverConfig) -> Result<LongtimeReport> {
    let setup = spec.build()?;
    if setup.initial.max() <= 0.0 {
        return Err(Error::ZeroState(
            "u0 = 0 is stationary; supply an explicit nonzero perturbation",
        ));
    }
    let mean0 = setup.initial.mean();
    let target = match setup.params.source {
        Source::Growth => setup.params.homeostatic_density(),
        Source::None => mean0,
    };
    let measure = setup.grid.measure();

    struct Norms {
        target: f64,
        factor: f64,
        conservative: bool,
        out: Vec<DecaySample>,
    }
    impl Sink for Norms {
        fn on_sample(&mut self, _r: &DiagnosticsRecord, state: &ModelState) -> Result<()> {
            let d = state.u.map(|v| v - self.target);
            let ckp_bound = if self.conservative {
                let rel = functionals::relative_entropy(&state.u)?;
                (self.factor * rel).max(0.0).sqrt()
            } else {
                f64::NAN
            };
            self.out.push(DecaySample {
                t: state.t,
                l1: d.norm(1.0),
                l2: d.norm(2.0),
                linf: d.norm(f64::INFINITY),
                ckp_bound,
            });
            Ok(())
        }
    }

    let conservative = setup.params.source == Source::None;
    let mut norms = Norms {
        target,
        factor: 4.0 * measure * mean0,
        conservative,
        out: Vec::new(),
    };
    let mut series = SeriesSink::default();
    let mut monitor = InvariantMonitor::new(&setup.params, &setup.kernel, spec.admissible, false);
    let summary = stepper::run(
        &setup.initial,
        &setup.params,
        &setup.kernel,
        config,
        &mut [&mut norms, &mut series, &mut monitor],
    )?;

    let entropy_slope = if conservative {
        let half = 0.5 * config.t_end;
        let (ts, ys): (Vec<f64>, Vec<f64>) = series
            .records
            .iter()
            .filter(|r| r.t >= half && r.entropy_relative > 0.0)
            .map(|r| (r.t, r.entropy_relative.ln()))
            .unzip();
        fit_slope(&ts, &ys)
    } else {
        None
    };

    Ok(LongtimeReport {
        target,
        samples: norms.out,
        entropy_slope,
        records: series.records,
        final_state: summary.final_state,
        monitor,
    })
}

/// One γ of a sweep.
#[derive(Debug)]
pub struct SweepRun {
    pub gamma: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: ModelState,
    pub steps: usize,
    pub monitor: InvariantMonitor,
}

#[derive(Debug)]
pub struct SweepResult {
    pub gammas: Vec<f64>,
    /// Per-γ outcome; failed runs carry the error message.
    pub runs: Vec<std::result::Result<SweepRun, String>>,
    pub t_star: f64,
    pub graph_residual: Vec<f64>,
    pub complementarity_residual: Vec<f64>,
    pub pairing: Vec<f64>,
    pub sup_degiorgi_excess: Vec<f64>,
    pub max_mean_excess: Vec<f64>,
    /// `‖u_{γᵢ} - u_{γⱼ}‖₂` at `t*`.
    pub distances: Vec<Vec<f64>>,
}

/// Relative slack allowed per adjacent pair in the decreasing-trend flags.
pub const TREND_SLACK: f64 = 0.10;

fn decreasing_with_slack(v: &[f64], slack: f64) -> bool {
    v.windows(2).all(|w| w[1] <= (1.0 + slack) * w[0])
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

impl SweepResult {
    pub fn complete(&self) -> bool {
        self.runs.iter().all(|r| r.is_ok())
    }

    pub fn adjacent_distances(&self) -> Vec<f64> {
        (1..self.gammas.len())
            .map(|i| self.distances[i - 1][i])
            .collect()
    }

    pub fn graph_residual_decreasing(&self) -> bool {
        self.complete() && decreasing_with_slack(&self.graph_residual, TREND_SLACK)
    }

    pub fn distances_decreasing(&self) -> bool {
        self.complete() && strictly_decreasing(&self.adjacent_distances())
    }

    pub fn pairing_decreasing(&self) -> bool {
        self.complete() && strictly_decreasing(&self.pairing)
    }

    pub fn degiorgi_respected(&self) -> bool {
        self.complete() && self.sup_degiorgi_excess.iter().all(|&e| e == 0.0)
    }
}

/// Runs the same scenario at each γ (in parallel when enabled) to a common
/// `t* = base.t_end` and tabulates the incompressible-limit indicators.
pub fn run_gamma_sweep(
    base: &ScenarioSpec,
    gammas: &[f64],
    config: &SolverConfig,
) -> Result<SweepResult> {
    if gammas.is_empty() {
        return Err(Error::InvalidParams("empty gamma list".into()));
    }
    if gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(
            "gammas must be strictly increasing".into(),
        ));
    }
    if let Some(g) = gammas.iter().find(|&&g| g < 10.0) {
        return Err(Error::InvalidParams(format!(
            "sweep gammas must be >= 10, got {g}"
        )));
    }
    let config = SolverConfig {
        t_end: base.t_end,
        ..config.clone()
    };
    let runs = exec::map_items(Execution::default(), gammas, |&gamma| {
        let spec = base.with_gamma(gamma);
        run_monitored(&spec, &config, &[], false)
            .map(|m| SweepRun {
                gamma,
                records: m.records,
                final_state: m.summary.final_state,
                steps: m.summary.steps,
                monitor: m.monitor,
            })
            .map_err(|e| e.to_string())
    });

    let pick = |f: &dyn Fn(&SweepRun) -> f64| -> Vec<f64> {
        runs.iter()
            .map(|r| r.as_ref().map_or(f64::NAN, f))
            .collect()
    };
    let last = |r: &SweepRun| r.records.last().cloned().expect("at least one sample");
    let graph_residual = pick(&|r| last(r).graph_residual);
    let complementarity_residual = pick(&|r| last(r).complementarity_residual);
    let pairing = pick(&|r| last(r).pairing);
    let sup_degiorgi_excess = pick(&|r| r.monitor.sup_degiorgi_excess);
    let max_mean_excess = pick(&|r| r.monitor.max_mean_excess);
    let distances = runs
        .iter()
        .map(|a| {
            runs.iter()
                .map(|b| match (a, b) {
                    (Ok(a), Ok(b)) => a
                        .final_state
                        .u
                        .zip_map(&b.final_state.u, |x, y| x - y)
                        .norm(2.0),
                    _ => f64::NAN,
                })
                .collect()
        })
        .collect();

    Ok(SweepResult {
        gammas: gammas.to_vec(),
        runs,
        t_star: base.t_end,
        graph_residual,
        complementarity_residual,
        pairing,
        sup_degiorgi_excess,
        max_mean_excess,
        distances,
    })
}

#[derive(Debug)]
pub struct ComparisonReport {
    pub eps: Vec<f64>,
    /// `‖u_local(t_end) - u_nonlocal,ε(t_end)‖₂` per ε.
    pub gaps: Vec<f64>,
    /// Laplacian coefficient of each kernel, `Σ W |y h|² / 2dε²`.
    pub coefficients: Vec<f64>,
    pub local_coefficient: f64,
    pub local_entropy_monotone: bool,
    pub local_max_entropy_increase: f64,
    pub local_records: Vec<DiagnosticsRecord>,
}

impl ComparisonReport {
    pub fn gaps_decreasing(&self) -> bool {
        self.gaps.windows(2).all(|w| w[1] < w[0])
    }
}

/// Runs the nonlocal model at each ε and the local model `μ = p - κΔu` once.
///
/// `κ` is the long-wave coefficient `C_ω` of the kernel at the smallest ε, so
/// both models share the same formal limit.
pub fn run_local_comparison(
    spec: &ScenarioSpec,
    eps_list: &[f64],
    config: &SolverConfig,
) -> Result<ComparisonReport> {
    if eps_list.is_empty() {
        return Err(Error::InvalidParams("empty eps list".into()));
    }
    let grid = spec.grid.build()?;
    let coefficients = eps_list
        .iter()
        .map(|&e| Kernel::new(grid, e, spec.kernel.profile).map(|k| k.laplacian_coefficient()))
        .collect::<Result<Vec<_>>>()?;
    let smallest = eps_list
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty");
    let kappa = coefficients[smallest];

    let nonlocal_cfg = SolverConfig {
        t_end: spec.t_end,
        ..config.clone()
    };
    let local_cfg = SolverConfig {
        scheme: Scheme::ExplicitEuler,
        ..nonlocal_cfg.clone()
    };

    let mut local_spec = spec.clone();
    local_spec.params.variant = Variant::Local;
    local_spec.params.local_coefficient = kappa;
    let local = run_monitored(&local_spec, &local_cfg, &[], true)?;

    let finals = exec::map_items(Execution::default(), eps_list, |&eps| {
        let mut s = spec.clone();
        s.params.eps = eps;
        s.params.variant = Variant::Nonlocal;
        run_monitored(&s, &nonlocal_cfg, &[], false).map(|m| m.summary.final_state.u)
    });
    let gaps = finals
        .into_iter()
        .map(|u| {
            u.map(|u| {
                u.zip_map(&local.summary.final_state.u, |a, b| a - b)
                    .norm(2.0)
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ComparisonReport {
        eps: eps_list.to_vec(),
        gaps,
        coefficients,
        local_coefficient: kappa,
        local_entropy_monotone: local.monitor.is_clean(),
        local_max_entropy_increase: local.monitor.max_entropy_increase,
        local_records: local.records,
    })
}
