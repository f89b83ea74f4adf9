//! Time integration: forward Euler and an IMEX variant that treats the stiff
//! `div(u ∇u)/ε²` part implicitly.

use serde::{Deserialize, Serialize};

use crate::cg;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::functionals::{self, DiagnosticsRecord};
use crate::grid::Field;
use crate::kernel::Kernel;
use crate::model::{self, ModelParams, ModelState, Source, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    ExplicitEuler,
    SemiImplicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub negativity_tol: f64,
    pub linear_solver_tol: f64,
    pub sample_every: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scheme: Scheme::ExplicitEuler,
            cfl: 0.4,
            dt_max: 1e-3,
            t_end: 1.0,
            negativity_tol: 1e-13,
            linear_solver_tol: 1e-10,
            sample_every: 0.01,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return bad(format!("dt_max must be positive, got {}", self.dt_max));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if !(self.negativity_tol > 0.0) {
            return bad(format!(
                "negativity_tol must be positive, got {}",
                self.negativity_tol
            ));
        }
        if !(self.linear_solver_tol > 0.0) {
            return bad(format!(
                "linear_solver_tol must be positive, got {}",
                self.linear_solver_tol
            ));
        }
        if !(self.sample_every > 0.0 && self.sample_every.is_finite()) {
            return bad(format!(
                "sample_every must be positive, got {}",
                self.sample_every
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub dt_used: f64,
    pub max_diffusivity: f64,
    pub negativity_clipped: usize,
    pub solver_iterations: usize,
}

/// Quantities shared by the step-size rule and the step itself.
struct Plan {
    mu: Field,
    /// Explicit part of `μ` in the IMEX split, `-ω_ε∗u/ε²`.
    mu_explicit: Option<Field>,
    diffusivity: f64,
}

fn local_piece(params: &ModelParams, kernel: &Kernel) -> f64 {
    let g = kernel.grid();
    match params.variant {
        Variant::Nonlocal => 1.0 / (params.eps * params.eps),
        // Fourth-order term: the discrete Δ² spectrum is bounded by (4d/h²)².
        Variant::Local => {
            params.local_coefficient * 4.0 * g.dim() as f64 / (g.spacing() * g.spacing())
        }
    }
}

fn plan(state: &ModelState, params: &ModelParams, kernel: &Kernel, scheme: Scheme) -> Result<Plan> {
    let u = &state.u;
    let g = *u.grid();
    let gamma = params.gamma;
    let uv = u.values();
    let mu = model::chemical_potential(u, params, kernel)?;
    match scheme {
        Scheme::ExplicitEuler => {
            let local = local_piece(params, kernel);
            let d = exec::max(Execution::default(), uv.len(), |i| {
                gamma * model::pow_gamma(uv[i], gamma) + uv[i] * local
            });
            Ok(Plan {
                mu,
                mu_explicit: None,
                diffusivity: d.max(0.0),
            })
        }
        Scheme::SemiImplicit => {
            if params.variant == Variant::Local {
                return Err(Error::InvalidParams(
                    "semi-implicit stepping is only available for the nonlocal variant".into(),
                ));
            }
            let inv_eps2 = 1.0 / (params.eps * params.eps);
            let smooth = kernel.convolve(u)?;
            let me: Vec<f64> = smooth.values().iter().map(|v| -v * inv_eps2).collect();
            let h2 = g.spacing() * g.spacing();
            let p_h = match params.source {
                Source::Growth => params.p_h,
                Source::None => f64::INFINITY,
            };
            // Per-unit-mass drain rate of the explicit fluxes and the source.
            let rate = exec::max(Execution::default(), uv.len(), |i| {
                let mut r = 0.0;
                for axis in 0..g.dim() {
                    r += (me[i] - me[g.neighbor(i, axis, 1)]).abs();
                    r += (me[i] - me[g.neighbor(i, axis, -1)]).abs();
                }
                r / h2 + (model::pow_gamma(uv[i], gamma) - p_h).max(0.0)
            });
            Ok(Plan {
                mu,
                mu_explicit: Some(Field::from_vec(g, me)),
                diffusivity: (rate * h2 / (2.0 * g.dim() as f64)).max(0.0),
            })
        }
    }
}

fn dt_from(diffusivity: f64, kernel: &Kernel, config: &SolverConfig) -> f64 {
    if diffusivity <= 0.0 {
        return config.dt_max;
    }
    let g = kernel.grid();
    let h = g.spacing();
    (config.cfl * h * h / (2.0 * g.dim() as f64 * diffusivity)).min(config.dt_max)
}

/// Largest step allowed by the parabolic CFL rule `cfl h² / (2d D_max)`.
///
/// For explicit stepping `D = γu^γ + u/ε²`. In semi-implicit mode the
/// pressure and `u/ε²` parts are implicit and `D = h² r / 2d`, with `r` the
/// per-unit-mass drain rate of the explicit drift and the source, which keeps
/// the right-hand side nonnegative.
pub fn stable_dt(
    state: &ModelState,
    params: &ModelParams,
    kernel: &Kernel,
    config: &SolverConfig,
) -> Result<f64> {
    let p = plan(state, params, kernel, config.scheme)?;
    Ok(dt_from(p.diffusivity, kernel, config))
}

fn finish(
    u: &Field,
    mut values: Vec<f64>,
    tol: f64,
    t: f64,
    mut report: StepReport,
) -> Result<(ModelState, StepReport)> {
    let mut clipped_mass = 0.0;
    for (cell, v) in values.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { cell, value: *v });
        }
        if *v < 0.0 {
            if *v > -tol {
                clipped_mass -= *v;
                *v = 0.0;
                report.negativity_clipped += 1;
            } else {
                return Err(Error::NegativeDensity { cell, value: *v });
            }
        }
    }
    if clipped_mass > 0.0 {
        // Clipping adds mass; a uniform rescale takes it back out.
        let after = exec::sum(Execution::default(), values.len(), |i| values[i]);
        if after > clipped_mass {
            let scale = (after - clipped_mass) / after;
            values.iter_mut().for_each(|v| *v *= scale);
        }
    }
    Ok((
        ModelState {
            u: Field::from_vec(*u.grid(), values),
            t,
        },
        report,
    ))
}

fn explicit_with_plan(
    state: &ModelState,
    params: &ModelParams,
    config: &SolverConfig,
    plan: &Plan,
    dt: f64,
) -> Result<(ModelState, StepReport)> {
    let u = &state.u;
    let div = model::flux_divergence(u, &plan.mu)?;
    let src = model::source_term(u, params);
    let uv = u.values();
    let mut next = vec![0.0; uv.len()];
    exec::fill(Execution::default(), &mut next, |i| {
        uv[i] + dt * (div.values()[i] + src.values()[i])
    });
    let report = StepReport {
        dt_used: dt,
        max_diffusivity: plan.diffusivity,
        ..Default::default()
    };
    finish(u, next, config.negativity_tol, state.t + dt, report)
}

/// `uⁿ⁺¹ = uⁿ + dt rhs(uⁿ)`, clipping roundoff-sized negatives.
pub fn step_explicit(
    state: &ModelState,
    params: &ModelParams,
    kernel: &Kernel,
    config: &SolverConfig,
    dt: f64,
) -> Result<(ModelState, StepReport)> {
    let p = plan(state, params, kernel, Scheme::ExplicitEuler)?;
    explicit_with_plan(state, params, config, &p, dt)
}

fn semi_implicit_with_plan(
    state: &ModelState,
    params: &ModelParams,
    config: &SolverConfig,
    plan: &Plan,
    dt: f64,
) -> Result<(ModelState, StepReport)> {
    let exec = Execution::default();
    let u = &state.u;
    let g = *u.grid();
    let n = g.cells();
    let mu_explicit = plan.mu_explicit.as_ref().expect("semi-implicit plan");
    let mobility = model::face_mobilities(u, &plan.mu);

    let mut div = vec![0.0; n];
    model::weighted_divergence_into(exec, &g, &mobility, mu_explicit.values(), &mut div);
    let src = model::source_term(u, params);
    let uv = u.values();
    let b: Vec<f64> = (0..n)
        .map(|i| uv[i] + dt * (div[i] + src.values()[i]))
        .collect();

    // Implicit face coefficients M (1/ε² + a), with a the secant slope of
    // u ↦ u^γ across the face, so that at uⁿ the implicit flux equals
    // M (pⱼ - pᵢ + (uⱼ - uᵢ)/ε²).
    let inv_eps2 = 1.0 / (params.eps * params.eps);
    let gamma = params.gamma;
    let secant = |a: f64, b: f64| {
        let d = b - a;
        if d.abs() > 1e-6 * a.max(b) {
            (model::pow_gamma(b, gamma) - model::pow_gamma(a, gamma)) / d
        } else {
            gamma * model::pow_gamma(0.5 * (a + b), gamma - 1.0)
        }
    };
    let conductance: Vec<Vec<f64>> = mobility
        .iter()
        .enumerate()
        .map(|(axis, m)| {
            let mut k = vec![0.0; n];
            exec::fill(exec, &mut k, |i| {
                let j = g.neighbor(i, axis, 1);
                m[i] * (inv_eps2 + secant(uv[i], uv[j]))
            });
            k
        })
        .collect();
    let coef = dt / (g.spacing() * g.spacing());
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let faces: f64 = conductance
                .iter()
                .enumerate()
                .map(|(axis, k)| k[i] + k[g.neighbor(i, axis, -1)])
                .sum();
            1.0 + coef * faces
        })
        .collect();
    let apply = |v: &[f64], out: &mut [f64]| {
        model::weighted_divergence_into(exec, &g, &conductance, v, out);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = vi - dt * *o;
        }
    };

    let mut x = uv.to_vec();
    let iterations = cg::pcg(
        exec,
        apply,
        &diag,
        &b,
        &mut x,
        config.linear_solver_tol,
        10 * n,
    )?;

    // The operator annihilates constants, so a uniform shift removes the mean
    // of the residual and restores exact mass balance.
    let defect = (exec::sum(exec, n, |i| b[i]) - exec::sum(exec, n, |i| x[i])) / n as f64;
    x.iter_mut().for_each(|v| *v += defect);

    let b_max = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = config.negativity_tol.max(config.linear_solver_tol * b_max);
    let report = StepReport {
        dt_used: dt,
        max_diffusivity: plan.diffusivity,
        negativity_clipped: 0,
        solver_iterations: iterations,
    };
    finish(u, x, tol, state.t + dt, report)
}

/// IMEX step: `div(uⁿ ∇(p + u/ε²))` implicit, linearised about `uⁿ` with the
/// donor-cell face mobilities of the explicit flux; the drift `-div(u ∇ω_ε∗u)/ε²`
/// and the source are explicit. The linear system is solved
/// matrix-free by preconditioned CG.
pub fn step_semi_implicit(
    state: &ModelState,
    params: &ModelParams,
    kernel: &Kernel,
    config: &SolverConfig,
    dt: f64,
) -> Result<(ModelState, StepReport)> {
    let p = plan(state, params, kernel, Scheme::SemiImplicit)?;
    semi_implicit_with_plan(state, params, config, &p, dt)
}

/// Receives every step and every diagnostic sample of a [`run`].
pub trait Sink {
    fn on_step(
        &mut self,
        _prev: &ModelState,
        _next: &ModelState,
        _report: &StepReport,
    ) -> Result<()> {
        Ok(())
    }

    fn on_sample(&mut self, _record: &DiagnosticsRecord, _state: &ModelState) -> Result<()> {
        Ok(())
    }
}

/// Collects every diagnostics record.
#[derive(Debug, Default)]
pub struct SeriesSink {
    pub records: Vec<DiagnosticsRecord>,
}

impl Sink for SeriesSink {
    fn on_sample(&mut self, record: &DiagnosticsRecord, _state: &ModelState) -> Result<()> {
        self.records.push(record.clone());
        Ok(())
    }
}

/// Keeps the states sampled at the requested times.
#[derive(Debug, Default)]
pub struct SnapshotSink {
    pub times: Vec<f64>,
    pub states: Vec<ModelState>,
}

impl SnapshotSink {
    pub fn new(times: &[f64]) -> Self {
        SnapshotSink {
            times: times.to_vec(),
            states: Vec::new(),
        }
    }
}

impl Sink for SnapshotSink {
    fn on_sample(&mut self, _record: &DiagnosticsRecord, state: &ModelState) -> Result<()> {
        if self.times.iter().any(|&t| same_time(t, state.t)) {
            self.states.push(state.clone());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: ModelState,
    pub steps: usize,
    pub samples: usize,
    pub clipped: usize,
    pub solver_iterations: usize,
    pub min_dt: f64,
    pub max_dt: f64,
    pub warnings: Vec<String>,
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Sample times: multiples of `sample_every`, the extra times and `t_end`.
fn schedule(config: &SolverConfig, extra: &[f64]) -> Vec<f64> {
    let mut times: Vec<f64> = Vec::new();
    let mut k = 1u64;
    loop {
        let t = k as f64 * config.sample_every;
        if t >= config.t_end || same_time(t, config.t_end) {
            break;
        }
        times.push(t);
        k += 1;
    }
    times.extend(
        extra
            .iter()
            .copied()
            .filter(|&t| t > 0.0 && t < config.t_end),
    );
    if config.t_end > 0.0 {
        times.push(config.t_end);
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| same_time(*a, *b));
    times
}

fn admissibility_warnings(initial: &Field, params: &ModelParams) -> Vec<String> {
    let mut warnings = Vec::new();
    if params.source == Source::Growth {
        let c = params.homeostatic_density();
        if initial.mean() > c {
            warnings.push(format!(
                "initial mean {} exceeds p_H^(1/gamma) = {c}",
                initial.mean()
            ));
        }
        if initial.max() > c {
            warnings.push(format!(
                "initial max {} exceeds p_H^(1/gamma) = {c}",
                initial.max()
            ));
        }
    }
    warnings
}

/// Advances `initial` to `config.t_end`, sampling diagnostics every
/// `sample_every` (and at `t = 0` and `t_end`).
pub fn run(
    initial: &Field,
    params: &ModelParams,
    kernel: &Kernel,
    config: &SolverConfig,
    sinks: &mut [&mut dyn Sink],
) -> Result<RunSummary> {
    run_with_times(initial, params, kernel, config, &[], sinks)
}

/// [`run`] with additional sample times that are hit exactly.
pub fn run_with_times(
    initial: &Field,
    params: &ModelParams,
    kernel: &Kernel,
    config: &SolverConfig,
    extra_times: &[f64],
    sinks: &mut [&mut dyn Sink],
) -> Result<RunSummary> {
    params.validate()?;
    config.validate()?;
    if initial.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    initial.check_finite()?;
    let mut state = ModelState::new(initial.clone(), 0.0)?;
    let warnings = admissibility_warnings(initial, params);
    for w in &warnings {
        log::warn!("{w}");
    }

    let emit = |state: &ModelState, pairing: f64, sinks: &mut [&mut dyn Sink]| -> Result<()> {
        let rec = functionals::diagnostics(state, params, kernel, pairing)?;
        for s in sinks.iter_mut() {
            s.on_sample(&rec, state)?;
        }
        Ok(())
    };

    let initial_rate = model::rhs(&state, params, kernel)?;
    let p0 = model::pressure(&state.u, params)?;
    emit(&state, initial_rate.dot(&p0).abs(), sinks)?;

    let mut summary = RunSummary {
        final_state: state.clone(),
        steps: 0,
        samples: 1,
        clipped: 0,
        solver_iterations: 0,
        min_dt: f64::INFINITY,
        max_dt: 0.0,
        warnings,
    };

    for target in schedule(config, extra_times) {
        let mut last: Option<(Field, f64)> = None;
        while state.t < target && !same_time(state.t, target) {
            let p = plan(&state, params, kernel, config.scheme)?;
            let mut dt = dt_from(p.diffusivity, kernel, config);
            let remaining = target - state.t;
            let landing = dt >= remaining;
            if landing {
                dt = remaining;
            }
            let (mut next, report) = match config.scheme {
                Scheme::ExplicitEuler => explicit_with_plan(&state, params, config, &p, dt)?,
                Scheme::SemiImplicit => semi_implicit_with_plan(&state, params, config, &p, dt)?,
            };
            if landing {
                next.t = target;
            }
            for s in sinks.iter_mut() {
                s.on_step(&state, &next, &report)?;
            }
            summary.steps += 1;
            summary.clipped += report.negativity_clipped;
            summary.solver_iterations += report.solver_iterations;
            summary.min_dt = summary.min_dt.min(dt);
            summary.max_dt = summary.max_dt.max(dt);
            let prev = std::mem::replace(&mut state, next);
            last = Some((prev.u, dt));
        }
        state.t = target;
        let pairing = match &last {
            Some((prev, dt)) => functionals::pairing_estimate(prev, &state.u, *dt, params)?,
            None => 0.0,
        };
        emit(&state, pairing, sinks)?;
        summary.samples += 1;
    }

    summary.final_state = state;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::kernel::Profile;

    fn setup(n: usize, eps: f64) -> (TorusGrid, Kernel) {
        let g = TorusGrid::new(1, n, 1.0).unwrap();
        (g, Kernel::new(g, eps, Profile::PolyBump).unwrap())
    }

    #[test]
    fn stable_dt_examples() {
        let (g, k) = setup(64, 0.1);
        let params = ModelParams::new(1.0, 0.7, 0.1, Source::Growth, Variant::Nonlocal).unwrap();
        let config = SolverConfig {
            dt_max: 1.0,
            ..Default::default()
        };
        let zero = ModelState::new(Field::zeros(g), 0.0).unwrap();
        assert_eq!(stable_dt(&zero, &params, &k, &config).unwrap(), 1.0);

        let one = ModelState::new(Field::constant(g, 1.0), 0.0).unwrap();
        let dt = stable_dt(&one, &params, &k, &config).unwrap();
        let h = 1.0 / 64.0;
        let expect = 0.4 * h * h / (2.0 * (1.0 + 1.0 / (0.1 * 0.1)));
        assert!((dt - expect).abs() < 1e-15 * expect.max(1e-300) + 1e-22);
        assert!((dt - 4.834e-7).abs() < 1e-10);

        let (g2, k2) = setup(128, 0.1);
        let one2 = ModelState::new(Field::constant(g2, 1.0), 0.0).unwrap();
        let dt2 = stable_dt(&one2, &params, &k2, &config).unwrap();
        assert!((dt / dt2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_uniform_step() {
        let (g, k) = setup(64, 0.125);
        let params = ModelParams::new(10.0, 0.7, 0.125, Source::Growth, Variant::Nonlocal).unwrap();
        let state = ModelState::new(Field::constant(g, 0.5), 0.0).unwrap();
        let (next, report) =
            step_explicit(&state, &params, &k, &SolverConfig::default(), 1e-3).unwrap();
        let expect = 0.5 + 1e-3 * 0.34951171875;
        assert!(next.u.values().iter().all(|&v| v == expect));
        assert_eq!(report.negativity_clipped, 0);
        assert_eq!(next.t, 1e-3);
    }

    #[test]
    fn schedule_hits_extra_times() {
        let config = SolverConfig {
            t_end: 0.25,
            sample_every: 0.1,
            ..Default::default()
        };
        let s = schedule(&config, &[0.03, 0.14, 0.25, 0.0]);
        assert_eq!(s, vec![0.03, 0.1, 0.14, 0.2, 0.25]);
        let zero = SolverConfig {
            t_end: 0.0,
            ..Default::default()
        };
        assert!(schedule(&zero, &[]).is_empty());
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let (g, k) = setup(32, 0.125);
        let params = ModelParams::new(2.0, 0.7, 0.125, Source::Growth, Variant::Nonlocal).unwrap();
        let u0 = Field::from_fn(g, |x| 0.5 + 0.1 * (6.0 * x[0]).sin()).unwrap();
        let config = SolverConfig {
            t_end: 0.0,
            ..Default::default()
        };
        let mut series = SeriesSink::default();
        let summary = run(&u0, &params, &k, &config, &mut [&mut series]).unwrap();
        assert_eq!(summary.final_state.u, u0);
        assert_eq!(summary.steps, 0);
        assert_eq!(series.records.len(), 1);
        assert_eq!(series.records[0].t, 0.0);
    }

    #[test]
    fn negativity_beyond_tolerance_aborts() {
        let (g, k) = setup(32, 0.125);
        let params = ModelParams::new(2.0, 0.7, 0.125, Source::None, Variant::Nonlocal).unwrap();
        let mut v = vec![0.0; 32];
        v[10] = 1.0;
        let state = ModelState::new(Field::new(g, v).unwrap(), 0.0).unwrap();
        // A step far beyond the CFL limit drains the spike below zero.
        let r = step_explicit(&state, &params, &k, &SolverConfig::default(), 1.0);
        assert!(matches!(r, Err(Error::NegativeDensity { cell: 10, .. })));
    }

    #[test]
    fn semi_implicit_rejects_local_variant() {
        let (g, k) = setup(32, 0.125);
        let params = ModelParams::new(2.0, 0.7, 0.125, Source::None, Variant::Local).unwrap();
        let state = ModelState::new(Field::constant(g, 0.5), 0.0).unwrap();
        let config = SolverConfig {
            scheme: Scheme::SemiImplicit,
            ..Default::default()
        };
        assert!(step_semi_implicit(&state, &params, &k, &config, 1e-6).is_err());
    }

    #[test]
    fn admissibility_warns_but_runs() {
        let (g, k) = setup(32, 0.125);
        let params = ModelParams::new(10.0, 0.7, 0.125, Source::Growth, Variant::Nonlocal).unwrap();
        let config = SolverConfig {
            t_end: 1e-6,
            dt_max: 1e-6,
            ..Default::default()
        };
        let summary = run(&Field::constant(g, 0.99), &params, &k, &config, &mut []).unwrap();
        assert_eq!(summary.warnings.len(), 2);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig {
            cfl: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            cfl: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            dt_max: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }
}
