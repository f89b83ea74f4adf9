//! Time-stepping behaviour: consistency, convergence order, conservation and
//! long-time limits.

use nlch::experiments::{self, InitialCondition, ScenarioSpec};
use nlch::stepper::{self, Scheme, SolverConfig};
use nlch::{Field, Kernel, ModelParams, ModelState, Source, Variant};

struct Case {
    params: ModelParams,
    kernel: Kernel,
    u0: Field,
}

fn case(spec: &ScenarioSpec) -> Case {
    let s = spec.build().unwrap();
    Case {
        params: s.params,
        kernel: s.kernel,
        u0: s.initial,
    }
}

fn advance(c: &Case, scheme: Scheme, dt: f64, steps: usize) -> Field {
    let cfg = SolverConfig::default();
    let mut state = ModelState::new(c.u0.clone(), 0.0).unwrap();
    for _ in 0..steps {
        state = match scheme {
            Scheme::ExplicitEuler => stepper::step_explicit(&state, &c.params, &c.kernel, &cfg, dt),
            Scheme::SemiImplicit => {
                stepper::step_semi_implicit(&state, &c.params, &c.kernel, &cfg, dt)
            }
        }
        .unwrap()
        .0;
    }
    state.u
}

fn l2_diff(a: &Field, b: &Field) -> f64 {
    a.zip_map(b, |x, y| x - y).norm(2.0)
}

#[test]
fn uniform_explicit_steps_are_scalar_euler_steps() {
    let mut spec = experiments::scenario_uniform();
    spec.initial_condition = InitialCondition::Uniform { value: 0.3 };
    let c = case(&spec);
    let dt = 1e-3;
    let u = advance(&c, Scheme::ExplicitEuler, dt, 200);
    let mut s = 0.3f64;
    for _ in 0..200 {
        s += dt * s * (0.7 - s.powf(10.0));
    }
    for v in u.values() {
        assert!((v - s).abs() <= 1e-15, "{v} vs {s}");
    }
}

#[test]
fn schemes_agree_to_second_order_per_step() {
    let c = case(&experiments::scenario_conservative());
    let dt = 1e-5;
    let d1 = l2_diff(
        &advance(&c, Scheme::ExplicitEuler, dt, 1),
        &advance(&c, Scheme::SemiImplicit, dt, 1),
    );
    let d2 = l2_diff(
        &advance(&c, Scheme::ExplicitEuler, dt / 2.0, 1),
        &advance(&c, Scheme::SemiImplicit, dt / 2.0, 1),
    );
    let ratio = d1 / d2;
    assert!(
        ratio > 3.5 && ratio < 4.5,
        "one-step gap ratio {ratio} ({d1:e}, {d2:e})"
    );
}

#[test]
fn explicit_scheme_converges_at_first_order() {
    let c = case(&experiments::scenario_conservative());
    let state = ModelState::new(c.u0.clone(), 0.0).unwrap();
    let cfg = SolverConfig::default();
    let dt = 0.5 * stepper::stable_dt(&state, &c.params, &c.kernel, &cfg).unwrap();
    let n = 40;
    let reference = advance(&c, Scheme::ExplicitEuler, dt / 16.0, 16 * n);
    let e1 = l2_diff(&advance(&c, Scheme::ExplicitEuler, dt, n), &reference);
    let e2 = l2_diff(
        &advance(&c, Scheme::ExplicitEuler, dt / 2.0, 2 * n),
        &reference,
    );
    let e4 = l2_diff(
        &advance(&c, Scheme::ExplicitEuler, dt / 4.0, 4 * n),
        &reference,
    );
    // Richardson-style: successive error differences halve.
    let order = ((e1 - e2) / (e2 - e4)).log2();
    assert!((order - 1.0).abs() < 0.15, "observed order {order}");
}

#[test]
fn semi_implicit_scheme_converges_at_first_order() {
    let c = case(&experiments::scenario_conservative());
    let dt = 2e-4;
    let n = 25;
    let reference = advance(&c, Scheme::SemiImplicit, dt / 16.0, 16 * n);
    let e1 = l2_diff(&advance(&c, Scheme::SemiImplicit, dt, n), &reference);
    let e2 = l2_diff(
        &advance(&c, Scheme::SemiImplicit, dt / 2.0, 2 * n),
        &reference,
    );
    let e4 = l2_diff(
        &advance(&c, Scheme::SemiImplicit, dt / 4.0, 4 * n),
        &reference,
    );
    let order = ((e1 - e2) / (e2 - e4)).log2();
    assert!((order - 1.0).abs() < 0.15, "observed order {order}");
}

#[test]
fn semi_implicit_conserves_mass_without_source() {
    let mut spec = experiments::scenario_figure1();
    spec.params.source = Source::None;
    spec.t_end = 0.05;
    let s = spec.build().unwrap();
    let m0 = s.initial.sum();
    let out = stepper::run(
        &s.initial,
        &s.params,
        &s.kernel,
        &spec.solver(Scheme::SemiImplicit),
        &mut [],
    )
    .unwrap();
    let u = &out.final_state.u;
    assert!(out.steps > 1000);
    assert!(((u.sum() - m0) / m0).abs() <= 1e-13);
    assert!(u.min() >= 0.0);
}

#[test]
fn compact_support_stays_nonnegative_and_spreads() {
    let spec = experiments::scenario_sweep_base();
    let s = spec.build().unwrap();
    let empty0 = s.initial.values().iter().filter(|&&v| v == 0.0).count();
    let cfg = SolverConfig {
        t_end: 0.01,
        ..spec.solver(Scheme::SemiImplicit)
    };
    let out = stepper::run(&s.initial, &s.params, &s.kernel, &cfg, &mut []).unwrap();
    let u = &out.final_state.u;
    assert!(u.min() >= 0.0);
    let empty1 = u.values().iter().filter(|&&v| v == 0.0).count();
    assert!(empty1 < empty0);
}

#[test]
fn runs_are_reproducible() {
    let mut spec = experiments::scenario_figure1();
    spec.t_end = 0.01;
    let cfg = spec.solver(Scheme::SemiImplicit);
    let a = experiments::run_monitored(&spec, &cfg, &[], false).unwrap();
    let b = experiments::run_monitored(&spec, &cfg, &[], false).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(
        a.summary.final_state.u.values(),
        b.summary.final_state.u.values()
    );
}

#[test]
fn growth_reaches_the_homeostatic_density() {
    let mut spec = experiments::scenario_figure1();
    spec.t_end = 50.0;
    spec.sample_every = 1.0;
    let report = experiments::run_longtime(&spec, &spec.solver(Scheme::SemiImplicit)).unwrap();
    let last = report.samples.last().unwrap();
    assert_eq!(last.t, 50.0);
    // ‖u - c‖₁ / |Ω| with |Ω| = 1.
    assert!(last.l1 < 1e-2, "{}", last.l1);
    assert!(report.monitor.is_clean(), "{:?}", report.monitor.violations);
}

#[test]
fn conservative_decay_obeys_the_ckp_bound() {
    let spec = experiments::scenario_conservative();
    let report = experiments::run_longtime(&spec, &spec.solver(Scheme::SemiImplicit)).unwrap();
    assert!(report.entropy_slope.unwrap() < 0.0);
    for s in &report.samples {
        assert!(
            s.l1 <= s.ckp_bound * (1.0 + 1e-12) + 1e-15,
            "t = {}: {} > {}",
            s.t,
            s.l1,
            s.ckp_bound
        );
    }
    let first = report.samples.first().unwrap().l1;
    let last = report.samples.last().unwrap().l1;
    assert!(last < 0.5 * first);
}

#[test]
fn local_limit_gap_shrinks_with_eps() {
    let mut spec = experiments::scenario_conservative();
    spec.t_end = 0.2;
    let report = experiments::run_local_comparison(
        &spec,
        &[1.0, 0.5, 0.25],
        &spec.solver(Scheme::SemiImplicit),
    )
    .unwrap();
    assert!(report.gaps_decreasing(), "{:?}", report.gaps);
    assert!(report.local_entropy_monotone);
    assert_eq!(report.local_records.last().unwrap().t, 0.2);
}

#[test]
fn local_variant_rejects_semi_implicit_stepping() {
    let mut spec = experiments::scenario_conservative();
    spec.params.variant = Variant::Local;
    let c = case(&spec);
    let state = ModelState::new(c.u0.clone(), 0.0).unwrap();
    assert!(stepper::step_semi_implicit(
        &state,
        &c.params,
        &c.kernel,
        &SolverConfig::default(),
        1e-4
    )
    .is_err());
}
