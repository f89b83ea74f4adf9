use std::fs;

use nlch::experiments::{self, InitialCondition};
use nlch::io::{self, config, series, snapshot};
use nlch::stepper::Scheme;
use nlch::{Error, Field, ModelParams, ModelState, Source, TorusGrid, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn snapshot_file_round_trips_a_random_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (dim, n) in [(1, 128), (2, 32)] {
        let g = TorusGrid::new(dim, n, 2.5).unwrap();
        let v: Vec<f64> = (0..g.cells()).map(|_| rng.gen::<f64>()).collect();
        let state = ModelState::new(Field::new(g, v).unwrap(), 0.125).unwrap();
        let params = ModelParams::new(12.0, 0.6, 0.3, Source::Growth, Variant::Nonlocal).unwrap();
        let path = dir.path().join(format!("s{dim}.bin"));
        snapshot::write_snapshot(&path, &snapshot::Snapshot::new(&state, &params)).unwrap();
        let back = snapshot::read_snapshot(&path).unwrap();
        assert_eq!(back.field.values(), state.u.values());
        assert_eq!(back.field.grid(), state.u.grid());
        assert_eq!(
            (back.t, back.gamma, back.eps, back.p_h),
            (0.125, 12.0, 0.3, 0.6)
        );
    }
}

#[test]
fn truncated_snapshot_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = TorusGrid::new(1, 16, 1.0).unwrap();
    let state = ModelState::new(Field::new(g, vec![0.5; 16]).unwrap(), 0.0).unwrap();
    let params = ModelParams::new(2.0, 0.7, 0.25, Source::None, Variant::Nonlocal).unwrap();
    let bytes = snapshot::Snapshot::new(&state, &params).to_bytes();
    let path = dir.path().join("cut.bin");
    fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(
        snapshot::read_snapshot(&path),
        Err(Error::Snapshot(_))
    ));
}

#[test]
fn series_file_round_trips_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = experiments::scenario_figure1();
    spec.t_end = 0.02;
    spec.sample_every = 0.005;
    let run =
        experiments::run_monitored(&spec, &spec.solver(Scheme::SemiImplicit), &[], false).unwrap();
    let path = dir.path().join("series.csv");
    io::write_series(&run.records, &path).unwrap();
    let back = io::read_series(&path).unwrap();
    assert_eq!(back.len(), run.records.len());
    for (a, b) in back.iter().zip(&run.records) {
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
    let schema = fs::read_to_string(series::schema_path(&path)).unwrap();
    assert_eq!(schema.lines().count(), series::SCHEMA.len() + 1);
}

#[test]
fn config_file_overrides_a_canned_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(
        &path,
        r#"
output_dir = "out/x"
snapshot_times = [0.0, 0.5]

[scenario]
name = "conservative"
t_end = 1.0
initial_condition = { kind = "uniform", value = 0.4 }

[solver]
cfl = 0.25
"#,
    )
    .unwrap();
    let cfg = config::parse_config(&path).unwrap();
    assert_eq!(cfg.scenario.t_end, 1.0);
    assert_eq!(cfg.solver.t_end, 1.0);
    assert_eq!(cfg.solver.cfl, 0.25);
    assert_eq!(cfg.scenario.params.source, Source::None);
    assert!(
        matches!(cfg.scenario.initial_condition, InitialCondition::Uniform { value } if value == 0.4)
    );

    let echo = dir.path().join("echo.toml");
    fs::write(&echo, cfg.to_toml_string()).unwrap();
    let again = config::parse_config(&echo).unwrap();
    assert_eq!(again.to_toml_string(), cfg.to_toml_string());
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(config::parse_config(dir.path().join("absent.toml")).is_err());
}
