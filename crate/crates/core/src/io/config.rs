//! TOML run configuration.
//!
//! ```toml
//! output_dir = "runs/f1"        # default: runs/<scenario name>
//! snapshot_times = [0.0, 0.25]  # default: none
//! emit_plots = true             # default: true
//!
//! [scenario]
//! name = "figure1"              # canned scenario, or any name when all fields are given
//! # file = "scenario.toml"      # alternatively, a ScenarioSpec file
//! t_end = 0.1                   # any ScenarioSpec field overrides the base
//!
//! [solver]                      # every key optional
//! scheme = "semi-implicit"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{self, GridSpec, InitialCondition, KernelSpec, ScenarioSpec};
use crate::model::{ModelParams, Variant};
use crate::stepper::{Scheme, SolverConfig};

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub snapshot_times: Vec<f64>,
    pub emit_plots: bool,
    pub scenario: ScenarioSpec,
    pub solver: SolverConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    output_dir: Option<PathBuf>,
    #[serde(default)]
    snapshot_times: Vec<f64>,
    emit_plots: Option<bool>,
    scenario: RawScenario,
    #[serde(default)]
    solver: RawSolver,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    file: Option<PathBuf>,
    grid: Option<GridSpec>,
    kernel: Option<KernelSpec>,
    params: Option<ModelParams>,
    initial_condition: Option<InitialCondition>,
    t_end: Option<f64>,
    sample_every: Option<f64>,
    admissible: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    scheme: Option<Scheme>,
    cfl: Option<f64>,
    dt_max: Option<f64>,
    t_end: Option<f64>,
    negativity_tol: Option<f64>,
    linear_solver_tol: Option<f64>,
    sample_every: Option<f64>,
}

/// Canned scenarios addressable by name.
pub fn canned_scenario(name: &str) -> Option<ScenarioSpec> {
    match name {
        "figure1" => Some(experiments::scenario_figure1()),
        "sweep" => Some(experiments::scenario_sweep_base()),
        "conservative" => Some(experiments::scenario_conservative()),
        "uniform" => Some(experiments::scenario_uniform()),
        _ => None,
    }
}

fn config_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads a standalone ScenarioSpec file.
pub fn parse_scenario_file(path: &Path) -> Result<ScenarioSpec> {
    let text = fs::read_to_string(path).map_err(|e| config_error(path, e.to_string()))?;
    toml::from_str(&text).map_err(|e| config_error(path, e.to_string()))
}

impl RawScenario {
    fn resolve(self, origin: &Path) -> Result<ScenarioSpec> {
        let base = match (&self.file, &self.name) {
            (Some(file), _) => {
                let file = origin.parent().map_or(file.clone(), |d| d.join(file));
                Some(parse_scenario_file(&file)?)
            }
            (None, Some(name)) => canned_scenario(name),
            (None, None) => {
                return Err(config_error(origin, "scenario needs a `name` or a `file`"))
            }
        };
        let missing = |key: &str| {
            config_error(
                origin,
                format!(
                    "scenario '{}' is not a canned scenario; missing key `{key}`",
                    self.name.as_deref().unwrap_or("")
                ),
            )
        };
        let spec = match base {
            Some(mut s) => {
                if let Some(name) = self.name {
                    s.name = name;
                }
                if let Some(v) = self.grid {
                    s.grid = v;
                }
                if let Some(v) = self.kernel {
                    s.kernel = v;
                }
                if let Some(v) = self.params {
                    s.params = v;
                }
                if let Some(v) = self.initial_condition {
                    s.initial_condition = v;
                }
                if let Some(v) = self.t_end {
                    s.t_end = v;
                }
                if let Some(v) = self.sample_every {
                    s.sample_every = v;
                }
                if let Some(v) = self.admissible {
                    s.admissible = v;
                }
                s
            }
            None => ScenarioSpec {
                name: self.name.clone().unwrap_or_default(),
                grid: self.grid.ok_or_else(|| missing("grid"))?,
                kernel: self.kernel.unwrap_or_default(),
                params: self.params.ok_or_else(|| missing("params"))?,
                initial_condition: self
                    .initial_condition
                    .clone()
                    .ok_or_else(|| missing("initial_condition"))?,
                t_end: self.t_end.ok_or_else(|| missing("t_end"))?,
                sample_every: self.sample_every.ok_or_else(|| missing("sample_every"))?,
                admissible: self.admissible.unwrap_or(false),
            },
        };
        Ok(spec)
    }
}

/// Scheme used when the config does not name one: semi-implicit where it is
/// available, explicit for the local variant.
pub fn default_scheme(params: &ModelParams) -> Scheme {
    match params.variant {
        Variant::Nonlocal => Scheme::SemiImplicit,
        Variant::Local => Scheme::ExplicitEuler,
    }
}

impl RawSolver {
    fn resolve(self, scenario: &ScenarioSpec) -> SolverConfig {
        let mut s = scenario.solver(
            self.scheme
                .unwrap_or_else(|| default_scheme(&scenario.params)),
        );
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { s.$f = v; } )* };
        }
        take!(
            cfl,
            dt_max,
            t_end,
            negativity_tol,
            linear_solver_tol,
            sample_every
        );
        s
    }
}

impl RunConfig {
    /// Parses TOML text; `origin` names the source in errors and anchors
    /// relative scenario files.
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| config_error(origin, e.to_string()))?;
        let scenario = raw.scenario.resolve(origin)?;
        let solver = raw.solver.resolve(&scenario);
        let config = RunConfig {
            output_dir: raw
                .output_dir
                .unwrap_or_else(|| Path::new("runs").join(&scenario.name)),
            snapshot_times: raw.snapshot_times,
            emit_plots: raw.emit_plots.unwrap_or(true),
            scenario,
            solver,
        };
        config.validate()?;
        Ok(config)
    }

    /// A config for `scenario` with every other field at its default.
    pub fn for_scenario(scenario: ScenarioSpec) -> Self {
        let solver = scenario.solver(default_scheme(&scenario.params));
        RunConfig {
            output_dir: Path::new("runs").join(&scenario.name),
            snapshot_times: Vec::new(),
            emit_plots: true,
            scenario,
            solver,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.params.validate()?;
        self.scenario.grid.build()?;
        self.solver.validate()?;
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(t >= 0.0 && t <= self.solver.t_end))
        {
            return Err(Error::InvalidParams(format!(
                "snapshot time {t} outside [0, t_end = {}]",
                self.solver.t_end
            )));
        }
        Ok(())
    }

    /// TOML echo with every default spelled out; parsing it gives back `self`.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| config_error(path, e.to_string()))?;
    RunConfig::from_toml_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::from_toml_str(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse("[scenario]\nname = \"figure1\"\n").unwrap();
        assert_eq!(c.scenario, experiments::scenario_figure1());
        assert_eq!(c.solver.scheme, Scheme::SemiImplicit);
        assert_eq!(c.solver.t_end, 0.25);
        assert_eq!(c.output_dir, PathBuf::from("runs/figure1"));
        assert!(c.emit_plots);
    }

    #[test]
    fn unknown_key_is_named_with_line() {
        let err =
            parse("emit_plots = false\n[scenario]\nname = \"figure1\"\nbogus = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus"), "{msg}");
        assert!(msg.contains("line 4"), "{msg}");
    }

    #[test]
    fn small_gamma_is_rejected() {
        let text = "[scenario]\nname = \"figure1\"\n[scenario.params]\ngamma = 0.5\np_h = 0.7\neps = 0.08\n";
        assert!(matches!(parse(text), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn roundtrip() {
        let text = "snapshot_times = [0.0, 0.1]\n[scenario]\nname = \"conservative\"\nt_end = 0.5\n[solver]\ncfl = 0.3\n";
        let c = parse(text).unwrap();
        let again = parse(&c.to_toml_string()).unwrap();
        assert_eq!(c, again);
        let custom = RunConfig {
            scenario: ScenarioSpec {
                name: "custom".into(),
                ..c.scenario.clone()
            },
            ..c
        };
        assert_eq!(parse(&custom.to_toml_string()).unwrap(), custom);
    }

    #[test]
    fn snapshot_times_must_fit_horizon() {
        assert!(parse("snapshot_times = [0.3]\n[scenario]\nname = \"figure1\"\n").is_err());
    }
}
