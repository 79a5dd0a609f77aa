//! Scenario files: JSON documents holding one or more named runs.
//!
//! ```json
//! { "version": 1,
//!   "scenarios": [ { "name": "fig03", "dynamics": { ... } } ] }
//! ```
//!
//! Each scenario carries exactly one of `spectrum`, `dynamics` or
//! `intensity`. Angles are radians.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use subchain::radiation::{evanescence_plane, Vec3, DEFAULT_DIPOLE_AXIS, EVANESCENCE_RESOLUTION};
use subchain::{ChainConfig, DipoleState, DriveConfig, IntegrationConfig, Model, PlaneSpec};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug)]
pub enum ScenarioError {
    Io { path: PathBuf, source: std::io::Error },
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    Invalid { path: PathBuf, scenario: String, message: String },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            ScenarioError::Parse { path, line, column, message } => {
                write!(f, "{}:{line}:{column}: {message}", path.display())
            }
            ScenarioError::Invalid { path, scenario, message } => {
                write!(f, "{}: scenario '{scenario}': {message}", path.display())
            }
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<IntensityTask>,
}

/// The one task a scenario runs.
#[derive(Debug, Clone, Copy)]
pub enum Task<'a> {
    Spectrum(&'a SpectrumTask),
    Dynamics(&'a DynamicsTask),
    Intensity(&'a IntensityTask),
}

impl Scenario {
    pub fn task(&self) -> Option<Task<'_>> {
        match (&self.spectrum, &self.dynamics, &self.intensity) {
            (Some(s), None, None) => Some(Task::Spectrum(s)),
            (None, Some(d), None) => Some(Task::Dynamics(d)),
            (None, None, Some(i)) => Some(Task::Intensity(i)),
            _ => None,
        }
    }
}

fn default_grid_points() -> usize {
    subchain::spectrum::DEFAULT_GRID_POINTS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumTask {
    pub n_atoms: usize,
    pub a: f64,
    pub models: Vec<Model>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// 1-based site index.
    SingleExcited(usize),
    MostSubradiant,
    TimedDicke,
    Uniform,
    Zero,
    /// JSON array of `[re, im]` pairs, path relative to the scenario file.
    Explicit(PathBuf),
}

impl InitialState {
    pub fn build(&self, cfg: &ChainConfig, base: &Path) -> anyhow::Result<DipoleState> {
        use subchain::states;
        Ok(match self {
            InitialState::SingleExcited(j) => states::single_excited(cfg, *j)?,
            InitialState::MostSubradiant => states::most_subradiant(cfg)?,
            InitialState::TimedDicke => states::timed_dicke(cfg),
            InitialState::Uniform => states::uniform(cfg),
            InitialState::Zero => DipoleState::zero(cfg.n_atoms),
            InitialState::Explicit(file) => {
                let path = base.join(file);
                let text = fs::read_to_string(&path)
                    .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
                let pairs: Vec<[f64; 2]> = serde_json::from_str(&text).map_err(|e| {
                    anyhow::anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column())
                })?;
                let state = DipoleState::new(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect(), 0.0)?;
                state.check_chain(cfg)?;
                state
            }
        })
    }
}

/// Laser settings; an absent `t_off` leaves the laser on for the whole run.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    #[serde(default)]
    pub rabi: f64,
    #[serde(default)]
    pub detuning: f64,
    #[serde(default)]
    pub t_off: Option<f64>,
}

impl DriveSpec {
    pub fn resolve(&self) -> DriveConfig {
        DriveConfig { rabi: self.rabi, detuning: self.detuning, t_off: self.t_off.unwrap_or(f64::INFINITY) }
    }
}

fn default_dt() -> f64 {
    IntegrationConfig::DEFAULT_DT
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSpec {
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl IntegrationSpec {
    pub fn resolve(&self) -> IntegrationConfig {
        IntegrationConfig::new(self.dt, self.t_end).with_snapshots(self.snapshot_times.clone())
    }
}

fn default_stride() -> usize {
    1
}

fn default_axis() -> Vec3 {
    DEFAULT_DIPOLE_AXIS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OutputSpec {
    /// `P(x, t)` at every snapshot time, one column per snapshot.
    SpectralDensitySeries {
        #[serde(default = "default_grid_points")]
        grid_points: usize,
    },
    /// `⟨|β|²⟩` at every `stride`-th integration step.
    MeanExcitation {
        #[serde(default = "default_stride")]
        stride: usize,
    },
    /// Re and Im of every `β_j` at every snapshot time.
    BetaSnapshots {},
    /// Radiated intensity of the final state.
    FieldMap {
        plane: PlaneSpec,
        #[serde(default = "default_axis")]
        dipole_axis: Vec3,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsTask {
    pub chain: ChainConfig,
    pub initial_state: InitialState,
    #[serde(default)]
    pub drive: DriveSpec,
    pub integration: IntegrationSpec,
    pub outputs: Vec<OutputSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntensityTask {
    pub chain: ChainConfig,
    pub state: InitialState,
    /// Defaults to the plane x = 5d spanning the chain and its surroundings.
    #[serde(default)]
    pub plane: Option<PlaneSpec>,
    #[serde(default = "default_axis")]
    pub dipole_axis: Vec3,
}

impl IntensityTask {
    pub fn resolved_plane(&self) -> PlaneSpec {
        self.plane.unwrap_or_else(|| evanescence_plane(&self.chain, EVANESCENCE_RESOLUTION))
    }
}

/// A parsed file plus the directory its relative paths resolve against.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub path: PathBuf,
    pub base: PathBuf,
    pub file: ScenarioFile,
}

pub fn parse(path: &Path, text: &str) -> Result<ScenarioFile, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.version != SCENARIO_VERSION {
        return Err(ScenarioError::Parse {
            path: path.to_owned(),
            line: 1,
            column: 1,
            message: format!("unsupported version {} (expected {SCENARIO_VERSION})", file.version),
        });
    }
    Ok(file)
}

pub fn load(path: &Path) -> Result<Loaded, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_owned(), source })?;
    let file = parse(path, &text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let loaded = Loaded { path: path.to_owned(), base, file };
    loaded.check()?;
    Ok(loaded)
}

impl Loaded {
    /// Static checks that need no computation.
    fn check(&self) -> Result<(), ScenarioError> {
        let invalid = |scenario: &Scenario, message: String| ScenarioError::Invalid {
            path: self.path.clone(),
            scenario: scenario.name.clone(),
            message,
        };
        if self.file.scenarios.is_empty() {
            return Err(ScenarioError::Parse {
                path: self.path.clone(),
                line: 1,
                column: 1,
                message: "no scenarios".into(),
            });
        }
        let mut names = std::collections::HashSet::new();
        for s in &self.file.scenarios {
            if s.name.is_empty() || s.name.contains(['/', '\\']) {
                return Err(invalid(s, "name must be non-empty and contain no path separators".into()));
            }
            if !names.insert(&s.name) {
                return Err(invalid(s, "duplicate scenario name".into()));
            }
            let task = s
                .task()
                .ok_or_else(|| invalid(s, "exactly one of spectrum, dynamics, intensity is required".into()))?;
            let explicit = match task {
                Task::Spectrum(t) => {
                    if t.models.is_empty() {
                        return Err(invalid(s, "models must not be empty".into()));
                    }
                    for m in &t.models {
                        ChainConfig::new(t.n_atoms, t.a, *m).map_err(|e| invalid(s, e.to_string()))?;
                    }
                    None
                }
                Task::Dynamics(t) => {
                    t.chain.validate().map_err(|e| invalid(s, e.to_string()))?;
                    t.drive.resolve().validate().map_err(|e| invalid(s, e.to_string()))?;
                    t.integration.resolve().validate().map_err(|e| invalid(s, e.to_string()))?;
                    if t.outputs.is_empty() {
                        return Err(invalid(s, "outputs must not be empty".into()));
                    }
                    for o in &t.outputs {
                        match o {
                            OutputSpec::SpectralDensitySeries { .. } | OutputSpec::BetaSnapshots {}
                                if t.integration.snapshot_times.is_empty() =>
                            {
                                return Err(invalid(s, "snapshot outputs need integration.snapshot_times".into()));
                            }
                            OutputSpec::MeanExcitation { stride: 0 } => {
                                return Err(invalid(s, "stride must be at least 1".into()));
                            }
                            OutputSpec::FieldMap { plane, .. } => {
                                plane.validate(&t.chain).map_err(|e| invalid(s, e.to_string()))?;
                            }
                            _ => {}
                        }
                    }
                    Some(&t.initial_state)
                }
                Task::Intensity(t) => {
                    t.chain.validate().map_err(|e| invalid(s, e.to_string()))?;
                    t.resolved_plane().validate(&t.chain).map_err(|e| invalid(s, e.to_string()))?;
                    Some(&t.state)
                }
            };
            if let Some(InitialState::Explicit(file)) = explicit {
                let p = self.base.join(file);
                if !p.is_file() {
                    return Err(invalid(s, format!("state file {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "version": 1,
  "scenarios": [
    {
      "name": "decay",
      "dynamics": {
        "chain": { "n_atoms": 4, "a": 1.0, "model": "scalar" },
        "initial_state": { "single_excited": 2 },
        "integration": { "t_end": 1.0, "snapshot_times": [0.5] },
        "outputs": [ { "mean_excitation": {} }, { "beta_snapshots": {} } ]
      }
    }
  ]
}"#;

    #[test]
    fn parses_minimal_file() {
        let f = parse(Path::new("m.json"), MINIMAL).unwrap();
        let s = &f.scenarios[0];
        let Some(Task::Dynamics(d)) = s.task() else { panic!("not dynamics") };
        assert_eq!(d.initial_state, InitialState::SingleExcited(2));
        assert_eq!(d.integration.dt, 1e-3);
        assert!(d.drive.resolve().t_off.is_infinite());
        assert!(matches!(d.outputs[0], OutputSpec::MeanExcitation { stride: 1 }));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let broken = MINIMAL.replace("\"t_end\": 1.0", "\"t_end\": 1.0,,");
        let err = parse(Path::new("m.json"), &broken).unwrap_err();
        let ScenarioError::Parse { line, .. } = err else { panic!("{err}") };
        assert_eq!(line, 9);

        let typo = MINIMAL.replace("\"initial_state\"", "\"initial_stat\"");
        let err = parse(Path::new("m.json"), &typo).unwrap_err();
        assert!(err.to_string().starts_with("m.json:8:"), "{err}");
    }

    #[test]
    fn version_is_checked() {
        let other = MINIMAL.replace("\"version\": 1", "\"version\": 2");
        assert!(parse(Path::new("m.json"), &other).is_err());
    }
}
