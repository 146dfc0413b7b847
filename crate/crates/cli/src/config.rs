use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xxz_lindblad::{DefectivePolicy, ModelParams, StateSpec, TimeGrid};

use crate::error::CliError;

pub const DEFAULT_SITES: usize = 6;
pub const DEFAULT_COUPLING: f64 = 1.0;
pub const DEFAULT_DELTA: f64 = 1.0;
pub const DEFAULT_T_MAX: f64 = 10.0;
pub const DEFAULT_POINTS: usize = 200;
pub const DEFAULT_OUTPUT: &str = "xxz-relax-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    Evolve,
    Mpemba,
    VerifyMode,
    Sweep,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Evolve => "evolve",
            Task::Mpemba => "mpemba",
            Task::VerifyMode => "verify-mode",
            Task::Sweep => "sweep",
        }
    }

    pub fn parse(name: &str) -> Result<Self, CliError> {
        [Task::Spectrum, Task::Evolve, Task::Mpemba, Task::VerifyMode, Task::Sweep]
            .into_iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| CliError::Config(format!("unknown task `{name}`")))
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "T")]
    Temperature,
    #[serde(rename = "L")]
    Sites,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Delta => "delta",
            SweepParam::Temperature => "T",
            SweepParam::Sites => "L",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Ground,
    Thermal,
    Z2,
    DomainWall,
    MaximallyMixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

impl StateEntry {
    pub fn spec(&self) -> Result<StateSpec, CliError> {
        match (self.kind, self.temperature) {
            (StateKind::Thermal, Some(t)) if t.is_finite() && t > 0.0 => Ok(StateSpec::Thermal { temperature: t }),
            (StateKind::Thermal, Some(t)) => Err(CliError::Config(format!("temperature must be positive, got {t}"))),
            (StateKind::Thermal, None) => Err(CliError::Config("thermal state needs a temperature".into())),
            (kind, Some(_)) => Err(CliError::Config(format!("temperature given for non-thermal state {kind:?}"))),
            (StateKind::Ground, None) => Ok(StateSpec::Ground),
            (StateKind::Z2, None) => Ok(StateSpec::Z2),
            (StateKind::DomainWall, None) => Ok(StateSpec::DomainWall),
            (StateKind::MaximallyMixed, None) => Ok(StateSpec::MaximallyMixed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "L", default = "default_sites")]
    pub sites: usize,
    #[serde(rename = "J", default = "default_coupling")]
    pub coupling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridSection {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub n_points: usize,
    #[serde(default)]
    pub spacing: TimeGrid,
}

impl Default for TimeGridSection {
    fn default() -> Self {
        Self {
            t_max: DEFAULT_T_MAX,
            n_points: DEFAULT_POINTS,
            spacing: TimeGrid::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// Run description as read from a config file, with defaults filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub initial_states: Vec<StateEntry>,
    #[serde(default)]
    pub time_grid: TimeGridSection,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_axis: Option<SweepAxis>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_policy")]
    pub defective: DefectivePolicy,
}

fn default_sites() -> usize {
    DEFAULT_SITES
}
fn default_coupling() -> f64 {
    DEFAULT_COUPLING
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_t_max() -> f64 {
    DEFAULT_T_MAX
}
fn default_points() -> usize {
    DEFAULT_POINTS
}
fn default_output() -> PathBuf {
    PathBuf::from(DEFAULT_OUTPUT)
}
fn default_policy() -> DefectivePolicy {
    DefectivePolicy::Resolve
}

/// One fully specified parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub params: ModelParams<f64>,
    pub states: Vec<StateSpec>,
}

impl RunConfig {
    /// Parses TOML, or JSON when the path ends in `.json`. A JSON manifest
    /// written by a previous run is accepted as well.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let value = match value.get("config") {
                Some(inner) => inner.clone(),
                None => value,
            };
            serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            Self::from_toml(&text).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                other => other,
            })
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn is_sweep(&self) -> bool {
        self.sweep_axis.is_some()
    }

    /// Checks the cross-field rules that serde cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.tasks.is_empty() {
            return Err(CliError::Config("no tasks requested".into()));
        }
        let tasks: BTreeSet<Task> = self.tasks.iter().copied().collect();
        if tasks.len() != self.tasks.len() {
            return Err(CliError::Config("duplicate task".into()));
        }
        if tasks.contains(&Task::Sweep) && self.sweep_axis.is_none() {
            return Err(CliError::Config("task `sweep` needs a sweep_axis".into()));
        }
        if let Some(axis) = &self.sweep_axis {
            if axis.values.is_empty() {
                return Err(CliError::Config("sweep_axis.values is empty".into()));
            }
            if axis.param == SweepParam::Sites && axis.values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
                return Err(CliError::Config("sweep over L needs non-negative integers".into()));
            }
            if axis.param == SweepParam::Temperature
                && !self.initial_states.iter().any(|s| s.kind == StateKind::Thermal)
            {
                return Err(CliError::Config("sweep over T needs a thermal initial state".into()));
            }
        }
        if (tasks.contains(&Task::Evolve) || tasks.contains(&Task::Mpemba)) && self.initial_states.is_empty() {
            return Err(CliError::Config("tasks evolve/mpemba need initial_states".into()));
        }
        if tasks.contains(&Task::Mpemba) && self.initial_states.len() < 2 {
            return Err(CliError::Config("task mpemba needs at least two initial states".into()));
        }
        for s in &self.initial_states {
            s.spec()?;
        }
        let mut labels = BTreeSet::new();
        for s in &self.initial_states {
            if !labels.insert(s.spec()?.to_string()) {
                return Err(CliError::Config(format!("initial state {} listed twice", s.spec()?)));
            }
        }
        if !(self.time_grid.t_max.is_finite() && self.time_grid.t_max > 0.0) {
            return Err(CliError::Config("time_grid.t_max must be positive".into()));
        }
        if self.time_grid.n_points < 2 {
            return Err(CliError::Config("time_grid.n_points must be at least 2".into()));
        }
        self.points().map(|_| ())
    }

    /// The parameter points to run: one without a sweep, else one per value.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let values: Vec<Option<f64>> = match &self.sweep_axis {
            None => vec![None],
            Some(axis) => axis.values.iter().map(|&v| Some(v)).collect(),
        };
        values.into_iter().map(|v| self.point(v)).collect()
    }

    fn point(&self, value: Option<f64>) -> Result<Point, CliError> {
        let m = &self.model;
        let (mut sites, mut alpha, mut delta) = (m.sites, m.alpha, m.delta);
        let mut temperature = None;
        if let (Some(axis), Some(v)) = (&self.sweep_axis, value) {
            match axis.param {
                SweepParam::Alpha => alpha = Some(v),
                SweepParam::Delta => delta = v,
                SweepParam::Temperature => temperature = Some(v),
                SweepParam::Sites => sites = v as usize,
            }
        }
        let alpha = alpha.ok_or_else(|| CliError::Config("model.alpha is required".into()))?;
        let params = ModelParams::new(sites, m.coupling, alpha, delta).map_err(|e| CliError::Config(e.to_string()))?;
        let states = self
            .initial_states
            .iter()
            .map(|s| {
                let entry = match (s.kind, temperature) {
                    (StateKind::Thermal, Some(t)) => StateEntry {
                        kind: StateKind::Thermal,
                        temperature: Some(t),
                    },
                    _ => *s,
                };
                entry.spec()
            })
            .collect::<Result<_, _>>()?;
        Ok(Point { params, states })
    }

    /// Subdirectory name for one sweep value.
    pub fn point_dir(&self, value: f64) -> String {
        let param = self.sweep_axis.as_ref().map_or("point", |a| a.param.name());
        format!("{param}_{value}")
    }
}
