//! Experiment configuration: TOML schema, preset merging and `--set`
//! overrides.
//!
//! A config file may name a `preset`; its table is loaded first and the
//! file's own keys are merged on top (tables merge recursively, everything
//! else is replaced). Dotted `--set` overrides are applied last.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use scramble::hamiltonian::{Exponent, Family, HamiltonianSpec};
use scramble::propagation::{KrylovConfig, Method, NumericalLimits};
use scramble::{LocalPauli, LocalState, PauliKind, Region};

use crate::error::{Result, RunError};
use crate::presets;

/// Measurement pipeline driven by a config.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// `C_r(t)` and `F_r(t)` fields with threshold contours.
    Commutator,
    /// Subsystem entropy after a quench.
    Entropy,
    /// Entropy of `W(t)|psi0>` next to `C_r(t)` at the edges of `B`.
    OperatorState,
    /// Operator density `p_l(t)` and operator size.
    OperatorSize,
    /// Total magnetization and local trace distance at long times.
    Thermalization,
    /// Fitted butterfly and entanglement velocities.
    Velocities,
    /// Commutator and operator-state entropy fields over all cuts.
    Lightcones,
    /// Operator-state entropy and operator size across system sizes.
    FiniteSize,
}

impl Pipeline {
    /// Whether the pipeline needs dense `2^N x 2^N` operators.
    pub fn operator_picture(self) -> bool {
        matches!(self, Pipeline::OperatorSize | Pipeline::FiniteSize)
    }
}

/// One Hamiltonian variant; the chain length comes from the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Exponent>,
    #[serde(default)]
    pub kac_normalized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_z: Option<f64>,
    /// Name used in the `model` column; defaults to a generated label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ModelConfig {
    pub fn spec(&self, n_qubits: usize) -> HamiltonianSpec {
        let mut spec = match self.family {
            Family::Local => HamiltonianSpec::local(n_qubits),
            Family::Powerlaw => HamiltonianSpec::powerlaw(
                n_qubits,
                self.alpha.unwrap_or(Exponent::Infinite),
                self.kac_normalized,
            ),
            Family::FastScrambler => HamiltonianSpec::fast_scrambler(n_qubits),
        };
        if let Some(a) = self.alpha {
            spec.alpha = a;
        }
        if let Some(g) = self.gamma {
            spec.gamma = g;
        }
        if let Some(j) = self.j {
            spec.j = j;
        }
        if let Some(h) = self.h_x {
            spec.h_x = h;
        }
        if let Some(h) = self.h_z {
            spec.h_z = h;
        }
        spec
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.spec(2).label())
    }
}

/// Either an explicit list of times or `start..=stop` in steps of `step`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl TimeGrid {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Self {
            points: None,
            start: Some(start),
            stop: Some(stop),
            step: Some(step),
        }
    }

    /// Expands the grid; times are `start + k * step` so no rounding drift
    /// accumulates.
    pub fn times(&self) -> Result<Vec<f64>> {
        let times = match (&self.points, self.start, self.stop, self.step) {
            (Some(p), None, None, None) => p.clone(),
            (None, start, Some(stop), Some(step)) => {
                let start = start.unwrap_or(0.0);
                if !(step > 0.0) || !step.is_finite() {
                    return Err(RunError::Schema(format!("time.step must be > 0, got {step}")));
                }
                if !(stop >= start) {
                    return Err(RunError::Schema(format!(
                        "time.stop ({stop}) is before time.start ({start})"
                    )));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=count).map(|k| start + k as f64 * step).collect()
            }
            (Some(_), ..) => {
                return Err(RunError::Schema(
                    "time: give either `points` or `start`/`stop`/`step`, not both".into(),
                ))
            }
            _ => {
                return Err(RunError::Schema(
                    "time: expected `points` or `stop` and `step`".into(),
                ))
            }
        };
        if times.is_empty() {
            return Err(RunError::Schema("time grid is empty".into()));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(RunError::Schema("time grid values must be finite and >= 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(RunError::Schema("time grid must be strictly increasing".into()));
        }
        Ok(times)
    }
}

/// Seed operator `W` and probe operators `V_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub w_kind: PauliKind,
    pub w_site: usize,
    pub v_kind: PauliKind,
    /// Probe sites; empty means every site.
    pub v_sites: Vec<usize>,
    pub ensemble: EnsembleChoice,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            w_kind: PauliKind::Y,
            w_site: 1,
            v_kind: PauliKind::Y,
            v_sites: Vec::new(),
            ensemble: EnsembleChoice::PureState,
        }
    }
}

impl ProbeConfig {
    pub fn w(&self) -> LocalPauli {
        LocalPauli::new(self.w_kind, self.w_site)
    }

    pub fn sites(&self, n_qubits: usize) -> Vec<usize> {
        if self.v_sites.is_empty() {
            (1..=n_qubits).collect()
        } else {
            self.v_sites.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleChoice {
    #[default]
    PureState,
    InfiniteTemperature,
}

/// Velocity fit windows; unset entries use the library defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Inclusive site range for the butterfly velocity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub butterfly_sites: Option<[usize; 2]>,
    /// Time window for the entanglement velocity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entanglement_window: Option<[f64; 2]>,
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name of the preset this config was built from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub pipeline: Pipeline,
    pub n_qubits: usize,
    pub models: Vec<ModelConfig>,
    #[serde(default = "default_initial_state")]
    pub initial_state: LocalState,
    #[serde(default)]
    pub probe: ProbeConfig,
    pub time: TimeGrid,
    /// Subsystem `A`; the default depends on the pipeline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<usize>>,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    /// Chain lengths for the finite-size pipeline.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<usize>,
    /// Long-time averaging window `[lo, hi]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average_window: Option<[f64; 2]>,
    #[serde(default)]
    pub fit: FitConfig,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub limits: NumericalLimits,
    #[serde(default)]
    pub krylov: KrylovConfig,
    /// Worker threads; the command line and environment take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_initial_state() -> LocalState {
    LocalState::YPlus
}

fn default_thresholds() -> Vec<f64> {
    vec![0.5]
}

impl ExperimentConfig {
    /// Chain lengths the run touches.
    pub fn all_sizes(&self) -> Vec<usize> {
        if self.pipeline == Pipeline::FiniteSize {
            self.sizes.clone()
        } else {
            vec![self.n_qubits]
        }
    }

    /// Subsystem for entropies at chain length `n`.
    pub fn region_for(&self, n: usize) -> Result<Region> {
        match (&self.region, self.pipeline) {
            (Some(sites), _) => Ok(Region::new(sites.clone(), n)?),
            (None, Pipeline::Thermalization) => Ok(Region::span(n / 2, n / 2 + 1, n)?),
            (None, _) => Ok(Region::left_half(n)?),
        }
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        let sizes = self.all_sizes();
        if sizes.is_empty() {
            return Err(RunError::Schema("sizes: the finite_size pipeline needs at least one size".into()));
        }
        // resource limits first so oversized runs report the offending N
        for &n in &sizes {
            self.check_resources(n)?;
        }
        if self.models.is_empty() {
            return Err(RunError::Schema("models: at least one model is required".into()));
        }
        self.time.times()?;
        self.krylov.validate()?;
        for t in &self.thresholds {
            if !t.is_finite() {
                return Err(RunError::Schema(format!("thresholds: {t} is not finite")));
            }
        }
        if self.thresholds.is_empty()
            && matches!(self.pipeline, Pipeline::Commutator | Pipeline::Velocities | Pipeline::Lightcones)
        {
            return Err(RunError::Schema("thresholds: at least one threshold is required".into()));
        }
        if let Some([lo, hi]) = self.average_window {
            if !(hi > lo) {
                return Err(RunError::Schema(format!("average_window: [{lo}, {hi}] is empty")));
            }
        }
        if let Some([lo, hi]) = self.fit.entanglement_window {
            if !(hi > lo) {
                return Err(RunError::Schema(format!("fit.entanglement_window: [{lo}, {hi}] is empty")));
            }
        }
        if let Some([lo, hi]) = self.fit.butterfly_sites {
            if hi < lo {
                return Err(RunError::Schema(format!("fit.butterfly_sites: [{lo}, {hi}] is empty")));
            }
        }
        if self.workers == Some(0) {
            return Err(RunError::Schema("workers must be at least 1".into()));
        }
        if self.probe.w_kind == PauliKind::Identity {
            return Err(RunError::Schema("probe.w_kind must be X, Y or Z".into()));
        }
        for &n in &sizes {
            for (i, m) in self.models.iter().enumerate() {
                m.spec(n)
                    .validate()
                    .map_err(|e| RunError::Schema(format!("models[{i}]: {e}")))?;
            }
            self.probe
                .w()
                .check(n)
                .map_err(|e| RunError::Schema(format!("probe.w_site: {e}")))?;
            if self.pipeline != Pipeline::FiniteSize {
                for &s in &self.probe.v_sites {
                    LocalPauli::new(self.probe.v_kind, s)
                        .check(n)
                        .map_err(|e| RunError::Schema(format!("probe.v_sites: {e}")))?;
                }
            }
            if self.region.is_some() || self.pipeline != Pipeline::Commutator {
                self.region_for(n)
                    .map_err(|e| RunError::Schema(format!("region: {e}")))?;
            }
        }
        Ok(())
    }

    fn check_resources(&self, n: usize) -> Result<()> {
        let dense = self.pipeline.operator_picture()
            || self.probe.ensemble == EnsembleChoice::InfiniteTemperature
            || self.method == Method::Spectral;
        let (limit, what) = if self.pipeline.operator_picture()
            || self.probe.ensemble == EnsembleChoice::InfiniteTemperature
        {
            (self.limits.dense_operator_qubits, "dense operator evolution")
        } else if self.method == Method::Spectral {
            (self.limits.eigen_qubits, "full diagonalization")
        } else {
            (self.limits.krylov_qubits, "state-vector propagation")
        };
        if n > limit {
            let bytes = if dense {
                // a 2^N x 2^N complex matrix
                16.0 * 4f64.powi(n as i32)
            } else {
                16.0 * 2f64.powi(n as i32)
            };
            return Err(RunError::Resource(format!(
                "N = {n} exceeds the {what} limit of {limit} qubits (one {} would need {:.3e} bytes); \
                 raise `limits` explicitly only if the memory is available",
                if dense { "matrix" } else { "state" },
                bytes
            )));
        }
        Ok(())
    }
}

/// Reads a TOML file into a table.
pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    text.parse::<Table>()
        .map_err(|e| RunError::Schema(format!("{}: {e}", path.display())))
}

/// Recursively merges `overlay` into `base`.
pub fn merge(base: &mut Table, overlay: Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Parses the right-hand side of a `--set` override as a TOML value, falling
/// back to a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `path.to.key=value`; numeric segments index into arrays.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| RunError::Schema(format!("override `{assignment}` is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(RunError::Schema(format!("override key `{path}` is malformed")));
    }
    let value = parse_value(raw.trim());
    let mut slot: &mut Value = table
        .entry(keys[0].to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    for key in &keys[1..] {
        slot = match slot {
            Value::Table(t) => t.entry(key.to_string()).or_insert_with(|| Value::Table(Table::new())),
            Value::Array(a) => {
                let idx: usize = key
                    .parse()
                    .map_err(|_| RunError::Schema(format!("override `{path}`: `{key}` is not an array index")))?;
                let len = a.len();
                a.get_mut(idx).ok_or_else(|| {
                    RunError::Schema(format!("override `{path}`: index {idx} out of range (length {len})"))
                })?
            }
            _ => {
                return Err(RunError::Schema(format!(
                    "override `{path}`: `{key}` is below a non-table value"
                )))
            }
        };
    }
    *slot = value;
    Ok(())
}

/// Builds the raw table of a run: preset (from the file's `preset` key or
/// `preset_name`), then the file, then overrides.
pub fn resolve_table(file: Option<&Path>, preset_name: Option<&str>, overrides: &[String]) -> Result<Table> {
    let user = match file {
        Some(p) => read_table(p)?,
        None => Table::new(),
    };
    let name = match (preset_name, user.get("preset")) {
        (Some(n), _) => Some(n.to_string()),
        (None, Some(Value::String(n))) => Some(n.clone()),
        (None, Some(other)) => {
            return Err(RunError::Schema(format!("preset: expected a string, got {}", other.type_str())))
        }
        (None, None) => None,
    };
    let mut table = match &name {
        Some(n) => presets::table(n)?,
        None => Table::new(),
    };
    merge(&mut table, user);
    if let Some(n) = name {
        table.insert("preset".into(), Value::String(n));
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    Ok(table)
}

/// Deserializes and validates a table; errors name the offending key path.
pub fn from_table(table: Table) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_path_to_error::deserialize(Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            RunError::Schema(inner.to_string())
        } else {
            RunError::Schema(format!("{path}: {inner}"))
        }
    })?;
    config.validate()?;
    Ok(config)
}

/// Loads a config file (and/or preset) with overrides.
pub fn load(file: Option<&Path>, preset_name: Option<&str>, overrides: &[String]) -> Result<ExperimentConfig> {
    from_table(resolve_table(file, preset_name, overrides)?)
}
