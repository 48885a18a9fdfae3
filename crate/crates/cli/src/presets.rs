//! Built-in experiment recipes. Each is a TOML table that user files and
//! `--set` overrides are merged onto.

use toml::Table;

use crate::error::{Result, RunError};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

/// The four Hamiltonians compared throughout: local, Kac-normalized
/// `alpha = 1.1`, fast scrambler and unnormalized `alpha = 0.4`.
const FOUR_MODELS: &str = r#"
[[models]]
family = "local"
label = "local"

[[models]]
family = "powerlaw"
alpha = 1.1
kac_normalized = true
label = "alpha=1.1,kac"

[[models]]
family = "fast_scrambler"
label = "fast_scrambler"

[[models]]
family = "powerlaw"
alpha = 0.4
kac_normalized = false
label = "alpha=0.4,kappa=1"
"#;

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig1a-lightcone",
        description: "squared commutator C_r(t) fields and theta=0.5 contours for the four models (N=14)",
        toml: r#"
pipeline = "commutator"
n_qubits = 14
output_dir = "results/fig1a-lightcone"
thresholds = [0.5]
[time]
start = 0.0
stop = 10.0
step = 0.1
"#,
    },
    Preset {
        name: "fig1b-entropy",
        description: "half-chain entanglement entropy after a |Y+> quench, normalized by the Page value (N=14)",
        toml: r#"
pipeline = "entropy"
n_qubits = 14
output_dir = "results/fig1b-entropy"
[time]
start = 0.0
stop = 20.0
step = 0.1
"#,
    },
    Preset {
        name: "fig3-operator-state",
        description: "entropy of W(t)|Y+> on the left half versus C_r(t) at the edges of the right half (N=14)",
        toml: r#"
pipeline = "operator_state"
n_qubits = 14
output_dir = "results/fig3-operator-state"
[time]
start = 0.0
stop = 10.0
step = 0.1
"#,
    },
    Preset {
        name: "fig4-opsize",
        description: "operator density p_l(t) and operator size approaching the Haar value (N=10)",
        toml: r#"
pipeline = "operator_size"
n_qubits = 10
output_dir = "results/fig4-opsize"
[time]
start = 0.0
stop = 20.0
step = 0.1
"#,
    },
    Preset {
        name: "sm-thermalization",
        description: "total magnetization and two-qubit trace distance to the maximally mixed state (N=14)",
        toml: r#"
pipeline = "thermalization"
n_qubits = 14
output_dir = "results/sm-thermalization"
average_window = [20.0, 40.0]
[time]
start = 0.0
stop = 40.0
step = 0.2

[[models]]
family = "local"
label = "alpha=inf"
[[models]]
family = "powerlaw"
alpha = 2.3
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 1.5
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 1.0
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 0.8
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 0.5
kac_normalized = true
"#,
    },
    Preset {
        name: "sm-velocities",
        description: "butterfly and entanglement velocities in the local regime alpha >= 2.1 (N=14)",
        toml: r#"
pipeline = "velocities"
n_qubits = 14
output_dir = "results/sm-velocities"
thresholds = [0.5]
[time]
start = 0.0
stop = 10.0
step = 0.1

[[models]]
family = "local"
label = "alpha=inf"
[[models]]
family = "powerlaw"
alpha = 6.0
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 5.0
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 4.0
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 3.0
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 2.5
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 2.3
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 2.1
kac_normalized = true
"#,
    },
    Preset {
        name: "sm-lightcones",
        description: "C_r(t) and operator-state entropy over every cut, contours at theta = 0.01, 0.5, 0.85 (N=14)",
        toml: r#"
pipeline = "lightcones"
n_qubits = 14
output_dir = "results/sm-lightcones"
thresholds = [0.01, 0.5, 0.85]
[time]
start = 0.0
stop = 10.0
step = 0.1
"#,
    },
    Preset {
        name: "sm-finite-size",
        description: "operator-state entropy, C_N(t) and operator size for alpha = 0.8 and 1.1 across N = 6, 8, 10",
        toml: r#"
pipeline = "finite_size"
n_qubits = 10
sizes = [6, 8, 10]
output_dir = "results/sm-finite-size"
[time]
start = 0.0
stop = 10.0
step = 0.1

[[models]]
family = "powerlaw"
alpha = 0.8
kac_normalized = true
[[models]]
family = "powerlaw"
alpha = 1.1
kac_normalized = true
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// The preset's table, with the shared model list filled in where the
/// preset does not define its own.
pub fn table(name: &str) -> Result<Table> {
    let preset = find(name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        RunError::Schema(format!("preset: unknown preset `{name}` (available: {})", names.join(", ")))
    })?;
    let mut t: Table = preset.toml.parse().expect("built-in preset is valid TOML");
    if !t.contains_key("models") {
        let models: Table = FOUR_MODELS.parse().expect("built-in model list is valid TOML");
        t.extend(models);
    }
    Ok(t)
}

/// One line per preset: name and description.
pub fn listing() -> String {
    let width = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
    PRESETS
        .iter()
        .map(|p| format!("{:width$}  {}\n", p.name, p.description))
        .collect()
}
