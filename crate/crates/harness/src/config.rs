//! Run manifests: one TOML file per experiment, unknown keys rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Must fit a TOML integer (at most `i64::MAX`).
    #[serde(default)]
    pub seed: u64,
    /// Anneal times in ns.
    pub tau: Vec<f64>,
    #[serde(default)]
    pub initial_state: InitialChoice,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathConfig>,
    pub cd: Vec<CdConfig>,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub generator: GeneratorSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialChoice {
    /// Ground state for closed systems and the qubit, thermal for the open p-spin model.
    #[default]
    Default,
    Ground,
    Thermal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Qubit {
        #[serde(default = "one")]
        omega_x: f64,
        #[serde(default = "one")]
        omega_z: f64,
    },
    Pspin {
        n: usize,
        p: u32,
        #[serde(default = "one")]
        gamma: f64,
        #[serde(default = "one")]
        j: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_temperature() -> f64 {
    2.23
}

fn default_omega_c() -> f64 {
    8.0 * PI
}

fn yes() -> bool {
    true
}

/// A scalar or a list in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    /// `ηg²`; zero selects the closed system.
    pub eta_g2: OneOrMany,
    /// `k_B T/ħ` in rad/ns.
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Overrides `temperature` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_mk: Option<f64>,
    #[serde(default = "default_omega_c")]
    pub omega_c: f64,
    #[serde(default = "yes")]
    pub lamb_shift: bool,
}

impl BathConfig {
    pub fn temperature_rad_per_ns(&self) -> f64 {
        match self.temperature_mk {
            Some(mk) => opencd_core::models::kelvin_to_angular_ghz(mk * 1e-3),
            None => self.temperature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdKind {
    None,
    Exact,
    Variational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdConfig {
    pub label: String,
    pub mode: CdKind,
    /// Named term families: `sigma_y`, `Sy`, `Sy3`, `SxSySz_cyclic`, `basis_dissipators`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub explicit: Vec<ExplicitTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKindConfig {
    Unitary,
    Dissipative,
}

/// A user-supplied operator given row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitTerm {
    pub label: String,
    pub kind: TermKindConfig,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub samples: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = opencd_core::evolution::IntegratorConfig::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_step: d.max_step,
            samples: d.samples,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationChoice {
    /// Exact for a qubit, gridded otherwise.
    #[default]
    Auto,
    Exact,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorSection {
    pub evaluation: EvaluationChoice,
    pub grid_points: usize,
    pub derivative_step: f64,
    pub richardson: bool,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        Self {
            evaluation: EvaluationChoice::Auto,
            grid_points: opencd_core::generator::DEFAULT_GRID_POINTS,
            derivative_step: 1e-5,
            richardson: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// Parameter lists for `sweep`; an empty list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eta_g2: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tau: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lamb_shift: Vec<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub temperature: Vec<f64>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("invalid run configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml_string()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn eta_values(&self) -> Vec<f64> {
        self.bath.as_ref().map(|b| b.eta_g2.values()).unwrap_or_else(|| vec![0.0])
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            bail!("name must be a non-empty file-name-safe string");
        }
        if i64::try_from(self.seed).is_err() {
            bail!("seed must not exceed {}", i64::MAX);
        }
        if self.tau.is_empty() {
            bail!("tau list is empty");
        }
        if let Some(t) = self.tau.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            bail!("tau = {t} must be positive");
        }
        if self.cd.is_empty() {
            bail!("at least one [[cd]] entry is required");
        }
        let mut labels: Vec<&str> = self.cd.iter().map(|c| c.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            bail!("cd labels must be unique");
        }
        for c in &self.cd {
            if c.label.is_empty() || c.label.contains(['/', '\\']) {
                bail!("cd label '{}' is not file-name-safe", c.label);
            }
            let has_terms = !c.terms.is_empty() || !c.explicit.is_empty();
            match c.mode {
                CdKind::Variational if !has_terms => bail!("variational cd '{}' lists no terms", c.label),
                CdKind::None | CdKind::Exact if has_terms => {
                    bail!("cd '{}' has terms but mode {:?}", c.label, c.mode)
                }
                _ => {}
            }
        }
        if let Some(b) = &self.bath {
            let etas = b.eta_g2.values();
            if etas.is_empty() {
                bail!("bath.eta_g2 list is empty");
            }
            if etas.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
                bail!("bath.eta_g2 must be nonnegative");
            }
        }
        let i = &self.integrator;
        if !(i.rel_tol > 0.0 && i.abs_tol > 0.0 && i.max_step > 0.0) || i.samples < 2 {
            bail!("integrator tolerances and max_step must be positive and samples at least 2");
        }
        if self.generator.grid_points < 2 || !(self.generator.derivative_step > 0.0) {
            bail!("generator.grid_points must be at least 2 and derivative_step positive");
        }
        Ok(())
    }
}

/// Recursively overlays `top` onto `base`.
pub fn merge_toml(base: &mut toml::Value, top: toml::Value) {
    match (base, top) {
        (toml::Value::Table(b), toml::Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(existing) => merge_toml(existing, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
tau = [1.0]
model = { kind = "qubit" }
[[cd]]
label = "none"
mode = "none"
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.integrator.rel_tol, 1e-9);
        assert_eq!(c.eta_values(), vec![0.0]);
        assert_eq!(c.initial_state, InitialChoice::Default);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = format!("{MINIMAL}\n[integrator]\nrtol = 1e-3\n");
        assert!(RunConfig::from_toml_str(&bad).is_err());
        let bad = MINIMAL.replace("model = { kind = \"qubit\" }", "model = { kind = \"qubit\", omega = 1.0 }");
        assert!(RunConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn semantic_errors() {
        assert!(RunConfig::from_toml_str(&MINIMAL.replace("[1.0]", "[]")).is_err());
        assert!(RunConfig::from_toml_str(&MINIMAL.replace("[1.0]", "[-1.0]")).is_err());
        let var = MINIMAL.replace("mode = \"none\"", "mode = \"variational\"");
        assert!(RunConfig::from_toml_str(&var).is_err());
    }

    #[test]
    fn merge_overrides_leaves() {
        let mut base: toml::Value = toml::from_str(MINIMAL).unwrap();
        let top: toml::Value = toml::from_str("tau = [5.0]\n[integrator]\nsamples = 11\n").unwrap();
        merge_toml(&mut base, top);
        let c: RunConfig = base.try_into().unwrap();
        assert_eq!(c.tau, vec![5.0]);
        assert_eq!(c.integrator.samples, 11);
        assert_eq!(c.integrator.rel_tol, 1e-9);
    }

    #[test]
    fn temperature_in_millikelvin() {
        let b = BathConfig {
            eta_g2: OneOrMany::One(1e-4),
            temperature: 0.0,
            temperature_mk: Some(17.0),
            omega_c: 1.0,
            lamb_shift: true,
        };
        assert!((b.temperature_rad_per_ns() - 2.2257).abs() < 1e-3);
    }
}
