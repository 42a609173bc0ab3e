//! Run configuration: a TOML file plus `key=value` overrides on dotted paths.

use std::path::{Path, PathBuf};

use chirp_ladder::{CaptureRule, ClassicalScan, CouplingOrder, IntegratorConfig, PhysicalParams, ThresholdScan};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub basis: BasisSettings,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub capture: CaptureRule,
    #[serde(default)]
    pub wigner: WignerSettings,
    #[serde(default)]
    pub threshold: ThresholdSettings,
    #[serde(default)]
    pub classical: ClassicalSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSettings {
    pub size: usize,
    #[serde(default = "default_order")]
    pub order: CouplingOrder,
}

fn default_order() -> CouplingOrder {
    CouplingOrder::Full
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSettings {
    /// Snapshot time; defaults to the end of the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Half-width of the square grid; defaults to `sqrt(2 n_occ) + 3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

fn default_points() -> usize {
    101
}

impl Default for WignerSettings {
    fn default() -> Self {
        Self { tau: None, points: default_points(), half_width: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSettings {
    #[serde(default)]
    pub p2: Vec<f64>,
    #[serde(default)]
    pub scan: ThresholdScan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSettings {
    /// Step bound for the trace run.
    #[serde(default = "default_classical_dt")]
    pub dt: f64,
    /// Columns for the classical threshold scan; empty skips the scan.
    #[serde(default)]
    pub p2: Vec<f64>,
    #[serde(default)]
    pub scan: ClassicalScan,
}

fn default_classical_dt() -> f64 {
    ClassicalScan::default().dt
}

impl Default for ClassicalSettings {
    fn default() -> Self {
        Self { dt: default_classical_dt(), p2: Vec::new(), scan: ClassicalScan::default() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("bad override `{0}`: expected key=value")]
    Override(String),
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Sets `path` (dot separated) in `table`, creating intermediate tables.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| ConfigError::Override(assignment.into()))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(assignment.into()));
    }
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut cursor = table;
    for part in parents {
        let entry = cursor.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| ConfigError::Override(assignment.into()))?;
    }
    cursor.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: RunConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        config.params.validate().map_err(|e| ConfigError::Parse(e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is representable as TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[params]
alpha = 1e-6
beta = 0.016
lambda = 0.05
epsilon = 0.18
mode = "subharmonic2"

[basis]
size = 40

[integrator]
tau_end = 25.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml_str(MINIMAL, &[]).unwrap();
        assert_eq!(c.basis.order, CouplingOrder::Full);
        assert_eq!(c.capture, CaptureRule::HalfLadder);
        assert_eq!(c.wigner.points, 101);
        assert!(c.threshold.p2.is_empty());
    }

    #[test]
    fn overrides_replace_and_create() {
        let o = vec![
            "params.epsilon=0.2".to_string(),
            "threshold.p2=[0.1, 10]".into(),
            "capture.kind=fixed_cutoff".into(),
            "capture.level=3".into(),
        ];
        let c = RunConfig::from_toml_str(MINIMAL, &o).unwrap();
        assert_eq!(c.params.epsilon, 0.2);
        assert_eq!(c.threshold.p2, vec![0.1, 10.0]);
        assert_eq!(c.capture, CaptureRule::FixedCutoff { level: 3 });
    }

    #[test]
    fn malformed_overrides_rejected() {
        assert!(RunConfig::from_toml_str(MINIMAL, &["params.epsilon".into()]).is_err());
        assert!(RunConfig::from_toml_str(MINIMAL, &["params..x=1".into()]).is_err());
        assert!(RunConfig::from_toml_str(MINIMAL, &["params.epsilon.x=1".into()]).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml_str(MINIMAL, &["basis.sise=3".into()]).is_err());
    }

    #[test]
    fn invalid_physics_rejected() {
        assert!(RunConfig::from_toml_str(MINIMAL, &["params.alpha=-1.0".into()]).is_err());
    }

    #[test]
    fn string_fallback() {
        assert_eq!(parse_value("interaction"), Value::String("interaction".into()));
        assert_eq!(parse_value("3"), Value::Integer(3));
    }
}
