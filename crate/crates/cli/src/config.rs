//! Optional TOML defaults. Command-line flags and `CUTQUAD_OUTPUT_DIR` take
//! precedence over anything read here.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub integrators: Vec<String>,
    #[serde(default)]
    pub testcases: Vec<String>,
    #[serde(default)]
    pub operations: Vec<String>,
    #[serde(default)]
    pub mesh: Vec<usize>,
    pub order: Option<usize>,
    pub tier: Option<String>,
    pub seed: Option<u64>,
    pub timing: Option<bool>,
    pub out: Option<PathBuf>,
    /// `[params.<integrator>]` tables of scalar values.
    #[serde(default)]
    pub params: IndexMap<String, IndexMap<String, toml::Value>>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }

    /// Parameters as `integrator.key=value` assignments.
    pub fn param_assignments(&self) -> Result<Vec<String>, String> {
        let mut out = Vec::new();
        for (integ, table) in &self.params {
            for (key, value) in table {
                let v = match value {
                    toml::Value::String(s) => s.clone(),
                    toml::Value::Integer(i) => i.to_string(),
                    toml::Value::Float(f) => f.to_string(),
                    toml::Value::Boolean(b) => b.to_string(),
                    other => return Err(format!("config parameter {integ}.{key}: unsupported value {other}")),
                };
                out.push(format!("{integ}.{key}={v}"));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_params_table() {
        let c: Config = toml::from_str(
            "mesh = [2, 4]\norder = 3\n[params.quadtree]\ndepth = 4\n[params.monte-carlo]\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(c.mesh, vec![2, 4]);
        assert_eq!(c.order, Some(3));
        assert_eq!(
            c.param_assignments().unwrap(),
            vec!["quadtree.depth=4".to_string(), "monte-carlo.seed=7".to_string()]
        );
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<Config>("meshes = [2]").is_err());
    }
}
