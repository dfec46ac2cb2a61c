//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use koblab::domain::DomainSpec;
use koblab::geodesic::SolverConfig;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        self != Format::Csv
    }

    pub fn csv(self) -> bool {
        self != Format::Json
    }
}

/// Keys shared by every command; everything else in the file belongs to
/// the command and is parsed by it.
#[derive(Debug, Default)]
pub struct ExperimentConfig {
    pub domain: Option<DomainSpec>,
    pub solver: SolverConfig,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Format,
    pub label: Option<String>,
    pub params: Map<String, Value>,
}

fn take<T: DeserializeOwned>(map: &mut Map<String, Value>, key: &str) -> anyhow::Result<Option<T>> {
    match map.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => Ok(Some(serde_json::from_value(v).with_context(|| format!("config key `{key}`"))?)),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let Value::Object(mut map) = value else { bail!("config must be a JSON object") };
        let solver: SolverConfig = take(&mut map, "solver")?.unwrap_or_default();
        solver.validate()?;
        Ok(ExperimentConfig {
            domain: take(&mut map, "domain")?,
            solver,
            output_dir: take(&mut map, "output_dir")?,
            seed: take(&mut map, "seed")?,
            format: take(&mut map, "format")?.unwrap_or_default(),
            label: take(&mut map, "label")?,
            params: map,
        })
    }

    pub fn domain(&self) -> anyhow::Result<&DomainSpec> {
        self.domain.as_ref().context("config must specify a `domain`")
    }

    /// The command parameters; unknown keys are rejected by the target type.
    pub fn params<T: DeserializeOwned>(&self) -> anyhow::Result<T> {
        serde_json::from_value(Value::Object(self.params.clone())).context("command parameters")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_common_keys_from_parameters() {
        let c = ExperimentConfig::parse(
            r#"{"domain":{"kind":"disc"},"seed":3,"format":"json","x":[[0,0]],"solver":{"control_points":17}}"#,
        )
        .unwrap();
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.solver.control_points, 17);
        assert!(c.params.contains_key("x") && !c.params.contains_key("domain"));
    }

    #[test]
    fn malformed_input_is_an_error() {
        assert!(ExperimentConfig::parse("{").is_err());
        assert!(ExperimentConfig::parse("[1]").is_err());
        assert!(ExperimentConfig::parse(r#"{"solver":{"control_points":1}}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"domain":{"kind":"polydisc","n":0}}"#).is_err());
    }
}
