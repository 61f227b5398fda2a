//! One JSON document describing a whole run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{sha256_hex, DatasetSpec};
use crate::error::{Error, Result};
use crate::model::{InitScheme, ModelConfig};
use crate::train::TrainConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Master seed. Copied into the data and train sections and used for
    /// weight initialisation.
    pub seed: u64,
    /// Worker threads; `None` defers to the environment.
    pub threads: Option<usize>,
    pub init: InitScheme,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 0, threads: None, init: InitScheme::ZeroResidual }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub data: DatasetSpec,
    pub run: RunSection,
}

/// What a command writes next to its outputs: the merged config and its
/// hash. Accepted back by [`RunConfig::from_json`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub config_hash: String,
    pub config: RunConfig,
}

impl RunConfig {
    /// Parse either a bare config or a [`ConfigEcho`].
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        let echoed = value.get("config_hash").is_some() && value.get("config").is_some();
        if echoed {
            let echo: ConfigEcho = serde_json::from_value(value).map_err(|e| Error::Config(format!("config: {e}")))?;
            return Ok(echo.config);
        }
        serde_json::from_value(value).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Push the master seed into the sections that carry their own.
    pub fn set_seed(&mut self, seed: u64) {
        self.run.seed = seed;
        self.data.seed = seed;
        self.train.seed = seed;
    }

    /// Check every section and their agreement on band counts and scale.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()?;
        self.data.validate()?;
        let (m, d) = (&self.model, &self.data);
        if (m.bands, m.msi_bands, m.scale) != (d.bands, d.msi_bands, d.scale) {
            return Err(Error::Config(format!(
                "model expects (bands, msi_bands, scale) = ({}, {}, {}) but data has ({}, {}, {})",
                m.bands, m.msi_bands, m.scale, d.bands, d.msi_bands, d.scale
            )));
        }
        if self.data.seed != self.run.seed || self.train.seed != self.run.seed {
            return Err(Error::Config("data.seed and train.seed must equal run.seed".into()));
        }
        if self.run.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// Compact JSON with sorted keys. The thread count is left out since it
    /// never changes results.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.run.threads = None;
        serde_json::to_value(&c).expect("plain data").to_string()
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho { config_hash: self.hash(), config: self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_default_and_unknown_keys_fail() {
        let cfg = RunConfig::from_json(r#"{"train": {"epochs": 3}}"#).unwrap();
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.model, ModelConfig::default());
        assert_eq!(cfg.run.init, InitScheme::ZeroResidual);
        assert!(RunConfig::from_json(r#"{"trian": {}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"run": {"seeds": 1}}"#).is_err());
        let init = RunConfig::from_json(r#"{"run": {"init": "kaiming"}}"#).unwrap();
        assert_eq!(init.run.init, InitScheme::Kaiming);
    }

    #[test]
    fn hash_tracks_content_not_formatting() {
        let a = RunConfig::default();
        let b = RunConfig::from_json(&a.to_pretty_json()).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.set_seed(5);
        assert_ne!(a.hash(), c.hash());
        let mut t = a.clone();
        t.run.threads = Some(4);
        assert_eq!(a.hash(), t.hash());
    }

    #[test]
    fn echo_reads_back() {
        let mut a = RunConfig::default();
        a.set_seed(9);
        let text = serde_json::to_string(&a.echo()).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), a);
    }

    #[test]
    fn cross_section_mismatch_is_config_error() {
        let mut cfg = RunConfig::default();
        cfg.validate().unwrap();
        cfg.data.bands = 8;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.train.seed = 3;
        assert!(cfg.validate().is_err());
    }
}
