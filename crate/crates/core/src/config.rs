//! Run configuration: one TOML file, every section optional. Secrets never
//! live in the file; the endpoint token is read from the environment
//! variable named by `agent.endpoint.api_key_env`, and a few fields can be
//! overridden per machine through `FIGUI_*` variables.

use crate::agent::AgentConfig;
use crate::codegen::CodegenConfig;
use crate::ir::IrConfig;
use crate::refine::RefineConfig;
use crate::visual::{RendererSpec, SidecarSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurateConfig {
    pub dedup_threshold: f64,
}

impl Default for CurateConfig {
    fn default() -> Self {
        CurateConfig { dedup_threshold: crate::curate::DEFAULT_DEDUP_THRESHOLD }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub refine: RefineConfig,
    pub ir: IrConfig,
    pub codegen: CodegenConfig,
    pub renderer: RendererSpec,
    pub sidecar: SidecarSpec,
    pub agent: AgentConfig,
    pub curate: CurateConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("config: {0}")]
    Invalid(String),
}

/// Environment variables that override config fields.
pub const ENV_OVERRIDES: &[(&str, &str)] = &[
    ("FIGUI_RENDERER_COMMAND", "renderer.command"),
    ("FIGUI_SIDECAR_COMMAND", "sidecar.command"),
    ("FIGUI_ENDPOINT_BASE_URL", "agent.endpoint.base_url"),
    ("FIGUI_ENDPOINT_MODEL", "agent.endpoint.model"),
];

impl Config {
    pub fn from_toml(text: &str, origin: &str) -> Result<Config, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.to_string(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Config::from_toml(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.agent.max_iterations < 1 {
            return Err(ConfigError::Invalid("agent.max_iterations must be at least 1".into()));
        }
        if !(-1.0..=1.0).contains(&self.curate.dedup_threshold) {
            return Err(ConfigError::Invalid("curate.dedup_threshold must lie in [-1, 1]".into()));
        }
        if self.jobs == Some(0) || self.renderer.pool_size == 0 {
            return Err(ConfigError::Invalid("jobs and renderer.pool_size must be positive".into()));
        }
        Ok(())
    }

    /// Applies `FIGUI_*` overrides from `env`.
    pub fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) {
        if let Some(v) = env("FIGUI_RENDERER_COMMAND") {
            self.renderer.command = Some(v);
        }
        if let Some(v) = env("FIGUI_SIDECAR_COMMAND") {
            self.sidecar.command = Some(v);
        }
        if let Some(v) = env("FIGUI_ENDPOINT_BASE_URL") {
            self.agent.endpoint.base_url = v;
        }
        if let Some(v) = env("FIGUI_ENDPOINT_MODEL") {
            self.agent.endpoint.model = v;
        }
    }

    /// SHA-256 of the effective configuration's canonical JSON.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
