use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SteerError};
use armlift::session::SessionSettings;

pub const CONFIG_ENV: &str = "ARMLIFT_STEER_CONFIG";

/// Service configuration. Read from a TOML file, then overridden by
/// `ARMLIFT_STEER_BIND`, `ARMLIFT_STEER_PORT` and `ARMLIFT_STEER_TICK_RATE`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub bind: String,
    pub port: u16,
    /// Defaults for new sessions; a create message may override any field.
    pub session: SessionSettings,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { bind: "127.0.0.1".into(), port: 8787, session: SessionSettings::default() }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SteerError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SteerError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// File named by `ARMLIFT_STEER_CONFIG` (or `path`), then environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV);
        let path = path.or(from_env.as_deref().map(Path::new));
        let base = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        base.with_overrides(|k| std::env::var(k).ok())
    }

    pub fn with_overrides(mut self, var: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let bad = |k: &str, v: &str| SteerError::Config(format!("{k}={v} is not valid"));
        if let Some(v) = var("ARMLIFT_STEER_BIND") {
            self.bind = v;
        }
        if let Some(v) = var("ARMLIFT_STEER_PORT") {
            self.port = v.parse().map_err(|_| bad("ARMLIFT_STEER_PORT", &v))?;
        }
        if let Some(v) = var("ARMLIFT_STEER_TICK_RATE") {
            self.session.tick_rate = v.parse().map_err(|_| bad("ARMLIFT_STEER_TICK_RATE", &v))?;
        }
        Ok(self)
    }

    pub fn address(&self) -> String {
        format!("{}:{}", self.bind, self.port)
    }
}
