//! Service configuration file (JSON).

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::DriverConfig;
use crate::engine::Limits;
use crate::recognizer::{GestureTemplate, Recognizer, DEFAULT_THRESHOLD};
use crate::spiral::SpiralParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RecognizerConfig {
    pub threshold: f64,
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        RecognizerConfig { threshold: DEFAULT_THRESHOLD }
    }
}

/// Every field is optional; missing values take their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct AppConfig {
    pub recognizer: RecognizerConfig,
    pub spiral: SpiralParams,
    pub limits: Limits,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("bad config: {0}")]
    Invalid(String),
}

impl AppConfig {
    pub fn parse(text: &str) -> Result<AppConfig, ConfigError> {
        let config: AppConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<AppConfig, ConfigError> {
        AppConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = self.recognizer.threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(ConfigError::Invalid(format!("recognizer threshold {t} must lie in [0, 1]")));
        }
        if self.limits.max_events == 0 || self.limits.max_depth == 0 {
            return Err(ConfigError::Invalid("limits must be positive".into()));
        }
        self.spiral.validate().map_err(ConfigError::Invalid)
    }

    pub fn driver_config(&self, templates: Vec<GestureTemplate>) -> DriverConfig {
        DriverConfig {
            recognizer: Arc::new(Recognizer::new(templates, self.recognizer.threshold)),
            spiral: self.spiral,
            limits: self.limits,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config() {
        let c = AppConfig::parse(r#"{"spiral": {"degreesPerStep": 90}}"#).unwrap();
        assert_eq!(c.spiral.degrees_per_step, 90.0);
        assert_eq!(c.spiral.dwell_duration, SpiralParams::default().dwell_duration);
        assert_eq!(c.recognizer.threshold, DEFAULT_THRESHOLD);
        assert_eq!(AppConfig::parse("{}").unwrap(), AppConfig::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(AppConfig::parse(r#"{"recognizer": {"threshold": 1.5}}"#).is_err());
        assert!(AppConfig::parse(r#"{"spiral": {"maxStepsPerSecond": 0}}"#).is_err());
        assert!(AppConfig::parse(r#"{"limits": {"maxEvents": 0}}"#).is_err());
        assert!(AppConfig::parse("[").is_err());
    }
}
