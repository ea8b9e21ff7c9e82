use std::path::{Path, PathBuf};

use coachd_core::ReputationParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How long a worker's shown set lasts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShownSetScope {
    /// Never reset: a snippet is served to a worker at most once, ever.
    #[default]
    Forever,
    /// A request for page 0 starts a new session and clears the set.
    Session,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: String,
    pub log_path: PathBuf,
    /// fsync after every appended event.
    pub fsync: bool,
    pub shown_set_scope: ShownSetScope,
    pub reputation: ReputationParams,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".to_owned(),
            log_path: PathBuf::from("coachd-events.jsonl"),
            fsync: true,
            shown_set_scope: ShownSetScope::default(),
            reputation: ReputationParams::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("bad reputation parameters: {0}")]
    Params(#[from] coachd_core::reputation::ParamsError),
}

impl ServiceConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: ServiceConfig = toml::from_str(text)?;
        config.reputation.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::from_toml_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(ServiceConfig::from_toml_str("").unwrap(), ServiceConfig::default());
    }

    #[test]
    fn parses_overrides() {
        let c = ServiceConfig::from_toml_str(
            "listen = \"0.0.0.0:9000\"\nshown_set_scope = \"session\"\nfsync = false\n[reputation]\ndeviation_threshold = 2.5\n",
        )
        .unwrap();
        assert_eq!(c.listen, "0.0.0.0:9000");
        assert_eq!(c.shown_set_scope, ShownSetScope::Session);
        assert!(!c.fsync);
        assert_eq!(c.reputation.deviation_threshold, 2.5);
        assert_eq!(c.reputation.min_other_votes, 3);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_params() {
        assert!(matches!(ServiceConfig::from_toml_str("lissen = \"x\""), Err(ConfigError::Parse(_))));
        assert!(matches!(
            ServiceConfig::from_toml_str("[reputation]\nexperience_weight = 0.9\n"),
            Err(ConfigError::Params(_))
        ));
    }
}
