//! Service configuration from an optional TOML file plus environment
//! overrides.
//!
//! | variable            | meaning                                   |
//! |---------------------|-------------------------------------------|
//! | `TM_CONFIG`         | path of a TOML file read first            |
//! | `TM_BIND`           | listen address                            |
//! | `TM_LOG_PATH`       | JSONL session log; in-memory when unset   |
//! | `TM_SCORER`         | `lexical`, `remote` or `replay`           |
//! | `TM_REMOTE_URL`     | chat completions endpoint                 |
//! | `TM_EMBEDDING_URL`  | image similarity endpoint                 |
//! | `TM_API_KEY`        | bearer token for the remote endpoints     |
//! | `TM_MODEL`          | model name sent to the remote endpoint    |
//! | `TM_REPLAY_FIXTURE` | JSONL fixture for the replay scorer       |

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tm_core::rendering::RenderConfig;
use tm_core::scoring::{LexicalBackend, RemoteBackend, RemoteConfig, ReplayBackend, ScorerBackend, ScoringConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    #[default]
    Lexical,
    Remote,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub bind: String,
    pub log_path: Option<PathBuf>,
    pub scorer: ScorerKind,
    pub replay_fixture: Option<PathBuf>,
    pub remote: RemoteConfig,
    pub scoring: ScoringConfig,
    pub render: RenderConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8787".into(),
            log_path: None,
            scorer: ScorerKind::Lexical,
            replay_fixture: None,
            remote: RemoteConfig::default(),
            scoring: ScoringConfig::default(),
            render: RenderConfig::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads `TM_CONFIG` if set, then applies the other variables.
    pub fn from_env() -> Result<Self, String> {
        let vars = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        Self::from_lookup(vars)
    }

    pub fn from_lookup(var: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let mut config = match var("TM_CONFIG") {
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        if let Some(v) = var("TM_BIND") {
            config.bind = v;
        }
        if let Some(v) = var("TM_LOG_PATH") {
            config.log_path = Some(v.into());
        }
        if let Some(v) = var("TM_SCORER") {
            config.scorer = match v.as_str() {
                "lexical" => ScorerKind::Lexical,
                "remote" => ScorerKind::Remote,
                "replay" => ScorerKind::Replay,
                other => return Err(format!("TM_SCORER: unknown scorer {other:?}")),
            };
        }
        if let Some(v) = var("TM_REMOTE_URL") {
            config.remote.endpoint = v;
        }
        if let Some(v) = var("TM_EMBEDDING_URL") {
            config.remote.embedding_endpoint = Some(v);
        }
        if let Some(v) = var("TM_API_KEY") {
            config.remote.api_key = Some(v);
        }
        if let Some(v) = var("TM_MODEL") {
            config.remote.model = v;
        }
        if let Some(v) = var("TM_REPLAY_FIXTURE") {
            config.replay_fixture = Some(v.into());
        }
        config.scoring.validate().map_err(|e| e.to_string())?;
        config.render.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }

    pub fn backend(&self) -> Result<Arc<dyn ScorerBackend>, String> {
        Ok(match self.scorer {
            ScorerKind::Lexical => Arc::new(LexicalBackend),
            ScorerKind::Remote => Arc::new(RemoteBackend::new(self.remote.clone()).map_err(|e| e.to_string())?),
            ScorerKind::Replay => {
                let path = self.replay_fixture.as_ref().ok_or("replay scorer needs TM_REPLAY_FIXTURE")?;
                Arc::new(ReplayBackend::from_path(path)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn env_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("tm.toml");
        std::fs::write(&file, "bind = \"0.0.0.0:9000\"\nscorer = \"remote\"\n[render]\nthreshold = 55\n").unwrap();
        let env: HashMap<&str, String> = [
            ("TM_CONFIG", file.display().to_string()),
            ("TM_MODEL", "m1".to_string()),
            ("TM_LOG_PATH", "/tmp/x.jsonl".to_string()),
        ]
        .into();
        let c = ServiceConfig::from_lookup(|k| env.get(k).cloned()).unwrap();
        assert_eq!(c.bind, "0.0.0.0:9000");
        assert_eq!(c.scorer, ScorerKind::Remote);
        assert_eq!(c.render.threshold, 55);
        assert_eq!(c.remote.model, "m1");
        assert_eq!(c.log_path, Some(PathBuf::from("/tmp/x.jsonl")));
    }

    #[test]
    fn bad_scorer_name() {
        assert!(ServiceConfig::from_lookup(|k| (k == "TM_SCORER").then(|| "gpt".to_string())).is_err());
        let c = ServiceConfig::from_lookup(|k| (k == "TM_SCORER").then(|| "replay".to_string())).unwrap();
        assert!(c.backend().is_err());
    }
}
