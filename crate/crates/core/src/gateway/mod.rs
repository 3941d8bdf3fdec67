//! Gateway to chat-completion providers: a uniform `complete` call with
//! per-fragment cost accounting, plus a deterministic replay provider that
//! makes whole pipeline runs reproducible offline.

pub mod cassette;
pub mod http;
pub mod ledger;
pub mod tokens;

use std::path::PathBuf;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cassette::{append_record, prompt_hash, Cassette};
pub use ledger::{CostLedger, FragmentCost};
pub use tokens::count_tokens;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("provider error: {message}")]
    Provider { message: String, retriable: bool },
    #[error("replay cassette has no response for prompt hash {hash}")]
    CassetteMiss { hash: String },
    #[error("cassette error: {message}")]
    Cassette { message: String },
    #[error("invalid model configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    HttpOpenAiStyle,
    HttpAnthropicStyle,
    Replay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Fixed(f64),
    /// Provider default; appears in config as the string "default".
    Default,
}

impl Serialize for Temperature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Temperature::Fixed(t) => s.serialize_f64(*t),
            Temperature::Default => s.serialize_str("default"),
        }
    }
}

impl<'de> Deserialize<'de> for Temperature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::Number(n) => n
                .as_f64()
                .map(Temperature::Fixed)
                .ok_or_else(|| serde::de::Error::custom("temperature must be a number")),
            serde_json::Value::String(s) if s == "default" => Ok(Temperature::Default),
            _ => Err(serde::de::Error::custom(
                "temperature must be a number or the string \"default\"",
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub provider: ProviderKind,
    pub model_name: String,
    pub temperature: Temperature,
    pub max_attempts_hint: u32,
    /// Name of the environment variable holding the API key. Secrets never
    /// appear in config files.
    pub credentials_env: Option<String>,
    pub cassette_path: Option<PathBuf>,
    /// Base URL override for http providers.
    pub endpoint: Option<String>,
}

impl ModelConfig {
    pub fn replay(cassette_path: PathBuf) -> Self {
        ModelConfig {
            provider: ProviderKind::Replay,
            model_name: "replay".into(),
            temperature: Temperature::Fixed(0.0),
            max_attempts_hint: 6,
            credentials_env: None,
            cassette_path: Some(cassette_path),
            endpoint: None,
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if let Temperature::Fixed(t) = self.temperature {
            if !(0.0..=2.0).contains(&t) {
                return Err(GatewayError::Config(format!(
                    "temperature {t} outside [0, 2]"
                )));
            }
        }
        if self.max_attempts_hint == 0 {
            return Err(GatewayError::Config("max_attempts_hint must be positive".into()));
        }
        match self.provider {
            ProviderKind::Replay => {
                if self.cassette_path.is_none() {
                    return Err(GatewayError::Config(
                        "replay provider requires a cassette path".into(),
                    ));
                }
                if self.credentials_env.is_some() {
                    return Err(GatewayError::Config(
                        "replay provider never takes credentials".into(),
                    ));
                }
            }
            ProviderKind::HttpOpenAiStyle | ProviderKind::HttpAnthropicStyle => {
                if self.credentials_env.is_none() {
                    return Err(GatewayError::Config(
                        "http providers require a credentials environment variable name".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

enum Backend {
    Replay(Cassette),
    Http(http::HttpProvider),
    /// Test injection point: any closure acting as a model.
    Custom(Box<dyn Fn(&str) -> Result<String, GatewayError> + Send + Sync>),
}

/// Thread-safe front door to the configured provider. Ledger updates are
/// serialized internally; cassettes are read-only after load.
pub struct Gateway {
    backend: Backend,
    ledger: Mutex<CostLedger>,
}

impl Gateway {
    pub fn new(cfg: &ModelConfig) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let backend = match cfg.provider {
            ProviderKind::Replay => {
                let path = cfg.cassette_path.as_ref().expect("validated");
                Backend::Replay(Cassette::load(path)?)
            }
            ProviderKind::HttpOpenAiStyle => {
                Backend::Http(http::HttpProvider::new(http::HttpStyle::OpenAi, cfg)?)
            }
            ProviderKind::HttpAnthropicStyle => {
                Backend::Http(http::HttpProvider::new(http::HttpStyle::Anthropic, cfg)?)
            }
        };
        Ok(Gateway { backend, ledger: Mutex::new(CostLedger::default()) })
    }

    /// Builds a gateway from an arbitrary completion function (tests,
    /// recording wrappers).
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(&str) -> Result<String, GatewayError> + Send + Sync + 'static,
    {
        Gateway { backend: Backend::Custom(Box::new(f)), ledger: Mutex::new(CostLedger::default()) }
    }

    /// Sends one prompt, recording one query and prompt+completion tokens
    /// against `fragment`.
    pub fn complete(&self, fragment: &str, prompt: &str) -> Result<String, GatewayError> {
        let response = match &self.backend {
            Backend::Replay(cassette) => cassette.lookup(prompt)?.to_string(),
            Backend::Http(provider) => provider.complete(prompt)?,
            Backend::Custom(f) => f(prompt)?,
        };
        let tokens = count_tokens(prompt) + count_tokens(&response);
        self.ledger.lock().unwrap().record(fragment, tokens);
        Ok(response)
    }

    pub fn ledger(&self) -> CostLedger {
        self.ledger.lock().unwrap().clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn replay_gateway(records: &[(&str, &str)]) -> Gateway {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cassette.jsonl");
        for (p, r) in records {
            append_record(&path, p, r).unwrap();
        }
        // The cassette is loaded into memory before the tempdir drops.
        Gateway::new(&ModelConfig::replay(path)).unwrap()
    }

    #[test]
    fn replay_lookup_returns_recorded_response() {
        let gw = replay_gateway(&[("p", "ok")]);
        assert_eq!(gw.complete("frag", "p").unwrap(), "ok");
    }

    #[test]
    fn unknown_prompt_is_a_fatal_miss() {
        let gw = replay_gateway(&[("p", "ok")]);
        match gw.complete("frag", "other") {
            Err(GatewayError::CassetteMiss { hash }) => assert_eq!(hash, prompt_hash("other")),
            other => panic!("expected CassetteMiss, got {other:?}"),
        }
    }

    #[test]
    fn each_call_records_exactly_one_query() {
        let gw = replay_gateway(&[("p", "ok"), ("q", "fine")]);
        gw.complete("a", "p").unwrap();
        gw.complete("a", "q").unwrap();
        gw.complete("b", "p").unwrap();
        let ledger = gw.ledger();
        assert_eq!(ledger.total_queries, 3);
        assert_eq!(ledger.fragment("a").queries, 2);
        assert_eq!(ledger.fragment("b").queries, 1);
        assert!(ledger.is_conserved());
        assert!(ledger.total_tokens > 0);
    }

    #[test]
    fn config_validation_rules() {
        let mut cfg = ModelConfig::replay(PathBuf::from("/tmp/x.jsonl"));
        cfg.credentials_env = Some("KEY".into());
        assert!(cfg.validate().is_err());

        let cfg = ModelConfig {
            provider: ProviderKind::HttpOpenAiStyle,
            model_name: "m".into(),
            temperature: Temperature::Fixed(3.0),
            max_attempts_hint: 6,
            credentials_env: Some("KEY".into()),
            cassette_path: None,
            endpoint: None,
        };
        assert!(cfg.validate().is_err());

        let cfg = ModelConfig { temperature: Temperature::Fixed(0.0), ..cfg };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn temperature_config_accepts_default_marker() {
        let t: Temperature = serde_json::from_str("\"default\"").unwrap();
        assert_eq!(t, Temperature::Default);
        let t: Temperature = serde_json::from_str("0.5").unwrap();
        assert_eq!(t, Temperature::Fixed(0.5));
    }
}
