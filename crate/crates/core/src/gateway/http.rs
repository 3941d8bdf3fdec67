//! HTTP chat-completion providers. Requests follow the provider-conventional
//! JSON bodies; transport failures retry with capped exponential backoff.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde_json::{json, Value};

use super::{GatewayError, ModelConfig, Temperature};

/// Count of HTTP request attempts made by this process. The replay provider
/// never touches this; tests assert it stays at zero for offline runs.
pub static HTTP_ATTEMPTS: AtomicU64 = AtomicU64::new(0);

const TRANSPORT_RETRIES: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HttpStyle {
    OpenAi,
    Anthropic,
}

pub struct HttpProvider {
    style: HttpStyle,
    endpoint: String,
    model: String,
    temperature: Temperature,
    api_key_env: String,
}

impl HttpProvider {
    pub fn new(style: HttpStyle, cfg: &ModelConfig) -> Result<Self, GatewayError> {
        let api_key_env = cfg.credentials_env.clone().ok_or_else(|| GatewayError::Provider {
            message: "http providers need a credentials environment variable name".into(),
            retriable: false,
        })?;
        let endpoint = cfg.endpoint.clone().unwrap_or_else(|| match style {
            HttpStyle::OpenAi => "https://api.openai.com/v1".to_string(),
            HttpStyle::Anthropic => "https://api.anthropic.com".to_string(),
        });
        Ok(HttpProvider {
            style,
            endpoint,
            model: cfg.model_name.clone(),
            temperature: cfg.temperature,
            api_key_env,
        })
    }

    pub fn complete(&self, prompt: &str) -> Result<String, GatewayError> {
        let key = std::env::var(&self.api_key_env).map_err(|_| GatewayError::Provider {
            message: format!("credentials variable {} is not set", self.api_key_env),
            retriable: false,
        })?;
        let mut delay = Duration::from_millis(250);
        let mut last_err = None;
        for _ in 0..=TRANSPORT_RETRIES {
            HTTP_ATTEMPTS.fetch_add(1, Ordering::Relaxed);
            match self.request_once(prompt, &key) {
                Ok(text) => return Ok(text),
                Err(e @ GatewayError::Provider { retriable: true, .. }) => {
                    last_err = Some(e);
                    std::thread::sleep(delay);
                    delay = (delay * 2).min(Duration::from_secs(4));
                }
                Err(e) => return Err(e),
            }
        }
        Err(last_err.unwrap_or(GatewayError::Provider {
            message: "transport retries exhausted".into(),
            retriable: false,
        }))
    }

    fn request_once(&self, prompt: &str, key: &str) -> Result<String, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(600))
            .build()
            .map_err(|e| GatewayError::Provider { message: e.to_string(), retriable: false })?;
        let (url, body, headers) = self.build_request(prompt, key);
        let mut req = client.post(url).json(&body);
        for (k, v) in headers {
            req = req.header(k, v);
        }
        let resp = req.send().map_err(|e| GatewayError::Provider {
            message: format!("transport error: {e}"),
            retriable: true,
        })?;
        let status = resp.status();
        let payload: Value = resp.json().map_err(|e| GatewayError::Provider {
            message: format!("malformed provider response: {e}"),
            retriable: false,
        })?;
        if !status.is_success() {
            // 5xx and rate limits retry; auth and bad requests do not.
            let retriable = status.is_server_error() || status.as_u16() == 429;
            return Err(GatewayError::Provider {
                message: format!("provider returned {status}: {payload}"),
                retriable,
            });
        }
        self.extract_text(&payload)
    }

    fn build_request(&self, prompt: &str, key: &str) -> (String, Value, Vec<(String, String)>) {
        match self.style {
            HttpStyle::OpenAi => {
                let mut body = json!({
                    "model": self.model,
                    "messages": [{"role": "user", "content": prompt}],
                });
                if let Temperature::Fixed(t) = self.temperature {
                    body["temperature"] = json!(t);
                }
                (
                    format!("{}/chat/completions", self.endpoint.trim_end_matches('/')),
                    body,
                    vec![("Authorization".into(), format!("Bearer {key}"))],
                )
            }
            HttpStyle::Anthropic => {
                let mut body = json!({
                    "model": self.model,
                    "max_tokens": 8192,
                    "messages": [{"role": "user", "content": prompt}],
                });
                if let Temperature::Fixed(t) = self.temperature {
                    body["temperature"] = json!(t);
                }
                (
                    format!("{}/v1/messages", self.endpoint.trim_end_matches('/')),
                    body,
                    vec![
                        ("x-api-key".into(), key.to_string()),
                        ("anthropic-version".into(), "2023-06-01".into()),
                    ],
                )
            }
        }
    }

    fn extract_text(&self, payload: &Value) -> Result<String, GatewayError> {
        let text = match self.style {
            HttpStyle::OpenAi => payload
                .pointer("/choices/0/message/content")
                .and_then(Value::as_str),
            HttpStyle::Anthropic => payload.pointer("/content/0/text").and_then(Value::as_str),
        };
        text.map(str::to_string).ok_or_else(|| GatewayError::Provider {
            message: format!("response carries no completion text: {payload}"),
            retriable: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(style_env: &str) -> ModelConfig {
        ModelConfig {
            provider: super::super::ProviderKind::HttpOpenAiStyle,
            model_name: "test-model".into(),
            temperature: Temperature::Fixed(0.0),
            max_attempts_hint: 6,
            credentials_env: Some(style_env.into()),
            cassette_path: None,
            endpoint: Some("http://localhost:9".into()),
        }
    }

    #[test]
    fn extracts_openai_and_anthropic_shapes() {
        let p = HttpProvider::new(HttpStyle::OpenAi, &cfg("K")).unwrap();
        let v = json!({"choices": [{"message": {"content": "hello"}}]});
        assert_eq!(p.extract_text(&v).unwrap(), "hello");
        let p = HttpProvider::new(HttpStyle::Anthropic, &cfg("K")).unwrap();
        let v = json!({"content": [{"type": "text", "text": "hi"}]});
        assert_eq!(p.extract_text(&v).unwrap(), "hi");
    }

    #[test]
    fn request_bodies_follow_provider_conventions() {
        let p = HttpProvider::new(HttpStyle::OpenAi, &cfg("K")).unwrap();
        let (url, body, headers) = p.build_request("hi", "secret");
        assert!(url.ends_with("/chat/completions"));
        assert_eq!(body["messages"][0]["content"], "hi");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(headers[0].1, "Bearer secret");

        let p = HttpProvider::new(HttpStyle::Anthropic, &cfg("K")).unwrap();
        let (url, body, headers) = p.build_request("hi", "secret");
        assert!(url.ends_with("/v1/messages"));
        assert!(body["max_tokens"].is_number());
        assert_eq!(headers[0].0, "x-api-key");
    }

    #[test]
    fn missing_credentials_fail_without_network() {
        let before = HTTP_ATTEMPTS.load(Ordering::Relaxed);
        let p = HttpProvider::new(HttpStyle::OpenAi, &cfg("OXIDIZE_NO_SUCH_KEY_VAR")).unwrap();
        assert!(p.complete("x").is_err());
        assert_eq!(HTTP_ATTEMPTS.load(Ordering::Relaxed), before);
    }
}
