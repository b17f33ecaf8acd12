//! Cached, retrying calls to chat-completion HTTP APIs.
//!
//! Provider request and response shapes live in small adapters; the network
//! itself sits behind [`Transport`] so tests can script responses without
//! touching a socket.

use std::fmt;
use std::time::Duration;

use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cache::{cache_key, CacheError, CachedResponse, ResponseCache, SamplingParams, TokenUsage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// `openai` or `gemini`.
    pub provider_id: String,
    pub model_name: String,
    pub endpoint_url: String,
    /// Environment variable holding the API key.
    pub auth_env_var: String,
    #[serde(default = "default_timeout")]
    pub request_timeout: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Sent only when set; some models reject anything but their default.
    #[serde(default = "default_temperature")]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub max_tokens: Option<u32>,
}

fn default_timeout() -> u64 {
    120
}

fn default_retries() -> u32 {
    3
}

fn default_temperature() -> Option<f64> {
    Some(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provider {
    OpenAi,
    Gemini,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<Provider, QueryError> {
        let invalid = |message: String| QueryError::InvalidSpec {
            model: self.model_name.clone(),
            message,
        };
        let provider = match self.provider_id.as_str() {
            "openai" => Provider::OpenAi,
            "gemini" => Provider::Gemini,
            other => return Err(invalid(format!("unknown provider {other:?}"))),
        };
        let url = url::Url::parse(&self.endpoint_url)
            .map_err(|e| invalid(format!("endpoint_url {:?}: {e}", self.endpoint_url)))?;
        if !matches!(url.scheme(), "http" | "https") {
            return Err(invalid(format!("endpoint_url must be http(s), got {}", url.scheme())));
        }
        if self.model_name.trim().is_empty() {
            return Err(invalid("model_name is empty".into()));
        }
        if self.auth_env_var.trim().is_empty() {
            return Err(invalid("auth_env_var is empty".into()));
        }
        Ok(provider)
    }

    fn sampling(&self) -> SamplingParams {
        SamplingParams {
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        }
    }
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("environment variable {var} is not set and the response is not cached")]
    AuthMissing { var: String },
    #[error("network error after {attempts} attempts: {message}")]
    NetworkError { attempts: u32, message: String },
    #[error("provider returned HTTP {status}: {body}")]
    ProviderError { status: u16, body: String },
    #[error("invalid model spec for {model}: {message}")]
    InvalidSpec { model: String, message: String },
    #[error(transparent)]
    Cache(#[from] CacheError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// A failure below HTTP: DNS, connect, TLS, timeout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError(pub String);

impl fmt::Display for TransportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub trait Transport: Send + Sync {
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

/// Blocking HTTPS via `ureq`.
#[derive(Debug, Default)]
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let agent = ureq::AgentBuilder::new().timeout(request.timeout).build();
        let mut req = agent.post(&request.url);
        for (k, v) in &request.headers {
            req = req.set(k, v);
        }
        match req.send_string(&request.body) {
            Ok(resp) => {
                let status = resp.status();
                let body = resp.into_string().map_err(|e| TransportError(e.to_string()))?;
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::Status(status, resp)) => Ok(HttpResponse {
                status,
                body: resp.into_string().unwrap_or_default(),
            }),
            Err(ureq::Error::Transport(t)) => Err(TransportError(t.to_string())),
        }
    }
}

fn build_request(provider: Provider, spec: &ModelSpec, api_key: &str, prompt: &str) -> HttpRequest {
    let timeout = Duration::from_secs(spec.request_timeout.max(1));
    let mut headers = vec![("Content-Type".to_string(), "application/json".to_string())];
    let body = match provider {
        Provider::OpenAi => {
            headers.push(("Authorization".into(), format!("Bearer {api_key}")));
            let mut body = json!({
                "model": spec.model_name,
                "messages": [{"role": "user", "content": prompt}],
            });
            if let Some(t) = spec.temperature {
                body["temperature"] = json!(t);
            }
            if let Some(m) = spec.max_tokens {
                body["max_completion_tokens"] = json!(m);
            }
            body
        }
        Provider::Gemini => {
            headers.push(("x-goog-api-key".into(), api_key.to_string()));
            let mut config = serde_json::Map::new();
            if let Some(t) = spec.temperature {
                config.insert("temperature".into(), json!(t));
            }
            if let Some(m) = spec.max_tokens {
                config.insert("maxOutputTokens".into(), json!(m));
            }
            json!({
                "contents": [{"role": "user", "parts": [{"text": prompt}]}],
                "generationConfig": config,
            })
        }
    };
    HttpRequest {
        url: spec.endpoint_url.clone(),
        headers,
        body: body.to_string(),
        timeout,
    }
}

fn parse_body(provider: Provider, body: &str) -> Option<(String, Option<TokenUsage>)> {
    let v: Value = serde_json::from_str(body).ok()?;
    let n = |x: &Value| x.as_u64();
    match provider {
        Provider::OpenAi => {
            let text = v["choices"][0]["message"]["content"].as_str()?.to_string();
            let usage = v.get("usage").map(|u| TokenUsage {
                prompt_tokens: n(&u["prompt_tokens"]),
                completion_tokens: n(&u["completion_tokens"]),
                total_tokens: n(&u["total_tokens"]),
            });
            Some((text, usage))
        }
        Provider::Gemini => {
            let parts = v["candidates"][0]["content"]["parts"].as_array()?;
            let text: String = parts.iter().filter_map(|p| p["text"].as_str()).collect();
            let usage = v.get("usageMetadata").map(|u| TokenUsage {
                prompt_tokens: n(&u["promptTokenCount"]),
                completion_tokens: n(&u["candidatesTokenCount"]),
                total_tokens: n(&u["totalTokenCount"]),
            });
            Some((text, usage))
        }
    }
}

fn retryable(status: u16) -> bool {
    status == 429 || status >= 500
}

type EnvLookup = Box<dyn Fn(&str) -> Option<String> + Send + Sync>;

pub struct Client {
    transport: Box<dyn Transport>,
    cache: ResponseCache,
    backoff_base: Duration,
    env: EnvLookup,
}

impl Client {
    pub fn new(cache: ResponseCache) -> Self {
        Self::with_transport(cache, Box::new(UreqTransport))
    }

    pub fn with_transport(cache: ResponseCache, transport: Box<dyn Transport>) -> Self {
        Client {
            transport,
            cache,
            backoff_base: Duration::from_millis(500),
            env: Box::new(|var| std::env::var(var).ok().filter(|v| !v.is_empty())),
        }
    }

    /// Delay before retry k is `base * 2^k`.
    pub fn backoff_base(mut self, base: Duration) -> Self {
        self.backoff_base = base;
        self
    }

    /// Replaces the process environment as the credential source.
    pub fn env_lookup(mut self, env: impl Fn(&str) -> Option<String> + Send + Sync + 'static) -> Self {
        self.env = Box::new(env);
        self
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    pub fn cached(&self, spec: &ModelSpec, prompt: &str) -> Result<Option<CachedResponse>, QueryError> {
        Ok(self.cache.get(&cache_key(&spec.model_name, prompt))?)
    }

    /// Cached response if present, otherwise one request with retries on
    /// network failures, 429 and 5xx. Successful responses are cached.
    pub fn query(&self, spec: &ModelSpec, prompt: &str) -> Result<CachedResponse, QueryError> {
        let provider = spec.validate()?;
        let key = cache_key(&spec.model_name, prompt);
        if let Some(hit) = self.cache.get(&key)? {
            return Ok(hit);
        }
        let api_key = (self.env)(&spec.auth_env_var).ok_or_else(|| QueryError::AuthMissing {
            var: spec.auth_env_var.clone(),
        })?;
        let request = build_request(provider, spec, &api_key, prompt);

        let attempts = spec.max_retries + 1;
        let mut last_error;
        let mut attempt = 0;
        loop {
            match self.transport.post(&request) {
                Ok(resp) if (200..300).contains(&resp.status) => {
                    let (raw_text, token_usage) =
                        parse_body(provider, &resp.body).ok_or_else(|| QueryError::ProviderError {
                            status: resp.status,
                            body: format!("unrecognized response body: {}", truncate(&resp.body)),
                        })?;
                    let entry = CachedResponse {
                        cache_key: key,
                        model_name: spec.model_name.clone(),
                        raw_text,
                        timestamp: Utc::now(),
                        token_usage,
                        sampling: spec.sampling(),
                    };
                    self.cache.put(&entry)?;
                    return Ok(entry);
                }
                Ok(resp) if retryable(resp.status) => {
                    last_error = QueryError::ProviderError {
                        status: resp.status,
                        body: resp.body,
                    };
                }
                Ok(resp) => {
                    return Err(QueryError::ProviderError {
                        status: resp.status,
                        body: resp.body,
                    })
                }
                Err(e) => {
                    last_error = QueryError::NetworkError {
                        attempts: attempt + 1,
                        message: e.0,
                    };
                }
            }
            attempt += 1;
            if attempt >= attempts {
                return Err(last_error);
            }
            std::thread::sleep(self.backoff_base.saturating_mul(1 << (attempt - 1).min(16)));
        }
    }
}

fn truncate(body: &str) -> String {
    body.chars().take(200).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let mut spec = ModelSpec {
            provider_id: "openai".into(),
            model_name: "gpt-5".into(),
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            auth_env_var: "OPENAI_API_KEY".into(),
            request_timeout: 60,
            max_retries: 2,
            temperature: None,
            max_tokens: None,
        };
        assert_eq!(spec.validate().unwrap(), Provider::OpenAi);
        spec.endpoint_url = "not a url".into();
        assert!(matches!(spec.validate(), Err(QueryError::InvalidSpec { .. })));
        spec.endpoint_url = "ftp://example.com".into();
        assert!(spec.validate().is_err());
        spec.endpoint_url = "https://example.com".into();
        spec.provider_id = "other".into();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn request_bodies() {
        let spec = ModelSpec {
            provider_id: "gemini".into(),
            model_name: "gemini-2.5-pro".into(),
            endpoint_url: "https://example.com/v1beta/models/gemini-2.5-pro:generateContent".into(),
            auth_env_var: "GEMINI_API_KEY".into(),
            request_timeout: 60,
            max_retries: 0,
            temperature: Some(0.0),
            max_tokens: None,
        };
        let req = build_request(Provider::Gemini, &spec, "k", "hello");
        let body: Value = serde_json::from_str(&req.body).unwrap();
        assert_eq!(body["contents"][0]["parts"][0]["text"], "hello");
        assert_eq!(body["generationConfig"]["temperature"], 0.0);
        assert!(req.headers.contains(&("x-goog-api-key".into(), "k".into())));

        let req = build_request(Provider::OpenAi, &spec, "k", "hello");
        let body: Value = serde_json::from_str(&req.body).unwrap();
        assert_eq!(body["messages"][0]["content"], "hello");
        assert!(req.headers.contains(&("Authorization".into(), "Bearer k".into())));
    }

    #[test]
    fn response_bodies() {
        let openai = r#"{"choices":[{"message":{"content":"1: B"}}],"usage":{"prompt_tokens":10,"completion_tokens":3,"total_tokens":13}}"#;
        let (text, usage) = parse_body(Provider::OpenAi, openai).unwrap();
        assert_eq!(text, "1: B");
        assert_eq!(usage.unwrap().total_tokens, Some(13));
        let gemini = r#"{"candidates":[{"content":{"parts":[{"text":"1: "},{"text":"B"}]}}]}"#;
        assert_eq!(parse_body(Provider::Gemini, gemini).unwrap().0, "1: B");
        assert!(parse_body(Provider::OpenAi, "{}").is_none());
    }
}
