//! Query path with a scripted transport; nothing here opens a socket.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use matchup_core::fixtures;
use matchup_core::Puzzle;
use matchup_harness::cache::{cache_key, CachedResponse, ResponseCache, SamplingParams};
use matchup_harness::client::{HttpRequest, HttpResponse, TransportError};
use matchup_harness::prompt::build_prompt;
use matchup_harness::{Client, ModelSpec, QueryError, Transport};

type Script = Arc<Mutex<VecDeque<Result<HttpResponse, TransportError>>>>;

struct Scripted {
    script: Script,
    seen: Arc<Mutex<Vec<HttpRequest>>>,
}

impl Transport for Scripted {
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self.seen.lock().unwrap().push(request.clone());
        self.script
            .lock()
            .unwrap()
            .pop_front()
            .expect("transport called more often than scripted")
    }
}

fn ok(text: &str) -> Result<HttpResponse, TransportError> {
    Ok(HttpResponse {
        status: 200,
        body: serde_json::json!({
            "choices": [{"message": {"content": text}}],
            "usage": {"prompt_tokens": 5, "completion_tokens": 2, "total_tokens": 7}
        })
        .to_string(),
    })
}

fn status(code: u16) -> Result<HttpResponse, TransportError> {
    Ok(HttpResponse {
        status: code,
        body: format!("error {code}"),
    })
}

fn spec(retries: u32) -> ModelSpec {
    ModelSpec {
        provider_id: "openai".into(),
        model_name: "gpt-5".into(),
        endpoint_url: "https://api.example.invalid/v1/chat/completions".into(),
        auth_env_var: "TEST_API_KEY".into(),
        request_timeout: 5,
        max_retries: retries,
        temperature: Some(0.0),
        max_tokens: None,
    }
}

struct Harness {
    client: Client,
    seen: Arc<Mutex<Vec<HttpRequest>>>,
    _dir: tempfile::TempDir,
}

fn harness(script: Vec<Result<HttpResponse, TransportError>>, with_key: bool) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let transport = Scripted {
        script: Arc::new(Mutex::new(script.into())),
        seen: seen.clone(),
    };
    let client = Client::with_transport(ResponseCache::new(dir.path()), Box::new(transport))
        .backoff_base(Duration::ZERO)
        .env_lookup(move |var| (with_key && var == "TEST_API_KEY").then(|| "secret".to_string()));
    Harness {
        client,
        seen,
        _dir: dir,
    }
}

fn prompt() -> String {
    build_prompt(&Puzzle::MatchUp(fixtures::polish_matchup()))
}

#[test]
fn retries_after_429_then_succeeds() {
    let h = harness(vec![status(429), ok("1: D")], true);
    let resp = h.client.query(&spec(3), &prompt()).unwrap();
    assert_eq!(resp.raw_text, "1: D");
    assert_eq!(resp.token_usage.unwrap().total_tokens, Some(7));
    assert_eq!(h.seen.lock().unwrap().len(), 2);
}

#[test]
fn second_query_is_a_cache_hit() {
    let h = harness(vec![ok("1: D")], true);
    let first = h.client.query(&spec(0), &prompt()).unwrap();
    let second = h.client.query(&spec(0), &prompt()).unwrap();
    assert_eq!(first, second);
    assert_eq!(h.seen.lock().unwrap().len(), 1);
}

#[test]
fn preseeded_cache_needs_no_network_and_no_key() {
    let h = harness(vec![], false);
    let p = prompt();
    let entry = CachedResponse {
        cache_key: cache_key("gpt-5", &p),
        model_name: "gpt-5".into(),
        raw_text: "D F B E A C".into(),
        timestamp: chrono::Utc::now(),
        token_usage: None,
        sampling: SamplingParams::default(),
    };
    h.client.cache().put(&entry).unwrap();
    assert_eq!(h.client.query(&spec(0), &p).unwrap().raw_text, "D F B E A C");
    assert!(h.seen.lock().unwrap().is_empty());
}

#[test]
fn missing_credentials_on_cold_cache() {
    let h = harness(vec![], false);
    assert!(matches!(
        h.client.query(&spec(0), &prompt()),
        Err(QueryError::AuthMissing { var }) if var == "TEST_API_KEY"
    ));
}

#[test]
fn client_errors_are_not_retried() {
    let h = harness(vec![status(400)], true);
    match h.client.query(&spec(5), &prompt()) {
        Err(QueryError::ProviderError { status, body }) => {
            assert_eq!(status, 400);
            assert_eq!(body, "error 400");
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(h.seen.lock().unwrap().len(), 1);
}

#[test]
fn retries_are_bounded() {
    let h = harness(vec![status(503), status(503), status(503)], true);
    assert!(matches!(
        h.client.query(&spec(2), &prompt()),
        Err(QueryError::ProviderError { status: 503, .. })
    ));
    assert_eq!(h.seen.lock().unwrap().len(), 3);

    let fail = || Err(TransportError("connection refused".into()));
    let h = harness(vec![fail(), fail()], true);
    assert!(matches!(
        h.client.query(&spec(1), &prompt()),
        Err(QueryError::NetworkError { attempts: 2, .. })
    ));
}

#[test]
fn failed_queries_are_not_cached() {
    let h = harness(vec![status(500), ok("1: D")], true);
    assert!(h.client.query(&spec(0), &prompt()).is_err());
    assert!(h.client.cached(&spec(0), &prompt()).unwrap().is_none());
    assert_eq!(h.client.query(&spec(0), &prompt()).unwrap().raw_text, "1: D");
}

#[test]
fn request_carries_prompt_and_key() {
    let h = harness(vec![ok("x")], true);
    h.client.query(&spec(0), &prompt()).unwrap();
    let seen = h.seen.lock().unwrap();
    let body: serde_json::Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(body["messages"][0]["content"], prompt());
    assert_eq!(body["temperature"], 0.0);
    assert!(seen[0].headers.iter().any(|(k, v)| k == "Authorization" && v == "Bearer secret"));
}
