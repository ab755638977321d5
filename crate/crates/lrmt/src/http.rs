//! Blocking JSON-over-HTTP with exponential backoff.

use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Attempts per request and the backoff base: the wait after failed attempt
/// `k` (0-based) is `base * 2^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    pub fn with_base_ms(ms: u64) -> Self {
        RetryPolicy {
            base: Duration::from_millis(ms),
            ..RetryPolicy::default()
        }
    }

    pub fn delay(&self, attempt: u32) -> Duration {
        self.base.saturating_mul(1u32 << attempt.min(16))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HttpError {
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("unreadable response body: {0}")]
    Body(String),
}

/// A reply plus the number of HTTP requests it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Attempted<T> {
    pub value: T,
    pub requests: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("gave up after {requests} requests: {last}")]
pub struct Exhausted {
    pub requests: u32,
    pub last: HttpError,
}

pub fn agent() -> ureq::Agent {
    ureq::AgentBuilder::new()
        .timeout_connect(Duration::from_secs(10))
        .timeout(Duration::from_secs(300))
        .build()
}

fn once<B: Serialize, T: DeserializeOwned>(
    agent: &ureq::Agent,
    url: &str,
    bearer: Option<&str>,
    body: Option<&B>,
) -> Result<T, HttpError> {
    let request = match body {
        Some(_) => agent.post(url),
        None => agent.get(url),
    };
    let request = match bearer {
        Some(token) => request.set("Authorization", &format!("Bearer {token}")),
        None => request,
    };
    let response = match body {
        Some(b) => request.send_json(b),
        None => request.call(),
    };
    match response {
        Ok(r) if r.status() == 200 => r.into_json().map_err(|e| HttpError::Body(e.to_string())),
        Ok(r) => Err(HttpError::Status {
            status: r.status(),
            body: r.into_string().unwrap_or_default(),
        }),
        Err(ureq::Error::Status(status, r)) => Err(HttpError::Status {
            status,
            body: r.into_string().unwrap_or_default(),
        }),
        Err(e) => Err(HttpError::Transport(e.to_string())),
    }
}

/// Sends a request, retrying every failure (non-200, transport, bad body)
/// under `policy`. `body = None` issues a GET.
pub fn request_json<B: Serialize, T: DeserializeOwned>(
    agent: &ureq::Agent,
    url: &str,
    bearer: Option<&str>,
    body: Option<&B>,
    policy: RetryPolicy,
) -> Result<Attempted<T>, Exhausted> {
    let attempts = policy.max_attempts.max(1);
    let mut attempt = 0;
    loop {
        match once(agent, url, bearer, body) {
            Ok(value) => {
                return Ok(Attempted {
                    value,
                    requests: attempt + 1,
                })
            }
            Err(last) if attempt + 1 >= attempts => {
                return Err(Exhausted {
                    requests: attempt + 1,
                    last,
                })
            }
            Err(_) => {
                thread::sleep(policy.delay(attempt));
                attempt += 1;
            }
        }
    }
}

/// Joins a base URL and a path without doubling slashes.
pub fn endpoint(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path.trim_start_matches('/'))
}
