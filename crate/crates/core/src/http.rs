//! Small JSON-over-HTTP helper with bounded retries, shared by the embedding
//! and chat clients.

use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HttpError {
    #[error("service unavailable: {0}")]
    Unavailable(String),
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub backoff_ms: u64,
    pub timeout_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            backoff_ms: 250,
            timeout_ms: 60_000,
        }
    }
}

impl RetryPolicy {
    fn agent(&self) -> ureq::Agent {
        ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(self.timeout_ms)))
            .build()
            .into()
    }
}

/// POST `body` as JSON and decode the JSON response. Transport failures and
/// non-2xx statuses are retried with exponential backoff.
pub fn post_json<B: Serialize, T: DeserializeOwned>(
    url: &str,
    headers: &[(&str, String)],
    body: &B,
    policy: &RetryPolicy,
) -> Result<T, HttpError> {
    let agent = policy.agent();
    let attempts = policy.attempts.max(1);
    let mut last = HttpError::Unavailable("no attempt made".into());
    for attempt in 0..attempts {
        if attempt > 0 {
            let wait = policy.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
            thread::sleep(Duration::from_millis(wait));
        }
        let mut req = agent.post(url);
        for (k, v) in headers {
            req = req.header(*k, v.as_str());
        }
        match req.send_json(body) {
            Ok(mut resp) => {
                return resp
                    .body_mut()
                    .read_json::<T>()
                    .map_err(|e| HttpError::Malformed(e.to_string()));
            }
            Err(ureq::Error::Timeout(t)) => {
                log::warn!("POST {url} attempt {} timed out ({t:?})", attempt + 1);
                last = HttpError::Timeout(format!("{t:?}"));
            }
            Err(e) => {
                log::warn!("POST {url} attempt {} failed: {e}", attempt + 1);
                last = HttpError::Unavailable(e.to_string());
            }
        }
    }
    Err(last)
}
