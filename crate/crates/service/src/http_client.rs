//! HTTP normalization client.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use signpipe_core::text::{NormalizationClient, NormalizationError};

/// Outbound requests attempted by every client in this process.
static REQUESTS: AtomicU64 = AtomicU64::new(0);

/// Number of outbound normalization requests attempted so far.
pub fn outbound_requests() -> u64 {
    REQUESTS.load(Ordering::SeqCst)
}

#[derive(Serialize)]
struct Request<'a> {
    text: &'a str,
    lang: &'a str,
}

#[derive(Deserialize)]
struct Response {
    text: String,
}

pub struct HttpNormalizer {
    endpoint: String,
    agent: ureq::Agent,
    name: String,
}

impl HttpNormalizer {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, loopback: bool) -> Self {
        let endpoint = endpoint.into();
        let mut config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false);
        if loopback {
            config = config.proxy(None);
        }
        Self {
            name: format!("http:{endpoint}"),
            endpoint,
            agent: ureq::Agent::new_with_config(config.build()),
        }
    }
}

impl NormalizationClient for HttpNormalizer {
    fn name(&self) -> &str {
        &self.name
    }

    fn normalize(&self, text: &str, lang: &str) -> Result<String, NormalizationError> {
        REQUESTS.fetch_add(1, Ordering::SeqCst);
        let mut response = self
            .agent
            .post(&self.endpoint)
            .send_json(Request { text, lang })
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => NormalizationError::Timeout,
                other => NormalizationError::Network(other.to_string()),
            })?;
        let status = response.status().as_u16();
        if status != 200 {
            return Err(NormalizationError::Status(status));
        }
        let body: Response = response.body_mut().read_json().map_err(|e| match e {
            ureq::Error::Timeout(_) => NormalizationError::Timeout,
            other => NormalizationError::Malformed(other.to_string()),
        })?;
        Ok(body.text)
    }
}
