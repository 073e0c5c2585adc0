//! Optional text normalization through an external client, failing open.

use std::sync::mpsc;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use super::LangId;

/// Default per-request budget for a normalization call.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormalizationError {
    #[error("timeout")]
    Timeout,
    #[error("network failure: {0}")]
    Network(String),
    #[error("status {0}")]
    Status(u16),
    #[error("malformed response: {0}")]
    Malformed(String),
}

/// An opaque text-to-text normalizer (spelling, casing, punctuation).
///
/// Implementations must tolerate concurrent calls.
pub trait NormalizationClient: Send + Sync {
    fn name(&self) -> &str;

    fn normalize(&self, text: &str, lang: &str) -> Result<String, NormalizationError>;
}

/// Outcome of the normalization stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub text: String,
    /// Provider that produced `text` (`"identity"` on fallback).
    pub provider: String,
    /// `"applied"` or `"skipped (<reason>)"`.
    pub detail: String,
}

impl Normalized {
    fn skipped(text: &str, reason: &str) -> Self {
        Self {
            text: text.to_owned(),
            provider: "identity".to_owned(),
            detail: format!("skipped ({reason})"),
        }
    }

    pub fn fell_back(&self) -> bool {
        self.detail.starts_with("skipped")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationMode {
    Enabled,
    Disabled,
    Offline,
}

/// The normalization stage: a client plus the policy around it.
#[derive(Clone)]
pub struct Normalizer {
    client: Option<Arc<dyn NormalizationClient>>,
    mode: NormalizationMode,
    timeout: Duration,
}

impl std::fmt::Debug for Normalizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Normalizer")
            .field("client", &self.client.as_ref().map(|c| c.name().to_owned()))
            .field("mode", &self.mode)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl Normalizer {
    pub fn new(client: Arc<dyn NormalizationClient>) -> Self {
        Self {
            client: Some(client),
            mode: NormalizationMode::Enabled,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn disabled() -> Self {
        Self {
            client: None,
            mode: NormalizationMode::Disabled,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    /// Offline mode never holds a client, so it cannot reach the network.
    pub fn offline() -> Self {
        Self {
            client: None,
            mode: NormalizationMode::Offline,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn mode(&self) -> NormalizationMode {
        self.mode
    }

    pub fn normalize(&self, text: &str, lang: &LangId) -> Normalized {
        match (self.mode, &self.client) {
            (NormalizationMode::Offline, _) => Normalized::skipped(text, "offline"),
            (NormalizationMode::Disabled, _) | (_, None) => Normalized::skipped(text, "disabled"),
            (NormalizationMode::Enabled, Some(client)) => normalize_text(client, text, lang, self.timeout),
        }
    }
}

/// Calls `client` with a hard `timeout`; any failure, or an empty answer to a
/// non-empty input, returns `text` unchanged.
pub fn normalize_text(
    client: &Arc<dyn NormalizationClient>,
    text: &str,
    lang: &LangId,
    timeout: Duration,
) -> Normalized {
    if text.trim().is_empty() {
        return Normalized::skipped(text, "empty input");
    }
    let (tx, rx) = mpsc::channel();
    let worker = Arc::clone(client);
    let (input, code) = (text.to_owned(), lang.code.clone());
    let spawned = std::thread::Builder::new()
        .name("normalize".into())
        .spawn(move || {
            let _ = tx.send(worker.normalize(&input, &code));
        });
    if spawned.is_err() {
        return Normalized::skipped(text, "network failure");
    }
    let result = match rx.recv_timeout(timeout) {
        Ok(result) => result,
        Err(mpsc::RecvTimeoutError::Timeout) => Err(NormalizationError::Timeout),
        Err(mpsc::RecvTimeoutError::Disconnected) => Err(NormalizationError::Network("client panicked".into())),
    };
    match result {
        Ok(out) if !out.trim().is_empty() => Normalized {
            text: out,
            provider: client.name().to_owned(),
            detail: "applied".to_owned(),
        },
        Ok(_) => Normalized::skipped(text, "empty response"),
        Err(NormalizationError::Timeout) => Normalized::skipped(text, "timeout"),
        Err(NormalizationError::Network(_)) => Normalized::skipped(text, "network failure"),
        Err(e) => Normalized::skipped(text, &e.to_string()),
    }
}
