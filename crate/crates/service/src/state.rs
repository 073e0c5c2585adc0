//! Shared service state, built once at startup and read-only afterwards.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;
use signpipe_core::pipeline::{DictionaryTranslator, DtwRecognizer, EnergySegmenter, Pipeline, TrigramIdentifier};
use signpipe_core::s2s::{load_dictionary, Dictionary, DictionaryError};
use signpipe_core::sts::RecognitionError;
use signpipe_core::text::{NgramLangModel, Normalizer};
use thiserror::Error;

use crate::config::{is_loopback_endpoint, ConfigError, ServiceConfig};
use crate::http_client::HttpNormalizer;
use crate::store::PoseStore;

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("loading dictionary {path}: {source}")]
    Dictionary {
        path: PathBuf,
        #[source]
        source: DictionaryError,
    },
    #[error("dictionary {path} serves {served}, not the configured pair ({spoken}, {signed})")]
    PairNotServed {
        path: PathBuf,
        spoken: String,
        signed: String,
        served: String,
    },
    #[error("langid model {path}: {reason}")]
    LangidModel { path: PathBuf, reason: String },
    #[error("building templates for {path}: {source}")]
    Templates {
        path: PathBuf,
        #[source]
        source: RecognitionError,
    },
}

/// Counts translation jobs so leaks are observable from outside.
#[derive(Debug, Default)]
pub struct JobTracker {
    active: AtomicUsize,
    started: AtomicU64,
    completed: AtomicU64,
    cancelled: AtomicU64,
    failed: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct JobCounts {
    pub active: usize,
    pub started: u64,
    pub completed: u64,
    pub cancelled: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobOutcome {
    Completed,
    Cancelled,
    Failed,
}

impl JobTracker {
    pub fn start(self: &Arc<Self>) -> JobGuard {
        self.active.fetch_add(1, Ordering::SeqCst);
        self.started.fetch_add(1, Ordering::SeqCst);
        JobGuard {
            tracker: Arc::clone(self),
            outcome: None,
        }
    }

    pub fn counts(&self) -> JobCounts {
        JobCounts {
            active: self.active.load(Ordering::SeqCst),
            started: self.started.load(Ordering::SeqCst),
            completed: self.completed.load(Ordering::SeqCst),
            cancelled: self.cancelled.load(Ordering::SeqCst),
            failed: self.failed.load(Ordering::SeqCst),
        }
    }
}

/// Decrements the active count on drop; an unfinished guard counts as
/// cancelled.
#[derive(Debug)]
pub struct JobGuard {
    tracker: Arc<JobTracker>,
    outcome: Option<JobOutcome>,
}

impl JobGuard {
    pub fn finish(mut self, outcome: JobOutcome) {
        self.outcome = Some(outcome);
    }
}

impl Drop for JobGuard {
    fn drop(&mut self) {
        let counter = match self.outcome.unwrap_or(JobOutcome::Cancelled) {
            JobOutcome::Completed => &self.tracker.completed,
            JobOutcome::Cancelled => &self.tracker.cancelled,
            JobOutcome::Failed => &self.tracker.failed,
        };
        counter.fetch_add(1, Ordering::SeqCst);
        self.tracker.active.fetch_sub(1, Ordering::SeqCst);
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub pipeline: Arc<Pipeline>,
    pub store: Arc<PoseStore>,
    pub jobs: Arc<JobTracker>,
    pub max_pose_bytes: usize,
    pub static_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(pipeline: Pipeline, cache_bytes: usize, max_pose_bytes: usize) -> Self {
        Self {
            pipeline: Arc::new(pipeline),
            store: Arc::new(PoseStore::new(cache_bytes)),
            jobs: Arc::new(JobTracker::default()),
            max_pose_bytes,
            static_dir: None,
        }
    }

    /// Validates `config`, loads every dictionary once and wires the pipeline.
    pub fn from_config(config: &ServiceConfig) -> Result<Self, StartupError> {
        config.validate()?;
        let normalization = &config.normalization;
        let normalizer = if config.offline {
            Normalizer::offline()
        } else if normalization.enabled {
            let endpoint = normalization.endpoint.clone().ok_or(ConfigError::NoEndpoint)?;
            let timeout = Duration::from_millis(normalization.timeout_ms);
            let loopback = is_loopback_endpoint(&endpoint)?;
            Normalizer::new(Arc::new(HttpNormalizer::new(endpoint, timeout, loopback))).with_timeout(timeout)
        } else {
            Normalizer::disabled()
        };
        let mut pipeline = Pipeline::new(normalizer).with_segmenter(Arc::new(EnergySegmenter {
            params: config.segmentation,
        }));
        if let Some(path) = &config.langid_model {
            let bad = |reason: String| StartupError::LangidModel {
                path: path.clone(),
                reason,
            };
            let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
            let model: NgramLangModel = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
            let name = format!("trigram-nb ({})", path.display());
            pipeline = pipeline.with_langid(Arc::new(TrigramIdentifier::new(Arc::new(model), name)));
        }

        type Providers = (Arc<DictionaryTranslator>, Arc<DtwRecognizer>);
        let mut loaded: BTreeMap<PathBuf, Providers> = BTreeMap::new();
        for d in &config.dictionaries {
            let key = d.path.canonicalize().unwrap_or_else(|_| d.path.clone());
            if !loaded.contains_key(&key) {
                let dict: Arc<Dictionary> = Arc::new(load_dictionary(&d.path).map_err(|source| {
                    StartupError::Dictionary {
                        path: d.path.clone(),
                        source,
                    }
                })?);
                let translator = Arc::new(DictionaryTranslator::new(Arc::clone(&dict), config.crossfade));
                let recognizer = Arc::new(
                    DtwRecognizer::new(Arc::clone(&dict), &config.segmentation, config.tau).map_err(|source| {
                        StartupError::Templates {
                            path: d.path.clone(),
                            source,
                        }
                    })?,
                );
                loaded.insert(key.clone(), (translator, recognizer));
            }
            let (translator, recognizer) = &loaded[&key];
            let dict = signpipe_core::pipeline::SignRecognizer::dictionary(recognizer.as_ref());
            if dict.signed_lang() != d.signed_lang || !dict.spoken_langs().contains(&d.spoken_lang) {
                return Err(StartupError::PairNotServed {
                    path: d.path.clone(),
                    spoken: d.spoken_lang.clone(),
                    signed: d.signed_lang.clone(),
                    served: format!("{} -> {}", dict.spoken_langs().join(","), dict.signed_lang()),
                });
            }
            let pair = (d.spoken_lang.clone(), d.signed_lang.clone());
            pipeline.register_translator(pair.clone(), translator.clone());
            pipeline.register_recognizer(pair, recognizer.clone());
            tracing::info!(path = %d.path.display(), spoken = %d.spoken_lang, signed = %d.signed_lang, entries = dict.len(), "dictionary loaded");
        }
        let mut state = Self::new(pipeline, config.server.cache_bytes, config.server.max_pose_bytes);
        state.static_dir = config.server.static_dir.clone();
        Ok(state)
    }
}
