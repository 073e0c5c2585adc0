//! Service configuration: a UTF-8 JSON file mirroring the pipeline settings.

use std::net::IpAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use signpipe_core::sts::{ParamsError, SegmenterParams, DEFAULT_TAU};
use signpipe_core::s2s::DEFAULT_CROSSFADE;
use thiserror::Error;

/// Environment variable consulted when no config path is given.
pub const CONFIG_ENV: &str = "SIGNPIPE_CONFIG";

pub const DEFAULT_CACHE_BYTES: usize = 256 * 1024 * 1024;
pub const DEFAULT_MAX_POSE_BYTES: usize = 32 * 1024 * 1024;
pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("no config path given and {CONFIG_ENV} is not set")]
    NoPath,
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{what} {path} does not exist")]
    MissingPath { what: &'static str, path: PathBuf },
    #[error("offline mode requires normalization to be disabled")]
    OfflineNormalization,
    #[error("offline mode forbids the non-loopback endpoint {0}")]
    OfflineEndpoint(String),
    #[error("normalization is enabled but no endpoint is configured")]
    NoEndpoint,
    #[error("invalid endpoint {endpoint}: {reason}")]
    BadEndpoint { endpoint: String, reason: String },
    #[error("segmentation: {0}")]
    Segmentation(#[from] ParamsError),
    #[error("tau must be a non-negative finite number, got {0}")]
    Tau(f64),
    #[error("pair ({spoken}, {signed}) is configured twice")]
    DuplicatePair { spoken: String, signed: String },
    #[error("cache_bytes must be positive")]
    CacheBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryRef {
    pub spoken_lang: String,
    pub signed_lang: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationConfig {
    pub enabled: bool,
    /// Accepts `POST {"text","lang"}` and answers `{"text"}`.
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            endpoint: None,
            timeout_ms: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    /// Served under `/` when set.
    pub static_dir: Option<PathBuf>,
    pub max_pose_bytes: usize,
    pub cache_bytes: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".to_owned(),
            port: DEFAULT_PORT,
            static_dir: None,
            max_pose_bytes: DEFAULT_MAX_POSE_BYTES,
            cache_bytes: DEFAULT_CACHE_BYTES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub dictionaries: Vec<DictionaryRef>,
    /// JSON model written by `train-langid`; the bundled model otherwise.
    pub langid_model: Option<PathBuf>,
    pub normalization: NormalizationConfig,
    pub segmentation: SegmenterParams,
    pub tau: f64,
    pub crossfade: usize,
    pub offline: bool,
    pub server: ServerConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            dictionaries: Vec::new(),
            langid_model: None,
            normalization: NormalizationConfig::default(),
            segmentation: SegmenterParams::default(),
            tau: DEFAULT_TAU,
            crossfade: DEFAULT_CROSSFADE,
            offline: false,
            server: ServerConfig::default(),
        }
    }
}

impl ServiceConfig {
    /// Reads `path`, or the file named by `SIGNPIPE_CONFIG` when `path` is
    /// `None`. Relative paths inside resolve against the file's directory.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let path = match path {
            Some(p) => p.to_path_buf(),
            None => std::env::var_os(CONFIG_ENV).map(PathBuf::from).ok_or(ConfigError::NoPath)?,
        };
        let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io {
            path: path.clone(),
            source,
        })?;
        let mut config: Self = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.clone(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for d in &mut self.dictionaries {
            d.path = base.join(&d.path);
        }
        if let Some(p) = &mut self.langid_model {
            *p = base.join(&*p);
        }
        if let Some(p) = &mut self.server.static_dir {
            *p = base.join(&*p);
        }
    }

    /// Startup checks: the offline invariant, parameter ranges and that every
    /// referenced path exists.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.offline && self.normalization.enabled {
            return Err(ConfigError::OfflineNormalization);
        }
        if let Some(endpoint) = &self.normalization.endpoint {
            let loopback = is_loopback_endpoint(endpoint)?;
            if self.offline && !loopback {
                return Err(ConfigError::OfflineEndpoint(endpoint.clone()));
            }
        } else if self.normalization.enabled {
            return Err(ConfigError::NoEndpoint);
        }
        self.segmentation.validate()?;
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(ConfigError::Tau(self.tau));
        }
        if self.server.cache_bytes == 0 {
            return Err(ConfigError::CacheBudget);
        }
        let mut seen = std::collections::BTreeSet::new();
        for d in &self.dictionaries {
            if !seen.insert((&d.spoken_lang, &d.signed_lang)) {
                return Err(ConfigError::DuplicatePair {
                    spoken: d.spoken_lang.clone(),
                    signed: d.signed_lang.clone(),
                });
            }
            require(&d.path, "dictionary")?;
        }
        if let Some(p) = &self.langid_model {
            require(p, "langid model")?;
        }
        if let Some(p) = &self.server.static_dir {
            require(p, "static directory")?;
        }
        Ok(())
    }
}

fn require(path: &Path, what: &'static str) -> Result<(), ConfigError> {
    if path.exists() {
        Ok(())
    } else {
        Err(ConfigError::MissingPath {
            what,
            path: path.to_path_buf(),
        })
    }
}

/// Whether `endpoint` is an http(s) URL whose host is a loopback address or
/// `localhost`.
pub fn is_loopback_endpoint(endpoint: &str) -> Result<bool, ConfigError> {
    let bad = |reason: &str| ConfigError::BadEndpoint {
        endpoint: endpoint.to_owned(),
        reason: reason.to_owned(),
    };
    let url = url::Url::parse(endpoint).map_err(|e| bad(&e.to_string()))?;
    if !matches!(url.scheme(), "http" | "https") {
        return Err(bad("scheme must be http or https"));
    }
    Ok(match url.host() {
        Some(url::Host::Domain(d)) => d.eq_ignore_ascii_case("localhost"),
        Some(url::Host::Ipv4(ip)) => IpAddr::V4(ip).is_loopback(),
        Some(url::Host::Ipv6(ip)) => IpAddr::V6(ip).is_loopback(),
        None => return Err(bad("missing host")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offline_invariant() {
        let mut c = ServiceConfig {
            offline: true,
            ..Default::default()
        };
        c.validate().unwrap();
        c.normalization.enabled = true;
        c.normalization.endpoint = Some("http://127.0.0.1:9/".into());
        assert!(matches!(c.validate(), Err(ConfigError::OfflineNormalization)));
        c.normalization.enabled = false;
        c.validate().unwrap();
        c.normalization.endpoint = Some("https://normalizer.example.org/v1".into());
        assert!(matches!(c.validate(), Err(ConfigError::OfflineEndpoint(_))));
    }

    #[test]
    fn loopback_detection() {
        for (e, want) in [
            ("http://localhost:8000/n", true),
            ("http://127.0.0.2/", true),
            ("http://[::1]:80/", true),
            ("http://10.0.0.1/", false),
            ("https://example.com/", false),
        ] {
            assert_eq!(is_loopback_endpoint(e).unwrap(), want, "{e}");
        }
        assert!(is_loopback_endpoint("ftp://localhost/").is_err());
        assert!(is_loopback_endpoint("not a url").is_err());
    }

    #[test]
    fn relative_paths_and_defaults() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("dict")).unwrap();
        std::fs::write(dir.path().join("dict/manifest.json"), "{}").unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(
            &path,
            r#"{"dictionaries":[{"spoken_lang":"en","signed_lang":"asl","path":"dict/manifest.json"}],
                "offline":true,"server":{"port":9000}}"#,
        )
        .unwrap();
        let c = ServiceConfig::load(Some(&path)).unwrap();
        assert_eq!(c.dictionaries[0].path, dir.path().join("dict/manifest.json"));
        assert_eq!((c.server.port, c.server.cache_bytes), (9000, 256 * 1024 * 1024));
        assert_eq!(c.tau, DEFAULT_TAU);
        c.validate().unwrap();

        std::fs::write(&path, r#"{"dictionaries":[{"spoken_lang":"en","signed_lang":"asl","path":"nope.json"}]}"#)
            .unwrap();
        let c = ServiceConfig::load(Some(&path)).unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::MissingPath { .. })));
        std::fs::write(&path, r#"{"offlin":true}"#).unwrap();
        assert!(matches!(ServiceConfig::load(Some(&path)), Err(ConfigError::Parse { .. })));
    }
}
