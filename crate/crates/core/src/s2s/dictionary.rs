//! Gloss dictionaries: manifest loading, pose preparation and the phrase index.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lookup::{normalize_phrase, Lemmatizer};
use crate::pose::topology::SkeletonError;
use crate::pose::{self, FormatError, OpError, PoseHeader, PoseSequence, SkeletonSpec};
use crate::signwriting::{self, FswError};

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("entry {gloss}: pose file {path} does not exist")]
    MissingPose { gloss: String, path: PathBuf },
    #[error("entry {gloss}: cannot read pose file {path}: {source}")]
    PoseIo {
        gloss: String,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("entry {gloss}: invalid pose file: {source}")]
    PoseFormat {
        gloss: String,
        #[source]
        source: FormatError,
    },
    #[error("entry {gloss}: malformed FSW: {source}")]
    Fsw {
        gloss: String,
        #[source]
        source: FswError,
    },
    #[error("entry {gloss}: pose topology differs from the dictionary topology")]
    TopologyMismatch { gloss: String },
    #[error("entry {gloss}: {reason}")]
    InvalidEntry { gloss: String, reason: String },
    #[error("entry {gloss}: {source}")]
    Pose {
        gloss: String,
        #[source]
        source: OpError,
    },
    #[error("reference skeleton: {0}")]
    Skeleton(#[from] SkeletonError),
    #[error("dictionary fps must be positive, got {0}")]
    InvalidFps(f32),
}

/// On-disk manifest (`manifest.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub signed_lang: String,
    pub spoken_langs: Vec<String>,
    pub fps: f32,
    pub skeleton: SkeletonSpec,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub gloss: String,
    pub spoken_lang: String,
    pub text_forms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fsw: Option<String>,
    /// Relative to the manifest.
    pub pose_file: PathBuf,
}

/// Entry input before pose preparation.
#[derive(Debug, Clone)]
pub struct RawEntry {
    pub gloss: String,
    pub spoken_lang: String,
    pub text_forms: Vec<String>,
    pub fsw: Option<String>,
    pub pose: PoseSequence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryEntry {
    pub gloss: String,
    pub spoken_lang: String,
    pub signed_lang: String,
    /// Normalized: lowercase, NFC, punctuation stripped.
    pub text_forms: Vec<String>,
    pub fsw: Option<String>,
    /// Resampled to the dictionary fps and normalized onto its skeleton.
    pub pose: PoseSequence,
}

/// Immutable after construction; safe to share between threads.
#[derive(Debug, Clone)]
pub struct Dictionary {
    signed_lang: String,
    spoken_langs: Vec<String>,
    fps: f32,
    skeleton: SkeletonSpec,
    header: PoseHeader,
    entries: Vec<DictionaryEntry>,
    index: HashMap<(String, String), usize>,
    max_phrase_tokens: usize,
    lemmatizer: Lemmatizer,
}

impl Dictionary {
    /// Resamples every pose to `fps`, normalizes it onto `skeleton` and builds
    /// the phrase index. The first entry fixes the shared topology; an empty
    /// dictionary uses the default topology.
    pub fn build(
        signed_lang: &str,
        spoken_langs: &[String],
        fps: f32,
        skeleton: SkeletonSpec,
        raw: Vec<RawEntry>,
    ) -> Result<Self, DictionaryError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(DictionaryError::InvalidFps(fps));
        }
        let header = match raw.first() {
            Some(e) => e.pose.header().with_fps(fps).expect("fps checked"),
            None => pose::default_header(fps),
        };
        skeleton.check(&header)?;
        let mut entries = Vec::with_capacity(raw.len());
        for e in raw {
            entries.push(prepare_entry(e, signed_lang, spoken_langs, &header, &skeleton)?);
        }
        let mut index: HashMap<(String, String), usize> = HashMap::new();
        let mut max_phrase_tokens = 1;
        for (i, entry) in entries.iter().enumerate() {
            for form in &entry.text_forms {
                max_phrase_tokens = max_phrase_tokens.max(form.split(' ').count());
                let key = (entry.spoken_lang.clone(), form.clone());
                if let Some(&prev) = index.get(&key) {
                    tracing::warn!(form = %form, kept = %entries[prev].gloss, dropped = %entry.gloss, "duplicate text form");
                    continue;
                }
                index.insert(key, i);
            }
        }
        Ok(Self {
            signed_lang: signed_lang.to_owned(),
            spoken_langs: spoken_langs.to_vec(),
            fps,
            skeleton,
            header,
            entries,
            index,
            max_phrase_tokens,
            lemmatizer: Lemmatizer::bundled(),
        })
    }

    pub fn with_lemmatizer(mut self, lemmatizer: Lemmatizer) -> Self {
        self.lemmatizer = lemmatizer;
        self
    }

    pub fn signed_lang(&self) -> &str {
        &self.signed_lang
    }

    pub fn spoken_langs(&self) -> &[String] {
        &self.spoken_langs
    }

    pub fn fps(&self) -> f32 {
        self.fps
    }

    pub fn skeleton(&self) -> &SkeletonSpec {
        &self.skeleton
    }

    /// Shared topology of every entry pose.
    pub fn header(&self) -> &PoseHeader {
        &self.header
    }

    pub fn entries(&self) -> &[DictionaryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_phrase_tokens(&self) -> usize {
        self.max_phrase_tokens
    }

    pub fn lemmatizer(&self) -> &Lemmatizer {
        &self.lemmatizer
    }

    /// Entry index for an already normalized phrase.
    pub fn lookup(&self, spoken_lang: &str, phrase: &str) -> Option<usize> {
        self.index.get(&(spoken_lang.to_owned(), phrase.to_owned())).copied()
    }

    pub fn entry(&self, index: usize) -> &DictionaryEntry {
        &self.entries[index]
    }

    pub fn find_gloss(&self, gloss: &str) -> Option<&DictionaryEntry> {
        self.entries.iter().find(|e| e.gloss == gloss)
    }
}

fn prepare_entry(
    e: RawEntry,
    signed_lang: &str,
    spoken_langs: &[String],
    header: &PoseHeader,
    skeleton: &SkeletonSpec,
) -> Result<DictionaryEntry, DictionaryError> {
    let invalid = |reason: String| DictionaryError::InvalidEntry {
        gloss: e.gloss.clone(),
        reason,
    };
    if e.gloss.is_empty() || e.gloss.chars().any(|c| c.is_lowercase() || c.is_whitespace()) {
        return Err(invalid("gloss must be a non-empty uppercase token".into()));
    }
    if !spoken_langs.contains(&e.spoken_lang) {
        return Err(invalid(format!("spoken_lang {:?} is not listed in spoken_langs", e.spoken_lang)));
    }
    let text_forms: Vec<String> = e
        .text_forms
        .iter()
        .map(|f| normalize_phrase(f))
        .filter(|f| !f.is_empty())
        .collect();
    if text_forms.is_empty() {
        return Err(invalid("at least one non-empty text form is required".into()));
    }
    if let Some(fsw) = &e.fsw {
        signwriting::parse_fsw(fsw).map_err(|source| DictionaryError::Fsw {
            gloss: e.gloss.clone(),
            source,
        })?;
    }
    if !e.pose.header().same_layout(header) {
        return Err(DictionaryError::TopologyMismatch { gloss: e.gloss });
    }
    if e.pose.is_empty() {
        return Err(invalid("pose has no frames".into()));
    }
    let pose_err = |source| DictionaryError::Pose {
        gloss: e.gloss.clone(),
        source,
    };
    let resampled = if (e.pose.header().fps() - header.fps()).abs() <= f32::EPSILON * header.fps() {
        e.pose.clone()
    } else if e.pose.frame_count() < 2 {
        e.pose.with_fps(header.fps()).map_err(|s| pose_err(s.into()))?
    } else {
        pose::resample(&e.pose, f64::from(header.fps())).map_err(pose_err)?
    };
    let normalized = pose::normalize_skeleton(&resampled, skeleton).map_err(pose_err)?;
    Ok(DictionaryEntry {
        gloss: e.gloss,
        spoken_lang: e.spoken_lang,
        signed_lang: signed_lang.to_owned(),
        text_forms,
        fsw: e.fsw,
        pose: normalized.pose,
    })
}

/// Loads a manifest and every pose it references.
pub fn load_dictionary(manifest_path: &Path) -> Result<Dictionary, DictionaryError> {
    let text = std::fs::read_to_string(manifest_path).map_err(|source| DictionaryError::Io {
        path: manifest_path.to_owned(),
        source,
    })?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|source| DictionaryError::Manifest {
        path: manifest_path.to_owned(),
        source,
    })?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut raw = Vec::with_capacity(manifest.entries.len());
    for entry in manifest.entries {
        let path = base.join(&entry.pose_file);
        if !path.is_file() {
            return Err(DictionaryError::MissingPose { gloss: entry.gloss, path });
        }
        let bytes = std::fs::read(&path).map_err(|source| DictionaryError::PoseIo {
            gloss: entry.gloss.clone(),
            path: path.clone(),
            source,
        })?;
        let pose = pose::read_pose(&bytes).map_err(|source| DictionaryError::PoseFormat {
            gloss: entry.gloss.clone(),
            source,
        })?;
        raw.push(RawEntry {
            gloss: entry.gloss,
            spoken_lang: entry.spoken_lang,
            text_forms: entry.text_forms,
            fsw: entry.fsw,
            pose,
        });
    }
    Dictionary::build(
        &manifest.signed_lang,
        &manifest.spoken_langs,
        manifest.fps,
        manifest.skeleton,
        raw,
    )
}
