//! Nearest-neighbour sign recognition and text assembly.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::dtw::{dtw_distance, DEFAULT_BAND};
use super::features::{extract_features, FeatureError, Features};
use super::segment::{segment_signs, Segment, SegmentKind, SegmenterParams};
use crate::pose::PoseSequence;
use crate::s2s::Dictionary;

/// Default rejection threshold in normalized DTW units.
pub const DEFAULT_TAU: f64 = 0.35;

/// Text rendered for a rejected segment.
pub const UNKNOWN_TEXT: &str = "[?]";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecognitionError {
    #[error("dictionary has no entries")]
    EmptyDictionary,
    #[error("segment {start}..{end} is not a sign inside the sequence")]
    BadSegment { start: usize, end: usize },
    #[error("sequence topology differs from the dictionary topology")]
    TopologyMismatch,
    #[error(transparent)]
    Features(#[from] FeatureError),
}

#[derive(Debug, Clone)]
struct Template {
    gloss: String,
    fsw: Option<String>,
    features: Features,
}

/// Trimmed dictionary templates, one per gloss, sorted by gloss.
#[derive(Debug, Clone)]
pub struct TemplateIndex {
    templates: Vec<Template>,
    header: crate::pose::PoseHeader,
    band: usize,
}

impl TemplateIndex {
    /// Each entry pose is cut to its active span (first to last detected sign)
    /// so that rest holds do not dominate the distance.
    pub fn build(dict: &Dictionary, params: &SegmenterParams) -> Result<Self, RecognitionError> {
        let mut entries: Vec<_> = dict.entries().iter().collect();
        entries.sort_by(|a, b| a.gloss.cmp(&b.gloss));
        entries.dedup_by(|a, b| a.gloss == b.gloss);
        let templates = entries
            .par_iter()
            .map(|entry| {
                let features = extract_features(&entry.pose)?;
                let span = active_span(&entry.pose, params);
                Ok(Template {
                    gloss: entry.gloss.clone(),
                    fsw: entry.fsw.clone(),
                    features: features.slice(span),
                })
            })
            .collect::<Result<Vec<_>, RecognitionError>>()?;
        Ok(Self {
            templates,
            header: dict.header().clone(),
            band: DEFAULT_BAND,
        })
    }

    pub fn with_band(mut self, band: usize) -> Self {
        self.band = band;
        self
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn glosses(&self) -> impl Iterator<Item = &str> {
        self.templates.iter().map(|t| t.gloss.as_str())
    }

    /// Frame span of the template kept for `gloss`.
    pub fn template_frames(&self, gloss: &str) -> Option<usize> {
        self.templates
            .iter()
            .find(|t| t.gloss == gloss)
            .map(|t| t.features.frame_count())
    }
}

/// Frames from the first detected sign start to the last sign end; the whole
/// clip when nothing is detected.
pub fn active_span(pose: &PoseSequence, params: &SegmenterParams) -> std::ops::Range<usize> {
    let signs: Vec<Segment> = segment_signs(pose, params)
        .into_iter()
        .filter(|s| s.kind == SegmentKind::Sign)
        .collect();
    match (signs.first(), signs.last()) {
        (Some(first), Some(last)) => first.start..last.end,
        _ => 0..pose.frame_count(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recognition {
    pub start: usize,
    pub end: usize,
    /// `None` when rejected.
    pub gloss: Option<String>,
    pub fsw: Option<String>,
    /// Closest template even when rejected.
    pub nearest: String,
    pub distance: f64,
    /// `None` with a single-template dictionary.
    pub runner_up: Option<f64>,
}

impl Recognition {
    pub fn is_unknown(&self) -> bool {
        self.gloss.is_none()
    }
}

/// Nearest template by normalized DTW over features. Distances above `tau`
/// are rejected. Equal distances go to the alphabetically first gloss.
pub fn recognize_segment(
    seq: &PoseSequence,
    segment: &Segment,
    index: &TemplateIndex,
    tau: f64,
) -> Result<Recognition, RecognitionError> {
    let features = extract_features(seq)?;
    recognize_features(&features, segment, index, tau)
}

fn recognize_features(
    features: &Features,
    segment: &Segment,
    index: &TemplateIndex,
    tau: f64,
) -> Result<Recognition, RecognitionError> {
    if index.is_empty() {
        return Err(RecognitionError::EmptyDictionary);
    }
    if segment.kind != SegmentKind::Sign || segment.is_empty() || segment.end > features.frame_count() {
        return Err(RecognitionError::BadSegment {
            start: segment.start,
            end: segment.end,
        });
    }
    let query = features.slice(segment.start..segment.end);
    let mut best: Option<(f64, usize)> = None;
    let mut second: Option<f64> = None;
    // templates are sorted by gloss, so strict comparison keeps the first on ties
    for (i, t) in index.templates.iter().enumerate() {
        let d = dtw_distance(query.frames(), t.features.frames(), index.band).expect("non-empty, same layout");
        match best {
            Some((bd, _)) if d >= bd => {
                if second.is_none_or(|s| d < s) {
                    second = Some(d);
                }
            }
            _ => {
                second = best.map(|(bd, _)| bd);
                best = Some((d, i));
            }
        }
    }
    let (distance, i) = best.expect("index is non-empty");
    let t = &index.templates[i];
    let accepted = distance <= tau;
    Ok(Recognition {
        start: segment.start,
        end: segment.end,
        gloss: accepted.then(|| t.gloss.clone()),
        fsw: if accepted { t.fsw.clone() } else { None },
        nearest: t.gloss.clone(),
        distance,
        runner_up: second,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoseTranslation {
    pub segments: Vec<Segment>,
    /// One per sign segment, in order.
    pub recognitions: Vec<Recognition>,
    pub text: String,
}

/// Segments, recognizes every sign (in parallel) and assembles text.
pub fn translate_pose(
    seq: &PoseSequence,
    index: &TemplateIndex,
    params: &SegmenterParams,
    tau: f64,
) -> Result<PoseTranslation, RecognitionError> {
    if !seq.header().same_layout(&index.header) {
        return Err(RecognitionError::TopologyMismatch);
    }
    let segments = segment_signs(seq, params);
    let recognitions = recognize_all(seq, &segments, index, tau)?;
    let text = assemble_text(&segments, &recognitions);
    Ok(PoseTranslation {
        segments,
        recognitions,
        text,
    })
}

/// Recognizes every sign segment; output order follows `segments`.
pub fn recognize_all(
    seq: &PoseSequence,
    segments: &[Segment],
    index: &TemplateIndex,
    tau: f64,
) -> Result<Vec<Recognition>, RecognitionError> {
    let signs: Vec<&Segment> = segments.iter().filter(|s| s.kind == SegmentKind::Sign).collect();
    if signs.is_empty() {
        return Ok(Vec::new());
    }
    let features = extract_features(seq)?;
    signs
        .par_iter()
        .map(|s| recognize_features(&features, s, index, tau))
        .collect()
}

/// Lowercased glosses joined by spaces, `.` closing each phrase.
pub fn assemble_text(segments: &[Segment], recognitions: &[Recognition]) -> String {
    let mut sentences: Vec<String> = Vec::new();
    let mut words: Vec<String> = Vec::new();
    let mut next = recognitions.iter();
    for segment in segments {
        match segment.kind {
            SegmentKind::Sign => {
                if let Some(r) = next.next() {
                    words.push(r.gloss.as_deref().map_or_else(|| UNKNOWN_TEXT.to_owned(), str::to_lowercase));
                }
            }
            SegmentKind::PhraseBoundary => {
                if !words.is_empty() {
                    sentences.push(format!("{}.", words.join(" ")));
                    words.clear();
                }
            }
        }
    }
    if !words.is_empty() {
        sentences.push(format!("{}.", words.join(" ")));
    }
    sentences.join(" ")
}
