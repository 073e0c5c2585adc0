//! The orchestrator: wires stage providers per language pair and records
//! which provider produced every intermediate result.

mod providers;

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

pub use providers::{
    DictionaryTranslator, DtwRecognizer, EnergySegmenter, LanguageIdentifier, RuleSplitter, SentenceSplitter,
    SignRecognizer, SignSegmenter, SignTranslator, TrigramIdentifier,
};

use crate::pose::{self, PoseSequence};
use crate::s2s::{Dictionary, SentenceTranslation};
use crate::sts::{assemble_text, Recognition, RecognitionError, Segment, SegmenterParams};
use crate::text::{LangId, Normalized, Normalizer};

pub const LANGUAGE_IDENTIFICATION: &str = "language-identification";
pub const NORMALIZATION: &str = "normalization";
pub const SENTENCE_SPLITTING: &str = "sentence-splitting";
pub const DICTIONARY_TRANSLATION: &str = "dictionary-translation";
pub const POSE_STITCHING: &str = "pose-stitching";
pub const APPEARANCE_TRANSFER: &str = "appearance-transfer";
pub const POSE_ESTIMATION: &str = "pose-estimation";
pub const SEGMENTATION: &str = "segmentation";
pub const TRANSCRIPTION: &str = "transcription";
pub const TEXT_ASSEMBLY: &str = "text-assembly";

/// Spoken-to-signed stages in execution order.
pub const SPOKEN_TO_SIGNED_STAGES: [&str; 6] = [
    LANGUAGE_IDENTIFICATION,
    NORMALIZATION,
    SENTENCE_SPLITTING,
    DICTIONARY_TRANSLATION,
    POSE_STITCHING,
    APPEARANCE_TRANSFER,
];

/// Signed-to-spoken stages in execution order.
pub const SIGNED_TO_SPOKEN_STAGES: [&str; 5] =
    [POSE_ESTIMATION, APPEARANCE_TRANSFER, SEGMENTATION, TRANSCRIPTION, TEXT_ASSEMBLY];

/// `(spoken, signed)` language codes.
pub type LanguagePair = (String, String);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("no dictionary for {} -> {signed}", spoken.as_deref().unwrap_or("*"))]
    UnsupportedPair {
        spoken: Option<String>,
        signed: String,
        supported: Vec<LanguagePair>,
    },
    #[error("cancelled")]
    Cancelled,
    #[error("pose could not be conformed to the dictionary: {0}")]
    Pose(String),
    #[error(transparent)]
    Recognition(#[from] RecognitionError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub provider: String,
    pub detail: String,
}

impl StageRecord {
    fn new(stage: &str, provider: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            stage: stage.to_owned(),
            provider: provider.into(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub ms: f64,
}

#[derive(Default)]
struct Clock {
    timings: Vec<StageTiming>,
}

impl Clock {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let started = Instant::now();
        let out = f();
        self.add(stage, started);
        out
    }

    fn add(&mut self, stage: &str, started: Instant) {
        let ms = started.elapsed().as_secs_f64() * 1000.0;
        match self.timings.iter_mut().find(|t| t.stage == stage) {
            Some(t) => t.ms += ms,
            None => self.timings.push(StageTiming {
                stage: stage.to_owned(),
                ms,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpokenToSignedRequest {
    pub text: String,
    /// Skips detection when set.
    pub spoken_lang: Option<String>,
    pub signed_lang: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationResult {
    pub signed_lang: String,
    pub language: LangId,
    pub normalized: String,
    pub sentences: Vec<SentenceTranslation>,
    /// All sentence poses stitched together.
    #[serde(skip)]
    pub pose: PoseSequence,
    pub provenance: Vec<StageRecord>,
    pub timings: Vec<StageTiming>,
}

/// Incremental spoken-to-signed results, in pipeline order.
#[derive(Debug, Clone, Copy)]
pub enum Progress<'a> {
    LanguageDetected(&'a LangId),
    Normalized(&'a Normalized),
    Sentence { index: usize, text: &'a str },
    Glosses { index: usize, translation: &'a SentenceTranslation },
    PoseReady { index: usize, translation: &'a SentenceTranslation },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedToSpokenResult {
    pub signed_lang: String,
    pub spoken_lang: String,
    /// Frame rate the segment indices refer to.
    pub fps: f32,
    pub frames: usize,
    pub segments: Vec<Segment>,
    pub recognitions: Vec<Recognition>,
    pub text: String,
    pub provenance: Vec<StageRecord>,
    pub timings: Vec<StageTiming>,
}

/// Read-only after construction; share behind an `Arc`.
pub struct Pipeline {
    langid: Arc<dyn LanguageIdentifier>,
    normalizer: Normalizer,
    splitter: Arc<dyn SentenceSplitter>,
    translators: BTreeMap<LanguagePair, Arc<dyn SignTranslator>>,
    segmenter: Arc<dyn SignSegmenter>,
    recognizers: BTreeMap<LanguagePair, Arc<dyn SignRecognizer>>,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("langid", &self.langid.name())
            .field("normalizer", &self.normalizer)
            .field("pairs", &self.pairs())
            .finish()
    }
}

impl Default for Pipeline {
    fn default() -> Self {
        Self::new(Normalizer::offline())
    }
}

impl Pipeline {
    /// Built-in language identification, sentence splitting and segmentation;
    /// no dictionaries.
    pub fn new(normalizer: Normalizer) -> Self {
        Self {
            langid: Arc::new(TrigramIdentifier::bundled()),
            normalizer,
            splitter: Arc::new(RuleSplitter::bundled()),
            translators: BTreeMap::new(),
            segmenter: Arc::new(EnergySegmenter {
                params: SegmenterParams::default(),
            }),
            recognizers: BTreeMap::new(),
        }
    }

    pub fn with_langid(mut self, provider: Arc<dyn LanguageIdentifier>) -> Self {
        self.langid = provider;
        self
    }

    pub fn with_splitter(mut self, provider: Arc<dyn SentenceSplitter>) -> Self {
        self.splitter = provider;
        self
    }

    pub fn with_segmenter(mut self, provider: Arc<dyn SignSegmenter>) -> Self {
        self.segmenter = provider;
        self
    }

    pub fn register_translator(&mut self, pair: LanguagePair, provider: Arc<dyn SignTranslator>) {
        self.translators.insert(pair, provider);
    }

    pub fn register_recognizer(&mut self, pair: LanguagePair, provider: Arc<dyn SignRecognizer>) {
        self.recognizers.insert(pair, provider);
    }

    /// Registers the built-in translator and recognizer for every pair the
    /// dictionary serves.
    pub fn add_dictionary(
        &mut self,
        dict: Arc<Dictionary>,
        crossfade: usize,
        params: &SegmenterParams,
        tau: f64,
    ) -> Result<(), RecognitionError> {
        let translator: Arc<dyn SignTranslator> = Arc::new(DictionaryTranslator::new(Arc::clone(&dict), crossfade));
        let recognizer: Arc<dyn SignRecognizer> = Arc::new(DtwRecognizer::new(Arc::clone(&dict), params, tau)?);
        for spoken in dict.spoken_langs() {
            let pair = (spoken.clone(), dict.signed_lang().to_owned());
            self.translators.insert(pair.clone(), Arc::clone(&translator));
            self.recognizers.insert(pair, Arc::clone(&recognizer));
        }
        Ok(())
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    /// Supported `(spoken, signed)` pairs in ascending order.
    pub fn pairs(&self) -> Vec<LanguagePair> {
        let mut pairs: Vec<LanguagePair> = self.translators.keys().chain(self.recognizers.keys()).cloned().collect();
        pairs.sort();
        pairs.dedup();
        pairs
    }

    fn unsupported(&self, spoken: Option<&str>, signed: &str) -> PipelineError {
        PipelineError::UnsupportedPair {
            spoken: spoken.map(str::to_owned),
            signed: signed.to_owned(),
            supported: self.pairs(),
        }
    }

    pub fn translate(&self, request: &SpokenToSignedRequest) -> Result<TranslationResult, PipelineError> {
        self.translate_with(request, |_| ControlFlow::Continue(()))
    }

    /// Spoken-to-signed translation reporting each step to `observer`, which
    /// may stop the run by returning `Break`.
    pub fn translate_with(
        &self,
        request: &SpokenToSignedRequest,
        mut observer: impl FnMut(Progress<'_>) -> ControlFlow<()>,
    ) -> Result<TranslationResult, PipelineError> {
        let signed = request.signed_lang.as_str();
        let candidates: Vec<String> = self
            .translators
            .keys()
            .filter(|(_, s)| s == signed)
            .map(|(spoken, _)| spoken.clone())
            .collect();
        if candidates.is_empty() {
            return Err(self.unsupported(request.spoken_lang.as_deref(), signed));
        }
        let mut clock = Clock::default();
        let mut provenance = Vec::with_capacity(SPOKEN_TO_SIGNED_STAGES.len());
        let emit = |observer: &mut dyn FnMut(Progress<'_>) -> ControlFlow<()>, p: Progress<'_>| match observer(p) {
            ControlFlow::Continue(()) => Ok(()),
            ControlFlow::Break(()) => Err(PipelineError::Cancelled),
        };

        let started = Instant::now();
        let language = match &request.spoken_lang {
            Some(code) => {
                if !candidates.contains(code) {
                    return Err(self.unsupported(Some(code), signed));
                }
                provenance.push(StageRecord::new(LANGUAGE_IDENTIFICATION, "pinned", code.clone()));
                LangId::pinned(code.clone())
            }
            None => {
                let detected = self.langid.identify(&request.text, &candidates);
                let (lang, detail) = if detected.is_undetermined() {
                    let fallback = candidates[0].clone();
                    let detail = format!("undetermined; defaulted to {fallback}");
                    (LangId::new(fallback, 0.0), detail)
                } else {
                    let detail = format!("{} ({:.3})", detected.code, detected.confidence);
                    (detected, detail)
                };
                provenance.push(StageRecord::new(LANGUAGE_IDENTIFICATION, self.langid.name(), detail));
                lang
            }
        };
        clock.add(LANGUAGE_IDENTIFICATION, started);
        emit(&mut observer, Progress::LanguageDetected(&language))?;

        let normalized = clock.time(NORMALIZATION, || self.normalizer.normalize(&request.text, &language));
        provenance.push(StageRecord::new(NORMALIZATION, normalized.provider.clone(), normalized.detail.clone()));
        emit(&mut observer, Progress::Normalized(&normalized))?;

        let text = normalized.text.as_str();
        let spans = clock.time(SENTENCE_SPLITTING, || self.splitter.split(text, &language));
        provenance.push(StageRecord::new(
            SENTENCE_SPLITTING,
            self.splitter.name(),
            format!("{} sentence(s)", spans.len()),
        ));

        let pair = (language.code.clone(), signed.to_owned());
        let translator = &self.translators[&pair];
        let mut sentences = Vec::with_capacity(spans.len());
        for (index, span) in spans.iter().enumerate() {
            let sentence = span.text(text);
            emit(&mut observer, Progress::Sentence { index, text: sentence })?;
            let translation = clock.time(DICTIONARY_TRANSLATION, || translator.translate(sentence, &language));
            emit(&mut observer, Progress::Glosses { index, translation: &translation })?;
            emit(&mut observer, Progress::PoseReady { index, translation: &translation })?;
            sentences.push(translation);
        }
        let glosses: usize = sentences.iter().map(|s| s.glosses.len()).sum();
        let missing: usize = sentences.iter().map(|s| s.missing.len()).sum();
        provenance.push(StageRecord::new(
            DICTIONARY_TRANSLATION,
            translator.name(),
            format!("{glosses} gloss(es), {missing} missing token(s)"),
        ));

        let started = Instant::now();
        let clips: Vec<PoseSequence> = sentences.iter().filter(|s| !s.pose.is_empty()).map(|s| s.pose.clone()).collect();
        let (pose, stitch_detail) = match clips.len() {
            0 => (PoseSequence::empty(translator.header().clone()), "nothing to stitch".to_owned()),
            1 => (clips[0].clone(), describe_crossfade(&sentences)),
            _ => {
                // sentences join with the crossfade used inside them, clamped the same way
                let k = sentences.iter().map(|s| s.crossfade).max().unwrap_or(0);
                let shortest = clips.iter().map(PoseSequence::frame_count).min().unwrap_or(1);
                let k = k.min(shortest - 1);
                let joined = pose::concatenate_stitch(&clips, k).map_err(|e| PipelineError::Pose(e.to_string()))?;
                (joined, describe_crossfade(&sentences))
            }
        };
        clock.add(POSE_STITCHING, started);
        provenance.push(StageRecord::new(POSE_STITCHING, "linear-crossfade", stitch_detail));
        provenance.push(StageRecord::new(APPEARANCE_TRANSFER, "skeleton-normalization", translator.appearance()));
        clock.add(APPEARANCE_TRANSFER, Instant::now());

        Ok(TranslationResult {
            signed_lang: signed.to_owned(),
            language,
            normalized: normalized.text,
            sentences,
            pose,
            provenance,
            timings: clock.timings,
        })
    }

    /// Signed-to-spoken translation of a pose sequence.
    pub fn translate_pose(
        &self,
        seq: &PoseSequence,
        signed_lang: &str,
        spoken_lang: &str,
    ) -> Result<SignedToSpokenResult, PipelineError> {
        let pair = (spoken_lang.to_owned(), signed_lang.to_owned());
        let Some(recognizer) = self.recognizers.get(&pair) else {
            return Err(self.unsupported(Some(spoken_lang), signed_lang));
        };
        let mut clock = Clock::default();
        let mut provenance = Vec::with_capacity(SIGNED_TO_SPOKEN_STAGES.len());
        provenance.push(StageRecord::new(
            POSE_ESTIMATION,
            "external",
            format!("{} frame(s) supplied at {} fps", seq.frame_count(), seq.header().fps()),
        ));
        clock.add(POSE_ESTIMATION, Instant::now());

        let dict = recognizer.dictionary();
        let started = Instant::now();
        let (conformed, detail) = conform(seq, dict)?;
        clock.add(APPEARANCE_TRANSFER, started);
        provenance.push(StageRecord::new(APPEARANCE_TRANSFER, "skeleton-normalization", detail));

        let segments = clock.time(SEGMENTATION, || self.segmenter.segment(&conformed));
        let signs = segments.iter().filter(|s| s.kind == crate::sts::SegmentKind::Sign).count();
        provenance.push(StageRecord::new(
            SEGMENTATION,
            self.segmenter.name(),
            format!("{signs} sign(s), {} phrase boundary(ies)", segments.len() - signs),
        ));

        let started = Instant::now();
        let recognitions = recognizer.recognize(&conformed, &segments)?;
        clock.add(TRANSCRIPTION, started);
        let unknown = recognitions.iter().filter(|r| r.is_unknown()).count();
        provenance.push(StageRecord::new(
            TRANSCRIPTION,
            recognizer.name(),
            format!("{} recognized, {unknown} unknown", recognitions.len() - unknown),
        ));

        let text = clock.time(TEXT_ASSEMBLY, || assemble_text(&segments, &recognitions));
        provenance.push(StageRecord::new(TEXT_ASSEMBLY, "gloss-join", "lowercased glosses"));

        Ok(SignedToSpokenResult {
            signed_lang: signed_lang.to_owned(),
            spoken_lang: spoken_lang.to_owned(),
            fps: conformed.header().fps(),
            frames: conformed.frame_count(),
            segments,
            recognitions,
            text,
            provenance,
            timings: clock.timings,
        })
    }
}

fn describe_crossfade(sentences: &[SentenceTranslation]) -> String {
    let ks: Vec<usize> = sentences.iter().filter(|s| s.glosses.len() > 1).map(|s| s.crossfade).collect();
    match (ks.iter().min(), ks.iter().max()) {
        (Some(lo), Some(hi)) if lo == hi => format!("k={lo}"),
        (Some(lo), Some(hi)) => format!("k={lo}..{hi}"),
        _ => "single clip".to_owned(),
    }
}

/// Resamples to the dictionary frame rate and normalizes onto its skeleton.
fn conform(seq: &PoseSequence, dict: &Dictionary) -> Result<(PoseSequence, String), PipelineError> {
    if !seq.header().same_layout(dict.header()) {
        return Err(PipelineError::Recognition(RecognitionError::TopologyMismatch));
    }
    let err = |e: pose::OpError| PipelineError::Pose(e.to_string());
    let mut notes = Vec::new();
    let mut current = seq.clone();
    let (from, to) = (seq.header().fps(), dict.fps());
    if (from - to).abs() > f32::EPSILON * to {
        current = if current.frame_count() >= 2 {
            pose::resample(&current, f64::from(to)).map_err(err)?
        } else {
            current.with_fps(to).map_err(|e| PipelineError::Pose(e.to_string()))?
        };
        notes.push(format!("resampled {from} -> {to} fps"));
    }
    if !current.is_empty() {
        let normalized = pose::normalize_skeleton(&current, dict.skeleton()).map_err(err)?;
        if !normalized.degenerate_frames.is_empty() {
            notes.push(format!("{} degenerate frame(s) left unchanged", normalized.degenerate_frames.len()));
        }
        current = normalized.pose;
    }
    notes.insert(0, format!("normalized to shoulder width {}", dict.skeleton().shoulder_width));
    Ok((current, notes.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{toy_dictionary, ToyConfig};

    fn pipeline() -> Pipeline {
        let mut p = Pipeline::default();
        let dict = Arc::new(toy_dictionary(&ToyConfig::default()));
        p.add_dictionary(dict, 4, &SegmenterParams::default(), crate::sts::DEFAULT_TAU)
            .unwrap();
        p
    }

    fn stages(records: &[StageRecord]) -> Vec<&str> {
        records.iter().map(|r| r.stage.as_str()).collect()
    }

    #[test]
    fn pinned_offline_provenance() {
        let p = pipeline();
        let r = p
            .translate(&SpokenToSignedRequest {
                text: "hello world. thank you.".into(),
                spoken_lang: Some("en".into()),
                signed_lang: "asl".into(),
            })
            .unwrap();
        assert_eq!(stages(&r.provenance), SPOKEN_TO_SIGNED_STAGES);
        assert_eq!(r.provenance[0].provider, "pinned");
        assert_eq!(r.provenance[1].detail, "skipped (offline)");
        let glosses: Vec<&Vec<String>> = r.sentences.iter().map(|s| &s.glosses).collect();
        assert_eq!(glosses, [&vec!["HELLO".to_string(), "WORLD".into()], &vec!["THANK-YOU".to_string()]]);
    }

    #[test]
    fn detection_restricted_to_dictionary_languages() {
        let p = pipeline();
        let request = |text: &str| SpokenToSignedRequest {
            text: text.into(),
            spoken_lang: None,
            signed_lang: "asl".into(),
        };
        let r = p.translate(&request("Hallo Welt, danke schön!")).unwrap();
        assert_eq!(r.language.code, "de");
        assert_eq!(r.sentences[0].glosses, ["HELLO", "WORLD", "THANK-YOU"]);
        let r = p.translate(&request("")).unwrap();
        assert!(r.provenance[0].detail.starts_with("undetermined"));
        assert!(r.sentences.is_empty() && r.pose.is_empty());
    }

    #[test]
    fn unsupported_pairs_list_supported() {
        let p = pipeline();
        let err = p
            .translate(&SpokenToSignedRequest {
                text: "x".into(),
                spoken_lang: None,
                signed_lang: "bfi".into(),
            })
            .unwrap_err();
        match err {
            PipelineError::UnsupportedPair { supported, .. } => {
                assert_eq!(supported, [("de".into(), "asl".into()), ("en".into(), "asl".into())])
            }
            other => panic!("{other:?}"),
        }
        assert!(p.translate_pose(&PoseSequence::empty(crate::pose::default_header(25.0)), "asl", "fr").is_err());
    }

    #[test]
    fn observer_order_and_cancel() {
        let p = pipeline();
        let request = SpokenToSignedRequest {
            text: "hello. world.".into(),
            spoken_lang: Some("en".into()),
            signed_lang: "asl".into(),
        };
        let mut seen = Vec::new();
        p.translate_with(&request, |e| {
            seen.push(match e {
                Progress::LanguageDetected(_) => "lang".to_string(),
                Progress::Normalized(_) => "norm".into(),
                Progress::Sentence { index, .. } => format!("s{index}"),
                Progress::Glosses { index, .. } => format!("g{index}"),
                Progress::PoseReady { index, .. } => format!("p{index}"),
            });
            ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(seen, ["lang", "norm", "s0", "g0", "p0", "s1", "g1", "p1"]);
        let mut calls = 0;
        let err = p
            .translate_with(&request, |_| {
                calls += 1;
                if calls == 3 {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })
            .unwrap_err();
        assert_eq!(err, PipelineError::Cancelled);
        assert_eq!(calls, 3);
    }

    #[test]
    fn signed_to_spoken_round_trip() {
        let p = pipeline();
        let s2s = p
            .translate(&SpokenToSignedRequest {
                text: "hello world".into(),
                spoken_lang: Some("en".into()),
                signed_lang: "asl".into(),
            })
            .unwrap();
        let r = p.translate_pose(&s2s.pose, "asl", "en").unwrap();
        assert_eq!(r.text, "hello world.");
        assert_eq!(stages(&r.provenance), SIGNED_TO_SPOKEN_STAGES);
        let empty = p.translate_pose(&PoseSequence::empty(s2s.pose.header().clone()), "asl", "en").unwrap();
        assert_eq!((empty.text.as_str(), empty.segments.len()), ("", 0));
    }
}
