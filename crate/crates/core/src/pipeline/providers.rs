//! Stage provider interfaces and the built-in providers.

use std::sync::Arc;

use crate::pose::PoseSequence;
use crate::s2s::{translate_sentence, Dictionary, SentenceTranslation};
use crate::sts::{recognize_all, segment_signs, Recognition, RecognitionError, Segment, SegmenterParams, TemplateIndex};
use crate::text::{LangId, NgramLangModel, SentenceRules, SentenceSpan};

pub trait LanguageIdentifier: Send + Sync {
    fn name(&self) -> &str;

    /// Best language among `candidates` (all known languages when empty).
    fn identify(&self, text: &str, candidates: &[String]) -> LangId;
}

pub trait SentenceSplitter: Send + Sync {
    fn name(&self) -> &str;

    fn split(&self, text: &str, lang: &LangId) -> Vec<SentenceSpan>;
}

/// Spoken sentence to glosses and pose, for one language pair.
pub trait SignTranslator: Send + Sync {
    fn name(&self) -> &str;

    fn translate(&self, sentence: &str, lang: &LangId) -> SentenceTranslation;

    /// Detail for the appearance-transfer stage.
    fn appearance(&self) -> String;

    /// Shared pose layout of the produced sequences.
    fn header(&self) -> &crate::pose::PoseHeader;
}

pub trait SignSegmenter: Send + Sync {
    fn name(&self) -> &str;

    fn segment(&self, seq: &PoseSequence) -> Vec<Segment>;
}

/// Sign segments to glosses, for one signed language.
pub trait SignRecognizer: Send + Sync {
    fn name(&self) -> &str;

    fn recognize(&self, seq: &PoseSequence, segments: &[Segment]) -> Result<Vec<Recognition>, RecognitionError>;

    /// Frame rate and skeleton incoming poses are conformed to.
    fn dictionary(&self) -> &Dictionary;
}

pub struct TrigramIdentifier {
    model: Arc<NgramLangModel>,
    name: String,
}

impl TrigramIdentifier {
    pub fn new(model: Arc<NgramLangModel>, name: impl Into<String>) -> Self {
        Self {
            model,
            name: name.into(),
        }
    }

    pub fn bundled() -> Self {
        Self::new(Arc::new(NgramLangModel::bundled().clone()), "trigram-nb (bundled)")
    }
}

impl LanguageIdentifier for TrigramIdentifier {
    fn name(&self) -> &str {
        &self.name
    }

    fn identify(&self, text: &str, candidates: &[String]) -> LangId {
        self.model.detect_among(text, candidates)
    }
}

pub struct RuleSplitter {
    rules: SentenceRules,
}

impl RuleSplitter {
    pub fn new(rules: SentenceRules) -> Self {
        Self { rules }
    }

    pub fn bundled() -> Self {
        Self::new(SentenceRules::bundled())
    }
}

impl SentenceSplitter for RuleSplitter {
    fn name(&self) -> &str {
        "rule-based"
    }

    fn split(&self, text: &str, lang: &LangId) -> Vec<SentenceSpan> {
        self.rules.split(text, &lang.code)
    }
}

pub struct DictionaryTranslator {
    dict: Arc<Dictionary>,
    crossfade: usize,
    name: String,
}

impl DictionaryTranslator {
    pub fn new(dict: Arc<Dictionary>, crossfade: usize) -> Self {
        let name = format!("dictionary:{} ({} entries)", dict.signed_lang(), dict.len());
        Self { dict, crossfade, name }
    }

    pub fn crossfade(&self) -> usize {
        self.crossfade
    }
}

impl SignTranslator for DictionaryTranslator {
    fn name(&self) -> &str {
        &self.name
    }

    fn translate(&self, sentence: &str, lang: &LangId) -> SentenceTranslation {
        translate_sentence(sentence, &self.dict, lang, self.crossfade)
    }

    fn appearance(&self) -> String {
        format!(
            "applied at dictionary load (shoulder width {})",
            self.dict.skeleton().shoulder_width
        )
    }

    fn header(&self) -> &crate::pose::PoseHeader {
        self.dict.header()
    }
}

pub struct EnergySegmenter {
    pub params: SegmenterParams,
}

impl SignSegmenter for EnergySegmenter {
    fn name(&self) -> &str {
        "energy-hysteresis"
    }

    fn segment(&self, seq: &PoseSequence) -> Vec<Segment> {
        segment_signs(seq, &self.params)
    }
}

pub struct DtwRecognizer {
    dict: Arc<Dictionary>,
    index: TemplateIndex,
    tau: f64,
    name: String,
}

impl DtwRecognizer {
    pub fn new(dict: Arc<Dictionary>, params: &SegmenterParams, tau: f64) -> Result<Self, RecognitionError> {
        let index = TemplateIndex::build(&dict, params)?;
        let name = format!("dtw-nn:{} ({} templates, tau {tau})", dict.signed_lang(), index.len());
        Ok(Self { dict, index, tau, name })
    }

    pub fn index(&self) -> &TemplateIndex {
        &self.index
    }
}

impl SignRecognizer for DtwRecognizer {
    fn name(&self) -> &str {
        &self.name
    }

    fn recognize(&self, seq: &PoseSequence, segments: &[Segment]) -> Result<Vec<Recognition>, RecognitionError> {
        recognize_all(seq, segments, &self.index, self.tau)
    }

    fn dictionary(&self) -> &Dictionary {
        &self.dict
    }
}
