//! Character-trigram naive Bayes language identification.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::data;

/// Code returned when no language can be determined.
pub const UNDETERMINED: &str = "und";

/// Add-alpha smoothing constant used by [`train_langid`].
pub const DEFAULT_ALPHA: f64 = 0.5;

/// A detected (or pinned) language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangId {
    pub code: String,
    pub confidence: f64,
}

impl LangId {
    pub fn new(code: impl Into<String>, confidence: f64) -> Self {
        Self {
            code: code.into(),
            confidence,
        }
    }

    /// A caller-specified language, confidence 1.
    pub fn pinned(code: impl Into<String>) -> Self {
        Self::new(code, 1.0)
    }

    pub fn undetermined() -> Self {
        Self::new(UNDETERMINED, 0.0)
    }

    pub fn is_undetermined(&self) -> bool {
        self.code == UNDETERMINED
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LangIdError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("training text for {0:?} is empty")]
    EmptyText(String),
    #[error("language {0:?} has no usable character trigrams")]
    NoTrigrams(String),
    #[error("smoothing constant must be positive, got {0}")]
    InvalidAlpha(f64),
}

/// Trigram counts of `text`: lowercased, NFC, every run of non-letters is a
/// word break and each word is padded with one space on either side.
pub fn trigram_counts(text: &str) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    let cleaned: String = text
        .nfc()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphabetic() { c } else { ' ' })
        .collect();
    let mut window: Vec<char> = Vec::new();
    for word in cleaned.split_whitespace() {
        window.clear();
        window.push(' ');
        window.extend(word.chars());
        window.push(' ');
        for tri in window.windows(3) {
            *counts.entry(tri.iter().collect::<String>()).or_insert(0) += 1;
        }
    }
    counts
}

/// Multinomial trigram model with a vocabulary shared by all languages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ModelFile", into = "ModelFile")]
pub struct NgramLangModel {
    languages: Vec<String>,
    vocabulary: HashMap<String, usize>,
    trigrams: Vec<String>,
    /// `log_probs[lang][trigram]`
    log_probs: Vec<Vec<f64>>,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    alpha: f64,
    languages: Vec<String>,
    trigrams: Vec<String>,
    log_probs: Vec<Vec<f64>>,
}

impl From<ModelFile> for NgramLangModel {
    fn from(f: ModelFile) -> Self {
        let vocabulary = f.trigrams.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            languages: f.languages,
            vocabulary,
            trigrams: f.trigrams,
            log_probs: f.log_probs,
            alpha: f.alpha,
        }
    }
}

impl From<NgramLangModel> for ModelFile {
    fn from(m: NgramLangModel) -> Self {
        Self {
            alpha: m.alpha,
            languages: m.languages,
            trigrams: m.trigrams,
            log_probs: m.log_probs,
        }
    }
}

/// Trains with the default smoothing constant.
pub fn train_langid<L: AsRef<str>, T: AsRef<str>>(corpus: &[(L, T)]) -> Result<NgramLangModel, LangIdError> {
    NgramLangModel::train(corpus, DEFAULT_ALPHA)
}

impl NgramLangModel {
    /// Counts commute, so the result does not depend on corpus order.
    pub fn train<L: AsRef<str>, T: AsRef<str>>(corpus: &[(L, T)], alpha: f64) -> Result<Self, LangIdError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(LangIdError::InvalidAlpha(alpha));
        }
        if corpus.is_empty() {
            return Err(LangIdError::EmptyCorpus);
        }
        let mut per_lang: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
        for (lang, text) in corpus {
            let (lang, text) = (lang.as_ref(), text.as_ref());
            if text.trim().is_empty() {
                return Err(LangIdError::EmptyText(lang.to_owned()));
            }
            let counts = per_lang.entry(lang.to_owned()).or_default();
            for (tri, n) in trigram_counts(text) {
                *counts.entry(tri).or_insert(0) += n;
            }
        }
        if let Some((lang, _)) = per_lang.iter().find(|(_, c)| c.is_empty()) {
            return Err(LangIdError::NoTrigrams(lang.clone()));
        }
        let trigrams: Vec<String> = per_lang
            .values()
            .flat_map(|c| c.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let vocabulary: HashMap<String, usize> = trigrams.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let v = trigrams.len() as f64;
        let log_probs = per_lang
            .values()
            .map(|counts| {
                let total: f64 = counts.values().map(|&n| f64::from(n)).sum();
                let denom = total + alpha * v;
                trigrams
                    .iter()
                    .map(|t| ((f64::from(counts.get(t).copied().unwrap_or(0)) + alpha) / denom).ln())
                    .collect()
            })
            .collect();
        Ok(Self {
            languages: per_lang.into_keys().collect(),
            vocabulary,
            trigrams,
            log_probs,
            alpha,
        })
    }

    /// Model trained on the bundled seed corpus (computed once).
    pub fn bundled() -> &'static NgramLangModel {
        static MODEL: OnceLock<NgramLangModel> = OnceLock::new();
        MODEL.get_or_init(|| train_langid(&bundled_corpus()).expect("bundled corpus trains"))
    }

    /// Languages in ascending code order.
    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocabulary_size(&self) -> usize {
        self.trigrams.len()
    }

    /// Smoothed probability table of one language, in vocabulary order.
    pub fn probabilities(&self, lang: &str) -> Option<impl Iterator<Item = f64> + '_> {
        let i = self.languages.iter().position(|l| l == lang)?;
        Some(self.log_probs[i].iter().map(|lp| lp.exp()))
    }

    /// Log-likelihood of `text` under every language, in [`Self::languages`] order.
    /// Out-of-vocabulary trigrams are ignored. `None` if no trigram is known.
    pub fn log_likelihoods(&self, text: &str) -> Option<Vec<f64>> {
        let known: Vec<(usize, f64)> = trigram_counts(text)
            .into_iter()
            .filter_map(|(t, n)| self.vocabulary.get(&t).map(|&i| (i, f64::from(n))))
            .collect();
        if known.is_empty() {
            return None;
        }
        Some(
            self.log_probs
                .iter()
                .map(|table| known.iter().map(|&(i, n)| n * table[i]).sum())
                .collect(),
        )
    }

    /// Detects among all languages.
    pub fn detect(&self, text: &str) -> LangId {
        self.detect_among::<&str>(text, &[])
    }

    /// Detects among `candidates` (all languages when empty). Candidates unknown
    /// to the model are ignored.
    pub fn detect_among<S: AsRef<str>>(&self, text: &str, candidates: &[S]) -> LangId {
        if text.trim().chars().count() < 3 {
            return LangId::undetermined();
        }
        let Some(scores) = self.log_likelihoods(text) else {
            return LangId::undetermined();
        };
        let allowed: Vec<usize> = (0..self.languages.len())
            .filter(|&i| candidates.is_empty() || candidates.iter().any(|c| c.as_ref() == self.languages[i]))
            .collect();
        if allowed.is_empty() {
            return LangId::undetermined();
        }
        // languages are sorted, so the first maximum is the alphabetically first
        let mut best = allowed[0];
        for &i in &allowed[1..] {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        let max = scores[best];
        let z: f64 = allowed.iter().map(|&i| (scores[i] - max).exp()).sum();
        LangId::new(self.languages[best].clone(), 1.0 / z)
    }
}

/// Free-function form of [`NgramLangModel::detect`].
pub fn detect_language(model: &NgramLangModel, text: &str) -> LangId {
    model.detect(text)
}

/// Every `(lang, sentence)` of the bundled seed corpus.
pub fn bundled_corpus() -> Vec<(String, String)> {
    data::LANGID_CORPUS
        .iter()
        .flat_map(|(lang, text)| {
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(move |l| ((*lang).to_owned(), l.to_owned()))
        })
        .collect()
}

/// Deterministic 80/20 split of a corpus: every fifth sentence of each
/// language is held out.
pub fn split_train_test(corpus: &[(String, String)]) -> (Vec<(String, String)>, Vec<(String, String)>) {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for item in corpus {
        let n = seen.entry(item.0.as_str()).or_insert(0);
        if *n % 5 == 4 {
            test.push(item.clone());
        } else {
            train.push(item.clone());
        }
        *n += 1;
    }
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_corpus_hand_computed() {
        // en:  " th" "the" "he " x3   de: " de" "der" "er " x3
        // vocab = 6 trigrams, N = 9 per language, alpha = 0.5
        // P_en("the") = (3 + .5) / (9 + 3) and P_de("the") = .5 / 12
        let model = train_langid(&[("en", "the the the"), ("de", "der der der")]).unwrap();
        assert_eq!(model.vocabulary_size(), 6);
        let ll = model.log_likelihoods("the").unwrap();
        let en = 3.0 * (3.5f64 / 12.0).ln();
        let de = 3.0 * (0.5f64 / 12.0).ln();
        assert!((ll[1] - en).abs() < 1e-12 && (ll[0] - de).abs() < 1e-12, "{ll:?}");
        assert_eq!(model.detect("the").code, "en");
        let expected_conf = 1.0 / (1.0 + (de - en).exp());
        assert!((model.detect("the").confidence - expected_conf).abs() < 1e-12);
    }

    #[test]
    fn distributions_sum_to_one() {
        let model = NgramLangModel::bundled();
        for lang in model.languages() {
            let total: f64 = model.probabilities(lang).unwrap().sum();
            assert!((total - 1.0).abs() < 1e-9, "{lang}: {total}");
        }
    }

    #[test]
    fn single_language_is_certain() {
        let model = train_langid(&[("fi", "hyvää huomenta kaikille")]).unwrap();
        let id = model.detect("something else entirely");
        assert_eq!(id.code, "fi");
        assert_eq!(id.confidence, 1.0);
    }

    #[test]
    fn training_errors() {
        let empty: [(&str, &str); 0] = [];
        assert_eq!(train_langid(&empty), Err(LangIdError::EmptyCorpus));
        assert_eq!(
            train_langid(&[("en", "hello"), ("de", "")]),
            Err(LangIdError::EmptyText("de".into()))
        );
        assert_eq!(train_langid(&[("xx", "12 34 !!")]), Err(LangIdError::NoTrigrams("xx".into())));
    }

    #[test]
    fn degenerate_input_is_undetermined() {
        let model = NgramLangModel::bundled();
        assert_eq!(model.detect(""), LangId::undetermined());
        assert_eq!(model.detect("ab"), LangId::undetermined());
        assert_eq!(model.detect("1234 5678"), LangId::undetermined());
    }

    #[test]
    fn ties_go_to_first_code() {
        let model = train_langid(&[("zz", "same words here"), ("aa", "same words here")]).unwrap();
        let id = model.detect("words");
        assert_eq!(id.code, "aa");
        assert!((id.confidence - 0.5).abs() < 1e-12);
    }

    #[test]
    fn corpus_order_does_not_matter() {
        let corpus = bundled_corpus();
        let mut reversed = corpus.clone();
        reversed.reverse();
        let a = train_langid(&corpus).unwrap();
        let b = train_langid(&reversed).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn candidates_restrict_detection() {
        let model = NgramLangModel::bundled();
        let id = model.detect_among("hello world", &["en"]);
        assert_eq!(id.code, "en");
        assert_eq!(id.confidence, 1.0);
    }

    #[test]
    fn model_serializes() {
        let model = train_langid(&[("en", "the cat"), ("de", "die katze")]).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: NgramLangModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
    }
}
