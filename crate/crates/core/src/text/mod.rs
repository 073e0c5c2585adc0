//! Spoken-text preprocessing: language identification, normalization and
//! sentence segmentation.

pub mod langid;
pub mod normalize;
pub mod sentences;

pub use langid::{detect_language, train_langid, LangId, LangIdError, NgramLangModel};
pub use normalize::{normalize_text, NormalizationClient, NormalizationError, Normalized, Normalizer};
pub use sentences::{split_sentences, SentenceRules, SentenceSpan};
