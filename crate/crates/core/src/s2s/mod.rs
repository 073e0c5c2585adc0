//! Spoken-to-signed translation by dictionary lookup.

mod dictionary;
mod lookup;
mod translate;

pub use dictionary::{
    load_dictionary, Dictionary, DictionaryEntry, DictionaryError, Manifest, ManifestEntry, RawEntry,
};
pub use lookup::{
    lookup_tokens, normalize_phrase, normalize_token, tokenize, Lemmatizer, LexicalMatch, MatchKind, MIN_STEM_CHARS,
};
pub use translate::{translate_sentence, SentenceTranslation, DEFAULT_CROSSFADE};
