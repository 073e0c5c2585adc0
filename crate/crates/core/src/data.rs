//! Data files compiled into the library: the language-ID seed corpus,
//! sentence abbreviation lists and lemmatizer suffix tables.

macro_rules! bundle {
    ($dir:literal; $($lang:literal),* $(,)?) => {
        &[$(($lang, include_str!(concat!("../data/", $dir, "/", $lang, ".txt")))),*]
    };
}

/// `(lang, text)` pairs; one sentence per line.
pub const LANGID_CORPUS: &[(&str, &str)] = bundle!("langid"; "de", "en", "es", "fr", "it", "nl", "pt", "sv");

/// `(lang, text)` pairs; one abbreviation per line.
pub const ABBREVIATIONS: &[(&str, &str)] = bundle!("abbreviations"; "de", "en", "es", "fr", "it", "nl", "pt", "sv");

/// `(lang, text)` pairs; `suffix [replacement]` per line, `#` comments.
pub const SUFFIXES: &[(&str, &str)] = bundle!("suffixes"; "de", "en", "es", "fr", "it", "nl", "pt", "sv");
