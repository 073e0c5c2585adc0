//! Tokenization, phrase normalization, suffix lemmatization and greedy lookup.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::Dictionary;
use crate::data;
use crate::text::LangId;

/// Shortest stem a suffix rule may leave behind, in characters.
pub const MIN_STEM_CHARS: usize = 3;

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '’'
}

/// Byte spans of word tokens: runs of alphanumerics, with apostrophes kept
/// when they sit between two alphanumerics (`don't`, `l'eau`).
pub fn tokenize(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_alphanumeric() || is_combining_mark(c) {
                j += 1;
            } else if is_apostrophe(c) && chars.get(j + 1).is_some_and(|n| n.1.is_alphanumeric()) {
                j += 2;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |c| c.0);
        spans.push((start, end));
        i = j;
    }
    spans
}

/// Lowercase NFC form of one token; typographic apostrophes become `'`.
pub fn normalize_token(token: &str) -> String {
    token
        .nfc()
        .flat_map(char::to_lowercase)
        .map(|c| if is_apostrophe(c) { '\'' } else { c })
        .collect()
}

/// Lowercase, NFC, punctuation stripped, tokens joined by single spaces.
pub fn normalize_phrase(text: &str) -> String {
    let text: String = text.nfc().collect();
    tokenize(&text)
        .into_iter()
        .map(|(s, e)| normalize_token(&text[s..e]))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct SuffixRule {
    suffix: String,
    replacement: String,
}

/// Per-language suffix-stripping tables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lemmatizer {
    rules: BTreeMap<String, Vec<SuffixRule>>,
}

impl Lemmatizer {
    pub fn bundled() -> Self {
        let mut lemmatizer = Self::default();
        for (lang, text) in data::SUFFIXES {
            lemmatizer.add_table(lang, text);
        }
        lemmatizer
    }

    /// Adds rules from `text`: one `suffix [replacement]` per line.
    pub fn add_table(&mut self, lang: &str, text: &str) {
        let rules = self.rules.entry(lang.to_owned()).or_default();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let Some(suffix) = parts.next() else { continue };
            rules.push(SuffixRule {
                suffix: normalize_token(suffix),
                replacement: parts.next().map(normalize_token).unwrap_or_default(),
            });
        }
        // stable: equal lengths keep file order
        rules.sort_by_key(|r| std::cmp::Reverse(r.suffix.chars().count()));
    }

    /// Candidate lemmas for a normalized token, longest suffix first.
    pub fn candidates(&self, token: &str, lang: &str) -> Vec<String> {
        let Some(rules) = self.rules.get(lang) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for rule in rules {
            let Some(stem) = token.strip_suffix(rule.suffix.as_str()) else {
                continue;
            };
            if stem.chars().count() < MIN_STEM_CHARS {
                continue;
            }
            let lemma = format!("{stem}{}", rule.replacement);
            if !out.contains(&lemma) {
                out.push(lemma);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    Lemma,
    Missing,
}

/// One lookup result over the byte span `start..end` of the sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexicalMatch {
    pub start: usize,
    pub end: usize,
    /// Index into [`Dictionary::entries`]; `None` marks a missing token.
    pub entry: Option<usize>,
    pub kind: MatchKind,
    /// Number of tokens covered.
    pub tokens: usize,
}

impl LexicalMatch {
    pub fn is_missing(&self) -> bool {
        self.entry.is_none()
    }

    pub fn text<'a>(&self, sentence: &'a str) -> &'a str {
        &sentence[self.start..self.end]
    }
}

/// Greedy longest-match-first scan; unmatched single tokens fall back to the
/// lemmatizer and then to a missing marker.
pub fn lookup_tokens(sentence: &str, dict: &Dictionary, lang: &LangId) -> Vec<LexicalMatch> {
    let spans = tokenize(sentence);
    let tokens: Vec<String> = spans.iter().map(|&(s, e)| normalize_token(&sentence[s..e])).collect();
    let lang = lang.code.as_str();
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let longest = dict.max_phrase_tokens().min(tokens.len() - i);
        let phrase = (1..=longest).rev().find_map(|len| {
            let phrase = tokens[i..i + len].join(" ");
            dict.lookup(lang, &phrase).map(|entry| (len, entry))
        });
        let m = match phrase {
            Some((len, entry)) => LexicalMatch {
                start: spans[i].0,
                end: spans[i + len - 1].1,
                entry: Some(entry),
                kind: MatchKind::Exact,
                tokens: len,
            },
            None => {
                let lemma = dict
                    .lemmatizer()
                    .candidates(&tokens[i], lang)
                    .iter()
                    .find_map(|c| dict.lookup(lang, c));
                LexicalMatch {
                    start: spans[i].0,
                    end: spans[i].1,
                    entry: lemma,
                    kind: if lemma.is_some() { MatchKind::Lemma } else { MatchKind::Missing },
                    tokens: 1,
                }
            }
        };
        i += m.tokens;
        out.push(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_phrases() {
        let s = "Hello, world! Don't stop-now 'quoted'";
        let toks: Vec<&str> = tokenize(s).iter().map(|&(a, b)| &s[a..b]).collect();
        assert_eq!(toks, ["Hello", "world", "Don't", "stop", "now", "quoted"]);
        assert_eq!(normalize_phrase("  Good   Morning! "), "good morning");
        assert_eq!(normalize_phrase("Ca\u{301}fe\u{301}"), "cáfé");
        assert_eq!(normalize_phrase("DON’T"), "don't");
        assert_eq!(normalize_phrase("?!"), "");
        assert_eq!(tokenize("Ca\u{301}fe\u{301} x"), [(0, 8), (9, 10)]);
    }

    #[test]
    fn english_suffix_rules_by_hand() {
        let l = Lemmatizer::bundled();
        // "cats": only "-s" applies, leaving "cat" (3 chars)
        assert_eq!(l.candidates("cats", "en"), ["cat"]);
        // "ponies": "-ies"→"y" first, then "-es", then "-s"
        assert_eq!(l.candidates("ponies", "en"), ["pony", "poni", "ponie"]);
        assert_eq!(l.candidates("walking", "en"), ["walk"]);
        // stem would be too short
        assert!(l.candidates("ads", "en").is_empty());
        assert!(l.candidates("cats", "xx").is_empty());
    }

    #[test]
    fn custom_table_order() {
        let mut l = Lemmatizer::default();
        l.add_table("xx", "a\n# c\nabc z\n\nbc\n");
        assert_eq!(l.candidates("hellabc", "xx"), ["hellz", "hella"]);
    }
}
