//! Rule-based sentence segmentation with per-language abbreviation lists.

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LangId;
use crate::data;

/// Byte range `start..end` of one sentence in the original text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub start: usize,
    pub end: usize,
}

impl SentenceSpan {
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.start..self.end]
    }
}

const TERMINATORS: &[char] = &['.', '!', '?', '。', '！', '？', '…'];
/// Terminators that end a sentence even without following whitespace.
const FULL_WIDTH: &[char] = &['。', '！', '？'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '”', '’', '»', '」', '』'];
const OPENERS: &[char] = &['"', '\'', '“', '‘', '«', '„', '¿', '¡', '(', '[', '「', '『'];

/// Abbreviation tables keyed by language code.
#[derive(Debug, Clone, Default)]
pub struct SentenceRules {
    abbreviations: BTreeMap<String, BTreeSet<String>>,
}

impl SentenceRules {
    /// Rules from the lists compiled into the library.
    pub fn bundled() -> Self {
        let mut rules = Self::default();
        for (lang, text) in data::ABBREVIATIONS {
            rules.add_list(lang, text);
        }
        rules
    }

    /// Loads every `<lang>.txt` in `dir` (UTF-8, one abbreviation per line).
    pub fn load_dir(dir: &Path) -> io::Result<Self> {
        let mut rules = Self::default();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(lang) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            rules.add_list(lang, &std::fs::read_to_string(&path)?);
        }
        Ok(rules)
    }

    /// Adds the abbreviations listed in `text` (one per line, `#` comments).
    pub fn add_list(&mut self, lang: &str, text: &str) {
        let set = self.abbreviations.entry(lang.to_owned()).or_default();
        set.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase),
        );
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.abbreviations.keys().map(String::as_str)
    }

    fn is_abbreviation(&self, lang: &str, token: &str) -> bool {
        let token = token.to_lowercase();
        match self.abbreviations.get(lang) {
            Some(set) => set.contains(&token),
            // unknown language: any list may apply
            None => self.abbreviations.values().any(|set| set.contains(&token)),
        }
    }

    /// Splits `text` into sentence spans.
    ///
    /// A sentence ends after a run of terminators (plus closing quotes or
    /// brackets) that is followed by whitespace and then a letter or opening
    /// quote, or by the end of the text. Lowercase continuations split too, so
    /// unnormalized input such as `"hello world. thank you."` yields two
    /// sentences. Full-width terminators end a sentence unconditionally. A
    /// single `.` closing a listed abbreviation does not end a sentence.
    pub fn split(&self, text: &str, lang: &str) -> Vec<SentenceSpan> {
        let mut spans = Vec::new();
        let mut start: Option<usize> = None;
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
        let mut i = 0;
        while i < chars.len() {
            let (pos, c) = chars[i];
            if start.is_none() {
                if c.is_whitespace() {
                    i += 1;
                    continue;
                }
                start = Some(pos);
            }
            if !TERMINATORS.contains(&c) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j < chars.len() && TERMINATORS.contains(&chars[j].1) {
                j += 1;
            }
            let single_period = j == i + 1 && c == '.';
            while j < chars.len() && CLOSERS.contains(&chars[j].1) {
                j += 1;
            }
            let end = byte_at(j);
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let boundary = if k == chars.len() || chars[i..j].iter().any(|(_, t)| FULL_WIDTH.contains(t)) {
                true
            } else if k == j {
                false
            } else {
                let next = chars[k].1;
                next.is_alphabetic() || OPENERS.contains(&next)
            };
            let abbreviation = single_period && {
                let sentence_start = start.unwrap_or(0);
                let token_start = text[sentence_start..pos]
                    .rfind(char::is_whitespace)
                    .map_or(sentence_start, |w| {
                        sentence_start + w + text[sentence_start + w..].chars().next().map_or(1, char::len_utf8)
                    });
                self.is_abbreviation(lang, &text[token_start..pos + 1])
            };
            if boundary && !abbreviation {
                spans.push(SentenceSpan {
                    start: start.take().unwrap_or(pos),
                    end,
                });
            }
            i = j;
        }
        if let Some(s) = start {
            let end = s + text[s..].trim_end().len();
            if end > s {
                spans.push(SentenceSpan { start: s, end });
            }
        }
        spans
    }
}

/// Splits with the bundled rules.
pub fn split_sentences(text: &str, lang: &LangId) -> Vec<SentenceSpan> {
    static RULES: std::sync::OnceLock<SentenceRules> = std::sync::OnceLock::new();
    RULES.get_or_init(SentenceRules::bundled).split(text, &lang.code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts<'a>(text: &'a str, lang: &str) -> Vec<&'a str> {
        split_sentences(text, &LangId::pinned(lang))
            .iter()
            .map(|s| s.text(text))
            .collect()
    }

    #[test]
    fn canonical_case() {
        assert_eq!(texts("Hello world. How are you?", "en"), ["Hello world.", "How are you?"]);
    }

    #[test]
    fn abbreviation_suppresses_split() {
        assert!(SentenceRules::bundled().is_abbreviation("en", "Dr."));
        assert_eq!(texts("Dr. Smith arrived.", "en"), ["Dr. Smith arrived."]);
        assert_eq!(texts("Wir treffen z.B. Anna. Dann gehen wir.", "de"), ["Wir treffen z.B. Anna.", "Dann gehen wir."]);
    }

    #[test]
    fn unterminated_and_empty() {
        assert_eq!(texts("no terminator", "en"), ["no terminator"]);
        assert!(texts("", "en").is_empty());
        assert!(texts("   \n ", "en").is_empty());
        assert_eq!(texts("  padded text.  ", "en"), ["padded text."]);
    }

    #[test]
    fn lowercase_continuation_splits_digits_do_not() {
        assert_eq!(texts("hello world. thank you.", "en"), ["hello world.", "thank you."]);
        assert_eq!(texts("It costs approx. ten euros.", "en"), ["It costs approx. ten euros."]);
        assert_eq!(texts("Chapter 3. 4 more to go.", "en"), ["Chapter 3. 4 more to go."]);
        assert_eq!(texts("Version 2.5 is out. It works!", "en"), ["Version 2.5 is out.", "It works!"]);
    }

    #[test]
    fn quotes_and_runs() {
        assert_eq!(texts("He said \"stop!\" Then left...", "en"), ["He said \"stop!\"", "Then left..."]);
        assert_eq!(texts("Really?! \"Yes.\"", "en"), ["Really?!", "\"Yes.\""]);
        assert_eq!(texts("¿Vienes? ¡Claro!", "es"), ["¿Vienes?", "¡Claro!"]);
    }

    #[test]
    fn full_width_terminators() {
        assert_eq!(texts("你好。谢谢！", "zh"), ["你好。", "谢谢！"]);
    }

    #[test]
    fn loads_rule_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("xx.txt"), "Abc.\n# comment\n").unwrap();
        std::fs::write(dir.path().join("ignored.json"), "{}").unwrap();
        let rules = SentenceRules::load_dir(dir.path()).unwrap();
        assert_eq!(rules.languages().collect::<Vec<_>>(), ["xx"]);
        let text = "See Abc. Then more.";
        assert_eq!(rules.split(text, "xx").len(), 1);
        assert_eq!(rules.split(text, "en").len(), 1);
        assert_eq!(SentenceRules::default().split(text, "xx").len(), 2);
    }
}
