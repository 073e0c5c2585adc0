use serde::Serialize;

use super::lookup::{lookup_tokens, LexicalMatch};
use super::Dictionary;
use crate::pose::{self, PoseSequence};
use crate::text::LangId;

/// Default crossfade between consecutive signs, in frames.
pub const DEFAULT_CROSSFADE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceTranslation {
    pub sentence: String,
    pub glosses: Vec<String>,
    /// Aligned with `glosses`.
    pub fsw: Vec<Option<String>>,
    #[serde(skip)]
    pub pose: PoseSequence,
    /// Surface text of every token that found no entry.
    pub missing: Vec<String>,
    pub matches: Vec<LexicalMatch>,
    /// Crossfade actually used; clamped below the shortest matched clip.
    pub crossfade: usize,
}

/// Looks up `sentence` and stitches the matched poses in source order.
/// Missing tokens are reported and skipped.
pub fn translate_sentence(sentence: &str, dict: &Dictionary, lang: &LangId, k: usize) -> SentenceTranslation {
    let matches = lookup_tokens(sentence, dict, lang);
    let mut glosses = Vec::new();
    let mut fsw = Vec::new();
    let mut missing = Vec::new();
    let mut clips = Vec::new();
    for m in &matches {
        match m.entry {
            Some(i) => {
                let entry = dict.entry(i);
                glosses.push(entry.gloss.clone());
                fsw.push(entry.fsw.clone());
                clips.push(entry.pose.clone());
            }
            None => missing.push(m.text(sentence).to_owned()),
        }
    }
    let crossfade = if clips.len() > 1 {
        let shortest = clips.iter().map(PoseSequence::frame_count).min().unwrap_or(0);
        k.min(shortest.saturating_sub(1))
    } else {
        k
    };
    let pose = if clips.is_empty() {
        PoseSequence::empty(dict.header().clone())
    } else {
        // entries share one header and are non-empty, so stitching cannot fail
        pose::concatenate_stitch(&clips, crossfade).expect("dictionary poses are stitch-compatible")
    };
    SentenceTranslation {
        sentence: sentence.to_owned(),
        glosses,
        fsw,
        pose,
        missing,
        matches,
        crossfade,
    }
}
