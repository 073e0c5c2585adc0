//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints one line; the process fails if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde_json::{json, Value};
use signpipe_core::pipeline::{Pipeline, SpokenToSignedRequest};
use signpipe_core::pose::{
    concatenate_stitch, mean_shoulder_width, read_pose, write_pose, Component, FormatError, PoseHeader, PoseSequence,
};
use signpipe_core::s2s::{Dictionary, DEFAULT_CROSSFADE};
use signpipe_core::signwriting::{parse_fsw, serialize_fsw, BoxMarker, PlacedSymbol, Sign, SymbolKey};
use signpipe_core::sts::{
    dtw_alignment, recognize_segment, segment_signs, Frames, Segment, SegmentKind, SegmenterParams, TemplateIndex,
    DEFAULT_TAU,
};
use signpipe_core::synth::{
    add_noise, concat, random_walk, rest_pose, time_warp, toy_clip, toy_dictionary, ToyConfig, TOY_FPS,
};
use signpipe_core::text::langid::{bundled_corpus, split_train_test, DEFAULT_ALPHA};
use signpipe_core::text::{NgramLangModel, Normalizer};
use signpipe_service::http_client::outbound_requests;
use signpipe_service::{AppState, StartupError};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("fsw-roundtrip", fsw_roundtrip),
        ("spos-format", spos_format),
        ("dtw-oracle", dtw_oracle),
        ("stitching", stitching),
        ("segmentation", segmentation),
        ("recognition", recognition),
        ("round-trip", round_trip),
        ("language-id", language_id),
        ("offline", offline),
        ("latency", latency),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        println!("{} {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------- FSW

fn random_key(rng: &mut impl Rng, punctuation: bool) -> SymbolKey {
    let base = if punctuation {
        rng.random_range(0x387..=0x38b)
    } else {
        rng.random_range(0x100..=0x38b)
    };
    SymbolKey::new(base, rng.random_range(0..=5), rng.random_range(0..=15))
}

fn random_sign(rng: &mut impl Rng) -> Sign {
    let coord = |rng: &mut ChaCha8Rng| rng.random_range(250..=749);
    let mut rng = ChaCha8Rng::seed_from_u64(rng.random());
    if rng.random_bool(0.1) {
        let key = random_key(&mut rng, true);
        let (x, y) = (coord(&mut rng), coord(&mut rng));
        return Sign::punctuation(key, x, y);
    }
    let prefix = (0..rng.random_range(0..4)).map(|_| random_key(&mut rng, false)).collect();
    let marker = *[BoxMarker::B, BoxMarker::L, BoxMarker::M, BoxMarker::R].choose(&mut rng).unwrap();
    let symbols = (0..rng.random_range(0..6))
        .map(|_| PlacedSymbol {
            key: random_key(&mut rng, false),
            x: coord(&mut rng),
            y: coord(&mut rng),
        })
        .collect();
    Sign {
        sort_prefix: prefix,
        box_marker: marker,
        max_x: coord(&mut rng),
        max_y: coord(&mut rng),
        symbols,
    }
}

fn fsw_grammar() -> Regex {
    let n = "(?:2[5-9][0-9]|[3-6][0-9]{2}|7[0-4][0-9])";
    let coord = format!("{n}x{n}");
    let key = "S(?:[12][0-9a-fA-F]{2}|3[0-7][0-9a-fA-F]|38[0-9a-bA-B])[0-5][0-9a-fA-F]";
    let punct = "S38[7-9a-bA-B][0-5][0-9a-fA-F]";
    let sign = format!("(?:(?:A(?:{key})+)?[BLMR]{coord}(?:{key}{coord})*|{punct}{coord})");
    let ws = "[ \\t\\n\\r\\x0C]";
    Regex::new(&format!("^{ws}*(?:{sign}(?:{ws}+{sign})*)?{ws}*$")).unwrap()
}

fn mutate(text: &str, rng: &mut impl Rng) -> String {
    const ALPHABET: &[u8] = b"SABLMRx0123456789abcdefABCDEF \t-Z";
    let mut chars: Vec<u8> = text.bytes().collect();
    for _ in 0..rng.random_range(1..=3) {
        let c = ALPHABET[rng.random_range(0..ALPHABET.len())];
        let i = rng.random_range(0..=chars.len());
        match rng.random_range(0..3) {
            0 => chars.insert(i, c),
            1 if i < chars.len() => chars[i] = c,
            _ if i < chars.len() => {
                chars.remove(i);
            }
            _ => chars.push(c),
        }
    }
    String::from_utf8(chars).unwrap()
}

fn fsw_roundtrip() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut round_trip_failures = 0;
    for _ in 0..10_000 {
        let sign = random_sign(&mut rng);
        let text = serialize_fsw(std::slice::from_ref(&sign)).unwrap();
        let parsed = parse_fsw(&text);
        let ok = parsed.as_deref() == Ok(std::slice::from_ref(&sign))
            && parsed.and_then(|p| serialize_fsw(&p)).as_deref() == Ok(text.as_str());
        round_trip_failures += usize::from(!ok);
    }
    let grammar = fsw_grammar();
    let mut disagreements = 0;
    let mut accepted = 0;
    for i in 0..10_000 {
        let signs: Vec<Sign> = (0..rng.random_range(1..4)).map(|_| random_sign(&mut rng)).collect();
        let valid = serialize_fsw(&signs).unwrap();
        let text = if i % 2 == 0 { valid } else { mutate(&valid, &mut rng) };
        let ours = parse_fsw(&text).is_ok();
        accepted += usize::from(ours);
        disagreements += usize::from(ours != grammar.is_match(&text));
    }
    let elapsed = started.elapsed();
    outcome(
        round_trip_failures == 0 && disagreements == 0 && elapsed < Duration::from_secs(5),
        format!(
            "{round_trip_failures}/10000 round-trip failures, {disagreements}/10000 oracle disagreements \
             ({accepted} accepted), {:.2} s (limit 5 s)",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- SPOS

fn random_sequence(rng: &mut impl Rng) -> PoseSequence {
    let dims = if rng.random_bool(0.5) { 2 } else { 3 };
    let components: Vec<Component> = (0..rng.random_range(1..=4))
        .map(|c| Component::new(format!("part-{c}"), (0..rng.random_range(1..=25)).map(|k| format!("kp{k}"))))
        .collect();
    let total: usize = components.iter().map(|c| c.keypoints.len()).sum();
    let edges = (0..rng.random_range(0..total * 2))
        .map(|_| (rng.random_range(0..total) as u16, rng.random_range(0..total) as u16))
        .collect();
    let header = PoseHeader::new(rng.random_range(1.0..120.0), dims, components, edges).unwrap();
    let frames = rng.random_range(0..40);
    let coords = (0..frames * total * dims as usize)
        .map(|_| match f32::from_bits(rng.random::<u32>()) {
            v if v.is_finite() => v,
            _ => rng.random_range(-1e3..1e3),
        })
        .collect();
    let conf = (0..frames * total).map(|_| rng.random_range(0.0..=1.0)).collect();
    PoseSequence::new(header, coords, conf).unwrap()
}

fn error_position(e: &FormatError) -> (&'static str, usize) {
    match e {
        FormatError::BadMagic { .. } => ("bad_magic", 0),
        FormatError::UnsupportedVersion { offset, .. } => ("unsupported_version", *offset),
        FormatError::Truncated { offset, .. } => ("truncated", *offset),
        FormatError::SizeMismatch { offset, .. } => ("size_mismatch", *offset),
        FormatError::InvalidUtf8 { offset, .. } => ("invalid_utf8", *offset),
        FormatError::Invalid { offset, .. } => ("invalid", *offset),
        FormatError::Overflow { .. } => ("overflow", usize::MAX),
    }
}

fn spos_format() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = 0;
    for _ in 0..1000 {
        let seq = random_sequence(&mut rng);
        let bytes = write_pose(&seq).unwrap();
        let ok = match read_pose(&bytes) {
            Ok(back) => back == seq && write_pose(&back).unwrap() == bytes,
            Err(_) => false,
        };
        failures += usize::from(!ok);
    }

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/spos");
    let mut corrupt = 0;
    let mut mispositioned = Vec::new();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|x| x != "json") {
            continue;
        }
        let expected: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        let Some(kind) = expected["error"].as_str() else {
            continue;
        };
        corrupt += 1;
        let bytes = std::fs::read(path.with_extension("pose")).unwrap();
        let offset = expected["offset"].as_u64().unwrap() as usize;
        match read_pose(&bytes) {
            Err(e) if error_position(&e) == (kind, offset) => {}
            other => mispositioned.push(format!(
                "{}: {:?}",
                path.file_stem().unwrap().to_string_lossy(),
                other.map(|_| "accepted").map_err(|e| error_position(&e))
            )),
        }
    }
    outcome(
        failures == 0 && corrupt > 0 && mispositioned.is_empty(),
        format!(
            "{failures}/1000 round-trip failures; {}/{corrupt} corruption fixtures rejected at the recorded offset{}",
            corrupt - mispositioned.len(),
            if mispositioned.is_empty() { String::new() } else { format!(" ({})", mispositioned.join(", ")) }
        ),
    )
}

// ---------------------------------------------------------------- DTW

/// Minimum over every warping path, found by depth-first enumeration with
/// branch-and-bound (costs are non-negative, so pruning keeps it exact).
fn exhaustive(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).abs();
        if acc >= *best {
            return;
        }
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = acc;
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

fn dtw_oracle() -> Outcome {
    let mut all = Vec::new();
    for len in 1..=6u32 {
        for code in 0..3usize.pow(len) {
            all.push((0..len).map(|i| (code / 3usize.pow(i) % 3) as f64).collect::<Vec<_>>());
        }
    }
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get());
    let chunk = all.len().div_ceil(threads);
    let mismatches: usize = std::thread::scope(|s| {
        let handles: Vec<_> = all
            .chunks(chunk)
            .map(|rows| {
                let all = &all;
                s.spawn(move || {
                    let mut bad = 0;
                    for a in rows {
                        for b in all {
                            let dp = dtw_alignment(Frames::new(a, 1), Frames::new(b, 1), 6).unwrap().cost;
                            bad += usize::from(dp != exhaustive(a, b));
                        }
                    }
                    bad
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).sum()
    });
    let pairs = all.len() * all.len();
    outcome(mismatches == 0, format!("{mismatches}/{pairs} pairs differ from the exhaustive minimum"))
}

// ---------------------------------------------------------------- stitching

fn max_step(seq: &PoseSequence) -> f64 {
    let mut m: f64 = 0.0;
    for f in 1..seq.frame_count() {
        for k in 0..seq.keypoint_count() {
            m = m.max(distance(seq.point(f - 1, k), seq.point(f, k)));
        }
    }
    m
}

fn distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (f64::from(x) - f64::from(y)).powi(2)).sum::<f64>().sqrt()
}

fn stitching() -> Outcome {
    let dict = toy_dictionary(&ToyConfig::default());
    let clips: Vec<&PoseSequence> = dict.entries().iter().filter(|e| e.spoken_lang == "en").map(|e| &e.pose).collect();
    let mut length_failures = 0;
    let mut nan_outputs = 0;
    let mut seam_failures = Vec::new();
    let mut combinations = 0;
    for n in 1..=5 {
        for k in 0..=8 {
            for start in (0..clips.len()).step_by(3) {
                let parts: Vec<PoseSequence> = (0..n).map(|i| clips[(start + i * 7) % clips.len()].clone()).collect();
                combinations += 1;
                let out = concatenate_stitch(&parts, k).unwrap();
                let total: usize = parts.iter().map(PoseSequence::frame_count).sum();
                length_failures += usize::from(out.frame_count() != total - k * (n - 1));
                nan_outputs += usize::from(out.coords().iter().chain(out.confidences()).any(|v| v.is_nan()));
                for w in parts.windows(2) {
                    let pair = concatenate_stitch(w, k).unwrap();
                    let intra = max_step(&w[0]).max(max_step(&w[1]));
                    let gap = (0..w[0].keypoint_count())
                        .map(|kp| distance(w[0].point(w[0].frame_count() - 1, kp), w[1].point(0, kp)))
                        .fold(0.0, f64::max);
                    let bound = intra.max(gap / (k + 1) as f64) + 1e-6;
                    let seam = w[0].frame_count() - k;
                    let window = seam.saturating_sub(1)..(seam + k + 1).min(pair.frame_count() - 1);
                    let worst = window
                        .flat_map(|f| (0..pair.keypoint_count()).map(move |kp| (f, kp)))
                        .map(|(f, kp)| distance(pair.point(f, kp), pair.point(f + 1, kp)))
                        .fold(0.0, f64::max);
                    if worst > bound {
                        seam_failures.push(format!("k={k}: {worst:.6} > {bound:.6}"));
                    }
                }
            }
        }
    }
    seam_failures.dedup();
    outcome(
        length_failures == 0 && nan_outputs == 0 && seam_failures.is_empty(),
        format!(
            "{combinations} combinations (n<=5, k<=8): {length_failures} length-law failures, {nan_outputs} NaN outputs, \
             {} seam violations{}",
            seam_failures.len(),
            seam_failures.first().map(|s| format!(" (first: {s})")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------- segmentation

fn segmentation() -> Outcome {
    let params = SegmenterParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut tp, mut predicted, mut truth) = (0usize, 0usize, 0usize);
    let mut seed = 0;
    for _ in 0..200 {
        let mut parts = vec![rest_pose(rng.random_range(0..10), TOY_FPS)];
        let mut boundaries = Vec::new();
        let mut offset = parts[0].frame_count();
        for _ in 0..rng.random_range(1..=5) {
            let (clip, active) = toy_clip(seed, TOY_FPS);
            seed += 1;
            boundaries.extend([offset + active.start, offset + active.end]);
            offset += clip.frame_count();
            parts.push(clip);
            let gap = rest_pose(rng.random_range(0..20), TOY_FPS);
            offset += gap.frame_count();
            parts.push(gap);
        }
        parts.retain(|p| !p.is_empty());
        let seq = concat(&parts);
        let found: Vec<usize> = segment_signs(&seq, &params)
            .iter()
            .filter(|s| s.kind == SegmentKind::Sign)
            .flat_map(|s| [s.start, s.end])
            .collect();
        predicted += found.len();
        truth += boundaries.len();
        // one-to-one matching within the tolerance, nearest first
        let mut used = vec![false; found.len()];
        for b in boundaries {
            let best = found
                .iter()
                .enumerate()
                .filter(|&(i, &f)| !used[i] && f.abs_diff(b) <= 3)
                .min_by_key(|&(_, &f)| f.abs_diff(b));
            if let Some((i, _)) = best {
                used[i] = true;
                tp += 1;
            }
        }
    }
    let precision = tp as f64 / predicted.max(1) as f64;
    let recall = tp as f64 / truth.max(1) as f64;
    let f1 = 2.0 * precision * recall / (precision + recall).max(f64::MIN_POSITIVE);
    outcome(
        f1 >= 0.9,
        format!("boundary F1 {f1:.4} at ±3 frames (precision {precision:.4}, recall {recall:.4}, {truth} boundaries; need >= 0.9)"),
    )
}

// ---------------------------------------------------------------- recognition

fn recognition() -> Outcome {
    let dict = toy_dictionary(&ToyConfig::default());
    let index = TemplateIndex::build(&dict, &SegmenterParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut correct, mut total) = (0, 0);
    let mut misses = Vec::new();
    for e in dict.entries().iter().filter(|e| e.spoken_lang == "en") {
        let sigma = 0.01 * mean_shoulder_width(&e.pose, dict.skeleton().left_shoulder, dict.skeleton().right_shoulder).unwrap();
        for _ in 0..4 {
            let factor = rng.random_range(0.8..=1.2);
            let q = add_noise(&time_warp(&e.pose, factor), sigma, &mut rng);
            let r = recognize_segment(&q, &Segment::sign(0, q.frame_count()), &index, DEFAULT_TAU).unwrap();
            total += 1;
            if r.gloss.as_deref() == Some(e.gloss.as_str()) {
                correct += 1;
            } else {
                misses.push(format!("{}->{}@{:.3}", e.gloss, r.nearest, r.distance));
            }
        }
    }
    let impostors = 1000;
    let mut rejected = 0;
    for _ in 0..impostors {
        let len = rng.random_range(20..=45);
        let q = random_walk(len, TOY_FPS, &mut rng);
        let r = recognize_segment(&q, &Segment::sign(0, len), &index, DEFAULT_TAU).unwrap();
        rejected += usize::from(r.is_unknown());
    }
    let accuracy = correct as f64 / total as f64;
    let rejection = rejected as f64 / impostors as f64;
    outcome(
        accuracy >= 0.95 && rejection >= 0.99,
        format!(
            "top-1 {:.2}% over {total} perturbed clips (need >= 95%), impostor rejection {:.2}% over {impostors} \
             (need >= 99%) at tau {DEFAULT_TAU}{}",
            100.0 * accuracy,
            100.0 * rejection,
            if misses.is_empty() { String::new() } else { format!("; misses {}", misses.join(" ")) }
        ),
    )
}

// ---------------------------------------------------------------- round trip

fn toy_pipeline(dict: Dictionary) -> Pipeline {
    let mut pipeline = Pipeline::new(Normalizer::offline());
    pipeline
        .add_dictionary(Arc::new(dict), DEFAULT_CROSSFADE, &SegmenterParams::default(), DEFAULT_TAU)
        .unwrap();
    pipeline
}

/// Longest common subsequence length.
fn lcs(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { row[j + 1].max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

fn round_trip() -> Outcome {
    let dict = toy_dictionary(&ToyConfig::default());
    let entries = dict.len();
    let words: Vec<String> = dict
        .entries()
        .iter()
        .filter(|e| e.spoken_lang == "en")
        .flat_map(|e| e.text_forms.clone())
        .collect();
    let pipeline = toy_pipeline(dict);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut sent, mut recovered) = (0, 0);
    for _ in 0..100 {
        let text: Vec<&str> = (0..rng.random_range(1..=6)).map(|_| words.choose(&mut rng).unwrap().as_str()).collect();
        let request = SpokenToSignedRequest {
            text: text.join(" "),
            spoken_lang: Some("en".into()),
            signed_lang: "asl".into(),
        };
        let forward = pipeline.translate(&request).unwrap();
        let glosses: Vec<String> = forward.sentences.iter().flat_map(|s| s.glosses.clone()).collect();
        let back = pipeline.translate_pose(&forward.pose, "asl", "en").unwrap();
        let heard: Vec<String> = back.recognitions.iter().filter_map(|r| r.gloss.clone()).collect();
        sent += glosses.len();
        recovered += lcs(&glosses, &heard);
    }
    let rate = recovered as f64 / sent as f64;
    outcome(
        rate >= 0.9 && entries >= 50,
        format!("{recovered}/{sent} glosses recovered in order ({:.2}%, need >= 90%) on a {entries}-entry dictionary", 100.0 * rate),
    )
}

// ---------------------------------------------------------------- language identification

fn language_id() -> Outcome {
    let (train, test) = split_train_test(&bundled_corpus());
    let model = NgramLangModel::train(&train, DEFAULT_ALPHA).unwrap();
    let scored: Vec<_> = test.iter().filter(|(_, t)| t.chars().count() >= 40).collect();
    let correct = scored.iter().filter(|(l, t)| model.detect(t).code == *l).count();
    let accuracy = correct as f64 / scored.len().max(1) as f64;
    let languages = model.languages().len();
    outcome(
        accuracy >= 0.95 && languages >= 8,
        format!(
            "{correct}/{} held-out sentences of >= 40 chars ({:.2}%, need >= 95%) across {languages} languages",
            scored.len(),
            100.0 * accuracy
        ),
    )
}

// ---------------------------------------------------------------- offline

fn offline() -> Outcome {
    let before = outbound_requests();
    let dir = tempfile::tempdir().unwrap();
    let manifest = toy_manifest(dir.path(), &ToyConfig::default());
    let server = TestServer::start(&toy_config(&manifest, true));
    let url = server.url("/api/translate/spoken-to-signed");
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_owned());
        }
    };

    let body = post_json(&url, &json!({"text": "Hello world. Thank you!", "spoken_lang": "en", "signed_lang": "asl"}).to_string());
    let value = body.json();
    check("plain", body.status == 200 && value["sentences"].as_array().is_some_and(|s| s.len() == 2));
    check("offline provenance", value["provenance"][1]["detail"] == "skipped (offline)");
    let pose = get(&server.url(&format!("/api/pose/{}", value["pose_id"].as_str().unwrap_or(""))));
    check("pose fetch", pose.status == 200 && read_pose(&pose.bytes).is_ok());

    let detected = post_json(&url, &json!({"text": "Guten Morgen, mein Freund!", "signed_lang": "asl"}).to_string()).json();
    check("detection", detected["spoken_lang"] == "de");
    check("empty text", post_json(&url, &json!({"text": "", "signed_lang": "asl"}).to_string()).status == 422);
    let unsupported = post_json(&url, &json!({"text": "hi", "spoken_lang": "fr", "signed_lang": "asl"}).to_string());
    check("unsupported pair", unsupported.status == 404 && unsupported.json()["supported_pairs"].is_array());
    check("languages", get(&server.url("/api/languages")).status == 200);
    let events = stream(&server, &[("text", "hello world"), ("spoken_lang", "en"), ("signed_lang", "asl")]);
    check("stream", events.last().is_some_and(|(name, _)| name == "done"));

    let mut violating = toy_config(&manifest, true);
    violating.normalization.enabled = true;
    violating.normalization.endpoint = Some("https://normalize.example.com/v1".into());
    let rejected_remote = matches!(AppState::from_config(&violating), Err(StartupError::Config(_)));
    violating.normalization.endpoint = Some("http://127.0.0.1:1/normalize".into());
    let rejected_loopback = matches!(AppState::from_config(&violating), Err(StartupError::Config(_)));
    check("offline-violating config", rejected_remote && rejected_loopback);

    drop(server);
    let outbound = outbound_requests() - before;
    outcome(
        failures.is_empty() && outbound == 0,
        format!(
            "spoken-to-signed suite {}, {outbound} outbound requests, offline-violating configs {}",
            if failures.is_empty() { "passed".to_owned() } else { format!("failed: {}", failures.join(", ")) },
            if rejected_remote && rejected_loopback { "rejected" } else { "accepted" }
        ),
    )
}

// ---------------------------------------------------------------- latency

fn latency() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let manifest = toy_manifest(
        dir.path(),
        &ToyConfig {
            glosses: 1000,
            german: false,
            ..ToyConfig::default()
        },
    );
    let mut config: signpipe_service::ServiceConfig = serde_json::from_value(json!({
        "dictionaries": [{"spoken_lang": "en", "signed_lang": "asl", "path": manifest}],
        "normalization": {"enabled": false},
    }))
    .unwrap();
    config.server.port = 0;
    let server = TestServer::start(&config);
    let dict = &server.state.pipeline;
    assert_eq!(dict.pairs().len(), 1);

    let words: Vec<String> = toy_dictionary(&ToyConfig {
        glosses: 1000,
        german: false,
        ..ToyConfig::default()
    })
    .entries()
    .iter()
    .skip(60)
    .map(|e| e.text_forms[0].clone())
    .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut sentence = String::new();
    while sentence.len() < 100 {
        sentence.push_str(words.choose(&mut rng).unwrap());
        sentence.push(' ');
    }
    sentence.truncate(99);
    sentence.push('.');

    let url = server.url("/api/translate/spoken-to-signed");
    let body = json!({"text": sentence, "spoken_lang": "en", "signed_lang": "asl"}).to_string();
    let mut pose_id = String::new();
    let mut s2s = Vec::new();
    for i in 0..11 {
        let t = Instant::now();
        let reply = post_json(&url, &body);
        let elapsed = t.elapsed();
        assert_eq!(reply.status, 200);
        pose_id = reply.json()["pose_id"].as_str().unwrap().to_owned();
        if i > 0 {
            s2s.push(elapsed);
        }
    }

    let pose = read_pose(&get(&server.url(&format!("/api/pose/{pose_id}"))).bytes).unwrap();
    let clip = pose.slice(0..300.min(pose.frame_count()));
    assert_eq!(clip.frame_count(), 300, "the translated sentence yields at least 300 frames");
    let bytes = write_pose(&clip).unwrap();
    let sts_url = server.url("/api/translate/signed-to-spoken?spoken_lang=en&signed_lang=asl");
    let mut sts = Vec::new();
    for _ in 0..5 {
        let t = Instant::now();
        let reply = post_bytes(&sts_url, &bytes);
        sts.push(t.elapsed());
        assert_eq!(reply.status, 200);
    }
    let s2s_max = s2s.iter().max().unwrap().as_secs_f64() * 1e3;
    let s2s_median = {
        s2s.sort();
        s2s[s2s.len() / 2].as_secs_f64() * 1e3
    };
    let sts_max = sts.iter().max().unwrap().as_secs_f64() * 1e3;
    outcome(
        s2s_max < 200.0 && sts_max < 1000.0,
        format!(
            "spoken-to-signed {}-char sentence, 1000 entries: median {s2s_median:.1} ms, max {s2s_max:.1} ms (limit 200 ms); \
             signed-to-spoken 300 frames: max {sts_max:.1} ms (limit 1000 ms)",
            sentence.chars().count()
        ),
    )
}
