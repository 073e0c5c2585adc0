//! Procedural toy data: a signing avatar, a toy dictionary, perturbations and
//! random-walk impostor motion.
//!
//! Poses are generated in a body frame (neck at the origin, shoulder width 1,
//! y pointing down) and mapped into varied "image" coordinates for the raw
//! dictionary clips, so loading exercises resampling and normalization.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::pose::topology::{BODY_KEYPOINTS, HAND_KEYPOINTS};
use crate::pose::{self, default_header, default_skeleton, PoseSequence};
use crate::s2s::{Dictionary, DictionaryError, Manifest, ManifestEntry, RawEntry};
use crate::signwriting::{self, BoxMarker, PlacedSymbol, Sign, SymbolKey};

/// Frames of rest held at both ends of every generated clip.
pub const REST_HOLD_FRAMES: usize = 8;
/// Frame rate of the toy dictionary.
pub const TOY_FPS: f32 = 25.0;
pub const TOY_SIGNED_LANG: &str = "asl";

type P = [f64; 2];

fn lerp(a: P, b: P, t: f64) -> P {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]
}

fn dist(a: P, b: P) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Hand configuration; `curl` is per finger from thumb to pinky.
#[derive(Debug, Clone, Copy, PartialEq)]
struct HandShape {
    curl: [f64; 5],
    spread: f64,
    /// Foreshortening of the palm width, in [0, 1.2] radians.
    roll: f64,
    /// Direction from wrist towards the fingers.
    heading: f64,
}

impl HandShape {
    fn rest() -> Self {
        Self {
            curl: [0.3; 5],
            spread: 0.05,
            roll: 0.3,
            heading: FRAC_PI_2,
        }
    }

    fn random(rng: &mut impl Rng) -> Self {
        let mut curl = [0.0; 5];
        for c in &mut curl {
            // mostly open or mostly closed fingers
            *c = if rng.random_bool(0.5) {
                rng.random_range(0.0..0.25)
            } else {
                rng.random_range(0.65..1.0)
            };
        }
        Self {
            curl,
            spread: rng.random_range(0.0..0.35),
            roll: rng.random_range(0.0..1.2),
            heading: rng.random_range(-PI..0.0),
        }
    }

    fn lerp(&self, other: &Self, t: f64) -> Self {
        let mut curl = [0.0; 5];
        for (i, c) in curl.iter_mut().enumerate() {
            *c = self.curl[i] + (other.curl[i] - self.curl[i]) * t;
        }
        Self {
            curl,
            spread: self.spread + (other.spread - self.spread) * t,
            roll: self.roll + (other.roll - self.roll) * t,
            heading: self.heading + (other.heading - self.heading) * t,
        }
    }

    /// 21 keypoints around `wrist`; `mirror` flips the thumb side.
    fn keypoints(&self, wrist: P, mirror: bool) -> [P; 21] {
        let side = if mirror { -1.0 } else { 1.0 };
        let (s, c) = self.heading.sin_cos();
        let width = self.roll.cos();
        let to_world = |u: f64, v: f64| -> P {
            let v = v * width * side;
            [wrist[0] + u * c - v * s, wrist[1] + u * s + v * c]
        };
        let mut out = [wrist; 21];
        // (base u, base v, segment lengths, spread direction)
        let fingers: [(f64, f64, [f64; 3], f64); 5] = [
            (0.04, 0.06, [0.06, 0.05, 0.04], 0.9),
            (0.17, 0.05, [0.07, 0.045, 0.035], 0.15),
            (0.18, 0.015, [0.075, 0.05, 0.035], 0.0),
            (0.17, -0.02, [0.07, 0.045, 0.035], -0.15),
            (0.15, -0.05, [0.055, 0.035, 0.03], -0.3),
        ];
        for (f, &(bu, bv, lengths, dir)) in fingers.iter().enumerate() {
            let first = 1 + 4 * f;
            out[first] = to_world(bu, bv);
            let angle = dir + dir.signum() * self.spread;
            let (mut u, mut v) = (bu, bv);
            let mut bend = 0.0;
            for (j, len) in lengths.iter().enumerate() {
                if f == 0 {
                    // thumb folds across the palm in the image plane
                    let a = angle - self.curl[0] * 1.4 * (j + 1) as f64 / 3.0;
                    u += len * a.cos();
                    v += len * a.sin();
                } else {
                    // fingers curl out of the image plane and appear shorter
                    bend += self.curl[f] * [1.0, 1.1, 0.8][j] * FRAC_PI_2;
                    u += len * bend.cos() * angle.cos();
                    v += len * bend.cos() * angle.sin();
                }
                out[first + 1 + j] = to_world(u, v);
            }
        }
        out
    }
}

const NOSE: P = [0.0, -0.35];
const NECK: P = [0.0, 0.0];
const RIGHT_SHOULDER: P = [-0.5, 0.0];
const LEFT_SHOULDER: P = [0.5, 0.0];
const MID_HIP: P = [0.0, 1.6];
const UPPER_ARM: f64 = 0.7;
const FOREARM: f64 = 0.65;
const REST_RIGHT_WRIST: P = [-0.45, 1.25];

fn mirror(p: P) -> P {
    [-p[0], p[1]]
}

/// Elbow by two-link inverse kinematics, bending away from the body.
fn elbow(shoulder: P, wrist: P, outward: f64) -> P {
    let d = dist(shoulder, wrist).clamp(1e-6, UPPER_ARM + FOREARM - 1e-6);
    let a = (UPPER_ARM * UPPER_ARM - FOREARM * FOREARM + d * d) / (2.0 * d);
    let h = (UPPER_ARM * UPPER_ARM - a * a).max(0.0).sqrt();
    let dir = [(wrist[0] - shoulder[0]) / d, (wrist[1] - shoulder[1]) / d];
    let mid = [shoulder[0] + a * dir[0], shoulder[1] + a * dir[1]];
    let normal = [-dir[1], dir[0]];
    let sign = if normal[0] * outward >= 0.0 { 1.0 } else { -1.0 };
    [mid[0] + sign * h * normal[0], mid[1] + sign * h * normal[1]]
}

fn reach(p: P, shoulder: P) -> P {
    let max = UPPER_ARM + FOREARM - 0.05;
    let d = dist(p, shoulder);
    if d <= max {
        p
    } else {
        lerp(shoulder, p, max / d)
    }
}

/// One frame of the avatar in body coordinates.
#[derive(Debug, Clone, Copy)]
struct Frame {
    right_wrist: P,
    right_hand: HandShape,
    left_wrist: P,
    left_hand: HandShape,
}

impl Frame {
    fn rest() -> Self {
        Self {
            right_wrist: REST_RIGHT_WRIST,
            right_hand: HandShape::rest(),
            left_wrist: mirror(REST_RIGHT_WRIST),
            left_hand: mirrored(&HandShape::rest()),
        }
    }

    /// Keypoints in default-topology order.
    fn keypoints(&self) -> Vec<P> {
        let rw = reach(self.right_wrist, RIGHT_SHOULDER);
        let lw = reach(self.left_wrist, LEFT_SHOULDER);
        let mut out = vec![
            NOSE,
            NECK,
            LEFT_SHOULDER,
            RIGHT_SHOULDER,
            elbow(LEFT_SHOULDER, lw, 1.0),
            elbow(RIGHT_SHOULDER, rw, -1.0),
            lw,
            rw,
            MID_HIP,
        ];
        debug_assert_eq!(out.len(), BODY_KEYPOINTS.len());
        out.extend(self.left_hand.keypoints(lw, true));
        out.extend(self.right_hand.keypoints(rw, false));
        debug_assert_eq!(out.len(), BODY_KEYPOINTS.len() + 2 * HAND_KEYPOINTS.len());
        out
    }
}

fn mirrored(shape: &HandShape) -> HandShape {
    HandShape {
        heading: PI - shape.heading,
        ..*shape
    }
}

/// Parameters of one procedural sign.
#[derive(Debug, Clone)]
struct SignSpec {
    two_handed: bool,
    /// Right-wrist waypoints of the movement, starting at the sign location.
    path: Vec<P>,
    start_shape: HandShape,
    end_shape: HandShape,
    /// Shoulder widths per second.
    speed: f64,
}

impl SignSpec {
    fn random(rng: &mut impl Rng) -> Self {
        let location = [rng.random_range(-0.9..0.35), rng.random_range(-0.45..0.75)];
        let mut path = vec![location];
        match rng.random_range(0..4) {
            0 => {
                let r = rng.random_range(0.12..0.25);
                let phase = rng.random_range(0.0..2.0 * PI);
                let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let center = [location[0] - r * phase.cos(), location[1] - r * phase.sin()];
                for i in 1..=10 {
                    let a = phase + dir * 2.0 * PI * i as f64 / 10.0;
                    path.push([center[0] + r * a.cos(), center[1] + r * a.sin()]);
                }
            }
            1 => {
                let a = rng.random_range(0.0..PI);
                let len = rng.random_range(0.18..0.4);
                let other = [location[0] + len * a.cos(), location[1] + len * a.sin()];
                for _ in 0..rng.random_range(1..3) {
                    path.push(other);
                    path.push(location);
                }
            }
            2 => {
                let a = rng.random_range(0.0..2.0 * PI);
                let step = rng.random_range(0.12..0.2);
                let mut p = location;
                for i in 0..4 {
                    let turn = if i % 2 == 0 { 0.8 } else { -0.8 };
                    p = [p[0] + step * (a + turn).cos(), p[1] + step * (a + turn).sin()];
                    path.push(p);
                }
            }
            _ => {
                let a = rng.random_range(0.0..2.0 * PI);
                let len = rng.random_range(0.35..0.6);
                let bend = rng.random_range(-0.5..0.5);
                path.push([location[0] + len * 0.5 * (a + bend).cos(), location[1] + len * 0.5 * (a + bend).sin()]);
                path.push([location[0] + len * a.cos(), location[1] + len * a.sin()]);
            }
        }
        let start_shape = HandShape::random(rng);
        let end_shape = if rng.random_bool(0.4) { HandShape::random(rng) } else { start_shape };
        Self {
            two_handed: rng.random_bool(0.3),
            path,
            start_shape,
            end_shape,
            speed: rng.random_range(1.8..2.6),
        }
    }

    /// Active frames at `fps` (rest holds excluded).
    fn frames(&self, fps: f64) -> Vec<Frame> {
        let rest = Frame::rest();
        let mut points = vec![REST_RIGHT_WRIST];
        points.extend(self.path.iter().copied());
        points.push(REST_RIGHT_WRIST);
        let legs: Vec<f64> = points.windows(2).map(|w| dist(w[0], w[1])).collect();
        let approach = legs[0];
        let total: f64 = legs.iter().sum();
        let retreat = *legs.last().unwrap();
        let pattern = total - approach - retreat;
        let n = ((total / (self.speed / fps)).ceil() as usize).max(2);
        let mut out = Vec::with_capacity(n);
        for i in 1..=n {
            let s = total * i as f64 / n as f64;
            let wrist = point_at(&points, &legs, s);
            let shape = if s <= approach {
                HandShape::rest().lerp(&self.start_shape, s / approach)
            } else if s <= approach + pattern {
                let t = if pattern > 0.0 { (s - approach) / pattern } else { 1.0 };
                self.start_shape.lerp(&self.end_shape, t)
            } else {
                self.end_shape.lerp(&HandShape::rest(), (s - approach - pattern) / retreat)
            };
            let mut frame = Frame {
                right_wrist: wrist,
                right_hand: shape,
                ..rest
            };
            if self.two_handed {
                frame.left_wrist = mirror(wrist);
                frame.left_hand = mirrored(&shape);
            }
            out.push(frame);
        }
        out
    }
}

fn point_at(points: &[P], legs: &[f64], mut s: f64) -> P {
    for (i, &len) in legs.iter().enumerate() {
        if s <= len || i + 1 == legs.len() {
            return lerp(points[i], points[i + 1], if len > 0.0 { (s / len).min(1.0) } else { 1.0 });
        }
        s -= len;
    }
    points[points.len() - 1]
}

/// Image placement of a body-frame pose.
#[derive(Debug, Clone, Copy)]
struct Placement {
    scale: f64,
    offset: P,
}

impl Placement {
    const BODY: Placement = Placement {
        scale: 1.0,
        offset: [0.0, 0.0],
    };

    fn random(rng: &mut impl Rng) -> Self {
        Self {
            scale: rng.random_range(0.18..0.32),
            offset: [rng.random_range(0.4..0.6), rng.random_range(0.25..0.4)],
        }
    }
}

fn to_sequence(frames: &[Frame], fps: f32, place: Placement) -> PoseSequence {
    let header = default_header(fps);
    let k = header.keypoint_count();
    let mut coords = Vec::with_capacity(frames.len() * k * 2);
    for frame in frames {
        for p in frame.keypoints() {
            coords.push((place.offset[0] + place.scale * p[0]) as f32);
            coords.push((place.offset[1] + place.scale * p[1]) as f32);
        }
    }
    PoseSequence::new(header, coords, vec![1.0; frames.len() * k]).expect("generated poses are finite")
}

/// A body-frame clip: rest hold, sign, rest hold.
fn clip(spec: &SignSpec, fps: f32, place: Placement) -> (PoseSequence, std::ops::Range<usize>) {
    let mut frames = vec![Frame::rest(); REST_HOLD_FRAMES];
    let active = spec.frames(f64::from(fps));
    // the last active frame is back at rest; its energy is still non-zero
    let span = REST_HOLD_FRAMES..REST_HOLD_FRAMES + active.len();
    frames.extend(active);
    frames.extend(std::iter::repeat_n(Frame::rest(), REST_HOLD_FRAMES - 1));
    (to_sequence(&frames, fps, place), span)
}

/// `n` frames of the rest pose in body coordinates.
pub fn rest_pose(n: usize, fps: f32) -> PoseSequence {
    to_sequence(&vec![Frame::rest(); n], fps, Placement::BODY)
}

/// A random valid FSW sign built from hand-shape and movement symbols.
pub fn random_fsw(rng: &mut impl Rng) -> String {
    let count = rng.random_range(1..=3);
    let mut symbols = Vec::with_capacity(count);
    for i in 0..count {
        let base = if i == 0 {
            rng.random_range(0x100..=0x204)
        } else {
            rng.random_range(0x205..=0x2f6)
        };
        symbols.push(PlacedSymbol {
            key: SymbolKey::new(base, rng.random_range(0..=5), rng.random_range(0..=15)),
            x: rng.random_range(470..=510),
            y: rng.random_range(460..=510),
        });
    }
    let sign = Sign {
        sort_prefix: symbols.iter().map(|s| s.key).collect(),
        box_marker: BoxMarker::M,
        max_x: symbols.iter().map(|s| s.x).max().unwrap_or(500) + 20,
        max_y: symbols.iter().map(|s| s.y).max().unwrap_or(500) + 25,
        symbols,
    };
    signwriting::serialize_fsw(&[sign]).expect("generated signs are valid")
}

/// Real words in the toy vocabulary: `(gloss, English forms, German forms)`.
pub const TOY_WORDS: &[(&str, &[&str], &[&str])] = &[
    ("HELLO", &["hello", "hi"], &["hallo"]),
    ("WORLD", &["world"], &["welt"]),
    ("THANK-YOU", &["thank you", "thanks"], &["danke"]),
    ("GOOD-MORNING", &["good morning"], &["guten morgen"]),
    ("GOOD", &["good"], &["gut"]),
    ("MORNING", &["morning"], &["morgen"]),
    ("FRIEND", &["friend"], &["freund"]),
    ("CAT", &["cat"], &["katze"]),
    ("DOG", &["dog"], &["hund"]),
    ("HOUSE", &["house"], &["haus"]),
    ("WATER", &["water"], &["wasser"]),
    ("YES", &["yes"], &["ja"]),
    ("NO", &["no"], &["nein"]),
    ("PLEASE", &["please"], &["bitte"]),
    ("SORRY", &["sorry"], &[]),
    ("LOVE", &["love"], &[]),
    ("FAMILY", &["family"], &[]),
    ("MOTHER", &["mother"], &[]),
    ("FATHER", &["father"], &[]),
    ("SCHOOL", &["school"], &[]),
    ("WORK", &["work"], &[]),
    ("BOOK", &["book"], &[]),
    ("NAME", &["name"], &[]),
    ("HELP", &["help"], &[]),
    ("GO", &["go"], &[]),
    ("COME", &["come"], &[]),
    ("SEE", &["see"], &[]),
    ("KNOW", &["know"], &[]),
    ("WANT", &["want"], &[]),
    ("LIKE", &["like"], &[]),
    ("DAY", &["day"], &[]),
    ("NIGHT", &["night"], &[]),
    ("TIME", &["time"], &[]),
    ("HAPPY", &["happy"], &[]),
    ("SAD", &["sad"], &[]),
    ("BIG", &["big"], &[]),
    ("SMALL", &["small"], &[]),
    ("HOME", &["home"], &[]),
    ("CAR", &["car"], &[]),
    ("FOOD", &["food"], &[]),
    ("EAT", &["eat"], &[]),
    ("DRINK", &["drink"], &[]),
    ("PLAY", &["play"], &[]),
    ("LEARN", &["learn"], &[]),
    ("SIGN", &["sign"], &[]),
    ("LANGUAGE", &["language"], &[]),
    ("TEACHER", &["teacher"], &[]),
    ("STUDENT", &["student"], &[]),
    ("TODAY", &["today"], &[]),
    ("TOMORROW", &["tomorrow"], &[]),
    ("QUESTION", &["question"], &[]),
    ("UNDERSTAND", &["understand"], &[]),
    ("AGAIN", &["again"], &[]),
    ("MORE", &["more"], &[]),
    ("I", &["i", "me"], &["ich"]),
    ("YOU", &["you"], &["du"]),
];

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ru", "te", "sa", "no", "vi", "pe", "zu", "da", "ko", "ri", "ma", "fe", "tu", "bo", "li", "ne",
    "sho",
];

/// Pseudo-word number `i`: three syllables, unique for `i < 8000`.
pub fn pseudo_word(i: usize) -> String {
    let n = SYLLABLES.len();
    [i % n, (i / n) % n, (i / n / n) % n].iter().map(|&j| SYLLABLES[j]).collect()
}

#[derive(Debug, Clone)]
pub struct ToyConfig {
    /// Number of distinct glosses; real words come first, then pseudo-words.
    pub glosses: usize,
    pub seed: u64,
    /// Add German forms for the words that have them.
    pub german: bool,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            glosses: TOY_WORDS.len(),
            seed: 7,
            german: true,
        }
    }
}

/// A generated dictionary entry before loading.
#[derive(Debug, Clone)]
pub struct ToyEntry {
    pub raw: RawEntry,
    /// Active (non-rest) frames of the raw clip.
    pub active: std::ops::Range<usize>,
}

/// Raw entries in image coordinates at assorted frame rates.
pub fn toy_entries(config: &ToyConfig) -> Vec<ToyEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let fps_choices = [24.0f32, 25.0, 30.0];
    let mut out = Vec::new();
    for g in 0..config.glosses {
        let (gloss, en, de): (String, Vec<String>, Vec<String>) = match TOY_WORDS.get(g) {
            Some((gloss, en, de)) => (
                gloss.to_string(),
                en.iter().map(|s| s.to_string()).collect(),
                de.iter().map(|s| s.to_string()).collect(),
            ),
            None => {
                let word = pseudo_word(g - TOY_WORDS.len());
                (word.to_uppercase(), vec![word], Vec::new())
            }
        };
        let spec = SignSpec::random(&mut rng);
        let fps = fps_choices[rng.random_range(0..fps_choices.len())];
        let (pose, active) = clip(&spec, fps, Placement::random(&mut rng));
        let fsw = Some(random_fsw(&mut rng));
        let mut push = |lang: &str, forms: Vec<String>| {
            out.push(ToyEntry {
                raw: RawEntry {
                    gloss: gloss.clone(),
                    spoken_lang: lang.to_owned(),
                    text_forms: forms,
                    fsw: fsw.clone(),
                    pose: pose.clone(),
                },
                active: active.clone(),
            })
        };
        push("en", en);
        if config.german && !de.is_empty() {
            push("de", de);
        }
    }
    out
}

fn spoken_langs(config: &ToyConfig) -> Vec<String> {
    if config.german {
        vec!["en".into(), "de".into()]
    } else {
        vec!["en".into()]
    }
}

/// The toy dictionary, built in memory.
pub fn toy_dictionary(config: &ToyConfig) -> Dictionary {
    let raw = toy_entries(config).into_iter().map(|e| e.raw).collect();
    Dictionary::build(TOY_SIGNED_LANG, &spoken_langs(config), TOY_FPS, default_skeleton(), raw)
        .expect("toy entries are valid")
}

/// Writes `manifest.json` and one SPOS file per gloss into `dir`.
pub fn write_toy_dictionary(dir: &Path, config: &ToyConfig) -> Result<PathBuf, DictionaryError> {
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |source: io::Error| DictionaryError::Io { path, source }
    };
    let poses = dir.join("poses");
    std::fs::create_dir_all(&poses).map_err(io_err(&poses))?;
    let mut entries = Vec::new();
    for e in toy_entries(config) {
        let file = PathBuf::from("poses").join(format!("{}.pose", e.raw.gloss.to_lowercase()));
        let path = dir.join(&file);
        if !path.exists() {
            let bytes = pose::write_pose(&e.raw.pose).map_err(|source| DictionaryError::PoseFormat {
                gloss: e.raw.gloss.clone(),
                source,
            })?;
            std::fs::write(&path, bytes).map_err(io_err(&path))?;
        }
        entries.push(ManifestEntry {
            gloss: e.raw.gloss,
            spoken_lang: e.raw.spoken_lang,
            text_forms: e.raw.text_forms,
            fsw: e.raw.fsw,
            pose_file: file,
        });
    }
    let manifest = Manifest {
        signed_lang: TOY_SIGNED_LANG.into(),
        spoken_langs: spoken_langs(config),
        fps: TOY_FPS,
        skeleton: default_skeleton(),
        entries,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json).map_err(io_err(&path))?;
    Ok(path)
}

/// Adds Gaussian noise of standard deviation `sigma` to every confident coordinate.
pub fn add_noise(seq: &PoseSequence, sigma: f64, rng: &mut impl Rng) -> PoseSequence {
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    seq.map_points(|_, _, p| {
        for v in p {
            *v += normal.sample(rng) as f32;
        }
    })
    .expect("noise keeps coordinates finite")
}

/// Plays `seq` `factor` times slower (factor > 1 stretches), keeping its fps.
pub fn time_warp(seq: &PoseSequence, factor: f64) -> PoseSequence {
    let fps = f64::from(seq.header().fps());
    let stretched = pose::resample(seq, fps * factor).expect("warp factor is positive");
    stretched.with_fps(seq.header().fps()).expect("fps is positive")
}

/// Concatenates clips without blending.
pub fn concat(parts: &[PoseSequence]) -> PoseSequence {
    let header = parts[0].header().clone();
    let mut coords = Vec::new();
    let mut conf = Vec::new();
    for p in parts {
        assert!(p.header().same_layout(&header), "layouts must agree");
        coords.extend_from_slice(p.coords());
        conf.extend_from_slice(p.confidences());
    }
    PoseSequence::new(header, coords, conf).expect("parts are valid")
}

/// A random-walk impostor in body coordinates: the dominant wrist wanders
/// from a random point with a drifting heading, the hand shape drifts and
/// every hand keypoint jitters independently.
pub fn random_walk(frames: usize, fps: f32, rng: &mut impl Rng) -> PoseSequence {
    let step = Normal::new(0.0, 1.0).expect("unit normal");
    let speed = rng.random_range(1.8..2.6) / f64::from(fps);
    let mut wrist = [rng.random_range(-0.9..0.35), rng.random_range(-0.45..0.75)];
    let mut heading = rng.random_range(0.0..2.0 * PI);
    let mut shape = HandShape::random(rng);
    let two_handed = rng.random_bool(0.3);
    let mut out = Vec::with_capacity(frames);
    let mut jitter = vec![[0.0f64; 2]; 2 * HAND_KEYPOINTS.len()];
    let mut jitters = Vec::with_capacity(frames);
    for _ in 0..frames {
        heading += 0.5 * step.sample(rng);
        wrist = [wrist[0] + speed * heading.cos(), wrist[1] + speed * heading.sin()];
        wrist = [wrist[0].clamp(-1.1, 0.5), wrist[1].clamp(-0.6, 1.2)];
        for c in &mut shape.curl {
            *c = (*c + 0.08 * step.sample(rng)).clamp(0.0, 1.0);
        }
        shape.heading += 0.1 * step.sample(rng);
        shape.roll = (shape.roll + 0.05 * step.sample(rng)).clamp(0.0, 1.2);
        let mut frame = Frame {
            right_wrist: wrist,
            right_hand: shape,
            ..Frame::rest()
        };
        if two_handed {
            frame.left_wrist = mirror(wrist);
            frame.left_hand = mirrored(&shape);
        }
        out.push(frame);
        for j in &mut jitter {
            j[0] += 0.01 * step.sample(rng);
            j[1] += 0.01 * step.sample(rng);
        }
        jitters.push(jitter.clone());
    }
    let seq = to_sequence(&out, fps, Placement::BODY);
    let body = BODY_KEYPOINTS.len();
    seq.map_points(|f, k, p| {
        if k >= body + HAND_KEYPOINTS.len() || (two_handed && k >= body) {
            let j = jitters[f][k - body];
            p[0] += j[0] as f32;
            p[1] += j[1] as f32;
        }
    })
    .expect("finite")
}

/// A body-frame toy clip with rest holds and its active span; the same
/// procedure used for dictionary entries, for tests that need ground truth.
pub fn toy_clip(seed: u64, fps: f32) -> (PoseSequence, std::ops::Range<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    clip(&SignSpec::random(&mut rng), fps, Placement::BODY)
}
