//! Energy-hysteresis sign segmentation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pose::topology::{LEFT_HAND, RIGHT_HAND};
use crate::pose::{mean_shoulder_width, motion_energy, PoseSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SegmentKind {
    Sign,
    PhraseBoundary,
}

/// Frames `start..end` of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn sign(start: usize, end: usize) -> Self {
        Self {
            start,
            end,
            kind: SegmentKind::Sign,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("thresholds must satisfy theta_high > theta_low > 0 (got {high}, {low})")]
    Thresholds { high: f64, low: f64 },
    #[error("{0} must be at least 1")]
    Zero(&'static str),
}

/// Thresholds are in shoulder widths per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmenterParams {
    pub theta_high: f64,
    pub theta_low: f64,
    pub min_sign_frames: usize,
    pub min_gap_frames: usize,
    pub phrase_gap_frames: usize,
    /// Centered moving-average window.
    pub smoothing: usize,
}

impl Default for SegmenterParams {
    fn default() -> Self {
        Self {
            theta_high: 0.02,
            theta_low: 0.008,
            min_sign_frames: 5,
            min_gap_frames: 3,
            phrase_gap_frames: 15,
            smoothing: 5,
        }
    }
}

impl SegmenterParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(self.theta_high > self.theta_low && self.theta_low > 0.0) {
            return Err(ParamsError::Thresholds {
                high: self.theta_high,
                low: self.theta_low,
            });
        }
        for (name, v) in [
            ("min_sign_frames", self.min_sign_frames),
            ("min_gap_frames", self.min_gap_frames),
            ("phrase_gap_frames", self.phrase_gap_frames),
            ("smoothing", self.smoothing),
        ] {
            if v == 0 {
                return Err(ParamsError::Zero(name));
            }
        }
        Ok(())
    }
}

/// Centered moving average; the window shrinks at the edges.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + window - half).min(values.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Smoothed hand motion energy in shoulder widths per frame.
///
/// Sequences without hand components fall back to all components.
pub fn hand_energy(seq: &PoseSequence, window: usize) -> Vec<f64> {
    let header = seq.header();
    let hands: Vec<&str> = [LEFT_HAND, RIGHT_HAND]
        .into_iter()
        .filter(|h| header.component_range(h).is_some())
        .collect();
    let names: Vec<&str> = if hands.is_empty() {
        header.components().iter().map(|c| c.name.as_str()).collect()
    } else {
        hands
    };
    let raw = motion_energy(seq, &names).expect("component names come from the header");
    let scale = shoulder_scale(seq);
    let scaled: Vec<f64> = raw.iter().map(|e| e / scale).collect();
    smooth(&scaled, window.max(1))
}

/// Mean shoulder width found by keypoint name, or 1 when unavailable.
pub(crate) fn shoulder_scale(seq: &PoseSequence) -> f64 {
    let header = seq.header();
    let body = crate::pose::topology::BODY;
    match (
        header.keypoint_index(body, "left_shoulder"),
        header.keypoint_index(body, "right_shoulder"),
    ) {
        (Some(l), Some(r)) => mean_shoulder_width(seq, l, r).filter(|w| *w > 1e-9).unwrap_or(1.0),
        _ => 1.0,
    }
}

/// Splits a sequence into signs and phrase boundaries.
///
/// A sign opens when the smoothed energy exceeds `theta_high`; its start is
/// moved back over the preceding frames that are still above `theta_low`. It
/// closes after `min_gap_frames` consecutive frames below `theta_low`, ending
/// at the first of them. Signs shorter than `min_sign_frames` are dropped, and
/// rest gaps of at least `phrase_gap_frames` between two signs become
/// phrase-boundary segments.
pub fn segment_signs(seq: &PoseSequence, params: &SegmenterParams) -> Vec<Segment> {
    if seq.frame_count() < 2 {
        return Vec::new();
    }
    segment_energy(&hand_energy(seq, params.smoothing), params)
}

/// Segmentation over an already computed, smoothed energy series.
pub fn segment_energy(energy: &[f64], params: &SegmenterParams) -> Vec<Segment> {
    let mut signs = Vec::new();
    let mut open: Option<usize> = None;
    let mut low_run_start: Option<usize> = None;
    let mut last_end = 0;
    for (t, &e) in energy.iter().enumerate() {
        match open {
            None => {
                if e > params.theta_high {
                    let mut start = t;
                    while start > last_end && energy[start - 1] >= params.theta_low {
                        start -= 1;
                    }
                    open = Some(start);
                    low_run_start = None;
                }
            }
            Some(start) => {
                if e < params.theta_low {
                    let run = *low_run_start.get_or_insert(t);
                    if t + 1 - run >= params.min_gap_frames {
                        signs.push(Segment::sign(start, run));
                        last_end = run;
                        open = None;
                        low_run_start = None;
                    }
                } else {
                    low_run_start = None;
                }
            }
        }
    }
    if let Some(start) = open {
        signs.push(Segment::sign(start, low_run_start.unwrap_or(energy.len())));
    }
    signs.retain(|s| s.len() >= params.min_sign_frames);
    let mut out = Vec::with_capacity(signs.len() * 2);
    for (i, sign) in signs.iter().enumerate() {
        if i > 0 {
            let prev_end = signs[i - 1].end;
            if sign.start - prev_end >= params.phrase_gap_frames {
                out.push(Segment {
                    start: prev_end,
                    end: sign.start,
                    kind: SegmentKind::PhraseBoundary,
                });
            }
        }
        out.push(*sign);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(parts: &[(usize, f64)]) -> Vec<f64> {
        parts.iter().flat_map(|&(n, v)| std::iter::repeat_n(v, n)).collect()
    }

    #[test]
    fn smoothing_window() {
        assert_eq!(smooth(&[0.0, 0.0, 5.0, 0.0, 0.0], 5), [5.0 / 3.0, 1.25, 1.0, 1.25, 5.0 / 3.0]);
        assert_eq!(smooth(&[1.0, 2.0], 1), [1.0, 2.0]);
    }

    #[test]
    fn hysteresis_on_raw_energy() {
        let p = SegmenterParams::default();
        let e = series(&[(20, 0.0), (30, 0.05), (20, 0.0)]);
        assert_eq!(segment_energy(&e, &p), [Segment::sign(20, 50)]);
        // dips shorter than min_gap do not close the sign
        let e = series(&[(5, 0.0), (10, 0.05), (2, 0.0), (10, 0.05), (5, 0.0)]);
        assert_eq!(segment_energy(&e, &p), [Segment::sign(5, 27)]);
        // start backtracks over the ramp above theta_low
        let e = series(&[(5, 0.0), (3, 0.01), (10, 0.05), (5, 0.0)]);
        assert_eq!(segment_energy(&e, &p), [Segment::sign(5, 18)]);
        // below theta_high never opens
        assert!(segment_energy(&series(&[(40, 0.015)]), &p).is_empty());
    }

    #[test]
    fn short_signs_dropped_and_phrase_gaps() {
        let p = SegmenterParams::default();
        let e = series(&[(5, 0.0), (3, 0.05), (10, 0.0)]);
        assert!(segment_energy(&e, &p).is_empty());
        let e = series(&[(5, 0.0), (10, 0.05), (20, 0.0), (10, 0.05), (5, 0.0)]);
        let segs = segment_energy(&e, &p);
        let kinds: Vec<SegmentKind> = segs.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, [SegmentKind::Sign, SegmentKind::PhraseBoundary, SegmentKind::Sign]);
        assert_eq!((segs[1].start, segs[1].end), (15, 35));
        let e = series(&[(5, 0.0), (10, 0.05), (10, 0.0), (10, 0.05), (5, 0.0)]);
        assert_eq!(segment_energy(&e, &p).len(), 2);
        // unterminated sign runs to the end
        assert_eq!(segment_energy(&series(&[(3, 0.0), (10, 0.05)]), &p), [Segment::sign(3, 13)]);
    }

    #[test]
    fn validation() {
        assert!(SegmenterParams::default().validate().is_ok());
        let bad = SegmenterParams {
            theta_low: 0.03,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SegmenterParams {
            smoothing: 0,
            ..Default::default()
        };
        assert_eq!(bad.validate(), Err(ParamsError::Zero("smoothing")));
    }
}
