//! Per-frame feature vectors for recognition.

use thiserror::Error;

use super::segment::shoulder_scale;
use crate::pose::topology::{BODY, LEFT_HAND, RIGHT_HAND};
use crate::pose::PoseSequence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("required keypoint {component}.{keypoint} is absent")]
    MissingKeypoint { component: String, keypoint: String },
    #[error("required component {0} is absent")]
    MissingComponent(String),
}

/// Row-major `frames × dims` feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub dims: usize,
    pub values: Vec<f64>,
}

impl Features {
    pub fn frame_count(&self) -> usize {
        self.values.len().checked_div(self.dims).unwrap_or(0)
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn frames(&self) -> super::dtw::Frames<'_> {
        super::dtw::Frames::new(&self.values, self.dims.max(1))
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Features {
        Features {
            dims: self.dims,
            values: self.values[range.start * self.dims..range.end * self.dims].to_vec(),
        }
    }
}

/// Keypoints used for features: `(index, anchor index)` pairs in output order.
fn layout(seq: &PoseSequence) -> Result<Vec<(usize, usize)>, FeatureError> {
    let header = seq.header();
    let find = |component: &str, keypoint: &str| {
        header
            .keypoint_index(component, keypoint)
            .ok_or_else(|| FeatureError::MissingKeypoint {
                component: component.to_owned(),
                keypoint: keypoint.to_owned(),
            })
    };
    let neck = find(BODY, "neck")?;
    let mut pairs = vec![(find(BODY, "left_wrist")?, neck), (find(BODY, "right_wrist")?, neck)];
    for hand in [LEFT_HAND, RIGHT_HAND] {
        let range = header
            .component_range(hand)
            .ok_or_else(|| FeatureError::MissingComponent(hand.to_owned()))?;
        let wrist = range.start;
        pairs.extend(range.map(|k| (k, wrist)));
    }
    Ok(pairs)
}

/// Body wrists relative to the neck, then every hand keypoint relative to
/// its hand's wrist, in shoulder widths. Unconfident keypoints keep their
/// last confident position (zeros before the first one).
pub fn extract_features(seq: &PoseSequence) -> Result<Features, FeatureError> {
    let pairs = layout(seq)?;
    let d = seq.dims();
    let dims = pairs.len() * d;
    let scale = shoulder_scale(seq);
    let k = seq.keypoint_count();
    let mut held = vec![0.0f64; k * d];
    let mut values = Vec::with_capacity(seq.frame_count() * dims);
    for f in 0..seq.frame_count() {
        for kp in 0..k {
            if seq.confidence(f, kp) > 0.0 {
                for (h, &v) in held[kp * d..(kp + 1) * d].iter_mut().zip(seq.point(f, kp)) {
                    *h = f64::from(v);
                }
            }
        }
        for &(kp, anchor) in &pairs {
            for c in 0..d {
                values.push((held[kp * d + c] - held[anchor * d + c]) / scale);
            }
        }
    }
    Ok(Features { dims, values })
}
