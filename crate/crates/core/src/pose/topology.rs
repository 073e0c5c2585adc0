//! Default keypoint topology and reference skeleton.

use serde::{Deserialize, Serialize};

use super::{Component, PoseHeader};

pub const BODY: &str = "body";
pub const LEFT_HAND: &str = "left_hand";
pub const RIGHT_HAND: &str = "right_hand";

pub const BODY_KEYPOINTS: [&str; 9] = [
    "nose",
    "neck",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "mid_hip",
];

pub const HAND_KEYPOINTS: [&str; 21] = [
    "wrist",
    "thumb_cmc",
    "thumb_mcp",
    "thumb_ip",
    "thumb_tip",
    "index_mcp",
    "index_pip",
    "index_dip",
    "index_tip",
    "middle_mcp",
    "middle_pip",
    "middle_dip",
    "middle_tip",
    "ring_mcp",
    "ring_pip",
    "ring_dip",
    "ring_tip",
    "pinky_mcp",
    "pinky_pip",
    "pinky_dip",
    "pinky_tip",
];

const BODY_EDGES: [(u16, u16); 8] = [(0, 1), (1, 2), (1, 3), (2, 4), (4, 6), (3, 5), (5, 7), (1, 8)];

const HAND_EDGES: [(u16, u16); 21] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 4),
    (0, 5),
    (5, 6),
    (6, 7),
    (7, 8),
    (5, 9),
    (9, 10),
    (10, 11),
    (11, 12),
    (9, 13),
    (13, 14),
    (14, 15),
    (15, 16),
    (13, 17),
    (0, 17),
    (17, 18),
    (18, 19),
    (19, 20),
];

/// Global index of the body neck keypoint in the default topology.
pub const NECK: usize = 1;
pub const LEFT_SHOULDER: usize = 2;
pub const RIGHT_SHOULDER: usize = 3;

/// Body (9 keypoints) plus two 21-keypoint hands, 2-D.
pub fn default_header(fps: f32) -> PoseHeader {
    let body = BODY_KEYPOINTS.len() as u16;
    let hand = HAND_KEYPOINTS.len() as u16;
    let mut edges: Vec<(u16, u16)> = BODY_EDGES.to_vec();
    for offset in [body, body + hand] {
        edges.extend(HAND_EDGES.iter().map(|&(a, b)| (a + offset, b + offset)));
    }
    PoseHeader::new(
        fps,
        2,
        vec![
            Component::new(BODY, BODY_KEYPOINTS),
            Component::new(LEFT_HAND, HAND_KEYPOINTS),
            Component::new(RIGHT_HAND, HAND_KEYPOINTS),
        ],
        edges,
    )
    .expect("default topology is valid")
}

/// A bone of the reference skeleton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bone {
    pub from: u16,
    pub to: u16,
    pub length: f64,
}

/// The "same person" every output is normalized onto.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonSpec {
    pub root: usize,
    pub left_shoulder: usize,
    pub right_shoulder: usize,
    pub shoulder_width: f64,
    #[serde(default)]
    pub bones: Vec<Bone>,
}

/// Problems found by [`SkeletonSpec::check`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SkeletonError {
    #[error("reference shoulder width must be positive, got {0}")]
    ShoulderWidth(f64),
    #[error("{role} index {index} is outside 0..{keypoints}")]
    IndexOutOfRange { role: &'static str, index: usize, keypoints: usize },
    #[error("bone ({0}, {1}) has non-positive length {2}")]
    BoneLength(u16, u16, f64),
    #[error("bone ({0}, {1}) is not an edge of the pose header")]
    BoneNotAnEdge(u16, u16),
}

impl SkeletonSpec {
    /// Validates the spec against a header layout.
    pub fn check(&self, header: &PoseHeader) -> Result<(), SkeletonError> {
        if !(self.shoulder_width.is_finite() && self.shoulder_width > 0.0) {
            return Err(SkeletonError::ShoulderWidth(self.shoulder_width));
        }
        let k = header.keypoint_count();
        for (role, index) in [
            ("root", self.root),
            ("left_shoulder", self.left_shoulder),
            ("right_shoulder", self.right_shoulder),
        ] {
            if index >= k {
                return Err(SkeletonError::IndexOutOfRange { role, index, keypoints: k });
            }
        }
        for bone in &self.bones {
            if !(bone.length.is_finite() && bone.length > 0.0) {
                return Err(SkeletonError::BoneLength(bone.from, bone.to, bone.length));
            }
            let covered = header
                .edges()
                .iter()
                .any(|&(a, b)| (a, b) == (bone.from, bone.to) || (b, a) == (bone.from, bone.to));
            if !covered {
                return Err(SkeletonError::BoneNotAnEdge(bone.from, bone.to));
            }
        }
        Ok(())
    }

    /// Root at the neck and shoulders located by name; no bone map.
    pub fn for_header(header: &PoseHeader, shoulder_width: f64) -> Option<Self> {
        Some(Self {
            root: header.keypoint_index(BODY, "neck")?,
            left_shoulder: header.keypoint_index(BODY, "left_shoulder")?,
            right_shoulder: header.keypoint_index(BODY, "right_shoulder")?,
            shoulder_width,
            bones: Vec::new(),
        })
    }
}

/// Reference skeleton for [`default_header`]: unit shoulder width.
pub fn default_skeleton() -> SkeletonSpec {
    let lengths = [0.35, 0.5, 0.5, 0.7, 0.65, 0.7, 0.65, 1.6];
    SkeletonSpec {
        root: NECK,
        left_shoulder: LEFT_SHOULDER,
        right_shoulder: RIGHT_SHOULDER,
        shoulder_width: 1.0,
        bones: BODY_EDGES
            .iter()
            .zip(lengths)
            .map(|(&(from, to), length)| Bone { from, to, length })
            .collect(),
    }
}
