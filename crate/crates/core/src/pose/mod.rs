//! Pose sequences: the keypoint tensor shared by both translation directions.
//!
//! Coordinates and confidences are stored as `f32` (the on-disk precision) so
//! that decoding and re-encoding a file is bit-exact. All geometry in
//! [`ops`] is computed in `f64`.

pub mod format;
pub mod ops;
pub mod topology;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{read_pose, write_pose, FormatError};
pub use ops::{
    concatenate_stitch, mean_shoulder_width, motion_energy, normalize_skeleton, resample, shoulder_widths, NormalizedPose,
    OpError,
};
pub use topology::{default_header, default_skeleton, SkeletonSpec};

/// Invariant violations on pose headers and sequences.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoseError {
    #[error("fps must be a positive finite number, got {0}")]
    InvalidFps(f32),
    #[error("dims must be 2 or 3, got {0}")]
    InvalidDims(u8),
    #[error("header must contain at least one component")]
    NoComponents,
    #[error("duplicate component name {0:?}")]
    DuplicateComponent(String),
    #[error("component {0:?} has no keypoints")]
    EmptyComponent(String),
    #[error("duplicate keypoint {keypoint:?} in component {component:?}")]
    DuplicateKeypoint { component: String, keypoint: String },
    #[error("edge ({0}, {1}) references a keypoint outside 0..{2}")]
    EdgeOutOfRange(u16, u16, usize),
    #[error("coords hold {actual} values, expected {expected} (frames x keypoints x dims)")]
    CoordLength { expected: usize, actual: usize },
    #[error("confidence holds {actual} values, expected {expected} (frames x keypoints)")]
    ConfidenceLength { expected: usize, actual: usize },
    #[error("confidence {value} at frame {frame}, keypoint {keypoint} is outside [0, 1]")]
    ConfidenceOutOfRange { frame: usize, keypoint: usize, value: f32 },
    #[error("non-finite coordinate at frame {frame}, keypoint {keypoint} with confidence > 0")]
    NonFiniteCoord { frame: usize, keypoint: usize },
}

/// A named group of keypoints (body, left hand, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub keypoints: Vec<String>,
}

impl Component {
    pub fn new(name: impl Into<String>, keypoints: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            name: name.into(),
            keypoints: keypoints.into_iter().map(Into::into).collect(),
        }
    }
}

/// Frame rate, component layout and rendering edges of a pose sequence.
///
/// Instances are validated on construction; the fields are read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseHeader {
    fps: f32,
    dims: u8,
    components: Vec<Component>,
    edges: Vec<(u16, u16)>,
    keypoint_count: usize,
}

impl PoseHeader {
    pub fn new(
        fps: f32,
        dims: u8,
        components: Vec<Component>,
        edges: Vec<(u16, u16)>,
    ) -> Result<Self, PoseError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(PoseError::InvalidFps(fps));
        }
        if dims != 2 && dims != 3 {
            return Err(PoseError::InvalidDims(dims));
        }
        if components.is_empty() {
            return Err(PoseError::NoComponents);
        }
        let mut names = HashSet::new();
        for component in &components {
            if !names.insert(component.name.as_str()) {
                return Err(PoseError::DuplicateComponent(component.name.clone()));
            }
            if component.keypoints.is_empty() {
                return Err(PoseError::EmptyComponent(component.name.clone()));
            }
            let mut keypoints = HashSet::new();
            for keypoint in &component.keypoints {
                if !keypoints.insert(keypoint.as_str()) {
                    return Err(PoseError::DuplicateKeypoint {
                        component: component.name.clone(),
                        keypoint: keypoint.clone(),
                    });
                }
            }
        }
        let keypoint_count = components.iter().map(|c| c.keypoints.len()).sum();
        for &(a, b) in &edges {
            if usize::from(a) >= keypoint_count || usize::from(b) >= keypoint_count {
                return Err(PoseError::EdgeOutOfRange(a, b, keypoint_count));
            }
        }
        Ok(Self {
            fps,
            dims,
            components,
            edges,
            keypoint_count,
        })
    }

    pub fn fps(&self) -> f32 {
        self.fps
    }

    pub fn dims(&self) -> usize {
        usize::from(self.dims)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn edges(&self) -> &[(u16, u16)] {
        &self.edges
    }

    /// Total keypoint count K across all components.
    pub fn keypoint_count(&self) -> usize {
        self.keypoint_count
    }

    /// Same header with a different frame rate.
    pub fn with_fps(&self, fps: f32) -> Result<Self, PoseError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(PoseError::InvalidFps(fps));
        }
        Ok(Self { fps, ..self.clone() })
    }

    /// Global keypoint index range of a component.
    pub fn component_range(&self, name: &str) -> Option<std::ops::Range<usize>> {
        let mut start = 0;
        for component in &self.components {
            let end = start + component.keypoints.len();
            if component.name == name {
                return Some(start..end);
            }
            start = end;
        }
        None
    }

    /// Global index of `component.keypoint`.
    pub fn keypoint_index(&self, component: &str, keypoint: &str) -> Option<usize> {
        let range = self.component_range(component)?;
        let comp = self.components.iter().find(|c| c.name == component)?;
        comp.keypoints
            .iter()
            .position(|k| k == keypoint)
            .map(|i| range.start + i)
    }

    /// Component name owning a global keypoint index.
    pub fn component_of(&self, keypoint: usize) -> Option<&str> {
        let mut start = 0;
        for component in &self.components {
            start += component.keypoints.len();
            if keypoint < start {
                return Some(&component.name);
            }
        }
        None
    }

    /// True when both headers describe the same keypoint layout (fps may differ).
    pub fn same_layout(&self, other: &PoseHeader) -> bool {
        self.dims == other.dims && self.components == other.components && self.edges == other.edges
    }
}

/// A timed F x K x D keypoint tensor with per-keypoint confidences.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    header: PoseHeader,
    frames: usize,
    coords: Vec<f32>,
    confidence: Vec<f32>,
}

impl PoseSequence {
    /// Builds a sequence, checking every type invariant.
    pub fn new(header: PoseHeader, coords: Vec<f32>, confidence: Vec<f32>) -> Result<Self, PoseError> {
        let k = header.keypoint_count();
        let d = header.dims();
        let frames = confidence.len() / k;
        if confidence.len() != frames * k {
            return Err(PoseError::ConfidenceLength {
                expected: (frames + 1) * k,
                actual: confidence.len(),
            });
        }
        if coords.len() != frames * k * d {
            return Err(PoseError::CoordLength {
                expected: frames * k * d,
                actual: coords.len(),
            });
        }
        let seq = Self {
            header,
            frames,
            coords,
            confidence,
        };
        seq.check_values()?;
        Ok(seq)
    }

    /// A zero-frame sequence with the given layout.
    pub fn empty(header: PoseHeader) -> Self {
        Self {
            header,
            frames: 0,
            coords: Vec::new(),
            confidence: Vec::new(),
        }
    }

    /// Construction from values produced by operations that already uphold the
    /// invariants. Debug builds still verify them.
    pub(crate) fn from_parts(header: PoseHeader, frames: usize, coords: Vec<f32>, confidence: Vec<f32>) -> Self {
        let seq = Self {
            header,
            frames,
            coords,
            confidence,
        };
        debug_assert_eq!(seq.coords.len(), frames * seq.header.keypoint_count() * seq.header.dims());
        debug_assert_eq!(seq.confidence.len(), frames * seq.header.keypoint_count());
        debug_assert!(seq.check_values().is_ok(), "{:?}", seq.check_values());
        seq
    }

    fn check_values(&self) -> Result<(), PoseError> {
        let k = self.header.keypoint_count();
        let d = self.header.dims();
        for (i, &c) in self.confidence.iter().enumerate() {
            let (frame, keypoint) = (i / k, i % k);
            if !(0.0..=1.0).contains(&c) {
                return Err(PoseError::ConfidenceOutOfRange { frame, keypoint, value: c });
            }
            if c > 0.0 && self.coords[i * d..(i + 1) * d].iter().any(|v| !v.is_finite()) {
                return Err(PoseError::NonFiniteCoord { frame, keypoint });
            }
        }
        Ok(())
    }

    pub fn header(&self) -> &PoseHeader {
        &self.header
    }

    pub fn frame_count(&self) -> usize {
        self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.frames == 0
    }

    pub fn keypoint_count(&self) -> usize {
        self.header.keypoint_count()
    }

    pub fn dims(&self) -> usize {
        self.header.dims()
    }

    /// Raw coordinate buffer in frame-major, keypoint, dim order.
    pub fn coords(&self) -> &[f32] {
        &self.coords
    }

    /// Raw confidence buffer in frame-major order.
    pub fn confidences(&self) -> &[f32] {
        &self.confidence
    }

    pub fn point(&self, frame: usize, keypoint: usize) -> &[f32] {
        let d = self.dims();
        let start = (frame * self.keypoint_count() + keypoint) * d;
        &self.coords[start..start + d]
    }

    pub fn confidence(&self, frame: usize, keypoint: usize) -> f32 {
        self.confidence[frame * self.keypoint_count() + keypoint]
    }

    /// Duration in seconds between the first and last frame.
    pub fn duration(&self) -> f64 {
        if self.frames < 2 {
            0.0
        } else {
            (self.frames - 1) as f64 / f64::from(self.header.fps())
        }
    }

    /// Frames `range` as a new sequence with the same header.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        let k = self.keypoint_count();
        let d = self.dims();
        let start = range.start.min(self.frames);
        let end = range.end.clamp(start, self.frames);
        Self::from_parts(
            self.header.clone(),
            end - start,
            self.coords[start * k * d..end * k * d].to_vec(),
            self.confidence[start * k..end * k].to_vec(),
        )
    }

    /// Same data under a new frame rate (a pure relabelling of time).
    pub fn with_fps(&self, fps: f32) -> Result<Self, PoseError> {
        Ok(Self {
            header: self.header.with_fps(fps)?,
            ..self.clone()
        })
    }

    /// Applies `f` to every coordinate vector, keeping confidences.
    pub fn map_points(&self, mut f: impl FnMut(usize, usize, &mut [f32])) -> Result<Self, PoseError> {
        let k = self.keypoint_count();
        let d = self.dims();
        let mut coords = self.coords.clone();
        for (i, chunk) in coords.chunks_mut(d).enumerate() {
            f(i / k, i % k, chunk);
        }
        Self::new(self.header.clone(), coords, self.confidence.clone())
    }
}
