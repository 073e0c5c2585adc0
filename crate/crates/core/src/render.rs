//! Deterministic SVG rendering of pose sequences.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pose::PoseSequence;

/// Fraction of the canvas left empty on every side.
pub const MARGIN: f64 = 0.05;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("frame {frame} out of range for a {frames}-frame sequence")]
    FrameOutOfRange { frame: usize, frames: usize },
    #[error("invalid style: {0}")]
    InvalidStyle(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderStyle {
    pub width: u32,
    pub height: u32,
    pub stroke_width: f64,
    pub joint_radius: f64,
    pub background: String,
    /// Colour per component name; others use `default_color`.
    pub colors: BTreeMap<String, String>,
    pub default_color: String,
    /// Keypoints below this confidence are not drawn.
    pub c_min: f32,
}

impl Default for RenderStyle {
    fn default() -> Self {
        let colors = [("body", "#1f77b4"), ("left_hand", "#d62728"), ("right_hand", "#2ca02c")]
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v.to_owned()))
            .collect();
        Self {
            width: 512,
            height: 512,
            stroke_width: 2.0,
            joint_radius: 3.0,
            background: "#ffffff".into(),
            colors,
            default_color: "#444444".into(),
            c_min: 0.1,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::InvalidStyle("canvas dimensions must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.c_min) {
            return Err(RenderError::InvalidStyle(format!("c_min must be in [0, 1], got {}", self.c_min)));
        }
        if !(self.stroke_width >= 0.0 && self.joint_radius >= 0.0) {
            return Err(RenderError::InvalidStyle("stroke width and joint radius must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-axis affine map `canvas = scale * pose + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub scale: [f64; 2],
    pub offset: [f64; 2],
}

impl Fit {
    /// Maps the bounding box of every drawable keypoint over all frames onto
    /// the canvas minus the margin. A zero-extent axis is centred.
    pub fn for_sequence(seq: &PoseSequence, style: &RenderStyle) -> Fit {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for f in 0..seq.frame_count() {
            for k in 0..seq.keypoint_count() {
                if !drawable(seq, f, k, style.c_min) {
                    continue;
                }
                let p = seq.point(f, k);
                for axis in 0..2 {
                    let v = f64::from(p[axis]);
                    lo[axis] = lo[axis].min(v);
                    hi[axis] = hi[axis].max(v);
                }
            }
        }
        let size = [f64::from(style.width), f64::from(style.height)];
        let mut scale = [1.0; 2];
        let mut offset = [0.0; 2];
        for axis in 0..2 {
            let (a, b) = (size[axis] * MARGIN, size[axis] * (1.0 - MARGIN));
            if lo[axis].is_finite() && hi[axis] > lo[axis] {
                scale[axis] = (b - a) / (hi[axis] - lo[axis]);
                offset[axis] = a - scale[axis] * lo[axis];
            } else if lo[axis].is_finite() {
                offset[axis] = size[axis] / 2.0 - lo[axis];
            } else {
                offset[axis] = size[axis] / 2.0;
            }
        }
        Fit { scale, offset }
    }

    pub fn apply(&self, p: &[f32]) -> [f64; 2] {
        [
            self.scale[0] * f64::from(p[0]) + self.offset[0],
            self.scale[1] * f64::from(p[1]) + self.offset[1],
        ]
    }
}

fn drawable(seq: &PoseSequence, frame: usize, keypoint: usize, c_min: f32) -> bool {
    let c = seq.confidence(frame, keypoint);
    c > 0.0 && c >= c_min && seq.dims() >= 2
}

/// Fixed two-decimal formatting without negative zero.
fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn render_with(seq: &PoseSequence, frame: usize, style: &RenderStyle, fit: &Fit) -> String {
    let header = seq.header();
    let color = |k: usize| -> &str {
        header
            .component_of(k)
            .and_then(|c| style.colors.get(c))
            .unwrap_or(&style.default_color)
    };
    let mut out = String::new();
    let (w, h) = (style.width, style.height);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="{}"/>"#, style.background);
    for &(a, b) in header.edges() {
        let (a, b) = (usize::from(a), usize::from(b));
        if !(drawable(seq, frame, a, style.c_min) && drawable(seq, frame, b, style.c_min)) {
            continue;
        }
        let p = fit.apply(seq.point(frame, a));
        let q = fit.apply(seq.point(frame, b));
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}" stroke-linecap="round"/>"#,
            num(p[0]),
            num(p[1]),
            num(q[0]),
            num(q[1]),
            color(a),
            num(style.stroke_width)
        );
    }
    for k in 0..seq.keypoint_count() {
        if !drawable(seq, frame, k, style.c_min) {
            continue;
        }
        let p = fit.apply(seq.point(frame, k));
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
            num(p[0]),
            num(p[1]),
            num(style.joint_radius),
            color(k)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One frame as an SVG document, framed by the whole sequence's bounds.
pub fn render_frame(seq: &PoseSequence, frame: usize, style: &RenderStyle) -> Result<String, RenderError> {
    style.validate()?;
    if frame >= seq.frame_count() {
        return Err(RenderError::FrameOutOfRange {
            frame,
            frames: seq.frame_count(),
        });
    }
    Ok(render_with(seq, frame, style, &Fit::for_sequence(seq, style)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderIndex {
    pub fps: f32,
    pub frames: Vec<String>,
}

/// Writes `000.svg`, `001.svg`, ... and `index.json` into `out_dir`.
pub fn render_sequence(seq: &PoseSequence, style: &RenderStyle, out_dir: &Path) -> Result<RenderIndex, RenderError> {
    style.validate()?;
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| RenderError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let fit = Fit::for_sequence(seq, style);
    let digits = seq.frame_count().saturating_sub(1).to_string().len().max(3);
    let names: Vec<String> = (0..seq.frame_count()).map(|f| format!("{f:0digits$}.svg")).collect();
    names.par_iter().enumerate().try_for_each(|(f, name)| {
        let path = out_dir.join(name);
        std::fs::write(&path, render_with(seq, f, style, &fit)).map_err(io(&path))
    })?;
    let index = RenderIndex {
        fps: seq.header().fps(),
        frames: names,
    };
    let path = out_dir.join("index.json");
    let json = serde_json::to_string_pretty(&index).expect("index serializes");
    std::fs::write(&path, json + "\n").map_err(io(&path))?;
    Ok(index)
}
