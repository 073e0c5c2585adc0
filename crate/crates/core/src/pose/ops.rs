//! Geometric operations on pose sequences. All pure; all math in `f64`.

use thiserror::Error;

use super::topology::{SkeletonError, SkeletonSpec};
use super::{PoseError, PoseSequence};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpError {
    #[error("target fps must be positive and finite, got {0}")]
    InvalidFps(f64),
    #[error("resampling needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("nothing to stitch")]
    NoSequences,
    #[error("sequence {index} has a different keypoint layout than sequence 0")]
    HeaderMismatch { index: usize },
    #[error("sequence {index} has {frames} frames; a cross-fade of {crossfade} needs more")]
    ClipTooShort { index: usize, frames: usize, crossfade: usize },
    #[error("unknown component {0:?}")]
    UnknownComponent(String),
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
    #[error(transparent)]
    Pose(#[from] PoseError),
}

/// Linear resampling onto a `target_fps` time grid spanning the same duration.
///
/// A frame landing exactly on a source frame copies it; any other frame takes
/// the minimum confidence of its two bracketing source frames.
pub fn resample(seq: &PoseSequence, target_fps: f64) -> Result<PoseSequence, OpError> {
    if !(target_fps.is_finite() && target_fps > 0.0) {
        return Err(OpError::InvalidFps(target_fps));
    }
    if seq.frame_count() < 2 {
        return Err(OpError::TooFewFrames(seq.frame_count()));
    }
    let src_fps = f64::from(seq.header().fps());
    let header = seq.header().with_fps(target_fps as f32)?;
    let last = (seq.frame_count() - 1) as f64;
    let out_frames = (seq.duration() * target_fps).round() as usize + 1;
    let k = seq.keypoint_count();
    let d = seq.dims();
    let mut coords = Vec::with_capacity(out_frames * k * d);
    let mut confidence = Vec::with_capacity(out_frames * k);
    for j in 0..out_frames {
        let pos = (j as f64 / target_fps * src_fps).min(last);
        let lo = pos.floor() as usize;
        let mut frac = pos - lo as f64;
        if frac < 1e-9 {
            frac = 0.0;
        } else if frac > 1.0 - 1e-9 {
            frac = 1.0;
        }
        let hi = (lo + 1).min(seq.frame_count() - 1);
        for kp in 0..k {
            if frac == 0.0 || frac == 1.0 {
                let src = if frac == 0.0 { lo } else { hi };
                coords.extend_from_slice(seq.point(src, kp));
                confidence.push(seq.confidence(src, kp));
                continue;
            }
            let (a, b) = (seq.point(lo, kp), seq.point(hi, kp));
            let (ca, cb) = (seq.confidence(lo, kp), seq.confidence(hi, kp));
            let c = ca.min(cb);
            for (&x, &y) in a.iter().zip(b) {
                let v = f64::from(x) + (f64::from(y) - f64::from(x)) * frac;
                // a zero-confidence endpoint may carry junk; keep the confident one
                let v = if v.is_finite() || c > 0.0 {
                    v
                } else if ca > 0.0 {
                    f64::from(x)
                } else {
                    f64::from(y)
                };
                coords.push(v as f32);
            }
            confidence.push(c);
        }
    }
    Ok(PoseSequence::new(header, coords, confidence)?)
}

/// Concatenates clips, cross-fading the last `crossfade` frames of the running
/// output with the first `crossfade` frames of each next clip using ramp
/// weights `i / (crossfade + 1)`, `i = 1..=crossfade`.
///
/// Output length is `sum(F_i) - crossfade * (n - 1)`.
pub fn concatenate_stitch(seqs: &[PoseSequence], crossfade: usize) -> Result<PoseSequence, OpError> {
    let first = seqs.first().ok_or(OpError::NoSequences)?;
    for (index, seq) in seqs.iter().enumerate() {
        if !seq.header().same_layout(first.header()) {
            return Err(OpError::HeaderMismatch { index });
        }
        if seqs.len() > 1 && seq.frame_count() <= crossfade {
            return Err(OpError::ClipTooShort {
                index,
                frames: seq.frame_count(),
                crossfade,
            });
        }
    }
    if seqs.len() == 1 {
        return Ok(first.clone());
    }
    let k = first.keypoint_count();
    let d = first.dims();
    let mut coords = first.coords().to_vec();
    let mut confidence = first.confidences().to_vec();
    let mut frames = first.frame_count();
    for next in &seqs[1..] {
        let seam = frames - crossfade;
        for i in 0..crossfade {
            let w = (i + 1) as f64 / (crossfade + 1) as f64;
            let left_frame = seam + i;
            for kp in 0..k {
                let ci = left_frame * k + kp;
                let (cl, cr) = (f64::from(confidence[ci]), f64::from(next.confidence(i, kp)));
                confidence[ci] = ((1.0 - w) * cl + w * cr) as f32;
                let right = next.point(i, kp);
                for (dim, &r) in right.iter().enumerate() {
                    let slot = &mut coords[ci * d + dim];
                    let l = f64::from(*slot);
                    let r = f64::from(r);
                    let blended = (1.0 - w) * l + w * r;
                    *slot = if blended.is_finite() {
                        blended
                    } else if r.is_finite() {
                        r
                    } else {
                        l
                    } as f32;
                }
            }
        }
        let skip = crossfade;
        coords.extend_from_slice(&next.coords()[skip * k * d..]);
        confidence.extend_from_slice(&next.confidences()[skip * k..]);
        frames += next.frame_count() - crossfade;
    }
    Ok(PoseSequence::new(first.header().clone(), coords, confidence)?)
}

/// Output of [`normalize_skeleton`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPose {
    pub pose: PoseSequence,
    /// Frames passed through untransformed (no usable root or shoulder width).
    pub degenerate_frames: Vec<usize>,
    /// Uniform scale applied to the non-degenerate frames.
    pub scale: f64,
}

const MIN_SHOULDER_WIDTH: f64 = 1e-9;

fn distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (f64::from(x) - f64::from(y)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Per-frame shoulder width, `None` for frames where it cannot be measured.
pub fn shoulder_widths(seq: &PoseSequence, left: usize, right: usize) -> Vec<Option<f64>> {
    (0..seq.frame_count())
        .map(|f| {
            let ok = seq.confidence(f, left) > 0.0 && seq.confidence(f, right) > 0.0;
            let w = distance(seq.point(f, left), seq.point(f, right));
            (ok && w.is_finite() && w > MIN_SHOULDER_WIDTH).then_some(w)
        })
        .collect()
}

/// Mean measurable shoulder width of a sequence.
pub fn mean_shoulder_width(seq: &PoseSequence, left: usize, right: usize) -> Option<f64> {
    let widths: Vec<f64> = shoulder_widths(seq, left, right).into_iter().flatten().collect();
    (!widths.is_empty()).then(|| widths.iter().sum::<f64>() / widths.len() as f64)
}

/// Appearance transfer onto a reference skeleton: every frame is translated so
/// the root sits at the origin, then all frames are scaled by one factor so the
/// mean shoulder width equals the reference width.
///
/// Frames whose root is unconfident or whose shoulder width is zero are passed
/// through unchanged and listed in [`NormalizedPose::degenerate_frames`].
pub fn normalize_skeleton(seq: &PoseSequence, reference: &SkeletonSpec) -> Result<NormalizedPose, OpError> {
    reference.check(seq.header())?;
    let widths = shoulder_widths(seq, reference.left_shoulder, reference.right_shoulder);
    let degenerate: Vec<usize> = widths
        .iter()
        .enumerate()
        .filter(|&(f, w)| w.is_none() || seq.confidence(f, reference.root) <= 0.0)
        .map(|(f, _)| f)
        .collect();
    let usable: Vec<f64> = widths
        .iter()
        .enumerate()
        .filter(|(f, _)| degenerate.binary_search(f).is_err())
        .filter_map(|(_, w)| *w)
        .collect();
    if !degenerate.is_empty() {
        tracing::warn!(frames = degenerate.len(), "degenerate pose frames passed through unscaled");
    }
    if usable.is_empty() {
        return Ok(NormalizedPose {
            pose: seq.clone(),
            degenerate_frames: degenerate,
            scale: 1.0,
        });
    }
    let mean = usable.iter().sum::<f64>() / usable.len() as f64;
    let scale = reference.shoulder_width / mean;
    let d = seq.dims();
    let roots: Vec<Vec<f64>> = (0..seq.frame_count())
        .map(|f| seq.point(f, reference.root).iter().map(|&v| f64::from(v)).collect())
        .collect();
    let pose = seq.map_points(|frame, _, point| {
        if degenerate.binary_search(&frame).is_ok() {
            return;
        }
        for dim in 0..d {
            point[dim] = ((f64::from(point[dim]) - roots[frame][dim]) * scale) as f32;
        }
    })?;
    Ok(NormalizedPose {
        pose,
        degenerate_frames: degenerate,
        scale,
    })
}

/// Per-frame mean displacement of the confident keypoints of `components`.
///
/// `E(0) = 0`; a keypoint contributes to `E(t)` only when it is confident in
/// both frame `t - 1` and frame `t`.
pub fn motion_energy(seq: &PoseSequence, components: &[&str]) -> Result<Vec<f64>, OpError> {
    let mut keypoints = Vec::new();
    for name in components {
        let range = seq
            .header()
            .component_range(name)
            .ok_or_else(|| OpError::UnknownComponent((*name).to_owned()))?;
        keypoints.extend(range);
    }
    let mut energy = vec![0.0; seq.frame_count()];
    for t in 1..seq.frame_count() {
        let mut total = 0.0;
        let mut count = 0usize;
        for &kp in &keypoints {
            if seq.confidence(t - 1, kp) > 0.0 && seq.confidence(t, kp) > 0.0 {
                total += distance(seq.point(t - 1, kp), seq.point(t, kp));
                count += 1;
            }
        }
        if count > 0 {
            energy[t] = total / count as f64;
        }
    }
    Ok(energy)
}
