//! Signed-to-spoken translation: segmentation, DTW recognition, text assembly.

mod dtw;
mod features;
mod recognize;
mod segment;

pub use dtw::{dtw_alignment, dtw_distance, Alignment, DtwError, Frames, DEFAULT_BAND};
pub use features::{extract_features, FeatureError, Features};
pub use recognize::{
    active_span, assemble_text, recognize_all, recognize_segment, translate_pose, PoseTranslation, Recognition,
    RecognitionError, TemplateIndex, DEFAULT_TAU, UNKNOWN_TEXT,
};
pub use segment::{hand_energy, segment_energy, segment_signs, smooth, ParamsError, Segment, SegmentKind, SegmenterParams};
