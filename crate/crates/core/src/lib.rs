pub mod data;
pub mod pipeline;
pub mod pose;
pub mod render;
pub mod s2s;
pub mod signwriting;
pub mod sts;
pub mod synth;
pub mod text;
