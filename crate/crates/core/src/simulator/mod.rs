//! Synthetic face scenes with exact ground truth.

mod layout;
mod ppg;
mod presets;
mod render;
mod spec;

pub use layout::{perfusion_cell, scene_regions, standard_regions, StaticFields, NEAR_ZERO_ALPHA};
pub use ppg::{synth_ppg, PpgTrack};
pub use presets::{preset, preset_scenes, DEFAULT_SEED, PRESET_NAMES};
pub use render::{render, roi_true_snr, Renderer, RoiAmplitude, SceneTruth, TRUTH_RATE_HZ};
pub use spec::{
    Burst, FaceGeometry, Illumination, MotionKind, MotionSegment, Occluder, PerfusionSpec, PpgModel,
    RegionMotion, SceneSpec, SurfaceNoise,
};
