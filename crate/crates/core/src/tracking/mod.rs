//! Region tracking: corner selection, pyramidal KLT with forward-backward
//! checks, per-region RANSAC affine fits and epoch bookkeeping.

mod epoch;
mod features;
mod klt;
mod pyramid;
mod ransac;

pub use epoch::{EpochState, RegionStatus, RegionTrack, TrackingConfig};
pub use features::{good_features, min_eigen_map, min_eigenvalue, FeatureSet, MIN_SPACING, QUALITY_LEVEL, TENSOR_WINDOW};
pub use klt::{forward_backward_gate, klt_track, track_point, KltParams};
pub use pyramid::{FloatImage, Level, Pyramid};
pub use ransac::{fit_affine_exact, fit_affine_least_squares, ransac_affine, AffineFit, RansacParams};
