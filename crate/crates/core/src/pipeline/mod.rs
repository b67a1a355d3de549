//! End-to-end runs: estimation with either estimator, scoring against a
//! reference, and head-to-head comparison.

mod artifacts;
mod baseline;
mod compare;
mod config;
mod distance;
mod evaluate;

pub use artifacts::*;
pub use baseline::{face_average, FaceMask, ShiftTracker, SHIFT_SEARCH};
pub use compare::{compare, write_comparison, write_plot, CompareRow, Comparison};
pub use config::{Estimator, RunConfig};
pub use distance::{
    distance_ppg, epoch_bounds, EpochRecord, PpgOutput, RegionEpochRecord, RoiEpochRecord, MIN_EPOCH_SAMPLES,
};
pub use evaluate::{
    evaluate, write_evaluation, Evaluation, AGREEMENT_FILE, BEAT_EDGE_MARGIN_S, IBI_FILE, MAX_SPAN_MISMATCH, PR_SERIES_FILE,
    SNR_FILE, SUMMARY_FILE,
};

use crate::error::Result;
use crate::frameio::{FrameSequence, RegionFile};

/// Runs the estimator selected in `cfg`.
pub fn estimate(seq: &FrameSequence, regions: &RegionFile, cfg: &RunConfig) -> Result<PpgOutput> {
    match cfg.estimator {
        Estimator::DistancePpg => distance_ppg(seq, regions, cfg, false),
        Estimator::FaceAverage => face_average(seq, regions, cfg),
    }
}
