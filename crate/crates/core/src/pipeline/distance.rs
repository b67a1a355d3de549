use crate::dsp::MIN_PSD_LEN;
use crate::error::{Error, Result};
use crate::frameio::{FrameSequence, RegionFile};
use crate::geometry::Affine;
use crate::mrc::{Combiner, GateReason, RoiChannel};
use crate::roi::{average_roi, RoiTrace};
use crate::tracking::{EpochState, Pyramid, RegionStatus};

use super::config::{Estimator, RunConfig};

/// Shortest epoch that is estimated; shorter tails are written as zeros.
pub const MIN_EPOCH_SAMPLES: usize = MIN_PSD_LEN;

#[derive(Debug, Clone, PartialEq)]
pub struct RoiEpochRecord {
    pub roi_id: usize,
    pub region_label: String,
    pub goodness: Option<f64>,
    /// Combining weight (0 when gated).
    pub weight: f64,
    pub gate: Option<GateReason>,
    pub amp_range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionEpochRecord {
    pub label: String,
    pub status: RegionStatus,
    /// Map from the epoch's first frame to its last frame.
    pub cumulative: Affine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub index: usize,
    pub start_frame: usize,
    pub frames: usize,
    /// bpm.
    pub coarse_pr: Option<f64>,
    pub contributing: usize,
    pub rois: Vec<RoiEpochRecord>,
    pub regions: Vec<RegionEpochRecord>,
    /// Filtered channels, kept only on request.
    pub channels: Vec<RoiChannel>,
}

impl EpochRecord {
    pub fn gated_count(&self) -> usize {
        self.rois.iter().filter(|r| r.gate.is_some()).count()
    }
}

/// Estimated waveform at the frame rate plus per-epoch bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PpgOutput {
    pub estimator: Estimator,
    pub fps: f64,
    pub samples: Vec<f64>,
    pub epochs: Vec<EpochRecord>,
}

impl PpgOutput {
    pub fn roi_epochs(&self) -> usize {
        self.epochs.iter().map(|e| e.rois.len()).sum()
    }

    pub fn gated_roi_epochs(&self) -> usize {
        self.epochs.iter().map(EpochRecord::gated_count).sum()
    }
}

/// Epoch boundaries `[start, end)` covering `n` frames.
pub fn epoch_bounds(n: usize, epoch_frames: usize) -> Vec<(usize, usize)> {
    (0..n)
        .step_by(epoch_frames.max(1))
        .map(|s| (s, (s + epoch_frames).min(n)))
        .collect()
}

/// Tracks the regions through one epoch and returns the per-ROI traces.
fn track_epoch(
    seq: &FrameSequence,
    regions: &RegionFile,
    start: usize,
    end: usize,
    cfg: &RunConfig,
) -> (EpochState, Vec<RoiTrace>) {
    let tracking = cfg.tracking_for_run();
    let levels = tracking.klt.pyramid_levels;
    let mut state = EpochState::start(&seq.frames[start], start, regions.regions_at(start), cfg.block, &tracking);
    let mut traces: Vec<RoiTrace> = state
        .grid
        .rois
        .iter()
        .map(|r| RoiTrace { roi_id: r.id, values: Vec::with_capacity(end - start), valid: Vec::with_capacity(end - start) })
        .collect();
    let sample = |state: &EpochState, frame: usize, traces: &mut [RoiTrace]| {
        for (i, roi) in state.grid.rois.iter().enumerate() {
            let v = average_roi(&seq.frames[frame], &roi.quad);
            let ok = state.roi_active(i) && v.is_some();
            traces[i].values.push(v.unwrap_or(0.0));
            traces[i].valid.push(ok);
        }
    };
    sample(&state, start, &mut traces);
    if end - start > 1 && !state.grid.is_empty() {
        let mut prev = Pyramid::build(&seq.frames[start], levels);
        for f in start + 1..end {
            let next = Pyramid::build(&seq.frames[f], levels);
            state.step(&prev, &next);
            sample(&state, f, &mut traces);
            prev = next;
        }
    }
    (state, traces)
}

/// Region-tracked, goodness-weighted pulse estimate.
pub fn distance_ppg(
    seq: &FrameSequence,
    regions: &RegionFile,
    cfg: &RunConfig,
    keep_channels: bool,
) -> Result<PpgOutput> {
    cfg.validate()?;
    let fps = seq.fps;
    let n = seq.len();
    let mut combiner = Combiner::new(cfg.mrc, fps)?;
    let mut samples = vec![0.0; n];
    let mut epochs = Vec::new();
    let mut any = false;
    for (index, (start, end)) in epoch_bounds(n, cfg.tracking.epoch_frames(fps)).into_iter().enumerate() {
        let mut record = EpochRecord {
            index,
            start_frame: start,
            frames: end - start,
            coarse_pr: None,
            contributing: 0,
            rois: Vec::new(),
            regions: Vec::new(),
            channels: Vec::new(),
        };
        if end - start < MIN_EPOCH_SAMPLES {
            epochs.push(record);
            continue;
        }
        let (state, traces) = track_epoch(seq, regions, start, end, cfg);
        record.regions = state
            .regions
            .iter()
            .map(|r| RegionEpochRecord { label: r.label.clone(), status: r.status, cumulative: r.cumulative })
            .collect();
        if traces.is_empty() {
            epochs.push(record);
            continue;
        }
        let combo = combiner.process_epoch(index, &traces)?;
        record.rois = combo
            .channels
            .iter()
            .zip(combo.weights.weights.iter().zip(&combo.goodness))
            .zip(&state.grid.rois)
            .map(|((ch, (&w, &g)), roi)| RoiEpochRecord {
                roi_id: ch.roi_id,
                region_label: roi.region_label.clone(),
                goodness: g,
                weight: w,
                gate: ch.gate,
                amp_range: ch.amp_range,
            })
            .collect();
        if let Some(est) = combo.estimate {
            any = true;
            record.coarse_pr = est.coarse_pr;
            record.contributing = est.contributing_roi_count;
            samples[start..end].copy_from_slice(&est.samples);
        }
        if keep_channels {
            record.channels = combo.channels;
        }
        epochs.push(record);
    }
    if !any {
        return Err(Error::NoTrackableRegions);
    }
    Ok(PpgOutput { estimator: Estimator::DistancePpg, fps, samples, epochs })
}
