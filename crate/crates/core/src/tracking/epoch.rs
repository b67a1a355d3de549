use crate::frameio::{Frame, PlanarRegion};
use crate::geometry::{Affine, Point, Polygon};
use crate::roi::{grid_regions, RoiGrid};

use super::features::{good_features, FeatureSet};
use super::klt::{forward_backward_gate, klt_track, KltParams};
use super::pyramid::Pyramid;
use super::ransac::{ransac_affine, RansacParams};

/// Tunables for region tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingConfig {
    pub epoch_seconds: f64,
    pub features_per_region: usize,
    pub min_features: usize,
    pub fb_error_px: f64,
    pub klt: KltParams,
    pub ransac: RansacParams,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        TrackingConfig {
            epoch_seconds: 10.0,
            features_per_region: 50,
            min_features: 10,
            fb_error_px: 2.0,
            klt: KltParams::default(),
            ransac: RansacParams::default(),
        }
    }
}

impl TrackingConfig {
    /// Frames per epoch at `fps` (at least one).
    pub fn epoch_frames(&self, fps: f64) -> usize {
        ((self.epoch_seconds * fps).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionStatus {
    Tracked,
    /// Fewer live features than the minimum after forward-backward gating.
    TooFewFeatures { frame: usize },
    /// RANSAC found no consensus affine model.
    NoAffineModel { frame: usize },
}

impl RegionStatus {
    pub fn is_tracked(self) -> bool {
        matches!(self, RegionStatus::Tracked)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionTrack {
    pub label: String,
    pub polygon: Polygon,
    pub features: FeatureSet,
    pub status: RegionStatus,
    /// Composition of every per-frame model since the epoch started.
    pub cumulative: Affine,
}

/// Tracker state between two resets.
#[derive(Debug, Clone)]
pub struct EpochState {
    pub start_frame: usize,
    /// Index of the most recent frame the state refers to.
    pub frame: usize,
    pub regions: Vec<RegionTrack>,
    /// ROI quads at their current (warped) positions.
    pub grid: RoiGrid,
    pub initial_grid: RoiGrid,
    config: TrackingConfig,
}

fn mix_seed(seed: u64, frame: usize, region: usize) -> u64 {
    crate::seeds::derive(seed, frame as u64, region as u64)
}

impl EpochState {
    /// Whether frame `t` starts a new epoch.
    pub fn is_reset_frame(t: usize, epoch_frames: usize) -> bool {
        t % epoch_frames == 0
    }

    /// Fresh state at `frame_index`: ROI grid from the region polygons and
    /// good features inside each region.
    pub fn start(
        frame: &Frame,
        frame_index: usize,
        regions: &[PlanarRegion],
        block: usize,
        config: &TrackingConfig,
    ) -> Self {
        let grid = grid_regions(regions, block);
        let tracks = regions
            .iter()
            .map(|r| RegionTrack {
                label: r.label.clone(),
                polygon: r.polygon.clone(),
                features: good_features(frame, &r.polygon, &r.label, config.features_per_region),
                status: RegionStatus::Tracked,
                cumulative: Affine::identity(),
            })
            .collect();
        EpochState {
            start_frame: frame_index,
            frame: frame_index,
            regions: tracks,
            initial_grid: grid.clone(),
            grid,
            config: config.clone(),
        }
    }

    pub fn config(&self) -> &TrackingConfig {
        &self.config
    }

    /// Advances one frame: track, gate, fit, and warp polygons and ROIs of
    /// every region still being tracked.
    pub fn step(&mut self, prev: &Pyramid, next: &Pyramid) {
        self.frame += 1;
        let cfg = &self.config;
        for (ri, region) in self.regions.iter_mut().enumerate() {
            if !region.status.is_tracked() {
                continue;
            }
            let forward = klt_track(prev, next, &region.features, &cfg.klt);
            let gated =
                forward_backward_gate(prev, next, &region.features, &forward, cfg.fb_error_px, &cfg.klt);
            if gated.alive_count() < cfg.min_features {
                region.status = RegionStatus::TooFewFeatures { frame: self.frame };
                region.features = gated;
                continue;
            }
            let (src, dst): (Vec<Point>, Vec<Point>) = (0..gated.len())
                .filter(|&i| gated.alive[i])
                .map(|i| (region.features.points[i], gated.points[i]))
                .unzip();
            let params = RansacParams {
                seed: mix_seed(cfg.ransac.seed, self.frame, ri),
                ..cfg.ransac
            };
            let Some(fit) = ransac_affine(&src, &dst, &params) else {
                region.status = RegionStatus::NoAffineModel { frame: self.frame };
                region.features = gated;
                continue;
            };
            let m = fit.model;
            region.polygon = region.polygon.transformed(&m);
            region.cumulative = region.cumulative.then(&m);
            region.features = gated;
            for roi in self.grid.rois.iter_mut().filter(|r| r.region_index == ri) {
                roi.quad = roi.quad.transformed(&m);
            }
        }
    }

    /// Whether the ROI's parent region is still tracked.
    pub fn roi_active(&self, roi_index: usize) -> bool {
        let r = &self.grid.rois[roi_index];
        self.regions[r.region_index].status.is_tracked()
    }

    pub fn tracked_region_count(&self) -> usize {
        self.regions.iter().filter(|r| r.status.is_tracked()).count()
    }
}
