use crate::dsp::{self, Bandpass, BandpassSpec};
use crate::error::{Error, Result};
use crate::frameio::{Frame, FrameSequence, PlanarRegion, RegionFile};
use crate::geometry::Point;

use super::config::{Estimator, RunConfig};
use super::distance::{epoch_bounds, EpochRecord, PpgOutput, MIN_EPOCH_SAMPLES};

/// Search radius of the shift tracker around the previous shift, in decimated pixels.
pub const SHIFT_SEARCH: i64 = 3;
const DECIMATION: usize = 2;

/// Pixels whose centers lie inside at least one region.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceMask {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<(usize, usize)>,
}

impl FaceMask {
    pub fn union(regions: &[PlanarRegion], width: usize, height: usize) -> Self {
        let mut pixels = Vec::new();
        for y in 0..height {
            for x in 0..width {
                let p = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                if regions.iter().any(|r| r.polygon.contains(p)) {
                    pixels.push((x, y));
                }
            }
        }
        FaceMask { width, height, pixels }
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Mean of the mask shifted by `(dx, dy)` px; pixels leaving the frame are skipped.
    pub fn mean_shifted(&self, frame: &Frame, dx: i64, dy: i64) -> Option<f64> {
        let mut sum = 0u64;
        let mut count = 0u64;
        for &(x, y) in &self.pixels {
            let (sx, sy) = (x as i64 + dx, y as i64 + dy);
            if sx >= 0 && sy >= 0 && (sx as usize) < frame.width && (sy as usize) < frame.height {
                sum += frame.get(sx as usize, sy as usize) as u64;
                count += 1;
            }
        }
        (count > 0).then(|| sum as f64 / count as f64)
    }

    fn bbox(&self) -> (usize, usize, usize, usize) {
        self.pixels.iter().fold((usize::MAX, usize::MAX, 0, 0), |(x0, y0, x1, y1), &(x, y)| {
            (x0.min(x), y0.min(y), x1.max(x), y1.max(y))
        })
    }
}

struct Decimated {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Decimated {
    fn of(frame: &Frame) -> Self {
        let width = frame.width / DECIMATION;
        let height = frame.height / DECIMATION;
        let mut data = vec![0.0; width * height];
        for y in 0..height {
            for x in 0..width {
                let mut s = 0.0;
                for j in 0..DECIMATION {
                    for i in 0..DECIMATION {
                        s += frame.get(x * DECIMATION + i, y * DECIMATION + j) as f64;
                    }
                }
                data[y * width + x] = s / (DECIMATION * DECIMATION) as f64;
            }
        }
        Decimated { width, height, data }
    }
}

/// Integer translation of a whole-face template by normalized cross-correlation.
pub struct ShiftTracker {
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
    template: Vec<f64>,
    shift: (i64, i64),
}

impl ShiftTracker {
    /// Template is the mask's bounding box in the decimated `frame`.
    pub fn new(frame: &Frame, mask: &FaceMask) -> Option<Self> {
        if mask.is_empty() {
            return None;
        }
        let d = Decimated::of(frame);
        let (bx0, by0, bx1, by1) = mask.bbox();
        let x0 = bx0 / DECIMATION;
        let y0 = by0 / DECIMATION;
        let x1 = (bx1 / DECIMATION).min(d.width.checked_sub(1)?);
        let y1 = (by1 / DECIMATION).min(d.height.checked_sub(1)?);
        if x1 < x0 || y1 < y0 {
            return None;
        }
        let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
        let mut template = Vec::with_capacity(w * h);
        for y in y0..=y1 {
            template.extend_from_slice(&d.data[y * d.width + x0..=y * d.width + x1]);
        }
        let m = dsp::mean(&template);
        template.iter_mut().for_each(|v| *v -= m);
        Some(ShiftTracker { x0, y0, w, h, template, shift: (0, 0) })
    }

    fn ncc(&self, d: &Decimated, dx: i64, dy: i64) -> Option<f64> {
        let xs = self.x0 as i64 + dx;
        let ys = self.y0 as i64 + dy;
        if xs < 0 || ys < 0 || xs as usize + self.w > d.width || ys as usize + self.h > d.height {
            return None;
        }
        let (xs, ys) = (xs as usize, ys as usize);
        let mut patch = Vec::with_capacity(self.w * self.h);
        for y in ys..ys + self.h {
            patch.extend_from_slice(&d.data[y * d.width + xs..y * d.width + xs + self.w]);
        }
        let m = dsp::mean(&patch);
        let mut num = 0.0;
        let mut pp = 0.0;
        let mut tt = 0.0;
        for (p, t) in patch.iter().zip(&self.template) {
            let p = p - m;
            num += p * t;
            pp += p * p;
            tt += t * t;
        }
        (pp > 0.0 && tt > 0.0).then(|| num / (pp * tt).sqrt())
    }

    /// Shift of `frame` relative to the template frame, full-resolution px.
    pub fn update(&mut self, frame: &Frame) -> (i64, i64) {
        let d = Decimated::of(frame);
        let (px, py) = self.shift;
        let mut best = (f64::NEG_INFINITY, self.shift);
        for dy in py - SHIFT_SEARCH..=py + SHIFT_SEARCH {
            for dx in px - SHIFT_SEARCH..=px + SHIFT_SEARCH {
                if let Some(c) = self.ncc(&d, dx, dy) {
                    if c > best.0 {
                        best = (c, (dx, dy));
                    }
                }
            }
        }
        self.shift = best.1;
        (self.shift.0 * DECIMATION as i64, self.shift.1 * DECIMATION as i64)
    }
}

/// Whole-face mean with global integer-shift compensation, bandpassed per epoch.
pub fn face_average(seq: &FrameSequence, regions: &RegionFile, cfg: &RunConfig) -> Result<PpgOutput> {
    cfg.validate()?;
    let fps = seq.fps;
    let n = seq.len();
    let filter = Bandpass::design(BandpassSpec {
        low: cfg.mrc.band_low_hz,
        high: cfg.mrc.band_high_hz,
        order: BandpassSpec::DEFAULT_ORDER,
        fs: fps,
    })?;
    let (w, h) = (seq.frames[0].width, seq.frames[0].height);
    let mut samples = vec![0.0; n];
    let mut epochs = Vec::new();
    let mut any = false;
    for (index, (start, end)) in epoch_bounds(n, cfg.tracking.epoch_frames(fps)).into_iter().enumerate() {
        epochs.push(EpochRecord {
            index,
            start_frame: start,
            frames: end - start,
            coarse_pr: None,
            contributing: 0,
            rois: Vec::new(),
            regions: Vec::new(),
            channels: Vec::new(),
        });
        if end - start < MIN_EPOCH_SAMPLES {
            continue;
        }
        let mask = FaceMask::union(regions.regions_at(start), w, h);
        let Some(mut tracker) = ShiftTracker::new(&seq.frames[start], &mask) else {
            continue;
        };
        let mut trace = Vec::with_capacity(end - start);
        for f in start..end {
            let (dx, dy) = if f == start { (0, 0) } else { tracker.update(&seq.frames[f]) };
            trace.push(mask.mean_shifted(&seq.frames[f], dx, dy).unwrap_or(0.0));
        }
        let mut y = filter.filtfilt(&trace)?;
        let m = dsp::mean(&y);
        y.iter_mut().for_each(|v| *v -= m);
        let r = dsp::rms(&y);
        if r > 0.0 && r.is_finite() {
            y.iter_mut().for_each(|v| *v /= r);
            samples[start..end].copy_from_slice(&y);
            any = true;
            epochs.last_mut().expect("pushed above").contributing = 1;
        }
    }
    if !any {
        return Err(Error::NoTrackableRegions);
    }
    Ok(PpgOutput { estimator: Estimator::FaceAverage, fps, samples, epochs })
}
