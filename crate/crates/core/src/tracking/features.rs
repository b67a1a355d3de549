//! Shi-Tomasi corner selection inside a polygon.

use crate::frameio::Frame;
use crate::geometry::{Point, Polygon};

use super::pyramid::FloatImage;

/// Side of the structure-tensor window.
pub const TENSOR_WINDOW: usize = 7;
/// Minimum distance between selected features, px.
pub const MIN_SPACING: f64 = 5.0;
/// Candidates weaker than this fraction of the strongest one are dropped.
pub const QUALITY_LEVEL: f64 = 0.01;
const TENSOR_SIGMA: f64 = 1.5;
const MIN_EIGEN_FLOOR: f64 = 1e-6;

/// Feature points of one planar region.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub region_label: String,
    pub points: Vec<Point>,
    pub alive: Vec<bool>,
}

impl FeatureSet {
    pub fn new(region_label: impl Into<String>, points: Vec<Point>) -> Self {
        let alive = vec![true; points.len()];
        FeatureSet {
            region_label: region_label.into(),
            points,
            alive,
        }
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn tensor_weights() -> Vec<f64> {
    let half = (TENSOR_WINDOW / 2) as i64;
    let w: Vec<f64> = (-half..=half)
        .map(|d| (-(d * d) as f64 / (2.0 * TENSOR_SIGMA * TENSOR_SIGMA)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Smaller eigenvalue of `[[a, b], [b, c]]`.
pub fn min_eigenvalue(a: f64, b: f64, c: f64) -> f64 {
    let half_tr = 0.5 * (a + c);
    let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    half_tr - disc
}

/// Per-pixel minimum eigenvalue of the Gaussian-weighted structure tensor.
pub fn min_eigen_map(frame: &Frame) -> Vec<f64> {
    let img = FloatImage::from_frame(frame);
    let (gx, gy) = img.gradients();
    let (w, h) = (frame.width, frame.height);
    let n = w * h;
    let mut xx = vec![0.0f64; n];
    let mut xy = vec![0.0f64; n];
    let mut yy = vec![0.0f64; n];
    for i in 0..n {
        let (dx, dy) = (gx.data[i] as f64, gy.data[i] as f64);
        xx[i] = dx * dx;
        xy[i] = dx * dy;
        yy[i] = dy * dy;
    }
    let k = tensor_weights();
    let half = (TENSOR_WINDOW / 2) as i64;
    let blur = |src: &[f64]| -> Vec<f64> {
        let mut tmp = vec![0.0; n];
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                for (j, kv) in k.iter().enumerate() {
                    let xx = x as i64 + j as i64 - half;
                    if xx >= 0 && (xx as usize) < w {
                        s += kv * src[y * w + xx as usize];
                    }
                }
                tmp[y * w + x] = s;
            }
        }
        let mut out = vec![0.0; n];
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                for (j, kv) in k.iter().enumerate() {
                    let yy = y as i64 + j as i64 - half;
                    if yy >= 0 && (yy as usize) < h {
                        s += kv * tmp[yy as usize * w + x];
                    }
                }
                out[y * w + x] = s;
            }
        }
        out
    };
    let (sxx, sxy, syy) = (blur(&xx), blur(&xy), blur(&yy));
    (0..n)
        .map(|i| min_eigenvalue(sxx[i], sxy[i], syy[i]))
        .collect()
}

/// Up to `m` strongest corners with pixel centers inside `region`, ranked by
/// the structure tensor's smaller eigenvalue, at least [`MIN_SPACING`] apart.
pub fn good_features(frame: &Frame, region: &Polygon, label: &str, m: usize) -> FeatureSet {
    let (w, h) = (frame.width, frame.height);
    let bb = region.bbox();
    let x_lo = (bb.min_x.floor().max(1.0)) as usize;
    let y_lo = (bb.min_y.floor().max(1.0)) as usize;
    let x_hi = (bb.max_x.ceil() as usize).min(w.saturating_sub(1));
    let y_hi = (bb.max_y.ceil() as usize).min(h.saturating_sub(1));
    if m == 0 || x_lo >= x_hi || y_lo >= y_hi {
        return FeatureSet::new(label, Vec::new());
    }

    let eig = min_eigen_map(frame);
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for y in y_lo..y_hi {
        for x in x_lo..x_hi {
            let v = eig[y * w + x];
            if v <= MIN_EIGEN_FLOOR {
                continue;
            }
            if !region.contains(Point::new(x as f64 + 0.5, y as f64 + 0.5)) {
                continue;
            }
            // 3x3 non-maximum suppression, ties broken toward the earlier pixel
            let mut is_max = true;
            'nb: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = ((x as i64 + dx) as usize, (y as i64 + dy) as usize);
                    let nv = eig[ny * w + nx];
                    let earlier = (dy, dx) < (0, 0);
                    if nv > v || (nv == v && earlier) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                candidates.push((v, x, y));
            }
        }
    }
    let Some(best) = candidates.iter().map(|c| c.0).reduce(f64::max) else {
        return FeatureSet::new(label, Vec::new());
    };
    candidates.retain(|c| c.0 >= QUALITY_LEVEL * best);
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.2, a.1).cmp(&(b.2, b.1))));

    let mut chosen: Vec<Point> = Vec::with_capacity(m);
    for (_, x, y) in candidates {
        let p = Point::new(x as f64 + 0.5, y as f64 + 0.5);
        if chosen.iter().all(|q| (*q - p).norm() >= MIN_SPACING) {
            chosen.push(p);
            if chosen.len() == m {
                break;
            }
        }
    }
    FeatureSet::new(label, chosen)
}
