//! Fixed-size ROIs inside planar regions and their spatially averaged traces.

use crate::frameio::{Frame, PlanarRegion};
use crate::geometry::{Point, Polygon, Quad};

pub const DEFAULT_BLOCK: usize = 20;
pub const MIN_BLOCK: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Roi {
    pub id: usize,
    pub region_label: String,
    /// Index of the parent region in the region list the grid was built from.
    pub region_index: usize,
    pub quad: Quad,
    pub block_size: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoiGrid {
    pub rois: Vec<Roi>,
    /// Labels of regions too small to hold a single block.
    pub empty_regions: Vec<String>,
}

impl RoiGrid {
    pub fn len(&self) -> usize {
        self.rois.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rois.is_empty()
    }
}

/// Per-frame spatial average of one ROI.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiTrace {
    pub roi_id: usize,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl RoiTrace {
    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }
}

fn block_inside(poly: &Polygon, x0: f64, y0: f64, size: f64) -> bool {
    let q = Quad::axis_aligned(x0, y0, size);
    if !q.corners.iter().all(|&c| poly.contains(c)) {
        return false;
    }
    // a reflex vertex poking into the block means the boundary crosses it
    !poly
        .vertices
        .iter()
        .any(|v| v.x > x0 && v.x < x0 + size && v.y > y0 && v.y < y0 + size)
}

/// Tiles each region with `block x block` squares on a pixel grid anchored at
/// the region's bounding-box corner, keeping only blocks fully inside it.
///
/// Panics if `block < MIN_BLOCK`.
pub fn grid_regions(regions: &[PlanarRegion], block: usize) -> RoiGrid {
    assert!(block >= MIN_BLOCK, "ROI block must be at least {MIN_BLOCK} px");
    let size = block as f64;
    let mut grid = RoiGrid::default();
    for (region_index, region) in regions.iter().enumerate() {
        let bb = region.polygon.bbox();
        let x_start = bb.min_x.floor();
        let y_start = bb.min_y.floor();
        let before = grid.rois.len();
        let mut y0 = y_start;
        while y0 + size <= bb.max_y + 1e-9 {
            let mut x0 = x_start;
            while x0 + size <= bb.max_x + 1e-9 {
                if block_inside(&region.polygon, x0, y0, size) {
                    grid.rois.push(Roi {
                        id: grid.rois.len(),
                        region_label: region.label.clone(),
                        region_index,
                        quad: Quad::axis_aligned(x0, y0, size),
                        block_size: block,
                    });
                }
                x0 += size;
            }
            y0 += size;
        }
        if grid.rois.len() == before {
            log::warn!("region {} is too small for a {block}x{block} ROI", region.label);
            grid.empty_regions.push(region.label.clone());
        }
    }
    grid
}

/// Column span `[lo, hi]` where the horizontal line `y` meets a convex quad.
fn scanline_span(q: &Quad, y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..4 {
        let a = q.corners[i];
        let b = q.corners[(i + 1) % 4];
        let (ymin, ymax) = if a.y <= b.y { (a.y, b.y) } else { (b.y, a.y) };
        if y < ymin || y > ymax {
            continue;
        }
        if a.y == b.y {
            lo = lo.min(a.x.min(b.x));
            hi = hi.max(a.x.max(b.x));
        } else {
            let x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Inclusive column ranges `(row, first, last)` of the pixels of a
/// `width x height` grid whose centers fall inside `quad`.
pub fn quad_spans(quad: &Quad, width: usize, height: usize) -> Vec<(usize, usize, usize)> {
    let bb = quad.bbox();
    let row_lo = (bb.min_y - 0.5).ceil().max(0.0);
    let row_hi = (bb.max_y - 0.5).floor().min(height as f64 - 1.0);
    let mut spans = Vec::new();
    if row_lo > row_hi || !row_lo.is_finite() || !row_hi.is_finite() {
        return spans;
    }
    for row in row_lo as usize..=row_hi as usize {
        let Some((lo, hi)) = scanline_span(quad, row as f64 + 0.5) else {
            continue;
        };
        let c_lo = (lo - 0.5 - 1e-9).ceil().max(0.0);
        let c_hi = (hi - 0.5 + 1e-9).floor().min(width as f64 - 1.0);
        if c_lo <= c_hi {
            spans.push((row, c_lo as usize, c_hi as usize));
        }
    }
    spans
}

/// Mean intensity of the pixels whose centers fall inside `quad`, or `None`
/// when no pixel center of the frame does.
pub fn average_roi(frame: &Frame, quad: &Quad) -> Option<f64> {
    let mut sum = 0u64;
    let mut count = 0u64;
    for (row, lo, hi) in quad_spans(quad, frame.width, frame.height) {
        let pixels = &frame.row(row)[lo..=hi];
        sum += pixels.iter().map(|&v| v as u64).sum::<u64>();
        count += pixels.len() as u64;
    }
    (count > 0).then(|| sum as f64 / count as f64)
}

/// [`average_roi`] over a row-major real-valued field.
pub fn average_field(values: &[f64], width: usize, height: usize, quad: &Quad) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (row, lo, hi) in quad_spans(quad, width, height) {
        sum += values[row * width + lo..=row * width + hi].iter().sum::<f64>();
        count += hi - lo + 1;
    }
    (count > 0).then(|| sum / count as f64)
}

/// Reference implementation of [`average_roi`] testing every pixel center.
pub fn average_roi_brute(frame: &Frame, quad: &Quad) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for y in 0..frame.height {
        for x in 0..frame.width {
            if quad.contains(Point::new(x as f64 + 0.5, y as f64 + 0.5)) {
                sum += frame.get(x, y) as f64;
                count += 1;
            }
        }
    }
    (count > 0).then(|| sum / count as f64)
}
