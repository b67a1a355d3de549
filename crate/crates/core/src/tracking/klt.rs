//! Pyramidal Lucas-Kanade point tracking and forward-backward validation.

use crate::geometry::Point;

use super::features::FeatureSet;
use super::pyramid::Pyramid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KltParams {
    /// Side of the square integration window, px (odd).
    pub window: usize,
    pub pyramid_levels: usize,
    pub max_iterations: usize,
    /// Stop iterating once the update is shorter than this, px.
    pub epsilon: f64,
    /// Minimum per-pixel smaller eigenvalue of the window's gradient matrix.
    pub min_eigen: f64,
}

impl Default for KltParams {
    fn default() -> Self {
        KltParams {
            window: 21,
            pyramid_levels: 3,
            max_iterations: 30,
            epsilon: 0.01,
            min_eigen: 1e-3,
        }
    }
}

/// Tracks one point from `prev` to `next`, returning its new position or
/// `None` when the solve is singular, fails to converge, or leaves the frame.
pub fn track_point(prev: &Pyramid, next: &Pyramid, p: Point, params: &KltParams) -> Option<Point> {
    let levels = params
        .pyramid_levels
        .min(prev.levels.len())
        .min(next.levels.len())
        .max(1);
    let half = (params.window / 2) as i32;
    let area = ((2 * half + 1) * (2 * half + 1)) as f32;
    let eps = params.epsilon as f32;

    let mut tmpl = Vec::with_capacity(params.window * params.window);
    let mut gx = Vec::with_capacity(params.window * params.window);
    let mut gy = Vec::with_capacity(params.window * params.window);
    let mut warped = Vec::with_capacity(params.window * params.window);

    // displacement guess carried between levels, in current-level pixels
    let mut gux = 0.0f32;
    let mut guy = 0.0f32;
    for level in (0..levels).rev() {
        let scale = 1.0 / (1u32 << level) as f32;
        let lp = &prev.levels[level];
        let ln = &next.levels[level];
        let px = p.x as f32 * scale;
        let py = p.y as f32 * scale;

        tmpl.clear();
        gx.clear();
        gy.clear();
        lp.image.patch(px, py, half, &mut tmpl);
        lp.grad_x.patch(px, py, half, &mut gx);
        lp.grad_y.patch(px, py, half, &mut gy);
        let (mut a, mut b, mut c) = (0.0f32, 0.0f32, 0.0f32);
        for (&ix, &iy) in gx.iter().zip(&gy) {
            a += ix * ix;
            b += ix * iy;
            c += iy * iy;
        }
        let det = a * c - b * b;
        let min_eig = 0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt();
        if min_eig / area < params.min_eigen as f32 || det.abs() < f32::EPSILON {
            return None;
        }

        let mut dx = 0.0f32;
        let mut dy = 0.0f32;
        let mut converged = false;
        for _ in 0..params.max_iterations {
            let qx = px + gux + dx;
            let qy = py + guy + dy;
            warped.clear();
            ln.image.patch(qx, qy, half, &mut warped);
            let (mut bx, mut by) = (0.0f32, 0.0f32);
            for k in 0..tmpl.len() {
                let e = tmpl[k] - warped[k];
                bx += e * gx[k];
                by += e * gy[k];
            }
            let sx = (c * bx - b * by) / det;
            let sy = (a * by - b * bx) / det;
            if !sx.is_finite() || !sy.is_finite() {
                return None;
            }
            dx += sx;
            dy += sy;
            if sx * sx + sy * sy < eps * eps {
                converged = true;
                break;
            }
        }
        if level == 0 && !converged {
            return None;
        }
        gux += dx;
        guy += dy;
        if level > 0 {
            gux *= 2.0;
            guy *= 2.0;
        }
    }
    let out = Point::new(p.x + gux as f64, p.y + guy as f64);
    let inside = out.x >= 0.0
        && out.y >= 0.0
        && out.x <= next.width() as f64
        && out.y <= next.height() as f64;
    (inside && out.is_finite()).then_some(out)
}

/// Tracks every live point; points that fail are marked dead in place of a position.
pub fn klt_track(prev: &Pyramid, next: &Pyramid, pts: &FeatureSet, params: &KltParams) -> FeatureSet {
    let mut out = pts.clone();
    for (i, p) in pts.points.iter().enumerate() {
        if !pts.alive[i] {
            continue;
        }
        match track_point(prev, next, *p, params) {
            Some(q) => out.points[i] = q,
            None => out.alive[i] = false,
        }
    }
    out
}

/// Re-tracks forward results `next -> prev` and kills points whose round trip
/// lands farther than `max_error` px from where they started.
pub fn forward_backward_gate(
    prev: &Pyramid,
    next: &Pyramid,
    original: &FeatureSet,
    forward: &FeatureSet,
    max_error: f64,
    params: &KltParams,
) -> FeatureSet {
    let mut out = forward.clone();
    for i in 0..forward.points.len() {
        if !forward.alive[i] || !original.alive[i] {
            out.alive[i] = false;
            continue;
        }
        match track_point(next, prev, forward.points[i], params) {
            Some(back) if (back - original.points[i]).norm() <= max_error => {}
            _ => out.alive[i] = false,
        }
    }
    out
}
