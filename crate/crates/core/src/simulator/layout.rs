use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::SceneSpec;
use crate::frameio::PlanarRegion;
use crate::geometry::{Point, Polygon};
use crate::seeds;

const ALPHA_STREAM: u64 = 0xA1FA;
const TEXTURE_STREAM: u64 = 0x7E87;

pub const NEAR_ZERO_ALPHA: f64 = 0.02;
const EYE_REFLECTANCE: f64 = 0.15;
const MOUTH_REFLECTANCE: f64 = 0.3;
/// Relative perfusion below the forehead.
const LOWER_FACE_ZONE: f64 = 0.75;
const TEXTURE_SPACING: f64 = 6.0;
const TEXTURE_SIGMA: f64 = 1.4;

/// Standard regions as `(label, x0, y0, x1, y1)` relative to the face center
/// for a face of half-axes 85 x 115 px.
const STANDARD_REGIONS: [(&str, f64, f64, f64, f64); 7] = [
    ("forehead_left", -60.0, -80.0, 0.0, -40.0),
    ("forehead_right", 0.0, -80.0, 60.0, -40.0),
    ("cheek_left", -60.0, 0.0, -20.0, 60.0),
    ("nose", -20.0, 0.0, 20.0, 40.0),
    ("cheek_right", 20.0, 0.0, 60.0, 60.0),
    ("chin_left", -40.0, 66.0, 0.0, 92.0),
    ("chin_right", 0.0, 66.0, 40.0, 92.0),
];

fn layout_scale(spec: &SceneSpec) -> f64 {
    (spec.face.rx / 85.0).min(spec.face.ry / 115.0)
}

/// Forehead, cheek, nose and chin rectangles of the standard face, snapped
/// to whole pixels.
pub fn standard_regions(spec: &SceneSpec) -> Vec<PlanarRegion> {
    let s = layout_scale(spec);
    let c = spec.face.center;
    STANDARD_REGIONS
        .iter()
        .map(|&(label, x0, y0, x1, y1)| PlanarRegion {
            label: label.to_string(),
            polygon: Polygon::rect(
                (c.x + s * x0).round(),
                (c.y + s * y0).round(),
                (c.x + s * x1).round(),
                (c.y + s * y1).round(),
            ),
        })
        .collect()
}

/// Regions of the scene: explicit ones, or the standard layout.
pub fn scene_regions(spec: &SceneSpec) -> Vec<PlanarRegion> {
    if spec.regions.is_empty() {
        standard_regions(spec)
    } else {
        spec.regions.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tissue {
    Background,
    Skin,
    Eye,
    Mouth,
}

fn in_ellipse(p: Point, c: Point, rx: f64, ry: f64) -> bool {
    ((p.x - c.x) / rx).powi(2) + ((p.y - c.y) / ry).powi(2) <= 1.0
}

fn tissue(spec: &SceneSpec, p: Point) -> Tissue {
    let f = &spec.face;
    if !in_ellipse(p, f.center, f.rx, f.ry) {
        return Tissue::Background;
    }
    let s = layout_scale(spec);
    let c = f.center;
    for dx in [-32.0, 32.0] {
        if in_ellipse(p, Point::new(c.x + s * dx, c.y - s * 15.0), 16.0 * s, 8.0 * s) {
            return Tissue::Eye;
        }
    }
    if in_ellipse(p, Point::new(c.x, c.y + 55.0 * s), 18.0 * s, 8.0 * s) {
        return Tissue::Mouth;
    }
    Tissue::Skin
}

/// Relative perfusion of the cell holding `p`, in `[0, 1]`.
pub fn perfusion_cell(spec: &SceneSpec, p: Point) -> f64 {
    let cell = spec.perfusion.cell;
    let ix = ((p.x - spec.face.center.x) / cell).floor() as i64;
    let iy = ((p.y - spec.face.center.y) / cell).floor() as i64;
    let key = ((ix as u64) << 32) ^ (iy as u64 & 0xFFFF_FFFF);
    let h = seeds::derive(spec.seed, ALPHA_STREAM, key);
    if seeds::unit(h) < spec.perfusion.near_zero_fraction {
        return NEAR_ZERO_ALPHA;
    }
    let v = seeds::unit(seeds::splitmix(h));
    0.05 + 0.95 * v * v * v
}

/// Time-invariant per-pixel fields in frame-0 coordinates.
#[derive(Debug, Clone)]
pub struct StaticFields {
    pub width: usize,
    pub height: usize,
    /// Illumination `I`.
    pub illum: Vec<f64>,
    /// `I * alpha`.
    pub pulsatile: Vec<f64>,
    /// `I * b`, texture included.
    pub surface: Vec<f64>,
}

impl StaticFields {
    pub fn build(spec: &SceneSpec) -> Self {
        let (w, h) = (spec.width, spec.height);
        let mut reflect = vec![0.0; w * h];
        let mut alpha = vec![0.0; w * h];
        let s = layout_scale(spec);
        let forehead_limit = spec.face.center.y - 30.0 * s;
        for y in 0..h {
            for x in 0..w {
                let p = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                let k = y * w + x;
                match tissue(spec, p) {
                    Tissue::Background => reflect[k] = spec.background_reflectance,
                    Tissue::Eye => reflect[k] = EYE_REFLECTANCE,
                    Tissue::Mouth => reflect[k] = MOUTH_REFLECTANCE,
                    Tissue::Skin => {
                        reflect[k] = spec.skin_reflectance;
                        alpha[k] = if spec.perfusion.uniform {
                            spec.perfusion.alpha_max
                        } else {
                            let zone = if p.y < forehead_limit { 1.0 } else { LOWER_FACE_ZONE };
                            spec.perfusion.alpha_max * zone * perfusion_cell(spec, p)
                        };
                    }
                }
            }
        }
        add_texture(spec, &mut reflect);
        let mut illum = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                illum[y * w + x] = spec.illumination.at(Point::new(x as f64 + 0.5, y as f64 + 0.5));
            }
        }
        let pulsatile = illum.iter().zip(&alpha).map(|(i, a)| i * a).collect();
        let surface = illum.iter().zip(&reflect).map(|(i, b)| i * b).collect();
        StaticFields { width: w, height: h, illum, pulsatile, surface }
    }

    /// Bilinear sample of `field` at `p`, clamped to the frame.
    pub fn sample(&self, field: &[f64], p: Point) -> f64 {
        let fx = (p.x - 0.5).clamp(0.0, (self.width - 1) as f64);
        let fy = (p.y - 0.5).clamp(0.0, (self.height - 1) as f64);
        let ix = (fx.floor() as usize).min(self.width - 2);
        let iy = (fy.floor() as usize).min(self.height - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let k = iy * self.width + ix;
        let top = field[k] * (1.0 - tx) + field[k + 1] * tx;
        let bot = field[k + self.width] * (1.0 - tx) + field[k + self.width + 1] * tx;
        top * (1.0 - ty) + bot * ty
    }
}

/// Gaussian spots of random sign on a jittered lattice, so the tracker has corners.
fn add_texture(spec: &SceneSpec, reflect: &mut [f64]) {
    if spec.texture_amplitude == 0.0 {
        return;
    }
    let (w, h) = (spec.width as i64, spec.height as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(spec.seed, TEXTURE_STREAM, 0));
    let reach = (3.0 * TEXTURE_SIGMA).ceil() as i64;
    let mut gy = 0.0;
    while gy < h as f64 {
        let mut gx = 0.0;
        while gx < w as f64 {
            let cx = gx + TEXTURE_SPACING * rng.random_range(0.25..0.75);
            let cy = gy + TEXTURE_SPACING * rng.random_range(0.25..0.75);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let amp = sign * spec.texture_amplitude * rng.random_range(0.5..1.0);
            let (px, py) = (cx.floor() as i64, cy.floor() as i64);
            for y in (py - reach).max(0)..=(py + reach).min(h - 1) {
                for x in (px - reach).max(0)..=(px + reach).min(w - 1) {
                    let d2 = (x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2);
                    reflect[(y * w + x) as usize] *= 1.0 + amp * (-d2 / (2.0 * TEXTURE_SIGMA * TEXTURE_SIGMA)).exp();
                }
            }
            gx += TEXTURE_SPACING;
        }
        gy += TEXTURE_SPACING;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roi::grid_regions;

    #[test]
    fn standard_regions_tile_into_rois() {
        let spec = SceneSpec::default();
        let regions = standard_regions(&spec);
        assert_eq!(regions.len(), 7);
        let grid = grid_regions(&regions, 20);
        assert_eq!(grid.len(), 6 + 6 + 6 + 4 + 6 + 2 + 2);
        // regions stay on skin
        for r in &regions {
            for v in &r.polygon.vertices {
                assert!(in_ellipse(*v, spec.face.center, spec.face.rx, spec.face.ry));
            }
        }
    }

    #[test]
    fn regions_avoid_eyes_and_mouth() {
        let spec = SceneSpec::default();
        for r in standard_regions(&spec) {
            let bb = r.polygon.bbox();
            for y in bb.min_y as usize..bb.max_y as usize {
                for x in bb.min_x as usize..bb.max_x as usize {
                    let t = tissue(&spec, Point::new(x as f64 + 0.5, y as f64 + 0.5));
                    assert_eq!(t, Tissue::Skin, "{} at {x},{y}", r.label);
                }
            }
        }
    }

    #[test]
    fn near_zero_fraction_is_respected() {
        let mut spec = SceneSpec::default();
        spec.perfusion.near_zero_fraction = 0.4;
        let mut zero = 0;
        let n = 2000;
        for i in 0..n {
            let p = Point::new((i % 50) as f64 * 20.0 + 1.0, (i / 50) as f64 * 20.0 + 1.0);
            if perfusion_cell(&spec, p) == NEAR_ZERO_ALPHA {
                zero += 1;
            }
        }
        let frac = zero as f64 / n as f64;
        assert!((frac - 0.4).abs() < 0.04, "{frac}");
    }

    #[test]
    fn bilinear_sample_hits_pixel_centers() {
        let spec = SceneSpec::default();
        let f = StaticFields::build(&spec);
        let k = 50 * f.width + 70;
        assert_eq!(f.sample(&f.surface, Point::new(70.5, 50.5)), f.surface[k]);
        let mid = f.sample(&f.surface, Point::new(71.0, 50.5));
        assert!((mid - 0.5 * (f.surface[k] + f.surface[k + 1])).abs() < 1e-12);
    }
}
