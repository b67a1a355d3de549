//! Robust affine estimation from point correspondences.

use nalgebra::{Matrix3, Vector3};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Affine, Point};

const MIN_DET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacParams {
    /// Inlier tolerance, px.
    pub epsilon: f64,
    /// Required fraction of inliers among all pairs.
    pub inlier_fraction: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams {
            epsilon: 2.0,
            inlier_fraction: 0.7,
            max_iterations: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineFit {
    pub model: Affine,
    pub inliers: Vec<bool>,
}

impl AffineFit {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

fn acceptable(m: &Affine) -> bool {
    m.is_finite() && m.det().abs() > MIN_DET
}

/// Affine map sending three source points exactly onto three destinations.
pub fn fit_affine_exact(src: [Point; 3], dst: [Point; 3]) -> Option<Affine> {
    let a = Matrix3::new(
        src[0].x, src[0].y, 1.0, //
        src[1].x, src[1].y, 1.0, //
        src[2].x, src[2].y, 1.0,
    );
    if a.determinant().abs() < 1e-9 {
        return None;
    }
    let inv = a.try_inverse()?;
    let row_x = inv * Vector3::new(dst[0].x, dst[1].x, dst[2].x);
    let row_y = inv * Vector3::new(dst[0].y, dst[1].y, dst[2].y);
    let m = Affine::new([
        [row_x[0], row_x[1], row_x[2]],
        [row_y[0], row_y[1], row_y[2]],
    ]);
    acceptable(&m).then_some(m)
}

/// Least-squares affine fit over all pairs (normal equations on centered coordinates).
pub fn fit_affine_least_squares(src: &[Point], dst: &[Point]) -> Option<Affine> {
    let n = src.len();
    if n < 3 || dst.len() != n {
        return None;
    }
    let cs = src.iter().fold(Point::default(), |a, &p| a + p) * (1.0 / n as f64);
    let cd = dst.iter().fold(Point::default(), |a, &p| a + p) * (1.0 / n as f64);
    let mut ata = Matrix3::zeros();
    let mut atx = Vector3::zeros();
    let mut aty = Vector3::zeros();
    for (s, d) in src.iter().zip(dst) {
        let row = Vector3::new(s.x - cs.x, s.y - cs.y, 1.0);
        ata += row * row.transpose();
        atx += row * (d.x - cd.x);
        aty += row * (d.y - cd.y);
    }
    let inv = ata.try_inverse()?;
    let px = inv * atx;
    let py = inv * aty;
    // undo the centering: u - cd = A (x - cs) + t  =>  u = A x + (cd - A cs + t)
    let (a, b, c, d) = (px[0], px[1], py[0], py[1]);
    let m = Affine::new([
        [a, b, cd.x - a * cs.x - b * cs.y + px[2]],
        [c, d, cd.y - c * cs.x - d * cs.y + py[2]],
    ]);
    acceptable(&m).then_some(m)
}

fn residual(m: &Affine, s: Point, d: Point) -> f64 {
    (m.apply(s) - d).norm()
}

/// RANSAC over 3-point minimal samples. Returns `None` ("no rigid affine
/// model") when the best consensus set stays below the inlier fraction;
/// otherwise the model refit by least squares on that consensus set.
///
/// Ties between equally sized consensus sets keep the earliest one.
pub fn ransac_affine(src: &[Point], dst: &[Point], params: &RansacParams) -> Option<AffineFit> {
    let n = src.len();
    if n < 3 || dst.len() != n {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(usize, Vec<bool>)> = None;
    for _ in 0..params.max_iterations {
        let idx = sample(&mut rng, n, 3);
        let (i, j, k) = (idx.index(0), idx.index(1), idx.index(2));
        let Some(m) = fit_affine_exact([src[i], src[j], src[k]], [dst[i], dst[j], dst[k]]) else {
            continue;
        };
        let mask: Vec<bool> = src
            .iter()
            .zip(dst)
            .map(|(&s, &d)| residual(&m, s, d) <= params.epsilon)
            .collect();
        let count = mask.iter().filter(|&&b| b).count();
        if best.as_ref().is_none_or(|(c, _)| count > *c) {
            best = Some((count, mask));
        }
    }
    let (count, mask) = best?;
    if (count as f64) < params.inlier_fraction * n as f64 {
        return None;
    }
    let (s_in, d_in): (Vec<Point>, Vec<Point>) = src
        .iter()
        .zip(dst)
        .zip(&mask)
        .filter(|(_, &keep)| keep)
        .map(|((&s, &d), _)| (s, d))
        .unzip();
    let model = fit_affine_least_squares(&s_in, &d_in)?;
    Some(AffineFit {
        model,
        inliers: mask,
    })
}
