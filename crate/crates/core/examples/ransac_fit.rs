//! Robust affine fit of point correspondences with a share of gross outliers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rppg::geometry::{Affine, Point};
use rppg::tracking::{fit_affine_least_squares, ransac_affine, RansacParams};

fn correspondences(truth: &Affine, outlier_every: usize, rng: &mut ChaCha8Rng) -> (Vec<Point>, Vec<Point>) {
    let src: Vec<Point> = (0..60).map(|_| Point::new(rng.random_range(0.0..80.0), rng.random_range(0.0..80.0))).collect();
    let dst = src
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let q = truth.apply(p);
            if i % outlier_every == 0 {
                Point::new(q.x + rng.random_range(-25.0..25.0), q.y + rng.random_range(-25.0..25.0))
            } else {
                Point::new(q.x + rng.random_range(-0.05..0.05), q.y + rng.random_range(-0.05..0.05))
            }
        })
        .collect();
    (src, dst)
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let truth = Affine::new([[0.98, -0.06, 3.5], [0.05, 1.01, -2.0]]);
    let (src, dst) = correspondences(&truth, 4, &mut rng);

    let err = |m: &Affine| src.iter().map(|&p| (m.apply(p) - truth.apply(p)).norm()).fold(0.0, f64::max);
    let naive = fit_affine_least_squares(&src, &dst).unwrap();
    let fit = ransac_affine(&src, &dst, &RansacParams::default()).unwrap();
    let flagged = fit.inliers.iter().filter(|&&b| !b).count();
    println!("least squares on everything: worst model error {:.2} px", err(&naive));
    println!("ransac: {flagged} of {} points rejected, worst model error {:.3} px", src.len(), err(&fit.model));

    // Half the pairs corrupted: no model reaches the required inlier share.
    let (src, dst) = correspondences(&truth, 2, &mut rng);
    let verdict = ransac_affine(&src, &dst, &RansacParams::default());
    println!("with half the pairs corrupted: {}", if verdict.is_some() { "fit accepted" } else { "no consensus" });
}
