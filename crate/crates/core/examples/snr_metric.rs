//! Waveform SNR against a reference as noise grows, and its insensitivity
//! to gain, sign and a small delay.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use rppg::vitals::snr;

fn main() -> anyhow::Result<()> {
    let fs = 30.0;
    let z: Vec<f64> = (0..900)
        .map(|i| {
            let t = i as f64 / fs;
            (2.0 * std::f64::consts::PI * 1.1 * t).sin() + 0.3 * (2.0 * std::f64::consts::PI * 2.2 * t).sin()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for sigma in [0.0f64, 0.05, 0.2, 0.5, 1.0, 2.0] {
        let noise = Normal::new(0.0, sigma.max(1e-12))?;
        let k: Vec<f64> = z.iter().map(|v| v + noise.sample(&mut rng)).collect();
        let r = snr(&k, &z, fs, fs)?;
        println!("noise std {sigma:4.2}: {:6.2} dB", r.snr_db);
    }

    let k: Vec<f64> = z.iter().map(|v| 4.0 * v + 7.0).collect();
    println!("scaled, offset copy: {:.2} dB", snr(&k, &z, fs, fs)?.snr_db);
    let k: Vec<f64> = z.iter().map(|v| -v).collect();
    println!("inverted copy: {:.2} dB", snr(&k, &z, fs, fs)?.snr_db);
    let delayed: Vec<f64> = std::iter::repeat(0.0).take(6).chain(z.iter().copied()).take(z.len()).collect();
    let r = snr(&delayed, &z, fs, fs)?;
    println!("copy delayed by 6 frames: {:.2} dB, lag found {:.3} s", r.snr_db, r.lag_s);
    Ok(())
}
