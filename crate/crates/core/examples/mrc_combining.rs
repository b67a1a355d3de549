//! Weighted combining of synthetic ROI traces of very different quality.
//!
//! Each trace carries the same pulse at a different strength, buried in
//! its own noise. One trace carries a large motion swing and is gated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use rppg::mrc::{Combiner, MrcConfig};
use rppg::roi::RoiTrace;
use rppg::vitals::snr;

fn main() -> anyhow::Result<()> {
    let fs = 30.0;
    let n = 300;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pulse: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * 1.25 * i as f64 / fs).sin()).collect();

    let strengths = [0.8, 0.5, 0.3, 0.15, 0.05, 0.02];
    let mut traces = Vec::new();
    for (id, &a) in strengths.iter().enumerate() {
        let noise = Normal::new(0.0, 0.4)?;
        let values = pulse.iter().map(|p| 120.0 + a * p + noise.sample(&mut rng)).collect::<Vec<_>>();
        traces.push(RoiTrace { roi_id: id, valid: vec![true; n], values });
    }
    let swing: Vec<f64> = (0..n)
        .map(|i| 120.0 + 6.0 * (2.0 * std::f64::consts::PI * 0.8 * i as f64 / fs).sin() + 0.2 * rng.random::<f64>())
        .collect();
    traces.push(RoiTrace { roi_id: strengths.len(), valid: vec![true; n], values: swing });

    let mut combiner = Combiner::new(MrcConfig::default(), fs)?;
    let combo = combiner.process_epoch(0, &traces)?;
    let est = combo.estimate.as_ref().expect("at least one usable ROI");
    println!("coarse rate {:.1} bpm, {} ROIs contributing", est.coarse_pr.unwrap_or(f64::NAN), est.contributing_roi_count);
    for (ch, w) in combo.channels.iter().zip(&combo.weights.weights) {
        println!("  roi {}  range {:6.2}  weight {:7.3}  gate {:?}", ch.roi_id, ch.amp_range, w, ch.gate);
    }

    let plain: Vec<f64> = (0..n).map(|i| traces[..strengths.len()].iter().map(|t| t.values[i]).sum::<f64>()).collect();
    println!("snr of the plain average   {:6.2} dB", snr(&plain, &pulse, fs, fs)?.snr_db);
    println!("snr of the weighted output {:6.2} dB", snr(&est.samples, &pulse, fs, fs)?.snr_db);
    Ok(())
}
