use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use rppg::simulator::{preset, synth_ppg};
use rppg::vitals::{detect_beats, match_beats, pulse_rate, BeatTrain};

/// Pulse rate per window and beat timing of a noisy 30 fps pulse waveform,
/// scored against the exact beats it was synthesised from.
fn main() -> anyhow::Result<()> {
    let fs = 30.0;
    let spec = preset("static_fair", 3)?;
    let track = synth_ppg(&spec.ppg, 40.0, 3)?;
    let noise = Normal::new(0.0, 0.05)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<f64> = (0..1200).map(|i| track.value(i as f64 / fs) + noise.sample(&mut rng)).collect();

    let series = pulse_rate(&samples, fs)?;
    for (c, pr) in series.centers.iter().zip(&series.pr) {
        println!("window at {c:4.1} s: {}", pr.map_or("-".into(), |v| format!("{v:.1} bpm")));
    }
    let rate = series.median().unwrap();

    let est = detect_beats(&samples, fs, rate)?.within(1.0, 39.0);
    let truth = BeatTrain::from_times(track.beat_times().to_vec()).within(1.0, 39.0);
    let m = match_beats(&est, &truth, rate)?;
    println!("{} beats detected, {} true", est.len(), truth.len());
    println!("ibi rmse {:.1} ms, {:.1}% missing", m.rmse_ms.unwrap_or(f64::NAN), m.missing_pct);
    Ok(())
}
