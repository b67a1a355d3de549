use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::spec::PpgModel;
use crate::error::{Error, Result};
use crate::seeds;

const PPG_STREAM: u64 = 0x5050_4701;

/// Synthetic pulse waveform with explicit beat (trough) instants.
///
/// Within beat `k` the phase runs linearly from 0 to 2 pi, and the waveform is
/// `-(a1 cos phi + a2 cos 2 phi + a3 cos 3 phi)`, so every beat starts at a trough.
#[derive(Debug, Clone, PartialEq)]
pub struct PpgTrack {
    /// Trough instants, including one at or before 0 and one after the end.
    knots: Vec<f64>,
    harmonics: [f64; 3],
    duration: f64,
}

impl PpgTrack {
    pub fn value(&self, t: f64) -> f64 {
        let k = self.knots.partition_point(|&b| b <= t).clamp(1, self.knots.len() - 1) - 1;
        let (t0, t1) = (self.knots[k], self.knots[k + 1]);
        let phi = 2.0 * PI * (t - t0) / (t1 - t0);
        let [a1, a2, a3] = self.harmonics;
        -(a1 * phi.cos() + a2 * (2.0 * phi).cos() + a3 * (3.0 * phi).cos())
    }

    /// Beat instants inside `[0, duration]`.
    pub fn beat_times(&self) -> Vec<f64> {
        self.knots
            .iter()
            .copied()
            .filter(|&t| (0.0..=self.duration).contains(&t))
            .collect()
    }

    /// Samples at `k / fs` for `k < n`.
    pub fn sample(&self, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| self.value(k as f64 / fs)).collect()
    }
}

/// Generates beats whose periods follow the (possibly ramping) rate with
/// Gaussian jitter, starting at a seeded random phase.
pub fn synth_ppg(model: &PpgModel, duration: f64, seed: u64) -> Result<PpgTrack> {
    let rate_at = |t: f64| match model.pr_bpm_end {
        Some(end) => model.pr_bpm + (end - model.pr_bpm) * (t / duration).clamp(0.0, 1.0),
        None => model.pr_bpm,
    };
    for r in [model.pr_bpm, rate_at(duration)] {
        if !(40.0..=180.0).contains(&r) {
            return Err(Error::Scene(format!("pulse rate {r} bpm outside [40, 180]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, PPG_STREAM, 0));
    let jitter = Normal::new(0.0, model.prv_jitter_ms / 1000.0)
        .map_err(|e| Error::Scene(format!("jitter: {e}")))?;
    let mut t = -rng.random::<f64>() * 60.0 / rate_at(0.0);
    let mut knots = vec![t];
    while t <= duration {
        let period = 60.0 / rate_at(t) + jitter.sample(&mut rng);
        if period <= 0.0 {
            return Err(Error::Scene(format!(
                "beat period went non-positive ({period:.3} s); jitter too large"
            )));
        }
        t += period;
        knots.push(t);
    }
    Ok(PpgTrack { knots, harmonics: model.harmonics, duration })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{self, psd, Window};

    fn model(jitter: f64, h2: f64) -> PpgModel {
        PpgModel { pr_bpm: 72.0, pr_bpm_end: None, harmonics: [1.0, h2, 0.0], prv_jitter_ms: jitter }
    }

    #[test]
    fn fixed_rate_spacing() {
        let p = synth_ppg(&model(0.0, 0.0), 40.0, 3).unwrap();
        let b = p.beat_times();
        for w in b.windows(2) {
            assert!((w[1] - w[0] - 60.0 / 72.0).abs() < 1e-9);
        }
        // troughs of the waveform are the beats
        for &t in &b {
            assert!((p.value(t) + 1.0).abs() < 1e-9);
            assert!(p.value(t + 0.01) > p.value(t));
            assert!(p.value(t - 0.01) > p.value(t));
        }
    }

    #[test]
    fn jitter_shows_in_ibis() {
        let p = synth_ppg(&model(30.0, 0.0), 170.0, 11).unwrap();
        let b = p.beat_times();
        assert!(b.len() >= 200);
        let ibis: Vec<f64> = b.windows(2).map(|w| 1000.0 * (w[1] - w[0])).collect();
        let m = dsp::mean(&ibis);
        let sd = (ibis.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (ibis.len() - 1) as f64).sqrt();
        assert!((24.0..=36.0).contains(&sd), "{sd}");
    }

    #[test]
    fn second_harmonic_power_gap() {
        let p = synth_ppg(&model(0.0, 0.3), 40.0, 5).unwrap();
        let x = p.sample(30.0, 1200);
        let s = psd(&x, 30.0, Window::Hamming).unwrap();
        let f1 = s.peak_in(0.5, 1.8).unwrap();
        let f2 = s.peak_in(1.8, 3.0).unwrap();
        assert!((f1 - 1.2).abs() < 0.02 && (f2 - 2.4).abs() < 0.02);
        let p1 = s.integrate(f1 - 0.2, f1 + 0.2);
        let p2 = s.integrate(f2 - 0.2, f2 + 0.2);
        let gap = 10.0 * (p1 / p2).log10();
        assert!((gap - 10.46).abs() < 0.3, "{gap}");
    }

    #[test]
    fn zero_mean_over_whole_beats() {
        let p = synth_ppg(&model(10.0, 0.25), 20.0, 9).unwrap();
        let b = p.beat_times();
        let (t0, t1) = (b[0], b[b.len() - 1]);
        let n = 200_000;
        let mean: f64 = (0..n).map(|k| p.value(t0 + (t1 - t0) * (k as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-3, "{mean}");
    }

    #[test]
    fn absurd_jitter_is_rejected() {
        assert!(synth_ppg(&model(5000.0, 0.0), 40.0, 1).is_err());
    }

    #[test]
    fn rate_outside_range() {
        let mut m = model(0.0, 0.0);
        m.pr_bpm = 30.0;
        assert!(synth_ppg(&m, 10.0, 1).is_err());
    }
}
