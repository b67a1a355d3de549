//! Vital-sign extraction from a pulse waveform: windowed pulse rate, beat
//! (trough) detection, beat matching against a reference, waveform SNR and
//! Bland-Altman agreement.

mod agreement;
mod beats;
pub mod report;
mod snr;

pub use agreement::{bland_altman, bland_altman_report, AgreementReport, AgreementStats, OUTLIER_BPM};
pub use beats::{detect_beats, match_beats, BeatMatch, BeatTrain, BEAT_RESAMPLE_HZ, DEPTH_PERCENTILE};
pub use snr::{snr, snr_aligned, SnrReport, ALIGN_MAX_LAG_S, SNR_CAP_DB};

use crate::dsp::{self, Window};
use crate::error::{Error, Result};

pub const PR_WINDOW_S: f64 = 10.0;
pub const PR_STEP_S: f64 = 5.0;

/// Pulse rate per sliding window.
#[derive(Debug, Clone, PartialEq)]
pub struct PrSeries {
    /// Window centers, seconds from the first sample.
    pub centers: Vec<f64>,
    /// `None` when the window has no positive in-band spectral peak.
    pub pr: Vec<Option<f64>>,
}

impl PrSeries {
    pub fn len(&self) -> usize {
        self.pr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pr.is_empty()
    }

    /// Median over windows that produced a rate.
    pub fn median(&self) -> Option<f64> {
        let v: Vec<f64> = self.pr.iter().flatten().copied().collect();
        (!v.is_empty()).then(|| dsp::median(&v))
    }
}

/// Hamming-windowed spectral peak in [0.5, 5] Hz for every 10 s window,
/// advancing 5 s at a time.
pub fn pulse_rate(ppg: &[f64], fs: f64) -> Result<PrSeries> {
    if !(fs > 0.0) {
        return Err(Error::InvalidArgument(format!("sample rate {fs}")));
    }
    let win = (PR_WINDOW_S * fs).round() as usize;
    let step = ((PR_STEP_S * fs).round() as usize).max(1);
    if ppg.len() < win {
        return Err(Error::TooShort { need: win, got: ppg.len() });
    }
    let mut centers = Vec::new();
    let mut pr = Vec::new();
    let mut start = 0;
    while start + win <= ppg.len() {
        let spec = dsp::psd(&ppg[start..start + win], fs, Window::Hamming)?;
        centers.push((start as f64 + win as f64 / 2.0) / fs);
        pr.push(
            spec.peak_in(dsp::BandpassSpec::DEFAULT_LOW, dsp::BandpassSpec::DEFAULT_HIGH)
                .map(|f| 60.0 * f),
        );
        start += step;
    }
    Ok(PrSeries { centers, pr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn steady_tone() {
        let fs = 30.0;
        let x: Vec<f64> = (0..1200).map(|i| (2.0 * PI * 1.2 * i as f64 / fs).sin()).collect();
        let s = pulse_rate(&x, fs).unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(s.centers[0], 5.0);
        for p in &s.pr {
            // grid spacing is 30/2048 Hz
            assert!((p.unwrap() - 72.0).abs() < 0.45);
        }
    }

    #[test]
    fn rate_step() {
        let fs = 30.0;
        let mut phase = 0.0;
        let x: Vec<f64> = (0..1200)
            .map(|i| {
                let f = if i < 600 { 1.0 } else { 1.5 };
                phase += 2.0 * PI * f / fs;
                phase.sin()
            })
            .collect();
        let s = pulse_rate(&x, fs).unwrap();
        for (c, p) in s.centers.iter().zip(&s.pr) {
            let p = p.unwrap();
            if *c + 5.0 <= 20.0 {
                assert!((p - 60.0).abs() < 1.0, "{c} {p}");
            } else if *c - 5.0 >= 20.0 {
                assert!((p - 90.0).abs() < 1.0, "{c} {p}");
            }
        }
    }

    #[test]
    fn zero_signal_has_no_peak() {
        let s = pulse_rate(&[0.0; 600], 30.0).unwrap();
        assert!(s.pr.iter().all(Option::is_none));
        assert_eq!(s.median(), None);
    }

    #[test]
    fn short_input() {
        assert!(matches!(pulse_rate(&[0.0; 100], 30.0), Err(Error::TooShort { .. })));
    }
}
