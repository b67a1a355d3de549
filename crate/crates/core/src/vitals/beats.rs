use crate::dsp::{self, spline_resample};
use crate::error::{Error, Result};

pub const BEAT_RESAMPLE_HZ: f64 = 500.0;
/// Only minima below this percentile of sample values count as beats.
pub const DEPTH_PERCENTILE: f64 = 40.0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BeatTrain {
    /// Trough instants, seconds from the first sample.
    pub beat_times: Vec<f64>,
    /// Successive differences, ms.
    pub ibis_ms: Vec<f64>,
}

impl BeatTrain {
    pub fn from_times(beat_times: Vec<f64>) -> Self {
        let ibis_ms = beat_times.windows(2).map(|w| 1000.0 * (w[1] - w[0])).collect();
        BeatTrain { beat_times, ibis_ms }
    }

    pub fn len(&self) -> usize {
        self.beat_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beat_times.is_empty()
    }

    /// Beats inside `[lo, hi]`.
    pub fn within(&self, lo: f64, hi: f64) -> BeatTrain {
        BeatTrain::from_times(
            self.beat_times
                .iter()
                .copied()
                .filter(|t| *t >= lo && *t <= hi)
                .collect(),
        )
    }
}

/// Trough detection on a bandpassed pulse waveform with known rate `pr_bpm`.
///
/// The waveform is spline-resampled to 500 Hz, local minima below the 40th
/// percentile are candidates, and of two candidates closer than half a pulse
/// period only the deeper survives. Trough positions are refined by a
/// parabola through the three samples around each minimum.
pub fn detect_beats(ppg: &[f64], fs: f64, pr_bpm: f64) -> Result<BeatTrain> {
    if !(pr_bpm > 0.0) || !pr_bpm.is_finite() {
        return Err(Error::InvalidArgument(format!("pulse rate {pr_bpm}")));
    }
    if ppg.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let y = spline_resample(ppg, fs, BEAT_RESAMPLE_HZ)?;
    let gate = dsp::percentile(&y, DEPTH_PERCENTILE);
    let refractory = 0.5 * 60.0 / pr_bpm;

    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut i = 1;
    while i + 1 < y.len() {
        if !(y[i] < y[i - 1] && y[i] < gate) {
            i += 1;
            continue;
        }
        // walk across a flat bottom
        let mut j = i;
        while j + 1 < y.len() && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 >= y.len() || y[j + 1] < y[i] {
            i = j + 1;
            continue;
        }
        let center = if j > i {
            0.5 * (i + j) as f64
        } else {
            let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
            let den = a - 2.0 * b + c;
            if den > 0.0 {
                i as f64 + 0.5 * (a - c) / den
            } else {
                i as f64
            }
        };
        let t = center / BEAT_RESAMPLE_HZ;
        let depth = y[i];
        match kept.last_mut() {
            Some(last) if t - last.0 < refractory => {
                if depth < last.1 {
                    *last = (t, depth);
                }
            }
            _ => kept.push((t, depth)),
        }
        i = j + 1;
    }
    Ok(BeatTrain::from_times(kept.into_iter().map(|(t, _)| t).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeatMatch {
    /// RMS error over IBIs whose both ends matched consecutive estimated beats, ms.
    pub rmse_ms: Option<f64>,
    pub missing_pct: f64,
    /// `(estimated index, reference index)` pairs in reference order.
    pub pairs: Vec<(usize, usize)>,
    pub ibi_pairs: usize,
}

/// Greedy matching: candidate pairs within `±0.5/f_PR` are accepted in order
/// of increasing time difference, each beat used at most once.
pub fn match_beats(est: &BeatTrain, reference: &BeatTrain, pr_bpm: f64) -> Result<BeatMatch> {
    if reference.is_empty() {
        return Err(Error::InvalidArgument("empty reference beat train".into()));
    }
    if !(pr_bpm > 0.0) {
        return Err(Error::InvalidArgument(format!("pulse rate {pr_bpm}")));
    }
    let window = 0.5 * 60.0 / pr_bpm;
    let mut candidates = Vec::new();
    for (ri, &r) in reference.beat_times.iter().enumerate() {
        let lo = est.beat_times.partition_point(|&e| e < r - window);
        for (ei, &e) in est.beat_times.iter().enumerate().skip(lo) {
            if e > r + window {
                break;
            }
            candidates.push(((e - r).abs(), ei, ri));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut est_of_ref = vec![None; reference.len()];
    let mut used = vec![false; est.len()];
    for (_, ei, ri) in candidates {
        if est_of_ref[ri].is_none() && !used[ei] {
            est_of_ref[ri] = Some(ei);
            used[ei] = true;
        }
    }
    let pairs: Vec<(usize, usize)> = est_of_ref
        .iter()
        .enumerate()
        .filter_map(|(ri, e)| e.map(|ei| (ei, ri)))
        .collect();
    let missing = reference.len() - pairs.len();

    let mut sq = 0.0;
    let mut n = 0;
    for r in 0..reference.len().saturating_sub(1) {
        if let (Some(a), Some(b)) = (est_of_ref[r], est_of_ref[r + 1]) {
            if b == a + 1 {
                let d = (est.beat_times[b] - est.beat_times[a])
                    - (reference.beat_times[r + 1] - reference.beat_times[r]);
                sq += (1000.0 * d).powi(2);
                n += 1;
            }
        }
    }
    Ok(BeatMatch {
        rmse_ms: (n > 0).then(|| (sq / n as f64).sqrt()),
        missing_pct: 100.0 * missing as f64 / reference.len() as f64,
        pairs,
        ibi_pairs: n,
    })
}
