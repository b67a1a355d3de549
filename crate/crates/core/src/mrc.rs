//! Weighted combining of per-ROI pulse channels.
//!
//! Each ROI trace is bandpassed into a channel, channels with implausibly
//! large swings are gated out, a coarse pulse rate is found from the
//! unit-weight sum, and every surviving channel is weighted by its goodness:
//! spectral power near the pulse rate over the remaining in-band power.

use std::collections::VecDeque;

use crate::dsp::{self, Bandpass, BandpassSpec, Psd, Window};
use crate::error::Result;
use crate::roi::RoiTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrcConfig {
    /// Channels whose filtered range reaches this many intensity units are dropped.
    pub a_th: f64,
    pub goodness_floor: f64,
    pub pr_band_halfwidth_hz: f64,
    pub pr_jump_bpm: f64,
    pub goodness_cap: f64,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
}

impl Default for MrcConfig {
    fn default() -> Self {
        MrcConfig {
            a_th: 8.0,
            goodness_floor: 0.25,
            pr_band_halfwidth_hz: 0.2,
            pr_jump_bpm: 24.0,
            goodness_cap: 1e6,
            band_low_hz: BandpassSpec::DEFAULT_LOW,
            band_high_hz: BandpassSpec::DEFAULT_HIGH,
        }
    }
}

/// Denominator floor relative to total in-band power.
pub const GOODNESS_DENOM_FLOOR: f64 = 1e-12;
pub const PR_HISTORY_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateReason {
    /// Filtered range reached the amplitude threshold.
    Amplitude,
    /// Goodness below the floor.
    Floor,
    /// ROI lost by the tracker or invalid in some frame.
    Tracking,
}

impl GateReason {
    pub fn as_str(self) -> &'static str {
        match self {
            GateReason::Amplitude => "amplitude",
            GateReason::Floor => "floor",
            GateReason::Tracking => "tracking",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoiChannel {
    pub roi_id: usize,
    pub filtered: Vec<f64>,
    pub amp_range: f64,
    pub gate: Option<GateReason>,
}

impl RoiChannel {
    pub fn new(roi_id: usize, filtered: Vec<f64>) -> Self {
        let amp_range = range(&filtered);
        RoiChannel {
            roi_id,
            filtered,
            amp_range,
            gate: None,
        }
    }

    /// Bandpasses a trace; a trace with any invalid sample is gated for tracking.
    pub fn from_trace(trace: &RoiTrace, filter: &Bandpass) -> Result<Self> {
        if !trace.all_valid() {
            let mut ch = RoiChannel::new(trace.roi_id, vec![0.0; trace.values.len()]);
            ch.gate = Some(GateReason::Tracking);
            return Ok(ch);
        }
        Ok(RoiChannel::new(trace.roi_id, filter.filtfilt(&trace.values)?))
    }

    pub fn is_gated(&self) -> bool {
        self.gate.is_some()
    }
}

fn range(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    hi - lo
}

/// Gates the channel when its filtered range is at least `a_th`; only
/// channels strictly below the threshold pass.
pub fn amplitude_gate(mut ch: RoiChannel, a_th: f64) -> RoiChannel {
    if ch.gate.is_none() && ch.amp_range >= a_th {
        ch.gate = Some(GateReason::Amplitude);
    }
    ch
}

/// Coarse pulse rates of the most recent epochs, bpm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrHistory {
    values: VecDeque<f64>,
}

impl PrHistory {
    pub fn from_values(values: &[f64]) -> Self {
        let mut h = PrHistory::default();
        for &v in values {
            h.push(v);
        }
        h
    }

    pub fn push(&mut self, bpm: f64) {
        if self.values.len() == PR_HISTORY_LEN {
            self.values.pop_front();
        }
        self.values.push_back(bpm);
    }

    pub fn median(&self) -> Option<f64> {
        if self.values.is_empty() {
            return None;
        }
        let v: Vec<f64> = self.values.iter().copied().collect();
        Some(dsp::median(&v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }
}

/// Replaces a coarse PR that jumps more than `max_jump` bpm from the history
/// median by that median, then records the returned value.
pub fn correct_with_history(raw_bpm: f64, hist: &mut PrHistory, max_jump: f64) -> f64 {
    let pr = match hist.median() {
        Some(m) if (raw_bpm - m).abs() > max_jump => m,
        _ => raw_bpm,
    };
    hist.push(pr);
    pr
}

/// Pulse rate from the unit-weight sum of ungated channels, history-corrected.
/// `None` when no channel is ungated or the sum has no in-band peak; the
/// history is left untouched in that case.
pub fn coarse_pr(
    channels: &[RoiChannel],
    fs: f64,
    hist: &mut PrHistory,
    cfg: &MrcConfig,
) -> Result<Option<f64>> {
    let live: Vec<&RoiChannel> = channels.iter().filter(|c| !c.is_gated()).collect();
    let Some(first) = live.first() else {
        return Ok(None);
    };
    let mut sum = vec![0.0; first.filtered.len()];
    for ch in &live {
        for (s, v) in sum.iter_mut().zip(&ch.filtered) {
            *s += v;
        }
    }
    let spec = dsp::psd(&sum, fs, Window::Hamming)?;
    let Some(f) = spec.peak_in(cfg.band_low_hz, cfg.band_high_hz) else {
        return Ok(None);
    };
    Ok(Some(correct_with_history(60.0 * f, hist, cfg.pr_jump_bpm)))
}

/// Goodness of a channel whose spectrum is `psd`, at pulse frequency `f_pr` Hz.
pub fn goodness_from_psd(psd: &Psd, f_pr: f64, cfg: &MrcConfig) -> f64 {
    let (b1, b2) = (cfg.band_low_hz, cfg.band_high_hz);
    let b = cfg.pr_band_halfwidth_hz;
    let lo = (f_pr - b).max(b1);
    let hi = (f_pr + b).min(b2);
    let total = psd.integrate(b1, b2);
    if total <= 0.0 {
        return 0.0;
    }
    let signal = psd.integrate(lo, hi);
    let noise = (total - signal).max(GOODNESS_DENOM_FLOOR * total);
    (signal / noise).min(cfg.goodness_cap)
}

/// Goodness of one channel at pulse rate `pr_bpm`.
pub fn goodness(ch: &RoiChannel, pr_bpm: f64, fs: f64, cfg: &MrcConfig) -> Result<f64> {
    let spec = dsp::psd(&ch.filtered, fs, Window::Hamming)?;
    Ok(goodness_from_psd(&spec, pr_bpm / 60.0, cfg))
}

/// Per-ROI weights for one epoch, aligned with the channel list.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessWeights {
    pub roi_ids: Vec<usize>,
    pub weights: Vec<f64>,
    /// Pulse rate the weights were computed at, Hz (`None` for fallback weights).
    pub pr_used: Option<f64>,
    pub band_halfwidth: f64,
}

impl GoodnessWeights {
    pub fn weight_of(&self, roi_id: usize) -> Option<f64> {
        self.roi_ids
            .iter()
            .position(|&id| id == roi_id)
            .map(|i| self.weights[i])
    }
}

/// Zeroes weights strictly below `floor`.
pub fn floor_gate(mut w: GoodnessWeights, floor: f64) -> GoodnessWeights {
    for g in w.weights.iter_mut() {
        if *g < floor {
            *g = 0.0;
        }
    }
    w
}

/// Combined waveform of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct PpgEstimate {
    pub epoch: usize,
    pub samples: Vec<f64>,
    pub contributing_roi_count: usize,
    /// Coarse pulse rate used for the weights, bpm.
    pub coarse_pr: Option<f64>,
}

/// Weighted sum of ungated channels, made zero-mean and unit-RMS. `None`
/// when every contributing weight is zero.
pub fn combine(channels: &[RoiChannel], weights: &GoodnessWeights) -> Option<(Vec<f64>, usize)> {
    let len = channels.first()?.filtered.len();
    let mut out = vec![0.0; len];
    let mut used = 0;
    for (ch, &g) in channels.iter().zip(&weights.weights) {
        if ch.is_gated() || g <= 0.0 || !g.is_finite() {
            continue;
        }
        used += 1;
        for (o, v) in out.iter_mut().zip(&ch.filtered) {
            *o += g * v;
        }
    }
    if used == 0 {
        return None;
    }
    let m = dsp::mean(&out);
    out.iter_mut().for_each(|v| *v -= m);
    let r = dsp::rms(&out);
    if r <= 0.0 || !r.is_finite() {
        return None;
    }
    out.iter_mut().for_each(|v| *v /= r);
    Some((out, used))
}

/// Outcome of combining one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochCombination {
    pub channels: Vec<RoiChannel>,
    /// Goodness before floor gating; `None` for amplitude-gated channels or
    /// when no pulse rate was available.
    pub goodness: Vec<Option<f64>>,
    pub weights: GoodnessWeights,
    pub estimate: Option<PpgEstimate>,
}

/// Carries pulse-rate history and last weights from epoch to epoch.
#[derive(Debug, Clone)]
pub struct Combiner {
    pub config: MrcConfig,
    pub fs: f64,
    pub history: PrHistory,
    previous: Option<GoodnessWeights>,
    filter: Bandpass,
}

impl Combiner {
    pub fn new(config: MrcConfig, fs: f64) -> Result<Self> {
        let filter = Bandpass::design(BandpassSpec {
            low: config.band_low_hz,
            high: config.band_high_hz,
            order: BandpassSpec::DEFAULT_ORDER,
            fs,
        })?;
        Ok(Combiner {
            config,
            fs,
            history: PrHistory::default(),
            previous: None,
            filter,
        })
    }

    pub fn filter(&self) -> &Bandpass {
        &self.filter
    }

    /// Runs gating, coarse PR, goodness, floor gating and combining on one
    /// epoch's traces.
    pub fn process_epoch(&mut self, epoch: usize, traces: &[RoiTrace]) -> Result<EpochCombination> {
        let cfg = self.config;
        let mut channels = Vec::with_capacity(traces.len());
        for t in traces {
            channels.push(amplitude_gate(RoiChannel::from_trace(t, &self.filter)?, cfg.a_th));
        }
        let roi_ids: Vec<usize> = channels.iter().map(|c| c.roi_id).collect();
        let pr = coarse_pr(&channels, self.fs, &mut self.history, &cfg)?;
        let mut raw_goodness = vec![None; channels.len()];

        let weights = match pr {
            Some(bpm) => {
                let mut w = Vec::with_capacity(channels.len());
                for ch in &channels {
                    w.push(if ch.is_gated() {
                        0.0
                    } else {
                        goodness(ch, bpm, self.fs, &cfg)?
                    });
                }
                let raw = GoodnessWeights {
                    roi_ids: roi_ids.clone(),
                    weights: w,
                    pr_used: Some(bpm / 60.0),
                    band_halfwidth: cfg.pr_band_halfwidth_hz,
                };
                for ((g, &v), ch) in raw_goodness.iter_mut().zip(&raw.weights).zip(&channels) {
                    if !ch.is_gated() {
                        *g = Some(v);
                    }
                }
                let floored = floor_gate(raw.clone(), cfg.goodness_floor);
                for (ch, (&before, &after)) in
                    channels.iter_mut().zip(raw.weights.iter().zip(&floored.weights))
                {
                    if ch.gate.is_none() && before > 0.0 && after == 0.0 {
                        ch.gate = Some(GateReason::Floor);
                    }
                }
                floored
            }
            None => self.fallback_weights(&channels),
        };
        let estimate = combine(&channels, &weights).map(|(samples, n)| PpgEstimate {
            epoch,
            samples,
            contributing_roi_count: n,
            coarse_pr: pr,
        });
        if pr.is_some() {
            self.previous = Some(weights.clone());
        }
        Ok(EpochCombination {
            channels,
            goodness: raw_goodness,
            weights,
            estimate,
        })
    }

    fn fallback_weights(&self, channels: &[RoiChannel]) -> GoodnessWeights {
        let weights = channels
            .iter()
            .map(|ch| {
                if ch.is_gated() {
                    0.0
                } else {
                    self.previous
                        .as_ref()
                        .and_then(|p| p.weight_of(ch.roi_id))
                        .unwrap_or(1.0)
                }
            })
            .collect();
        GoodnessWeights {
            roi_ids: channels.iter().map(|c| c.roi_id).collect(),
            weights,
            pr_used: None,
            band_halfwidth: self.config.pr_band_halfwidth_hz,
        }
    }
}
