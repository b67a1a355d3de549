use std::fs;
use std::path::Path;

use crate::dsp;
use crate::error::{Error, Result};
use crate::frameio::GroundTruth;
use crate::vitals::report;
use crate::vitals::{
    bland_altman_report, detect_beats, match_beats, pulse_rate, snr, AgreementReport, BeatMatch, BeatTrain,
    PrSeries, SnrReport,
};

/// Largest tolerated mismatch between the estimate and reference spans.
pub const MAX_SPAN_MISMATCH: f64 = 0.10;
/// Beats this close to either end of the common span are not scored, seconds.
pub const BEAT_EDGE_MARGIN_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub snr: SnrReport,
    pub pr_est: PrSeries,
    pub pr_truth: PrSeries,
    pub agreement: AgreementReport,
    pub beats_est: BeatTrain,
    pub beats_ref: BeatTrain,
    pub beat_match: Option<BeatMatch>,
}

impl Evaluation {
    /// Absolute per-window PR errors, `None` where either side has no rate.
    pub fn window_errors(&self) -> Vec<Option<f64>> {
        self.pr_est
            .pr
            .iter()
            .zip(&self.pr_truth.pr)
            .map(|(e, t)| Some((e.as_ref()? - t.as_ref()?).abs()))
            .collect()
    }

    pub fn missing_pct(&self) -> Option<f64> {
        self.beat_match.as_ref().map(|m| m.missing_pct)
    }

    pub fn ibi_rmse_ms(&self) -> Option<f64> {
        self.beat_match.as_ref().and_then(|m| m.rmse_ms)
    }
}

/// Scores an estimate sampled at `fs` (first sample at t = 0) against a
/// reference waveform.
///
/// The reference is brought to the estimate's rate for the pulse-rate
/// windows, so both series share one spectral grid.
pub fn evaluate(estimate: &[f64], fs: f64, truth: &GroundTruth) -> Result<Evaluation> {
    if estimate.is_empty() || truth.samples.is_empty() {
        return Err(Error::SpanMismatch("empty signal".into()));
    }
    let est_end = estimate.len() as f64 / fs;
    let ref_start = truth.start;
    let ref_end = truth.start + truth.duration();
    let lo = ref_start.max(0.0);
    let hi = est_end.min(ref_end);
    let longest = est_end.max(ref_end - ref_start);
    if hi <= lo || (hi - lo) < (1.0 - MAX_SPAN_MISMATCH) * longest {
        return Err(Error::SpanMismatch(format!(
            "estimate covers [0, {est_end:.2}] s, reference [{ref_start:.2}, {ref_end:.2}] s"
        )));
    }
    let crop = |x: &[f64], rate: f64, t0: f64| -> Vec<f64> {
        let a = ((lo - t0) * rate).round().max(0.0) as usize;
        let b = (((hi - t0) * rate).round() as usize).min(x.len());
        x[a.min(b)..b].to_vec()
    };
    let k = crop(estimate, fs, 0.0);
    let z = crop(&truth.samples, truth.sample_rate, truth.start);
    let snr = snr(&k, &z, fs, truth.sample_rate)?;

    let z_fs = dsp::resample(&z, truth.sample_rate, fs)?;
    let pr_est = pulse_rate(&k, fs)?;
    let pr_truth = pulse_rate(&z_fs, fs)?;
    let agreement = bland_altman_report(&pr_est, &pr_truth);

    let span = hi - lo;
    let beats_ref_all = match &truth.beat_times {
        Some(b) => BeatTrain::from_times(b.iter().map(|t| t - lo).collect()),
        None => {
            let zf = dsp::bandpass_zero_phase(&z, dsp::BandpassSpec::pulse_band(truth.sample_rate))?;
            let rate = pr_truth.median().unwrap_or(60.0);
            detect_beats(&zf, truth.sample_rate, rate)?
        }
    };
    let beats_ref = beats_ref_all.within(BEAT_EDGE_MARGIN_S, span - BEAT_EDGE_MARGIN_S);
    let (beats_est, beat_match) = match pr_est.median() {
        Some(rate) => {
            let half = 0.5 * 60.0 / rate;
            let est = detect_beats(&k, fs, rate)?.within(BEAT_EDGE_MARGIN_S - half, span - BEAT_EDGE_MARGIN_S + half);
            let m = if beats_ref.is_empty() { None } else { Some(match_beats(&est, &beats_ref, rate)?) };
            (est, m)
        }
        None => (BeatTrain::from_times(Vec::new()), None),
    };
    Ok(Evaluation { snr, pr_est, pr_truth, agreement, beats_est, beats_ref, beat_match })
}

pub const SNR_FILE: &str = "snr.csv";
pub const PR_SERIES_FILE: &str = "pr_series.csv";
pub const IBI_FILE: &str = "ibi.csv";
pub const AGREEMENT_FILE: &str = "agreement.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Writes the report CSVs of one scored estimate into `dir`.
///
/// `summary.csv` has one row:
/// `estimator,snr_db,windows,windows_within_1bpm,missing_pct,ibi_rmse_ms`.
pub fn write_evaluation(dir: &Path, estimator: &str, e: &Evaluation) -> Result<()> {
    fs::create_dir_all(dir).map_err(|err| Error::io(dir, err))?;
    report::write_snr(&dir.join(SNR_FILE), &[(estimator, e.snr)])?;
    report::write_pr_series(&dir.join(PR_SERIES_FILE), &e.pr_est, Some(&e.pr_truth))?;
    report::write_ibi(&dir.join(IBI_FILE), &e.beats_est, e.beat_match.as_ref().map(|m| (&e.beats_ref, m)))?;
    report::write_agreement(&dir.join(AGREEMENT_FILE), &e.agreement)?;

    let path = dir.join(SUMMARY_FILE);
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let errs = e.window_errors();
    let within = errs.iter().filter(|w| w.is_some_and(|v| v <= 1.0)).count();
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["estimator", "snr_db", "windows", "windows_within_1bpm", "missing_pct", "ibi_rmse_ms"])?;
    w.write_record([
        estimator.to_string(),
        e.snr.snr_db.to_string(),
        errs.len().to_string(),
        within.to_string(),
        opt(e.missing_pct()),
        opt(e.ibi_rmse_ms()),
    ])?;
    w.flush().map_err(|err| Error::io(&path, err))
}
