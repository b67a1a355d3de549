use std::path::Path;

use crate::dsp;
use crate::error::{Error, Result};
use crate::frameio::{FrameSequence, GroundTruth, RegionFile};

use super::baseline::face_average;
use super::config::{Estimator, RunConfig};
use super::distance::{distance_ppg, PpgOutput};
use super::evaluate::{evaluate, Evaluation};

/// One estimator's line of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub estimator: Estimator,
    pub evaluation: Evaluation,
    pub gated_roi_epochs: usize,
    pub roi_epochs: usize,
}

impl CompareRow {
    /// Share of scored windows whose PR error is at most `bpm`.
    pub fn windows_within(&self, bpm: f64) -> f64 {
        let errs: Vec<f64> = self.evaluation.window_errors().into_iter().map(|e| e.unwrap_or(f64::INFINITY)).collect();
        if errs.is_empty() {
            return 0.0;
        }
        errs.iter().filter(|&&e| e <= bpm).count() as f64 / errs.len() as f64
    }

    pub fn gated_fraction(&self) -> f64 {
        if self.roi_epochs == 0 {
            0.0
        } else {
            self.gated_roi_epochs as f64 / self.roi_epochs as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub distance: CompareRow,
    pub baseline: CompareRow,
    pub outputs: [PpgOutput; 2],
}

impl Comparison {
    /// SNR of the weighted estimate minus that of the face average, dB.
    pub fn delta_snr_db(&self) -> f64 {
        self.distance.evaluation.snr.snr_db - self.baseline.evaluation.snr.snr_db
    }
}

fn row(out: &PpgOutput, truth: &GroundTruth) -> Result<CompareRow> {
    Ok(CompareRow {
        estimator: out.estimator,
        evaluation: evaluate(&out.samples, out.fps, truth)?,
        gated_roi_epochs: out.gated_roi_epochs(),
        roi_epochs: out.roi_epochs(),
    })
}

/// Runs both estimators on the same input and scores them against `truth`.
pub fn compare(seq: &FrameSequence, regions: &RegionFile, truth: &GroundTruth, cfg: &RunConfig) -> Result<Comparison> {
    let d = distance_ppg(seq, regions, cfg, false)?;
    let b = face_average(seq, regions, cfg)?;
    Ok(Comparison { distance: row(&d, truth)?, baseline: row(&b, truth)?, outputs: [d, b] })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_comparison(path: &Path, c: &Comparison) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "estimator",
        "snr_db",
        "delta_snr_db",
        "pr_median_abs_error_bpm",
        "windows_within_2bpm",
        "windows_over_5bpm",
        "mean_bias_bpm",
        "ibi_rmse_ms",
        "missing_pct",
        "gated_roi_epochs",
        "roi_epochs",
    ])?;
    for (r, delta) in [(&c.distance, Some(c.delta_snr_db())), (&c.baseline, None)] {
        let e = &r.evaluation;
        let errs: Vec<f64> = e.window_errors().into_iter().flatten().collect();
        let med = (!errs.is_empty()).then(|| dsp::median(&errs));
        w.write_record([
            r.estimator.to_string(),
            e.snr.snr_db.to_string(),
            opt(delta),
            opt(med),
            r.windows_within(2.0).to_string(),
            (1.0 - r.windows_within(5.0)).to_string(),
            opt(e.agreement.all.as_ref().map(|a| a.mean_bias)),
            opt(e.ibi_rmse_ms()),
            opt(e.missing_pct()),
            r.gated_roi_epochs.to_string(),
            r.roi_epochs.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Time series of both estimates and the reference at the frame rate.
pub fn write_plot(path: &Path, c: &Comparison, truth: &GroundTruth) -> Result<()> {
    let [d, b] = &c.outputs;
    let fs = d.fps;
    let z = dsp::resample(&truth.samples, truth.sample_rate, fs)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time_s", "truth", "distanceppg", "face_average"])?;
    for i in 0..d.samples.len() {
        let t = i as f64 / fs;
        let zi = ((t - truth.start) * fs).round();
        let zv = (zi >= 0.0).then(|| z.get(zi as usize).copied()).flatten();
        w.write_record([t.to_string(), opt(zv), d.samples[i].to_string(), b.samples[i].to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
