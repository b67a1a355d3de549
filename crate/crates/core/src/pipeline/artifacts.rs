//! File layout of simulation and estimation outputs.
//!
//! A simulation directory holds `frames/`, `regions.txt`, `truth.csv`
//! (`time_s,value` at 500 Hz), `beats.csv`, `affines.csv`,
//! `roi_amplitudes.csv` and `scene.txt`. An estimation directory holds
//! `ppg.csv` (`time_s,value`), `weights.csv` and `epochs.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::frameio::{
    store_beats, store_ground_truth, store_regions, store_sequence, FrameSequence,
    GroundTruth,
};
use crate::simulator::{SceneSpec, SceneTruth, TRUTH_RATE_HZ};

use super::distance::PpgOutput;

pub const FRAMES_DIR: &str = "frames";
pub const REGIONS_FILE: &str = "regions.txt";
pub const TRUTH_FILE: &str = "truth.csv";
pub const BEATS_FILE: &str = "beats.csv";
pub const AFFINES_FILE: &str = "affines.csv";
pub const AMPLITUDES_FILE: &str = "roi_amplitudes.csv";
pub const SCENE_FILE: &str = "scene.txt";
pub const PPG_FILE: &str = "ppg.csv";
pub const WEIGHTS_FILE: &str = "weights.csv";
pub const EPOCHS_FILE: &str = "epochs.csv";

fn flush(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// The 500 Hz reference waveform with its beat instants.
pub fn reference_waveform(truth: &SceneTruth) -> GroundTruth {
    GroundTruth {
        sample_rate: TRUTH_RATE_HZ,
        start: 0.0,
        samples: truth.ppg_500.clone(),
        beat_times: Some(truth.beat_times.clone()),
    }
}

pub fn write_simulation(dir: &Path, spec: &SceneSpec, seq: &FrameSequence, truth: &SceneTruth) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    store_sequence(seq, dir.join(FRAMES_DIR))?;
    store_regions(&truth.regions, dir.join(REGIONS_FILE))?;
    store_ground_truth(&reference_waveform(truth), dir.join(TRUTH_FILE))?;
    store_beats(&truth.beat_times, dir.join(BEATS_FILE))?;
    let scene = dir.join(SCENE_FILE);
    fs::write(&scene, spec.to_text()).map_err(|e| Error::io(&scene, e))?;

    let path = dir.join(AFFINES_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["frame", "region", "a11", "a12", "tx", "a21", "a22", "ty"])?;
    for (ri, label) in truth.region_labels.iter().enumerate() {
        for (f, a) in truth.region_affines[ri].iter().enumerate() {
            let m = a.m;
            w.write_record([
                f.to_string(),
                label.clone(),
                m[0][0].to_string(),
                m[0][1].to_string(),
                m[0][2].to_string(),
                m[1][0].to_string(),
                m[1][1].to_string(),
                m[1][2].to_string(),
            ])?;
        }
    }
    flush(w, &path)?;

    let path = dir.join(AMPLITUDES_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["roi_id", "region", "amplitude", "true_snr_db"])?;
    for a in &truth.roi_amplitudes {
        w.write_record([a.roi_id.to_string(), a.region_label.clone(), a.amplitude.to_string(), opt(a.true_snr_db)])?;
    }
    flush(w, &path)
}

pub fn write_ppg(path: &Path, out: &PpgOutput) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time_s", "value"])?;
    for (i, v) in out.samples.iter().enumerate() {
        w.write_record([(i as f64 / out.fps).to_string(), v.to_string()])?;
    }
    flush(w, path)
}

/// Reads `ppg.csv` back as `(samples, fps)`.
pub fn load_ppg(path: &Path) -> Result<(Vec<f64>, f64)> {
    let g = crate::frameio::load_ground_truth(path)?;
    if g.start.abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!("{} must start at t = 0", path.display())));
    }
    Ok((g.samples, g.sample_rate))
}

pub fn write_weights(path: &Path, out: &PpgOutput) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "start_s", "roi_id", "region", "goodness", "weight", "gate", "amp_range"])?;
    for e in &out.epochs {
        let start = (e.start_frame as f64 / out.fps).to_string();
        for r in &e.rois {
            w.write_record([
                e.index.to_string(),
                start.clone(),
                r.roi_id.to_string(),
                r.region_label.clone(),
                opt(r.goodness),
                r.weight.to_string(),
                r.gate.map(|g| g.as_str()).unwrap_or("").to_string(),
                r.amp_range.to_string(),
            ])?;
        }
    }
    flush(w, path)
}

pub fn write_epochs(path: &Path, out: &PpgOutput) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "start_s", "frames", "coarse_pr_bpm", "contributing_rois", "gated_rois", "tracked_regions"])?;
    for e in &out.epochs {
        let tracked = e.regions.iter().filter(|r| r.status.is_tracked()).count();
        w.write_record([
            e.index.to_string(),
            (e.start_frame as f64 / out.fps).to_string(),
            e.frames.to_string(),
            opt(e.coarse_pr),
            e.contributing.to_string(),
            e.gated_count().to_string(),
            tracked.to_string(),
        ])?;
    }
    flush(w, path)
}

pub fn write_estimate(dir: &Path, out: &PpgOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_ppg(&dir.join(PPG_FILE), out)?;
    write_weights(&dir.join(WEIGHTS_FILE), out)?;
    write_epochs(&dir.join(EPOCHS_FILE), out)
}

/// Goodness of one ROI averaged over the epochs where it was computed, next
/// to its true pulsatile amplitude and SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessPoint {
    pub roi_id: usize,
    pub region: String,
    pub goodness_db: Option<f64>,
    pub amplitude: f64,
    pub true_snr_db: Option<f64>,
}

fn records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    r.records().map(|x| x.map_err(Error::from)).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, path: &Path) -> Result<T> {
    rec.get(k)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::InvalidArgument(format!("{}: bad field {k} in {:?}", path.display(), rec)))
}

/// Joins `weights.csv` with `roi_amplitudes.csv` by ROI id.
pub fn goodness_scatter(weights: &Path, amplitudes: &Path) -> Result<Vec<GoodnessPoint>> {
    let mut by_roi: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for rec in records(weights)? {
        let id: usize = field(&rec, 2, weights)?;
        let entry = by_roi.entry(id).or_default();
        if let Some(g) = rec.get(4).and_then(|s| s.parse::<f64>().ok()).filter(|g| *g > 0.0) {
            entry.push(g);
        }
    }
    let mut out = Vec::new();
    for rec in records(amplitudes)? {
        let id: usize = field(&rec, 0, amplitudes)?;
        let region: String = field(&rec, 1, amplitudes)?;
        let amplitude: f64 = field(&rec, 2, amplitudes)?;
        let true_snr_db = rec.get(3).and_then(|s| s.parse::<f64>().ok());
        let goodness_db = by_roi
            .get(&id)
            .filter(|g| !g.is_empty())
            .map(|g| 10.0 * (g.iter().sum::<f64>() / g.len() as f64).log10());
        out.push(GoodnessPoint { roi_id: id, region, goodness_db, amplitude, true_snr_db });
    }
    Ok(out)
}

pub fn write_goodness(path: &Path, points: &[GoodnessPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["roi_id", "region", "goodness_db", "amplitude", "true_snr_db"])?;
    for p in points {
        w.write_record([
            p.roi_id.to_string(),
            p.region.clone(),
            opt(p.goodness_db),
            p.amplitude.to_string(),
            opt(p.true_snr_db),
        ])?;
    }
    flush(w, path)
}

/// Reads a ground-truth CSV, attaching beats when a beat file is given.
pub fn load_reference(truth: &Path, beats: Option<&Path>) -> Result<GroundTruth> {
    let mut g = crate::frameio::load_ground_truth(truth)?;
    if let Some(b) = beats {
        g.beat_times = Some(crate::frameio::load_beats(b)?);
    }
    Ok(g)
}
