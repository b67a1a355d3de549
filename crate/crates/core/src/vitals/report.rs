//! Headered CSV reports.
//!
//! | file            | columns |
//! |-----------------|---------|
//! | `pr_series.csv` | `window_center_s,pr_est_bpm,pr_truth_bpm,error_bpm` |
//! | `ibi.csv`       | `beat_index,beat_time_s,ibi_ms,matched_ref_time_s` |
//! | `snr.csv`       | `estimator,snr_db,scale_ratio,lag_s` |
//! | `agreement.csv` | `subset,n,mean_bias_bpm,sd_bpm,loa_low_bpm,loa_high_bpm,outliers,unpaired` |
//!
//! Missing values are written as empty fields.

use std::path::Path;

use crate::error::Result;

use super::{AgreementReport, AgreementStats, BeatMatch, BeatTrain, PrSeries, SnrReport};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_pr_series(path: &Path, est: &PrSeries, truth: Option<&PrSeries>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["window_center_s", "pr_est_bpm", "pr_truth_bpm", "error_bpm"])?;
    for (i, (c, p)) in est.centers.iter().zip(&est.pr).enumerate() {
        let t = truth.and_then(|s| s.pr.get(i).copied().flatten());
        let err = p.zip(t).map(|(a, b)| a - b);
        w.write_record([c.to_string(), opt(*p), opt(t), opt(err)])?;
    }
    w.flush().map_err(|e| crate::Error::io(path, e))?;
    Ok(())
}

pub fn write_ibi(path: &Path, est: &BeatTrain, reference: Option<(&BeatTrain, &BeatMatch)>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["beat_index", "beat_time_s", "ibi_ms", "matched_ref_time_s"])?;
    let mut matched = vec![None; est.len()];
    if let Some((r, m)) = reference {
        for &(ei, ri) in &m.pairs {
            matched[ei] = Some(r.beat_times[ri]);
        }
    }
    for (i, t) in est.beat_times.iter().enumerate() {
        let ibi = (i > 0).then(|| est.ibis_ms[i - 1]);
        w.write_record([i.to_string(), t.to_string(), opt(ibi), opt(matched[i])])?;
    }
    w.flush().map_err(|e| crate::Error::io(path, e))?;
    Ok(())
}

pub fn write_snr(path: &Path, rows: &[(&str, SnrReport)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["estimator", "snr_db", "scale_ratio", "lag_s"])?;
    for (name, r) in rows {
        w.write_record([
            name.to_string(),
            r.snr_db.to_string(),
            r.scale_ratio.to_string(),
            r.lag_s.to_string(),
        ])?;
    }
    w.flush().map_err(|e| crate::Error::io(path, e))?;
    Ok(())
}

pub fn write_agreement(path: &Path, rep: &AgreementReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "subset",
        "n",
        "mean_bias_bpm",
        "sd_bpm",
        "loa_low_bpm",
        "loa_high_bpm",
        "outliers",
        "unpaired",
    ])?;
    let row = |name: &str, s: Option<AgreementStats>| -> Vec<String> {
        let mut v = vec![name.to_string()];
        match s {
            Some(s) => v.extend([
                s.n.to_string(),
                s.mean_bias.to_string(),
                s.sd.to_string(),
                s.loa_low.to_string(),
                s.loa_high.to_string(),
            ]),
            None => v.extend(["0".to_string(), String::new(), String::new(), String::new(), String::new()]),
        }
        v.push(rep.outliers.to_string());
        v.push(rep.unpaired.to_string());
        v
    };
    w.write_record(row("all", rep.all))?;
    w.write_record(row("filtered", rep.filtered))?;
    w.flush().map_err(|e| crate::Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pr_series_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pr_series.csv");
        let s = PrSeries { centers: vec![5.0, 10.0], pr: vec![Some(72.0), None] };
        write_pr_series(&p, &s, Some(&s)).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "window_center_s,pr_est_bpm,pr_truth_bpm,error_bpm\n5,72,72,0\n10,,,\n");
    }

    #[test]
    fn ibi_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ibi.csv");
        let b = BeatTrain::from_times(vec![1.0, 1.8]);
        write_ibi(&p, &b, None).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("beat_index,beat_time_s,ibi_ms,matched_ref_time_s\n0,1,,\n1,1.8,"));
    }
}
