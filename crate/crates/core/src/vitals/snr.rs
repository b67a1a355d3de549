use crate::dsp::{self, BandpassSpec};
use crate::error::{Error, Result};

pub const SNR_CAP_DB: f64 = 60.0;
pub const ALIGN_MAX_LAG_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    pub snr_db: f64,
    /// Projection coefficient of the estimate onto the reference.
    pub scale_ratio: f64,
    /// Shift applied to the reference, seconds (positive: reference delayed).
    pub lag_s: f64,
}

/// SNR of `k` against an already aligned reference of equal length: the
/// estimate is split into its projection on `z` and the orthogonal rest.
pub fn snr_aligned(k: &[f64], z: &[f64]) -> Result<SnrReport> {
    if k.len() != z.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch {} vs {}",
            k.len(),
            z.len()
        )));
    }
    if k.iter().chain(z).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let zz = dsp::dot(z, z);
    if zz <= 0.0 {
        return Err(Error::ZeroReference);
    }
    let a = dsp::dot(k, z) / zz;
    let signal = a * a * zz;
    let noise: f64 = k.iter().zip(z).map(|(kv, zv)| (kv - a * zv).powi(2)).sum();
    let db = if noise <= 0.0 {
        SNR_CAP_DB
    } else if signal <= 0.0 {
        -SNR_CAP_DB
    } else {
        (10.0 * (signal / noise).log10()).clamp(-SNR_CAP_DB, SNR_CAP_DB)
    };
    Ok(SnrReport {
        snr_db: db,
        scale_ratio: a,
        lag_s: 0.0,
    })
}

fn best_lag(k: &[f64], z: &[f64], max_lag: usize) -> isize {
    let n = k.len().min(z.len()) as isize;
    let mut best = (0isize, f64::NEG_INFINITY);
    for lag in -(max_lag as isize)..=(max_lag as isize) {
        let mut c = 0.0;
        for i in 0..n {
            let j = i - lag;
            if j >= 0 && j < z.len() as isize {
                c += k[i as usize] * z[j as usize];
            }
        }
        // exact ties prefer the smaller shift
        if c > best.1 || (c == best.1 && lag.abs() < best.0.abs()) {
            best = (lag, c);
        }
    }
    best.0
}

/// SNR of estimate `k` (rate `fs_k`) against reference `z` (rate `fs_z`).
///
/// `z` is resampled to `fs_k` (spline up, linear down), both are bandpassed
/// to the pulse band with the same filter, and `z` is shifted within ±1 s to maximise the cross-correlation before the
/// projection is computed over the overlapping samples.
pub fn snr(k: &[f64], z: &[f64], fs_k: f64, fs_z: f64) -> Result<SnrReport> {
    if z.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroReference);
    }
    let zr = dsp::resample(z, fs_z, fs_k)?;
    let band = BandpassSpec::pulse_band(fs_k);
    let kf = dsp::bandpass_zero_phase(k, band)?;
    let zr = dsp::bandpass_zero_phase(&zr, band)?;
    let max_lag = (ALIGN_MAX_LAG_S * fs_k).round() as usize;
    let lag = best_lag(&kf, &zr, max_lag);
    let (ks, zs): (Vec<f64>, Vec<f64>) = (0..kf.len())
        .filter_map(|i| {
            let j = i as isize - lag;
            (j >= 0 && (j as usize) < zr.len()).then(|| (kf[i], zr[j as usize]))
        })
        .unzip();
    let mut rep = snr_aligned(&ks, &zs)?;
    rep.lag_s = lag as f64 / fs_k;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const FS: f64 = 30.0;

    fn tone(f: f64, amp: f64, n: usize, phase: f64) -> Vec<f64> {
        (0..n).map(|i| amp * (2.0 * PI * f * i as f64 / FS + phase).sin()).collect()
    }

    #[test]
    fn perfect_estimate_hits_cap() {
        let z = tone(1.2, 1.0, 1200, 0.0);
        let k: Vec<f64> = z.iter().map(|v| 3.0 * v).collect();
        let r = snr(&k, &z, FS, FS).unwrap();
        assert_eq!(r.snr_db, SNR_CAP_DB);
        assert!((r.scale_ratio - 3.0).abs() < 1e-9);
        assert_eq!(snr(&z, &z, FS, FS).unwrap().snr_db, SNR_CAP_DB);
    }

    #[test]
    fn orthogonal_estimate_hits_floor() {
        let z = tone(1.5, 1.0, 300, 0.0);
        let k = tone(1.5, 1.0, 300, PI / 2.0);
        assert_eq!(snr_aligned(&k, &z).unwrap().snr_db, -SNR_CAP_DB);
    }

    #[test]
    fn constructed_ten_db() {
        let n = 1200;
        let z = tone(1.2, 1.0, n, 0.0);
        // 2.1 Hz over 40 s is an integer number of periods, so orthogonal to z
        let noise = tone(2.1, (0.1f64).sqrt(), n, 0.3);
        let k: Vec<f64> = z.iter().zip(&noise).map(|(a, b)| a + b).collect();
        let r = snr(&k, &z, FS, FS).unwrap();
        assert!((r.snr_db - 10.0).abs() < 0.1, "{}", r.snr_db);
        assert_eq!(r.lag_s, 0.0);
    }

    #[test]
    fn scale_invariant() {
        let z = tone(1.2, 1.0, 900, 0.0);
        let k: Vec<f64> = z.iter().zip(tone(2.7, 0.8, 900, 1.0)).map(|(a, b)| a + b).collect();
        let a = snr(&k, &z, FS, FS).unwrap().snr_db;
        let k2: Vec<f64> = k.iter().map(|v| 17.5 * v).collect();
        let b = snr(&k2, &z, FS, FS).unwrap().snr_db;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn recovers_delay_and_rate() {
        let fs_z = 120.0;
        let z: Vec<f64> = (0..4800).map(|i| (2.0 * PI * 1.1 * i as f64 / fs_z).sin()
            + 0.4 * (2.0 * PI * 2.2 * i as f64 / fs_z).sin()).collect();
        // estimate lags the reference by 10 samples at 30 Hz
        let k: Vec<f64> = (0..1200)
            .map(|i| {
                let t = (i as f64 - 10.0) / FS;
                (2.0 * PI * 1.1 * t).sin() + 0.4 * (2.0 * PI * 2.2 * t).sin()
            })
            .collect();
        let r = snr(&k, &z, FS, fs_z).unwrap();
        assert!((r.lag_s - 10.0 / FS).abs() < 1e-9, "{}", r.lag_s);
        // residual comes from the filter edge transients of the two differently framed signals
        assert!(r.snr_db > 20.0, "{}", r.snr_db);
    }

    #[test]
    fn zero_reference() {
        assert!(matches!(snr(&[1.0; 300], &[0.0; 300], FS, FS), Err(Error::ZeroReference)));
    }
}
