//! Natural cubic spline interpolation on uniform sample grids.

use crate::error::{Error, Result};

/// Natural cubic spline through `(i * h, y[i])`.
#[derive(Debug, Clone)]
pub struct NaturalSpline {
    h: f64,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn uniform(y: &[f64], h: f64) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(Error::TooShort { need: 2, got: n });
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system [1 4 1] m = 6/h^2 * second differences (Thomas algorithm)
            let k = n - 2;
            let rhs: Vec<f64> = (1..n - 1)
                .map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h))
                .collect();
            let mut c = vec![0.0; k];
            let mut d = vec![0.0; k];
            c[0] = 1.0 / 4.0;
            d[0] = rhs[0] / 4.0;
            for i in 1..k {
                let denom = 4.0 - c[i - 1];
                c[i] = 1.0 / denom;
                d[i] = (rhs[i] - d[i - 1]) / denom;
            }
            m[k] = d[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = d[i] - c[i] * m[i + 2];
            }
        }
        Ok(NaturalSpline {
            h,
            y: y.to_vec(),
            m,
        })
    }

    pub fn span(&self) -> f64 {
        (self.y.len() - 1) as f64 * self.h
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.y.len();
        let pos = (t / self.h).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let a = (i + 1) as f64 - pos;
        let b = pos - i as f64;
        let h2 = self.h * self.h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h2 / 6.0
    }
}

/// Resamples `x` (rate `fs_in`) to `fs_out` over the same time span, starting
/// at the first sample instant.
pub fn spline_resample(x: &[f64], fs_in: f64, fs_out: f64) -> Result<Vec<f64>> {
    if x.len() < 4 {
        return Err(Error::TooShort { need: 4, got: x.len() });
    }
    if !(fs_in > 0.0 && fs_out >= fs_in) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < fs_in <= fs_out, got {fs_in} -> {fs_out}"
        )));
    }
    let s = NaturalSpline::uniform(x, 1.0 / fs_in)?;
    let span = s.span();
    let count = (span * fs_out + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| s.eval(k as f64 / fs_out)).collect())
}

/// Linear interpolation of `x` (rate `fs_in`) onto `fs_out` sample instants
/// over the same span, for rate reduction.
pub fn linear_resample(x: &[f64], fs_in: f64, fs_out: f64) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let span = (x.len() - 1) as f64 / fs_in;
    let count = (span * fs_out + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|k| {
            let pos = k as f64 / fs_out * fs_in;
            let i = (pos.floor() as usize).min(x.len() - 1);
            let t = pos - i as f64;
            if i + 1 < x.len() {
                x[i] * (1.0 - t) + x[i + 1] * t
            } else {
                x[i]
            }
        })
        .collect()
}

/// Spline when raising the rate, linear interpolation when lowering it.
pub fn resample(x: &[f64], fs_in: f64, fs_out: f64) -> Result<Vec<f64>> {
    if (fs_in - fs_out).abs() < 1e-9 {
        Ok(x.to_vec())
    } else if fs_out > fs_in {
        spline_resample(x, fs_in, fs_out)
    } else {
        Ok(linear_resample(x, fs_in, fs_out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reproduces_linear_ramp() {
        let x: Vec<f64> = (0..30).map(|i| 2.0 + 0.5 * i as f64).collect();
        let y = spline_resample(&x, 30.0, 500.0).unwrap();
        for (k, v) in y.iter().enumerate() {
            let t = k as f64 / 500.0;
            assert!((v - (2.0 + 0.5 * 30.0 * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn same_rate_is_identity() {
        let x = [1.0, 3.0, -2.0, 0.5, 4.0];
        assert_eq!(spline_resample(&x, 30.0, 30.0).unwrap(), x.to_vec());
    }

    #[test]
    fn sinusoid_upsampling_error() {
        let fs = 30.0;
        let f = 2.0;
        let x: Vec<f64> = (0..301).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect();
        let y = spline_resample(&x, fs, 500.0).unwrap();
        assert_eq!(y.len(), 5001);
        let err = y
            .iter()
            .enumerate()
            .map(|(k, v)| (v - (2.0 * PI * f * k as f64 / 500.0).sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.01, "max error {err}");
    }

    #[test]
    fn too_short() {
        assert!(spline_resample(&[1.0, 2.0, 3.0], 30.0, 500.0).is_err());
    }
}
