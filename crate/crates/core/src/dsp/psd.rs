//! Single-segment windowed periodogram and band integration.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const MIN_PSD_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    /// Symmetric Hamming, `0.54 - 0.46 cos(2 pi n / (N - 1))`.
    Hamming,
}

impl Window {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hamming if n == 1 => vec![1.0],
            Window::Hamming => (0..n)
                .map(|i| {
                    0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()
                })
                .collect(),
        }
    }
}

/// One-sided power spectral density on a uniform grid from 0 to fs/2.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    /// Grid spacing, Hz.
    pub resolution: f64,
}

impl Psd {
    /// Builds a PSD from densities sampled at `k * resolution`.
    pub fn from_grid(resolution: f64, power: Vec<f64>) -> Self {
        let freqs = (0..power.len()).map(|k| k as f64 * resolution).collect();
        Psd {
            freqs,
            power,
            resolution,
        }
    }

    fn value_at(&self, f: f64) -> f64 {
        let pos = f / self.resolution;
        let k = pos.floor();
        if k < 0.0 {
            return self.power[0];
        }
        let k = k as usize;
        if k + 1 >= self.power.len() {
            return *self.power.last().unwrap();
        }
        let t = pos - k as f64;
        self.power[k] * (1.0 - t) + self.power[k + 1] * t
    }

    /// Trapezoidal integral of the piecewise-linear PSD over `[lo, hi]`,
    /// with the end points interpolated onto the grid.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let f_max = self.freqs.last().copied().unwrap_or(0.0);
        let lo = lo.clamp(0.0, f_max);
        let hi = hi.clamp(0.0, f_max);
        if hi <= lo {
            return 0.0;
        }
        let mut knots = vec![lo];
        let first = (lo / self.resolution).floor() as usize + 1;
        let mut k = first;
        while k < self.freqs.len() && self.freqs[k] < hi {
            if self.freqs[k] > lo {
                knots.push(self.freqs[k]);
            }
            k += 1;
        }
        knots.push(hi);
        knots
            .windows(2)
            .map(|w| 0.5 * (self.value_at(w[0]) + self.value_at(w[1])) * (w[1] - w[0]))
            .sum()
    }

    /// Grid frequency of the largest density inside `[lo, hi]`, if any is positive.
    pub fn peak_in(&self, lo: f64, hi: f64) -> Option<f64> {
        self.freqs
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .filter(|(_, p)| **p > 0.0)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(f, _)| *f)
    }

    /// Sum of density times bin width, the discrete counterpart of total power.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.resolution
    }
}

/// Windowed periodogram zero-padded to the next power of two at least four
/// times the input length.
pub fn psd(x: &[f64], fs: f64, window: Window) -> Result<Psd> {
    if x.len() < MIN_PSD_LEN {
        return Err(Error::TooShort {
            need: MIN_PSD_LEN,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = x.len();
    let nfft = (4 * n).next_power_of_two();
    let w = window.coefficients(n);
    let wss: f64 = w.iter().map(|v| v * v).sum();
    let mut buf: Vec<Complex64> = x
        .iter()
        .zip(&w)
        .map(|(v, wv)| Complex64::new(v * wv, 0.0))
        .collect();
    buf.resize(nfft, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);

    let half = nfft / 2;
    let scale = 1.0 / (fs * wss);
    let power = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            if k == 0 || k == half {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    Ok(Psd::from_grid(fs / nfft as f64, power))
}
