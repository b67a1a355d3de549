//! Butterworth bandpass design and zero-phase (forward-backward) filtering.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// Passband of the pulse band filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandpassSpec {
    pub low: f64,
    pub high: f64,
    /// Order of the lowpass prototype; the bandpass has twice as many poles.
    pub order: usize,
    pub fs: f64,
}

impl BandpassSpec {
    pub const DEFAULT_LOW: f64 = 0.5;
    pub const DEFAULT_HIGH: f64 = 5.0;
    pub const DEFAULT_ORDER: usize = 2;

    pub fn pulse_band(fs: f64) -> Self {
        BandpassSpec {
            low: Self::DEFAULT_LOW,
            high: Self::DEFAULT_HIGH,
            order: Self::DEFAULT_ORDER,
            fs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.low > 0.0 && self.low < self.high && self.high < self.fs / 2.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < low < high < fs/2, got low={} high={} fs={}",
                self.low, self.high, self.fs
            )));
        }
        if self.order == 0 {
            return Err(Error::InvalidArgument("filter order must be >= 1".into()));
        }
        Ok(())
    }
}

/// One biquad in direct form II transposed: `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        let num = self.b[0] + self.b[1] * zi + self.b[2] * zi * zi;
        let den = self.a[0] + self.a[1] * zi + self.a[2] * zi * zi;
        num / den
    }

    /// State that leaves the filter at rest for a constant unit input.
    fn steady_state(&self) -> [f64; 2] {
        let g = (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2]);
        let z2 = self.b[2] - self.a[2] * g;
        let z1 = self.b[1] - self.a[1] * g + z2;
        [z1, z2]
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2])
    }
}

/// A designed bandpass as a cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Bandpass {
    pub spec: BandpassSpec,
    pub sections: Vec<Biquad>,
}

fn poly_from_roots(r1: Complex64, r2: Complex64) -> [f64; 3] {
    [1.0, -(r1 + r2).re, (r1 * r2).re]
}

impl Bandpass {
    /// Butterworth bandpass via lowpass-to-bandpass mapping and the bilinear
    /// transform with prewarped band edges.
    pub fn design(spec: BandpassSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.order;
        let fs2 = 2.0 * spec.fs;
        let w1 = fs2 * (std::f64::consts::PI * spec.low / spec.fs).tan();
        let w2 = fs2 * (std::f64::consts::PI * spec.high / spec.fs).tan();
        let bw = w2 - w1;
        let w0sq = w1 * w2;

        let mut analog_poles = Vec::with_capacity(2 * n);
        for k in 0..n {
            let theta = std::f64::consts::PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            let p = Complex64::from_polar(1.0, theta);
            let pb = p * (bw / 2.0);
            let disc = (pb * pb - w0sq).sqrt();
            analog_poles.push(pb + disc);
            analog_poles.push(pb - disc);
        }
        let digital: Vec<Complex64> = analog_poles
            .iter()
            .map(|&s| (Complex64::new(fs2, 0.0) + s) / (Complex64::new(fs2, 0.0) - s))
            .collect();

        // conjugate pairs first, then leftover real poles two at a time
        let mut upper: Vec<Complex64> = digital.iter().copied().filter(|z| z.im > 1e-12).collect();
        upper.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let mut real: Vec<Complex64> = digital
            .iter()
            .copied()
            .filter(|z| z.im.abs() <= 1e-12)
            .collect();
        real.sort_by(|a, b| a.re.total_cmp(&b.re));
        let mut sections = Vec::with_capacity(n);
        for z in upper {
            sections.push(Biquad {
                b: [1.0, 0.0, -1.0],
                a: poly_from_roots(z, z.conj()),
            });
        }
        for pair in real.chunks(2) {
            let (r1, r2) = (pair[0], pair.get(1).copied().unwrap_or_default());
            sections.push(Biquad {
                b: [1.0, 0.0, -1.0],
                a: poly_from_roots(r1, r2),
            });
        }
        // unity gain at the digital image of the geometric center frequency
        let wc = 2.0 * (w0sq.sqrt() / fs2).atan();
        let zc = Complex64::from_polar(1.0, wc);
        let mut bp = Bandpass { spec, sections };
        let g = bp.response_at_z(zc).norm();
        for b in bp.sections[0].b.iter_mut() {
            *b /= g;
        }
        Ok(bp)
    }

    fn response_at_z(&self, z: Complex64) -> Complex64 {
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z))
    }

    /// Single-pass magnitude response at `freq` Hz.
    pub fn magnitude(&self, freq: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * freq / self.spec.fs;
        self.response_at_z(Complex64::from_polar(1.0, w)).norm()
    }

    /// Edge padding used by [`Bandpass::filtfilt`].
    pub fn pad_len(&self) -> usize {
        3 * (2 * self.sections.len() + 1)
    }

    fn steady_states(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let zi = s.steady_state();
                let out = [zi[0] * scale, zi[1] * scale];
                scale *= s.dc_gain();
                out
            })
            .collect()
    }

    fn run(&self, x: &mut [f64], zi: &[[f64; 2]]) {
        let x0 = x[0];
        for (s, z0) in self.sections.iter().zip(zi) {
            let [b0, b1, b2] = s.b;
            let [_, a1, a2] = s.a;
            let mut z1 = z0[0] * x0;
            let mut z2 = z0[1] * x0;
            for v in x.iter_mut() {
                let xin = *v;
                let y = b0 * xin + z1;
                z1 = b1 * xin - a1 * y + z2;
                z2 = b2 * xin - a2 * y;
                *v = y;
            }
        }
    }

    /// Causal single pass starting from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        if y.is_empty() {
            return y;
        }
        let zero = vec![[0.0, 0.0]; self.sections.len()];
        self.run(&mut y, &zero);
        y
    }

    /// Zero-phase forward-backward filtering with odd reflection at both ends
    /// and steady-state initial conditions. Output length equals input length.
    ///
    /// Both pass orders are run and averaged; they differ only in edge transients.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pad = self.pad_len();
        if x.len() <= pad {
            return Err(Error::TooShort {
                need: pad + 1,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = x.len();
        let mut ext = Vec::with_capacity(n + 2 * pad);
        let (first, last) = (x[0], x[n - 1]);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));

        let zi = self.steady_states();
        // forward-then-backward and backward-then-forward, averaged, so the
        // operator commutes exactly with time reversal
        let mut fb = ext.clone();
        self.run(&mut fb, &zi);
        fb.reverse();
        self.run(&mut fb, &zi);
        fb.reverse();
        let mut bf = ext;
        bf.reverse();
        self.run(&mut bf, &zi);
        bf.reverse();
        self.run(&mut bf, &zi);
        Ok((pad..pad + n).map(|i| 0.5 * (fb[i] + bf[i])).collect())
    }
}

/// Designs the default pulse-band filter for `fs` and applies it forward-backward.
pub fn bandpass_zero_phase(x: &[f64], spec: BandpassSpec) -> Result<Vec<f64>> {
    Bandpass::design(spec)?.filtfilt(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, fs: f64, n: usize, phase: f64) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / fs + phase).sin())
            .collect()
    }

    // Values produced by scipy.signal.butter(2, [0.5, 5], "band", fs=30) and freqz.
    #[test]
    fn magnitude_matches_reference_design() {
        let bp = Bandpass::design(BandpassSpec::pulse_band(30.0)).unwrap();
        assert_eq!(bp.sections.len(), 2);
        let cases = [
            (0.5, 0.5f64.sqrt()),
            (5.0, 0.5f64.sqrt()),
            (1.5, 0.999_985_026_080_939_8f64.sqrt()),
            (10.0, 0.008_709_938_275_306_818f64.sqrt()),
        ];
        for (f, want) in cases {
            let got = bp.magnitude(f);
            assert!((got - want).abs() < 1e-9, "f={f}: {got} vs {want}");
        }
    }

    #[test]
    fn rejects_dc() {
        let y = bandpass_zero_phase(&vec![100.0; 300], BandpassSpec::pulse_band(30.0)).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-6), "max {:?}", y.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }

    #[test]
    fn passband_and_stopband_gain() {
        let fs = 30.0;
        let spec = BandpassSpec::pulse_band(fs);
        let x = tone(1.5, fs, 600, 0.0);
        let y = bandpass_zero_phase(&x, spec).unwrap();
        let mid = &y[200..400];
        let amp = mid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((0.95..=1.0).contains(&amp), "passband amplitude {amp}");
        // phase: compare against the input at the same instants
        let err = mid
            .iter()
            .zip(&x[200..400])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // amplitude error 1e-5 plus phase error of at most 1e-3 rad
        assert!(err < 1.5e-3, "max deviation {err}");

        let x = tone(10.0, fs, 600, 0.3);
        let y = bandpass_zero_phase(&x, spec).unwrap();
        let amp = y[200..400].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(amp < 0.05, "stopband amplitude {amp}");
    }

    #[test]
    fn too_short_input() {
        let err = bandpass_zero_phase(&[1.0; 10], BandpassSpec::pulse_band(30.0)).unwrap_err();
        assert!(matches!(err, Error::TooShort { .. }));
    }

    #[test]
    fn zero_lag_for_in_band_tone() {
        let fs = 30.0;
        let x = tone(1.2, fs, 900, 0.7);
        let y = bandpass_zero_phase(&x, BandpassSpec::pulse_band(fs)).unwrap();
        let xcorr = |lag: i64| -> f64 {
            (100..800)
                .map(|i| x[i] * y[(i as i64 + lag) as usize])
                .sum()
        };
        let best = (-5..=5).max_by(|&a, &b| xcorr(a).total_cmp(&xcorr(b))).unwrap();
        assert_eq!(best, 0);
    }

    #[test]
    fn invalid_band() {
        let spec = BandpassSpec {
            low: 5.0,
            high: 0.5,
            order: 2,
            fs: 30.0,
        };
        assert!(Bandpass::design(spec).is_err());
    }

    proptest! {
        #[test]
        fn linear(seed in 0u64..200, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let fs = 30.0;
            let mut s = seed + 1;
            let mut rnd = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5 };
            let x: Vec<f64> = (0..200).map(|_| rnd()).collect();
            let y: Vec<f64> = (0..200).map(|_| rnd()).collect();
            let bp = Bandpass::design(BandpassSpec::pulse_band(fs)).unwrap();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = bp.filtfilt(&mix).unwrap();
            let fx = bp.filtfilt(&x).unwrap();
            let fy = bp.filtfilt(&y).unwrap();
            for i in 0..200 {
                prop_assert!((lhs[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
            }
        }

        #[test]
        fn time_reversal_symmetric(seed in 0u64..200) {
            let mut s = seed + 7;
            let x: Vec<f64> = (0..150).map(|_| { s = s.wrapping_mul(6364136223846793005).wrapping_add(1); (s >> 40) as f64 / 1e6 }).collect();
            let bp = Bandpass::design(BandpassSpec::pulse_band(30.0)).unwrap();
            let mut rev = x.clone();
            rev.reverse();
            let fr = bp.filtfilt(&rev).unwrap();
            let mut f = bp.filtfilt(&x).unwrap();
            f.reverse();
            for i in 0..150 {
                prop_assert!((fr[i] - f[i]).abs() < 1e-9);
            }
        }
    }
}
