use crate::dsp;
use crate::error::{Error, Result};

use super::PrSeries;

/// Windows whose absolute error reaches this many bpm are reported apart.
pub const OUTLIER_BPM: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementStats {
    pub n: usize,
    pub mean_bias: f64,
    pub sd: f64,
    pub loa_low: f64,
    pub loa_high: f64,
}

/// Bias and 95% limits of agreement of paired differences `est - reference`.
pub fn bland_altman(est: &[f64], reference: &[f64]) -> Result<AgreementStats> {
    if est.len() != reference.len() {
        return Err(Error::InvalidArgument("unpaired windows".into()));
    }
    if est.len() < 2 {
        return Err(Error::TooShort { need: 2, got: est.len() });
    }
    let d: Vec<f64> = est.iter().zip(reference).map(|(e, r)| e - r).collect();
    let mean = dsp::mean(&d);
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
    let sd = var.sqrt();
    Ok(AgreementStats {
        n: d.len(),
        mean_bias: mean,
        sd,
        loa_low: mean - 1.96 * sd,
        loa_high: mean + 1.96 * sd,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub all: Option<AgreementStats>,
    /// Statistics without windows at or beyond `OUTLIER_BPM`.
    pub filtered: Option<AgreementStats>,
    pub outliers: usize,
    /// Windows where either series had no rate.
    pub unpaired: usize,
}

/// Agreement over windows where both series have a rate, with and without
/// the extreme outliers.
pub fn bland_altman_report(est: &PrSeries, reference: &PrSeries) -> AgreementReport {
    let mut pairs = Vec::new();
    let mut unpaired = 0;
    for (e, r) in est.pr.iter().zip(&reference.pr) {
        match (e, r) {
            (Some(e), Some(r)) => pairs.push((*e, *r)),
            _ => unpaired += 1,
        }
    }
    unpaired += est.len().abs_diff(reference.len());
    let (e, r): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let (fe, fr): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .copied()
        .filter(|(e, r)| (e - r).abs() < OUTLIER_BPM)
        .unzip();
    AgreementReport {
        all: bland_altman(&e, &r).ok(),
        filtered: bland_altman(&fe, &fr).ok(),
        outliers: pairs.len() - fe.len(),
        unpaired,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identical() {
        let r = [70.0, 72.0, 75.0];
        let s = bland_altman(&r, &r).unwrap();
        assert_eq!((s.mean_bias, s.loa_low, s.loa_high), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_offset() {
        let r = [70.0, 72.0, 75.0, 80.0];
        let e: Vec<f64> = r.iter().map(|v| v + 1.0).collect();
        let s = bland_altman(&e, &r).unwrap();
        assert!((s.mean_bias - 1.0).abs() < 1e-12);
        assert!((s.loa_low - 1.0).abs() < 1e-12 && (s.loa_high - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r: Vec<f64> = (0..200).map(|i| 60.0 + (i % 30) as f64).collect();
        let e: Vec<f64> = r
            .iter()
            .map(|v| v + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let s = bland_altman(&e, &r).unwrap();
        assert!(s.mean_bias.abs() <= 0.2);
        let width = s.loa_high - s.loa_low;
        assert!((3.3..=4.6).contains(&width), "{width}");
        assert!(s.loa_low <= s.mean_bias && s.mean_bias <= s.loa_high);
    }

    #[test]
    fn too_few_pairs() {
        assert!(bland_altman(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn outliers_are_split_off() {
        let est = PrSeries {
            centers: vec![5.0, 10.0, 15.0, 20.0],
            pr: vec![Some(72.0), Some(110.0), Some(73.0), None],
        };
        let truth = PrSeries {
            centers: est.centers.clone(),
            pr: vec![Some(72.0), Some(72.0), Some(72.0), Some(72.0)],
        };
        let rep = bland_altman_report(&est, &truth);
        assert_eq!(rep.outliers, 1);
        assert_eq!(rep.unpaired, 1);
        assert_eq!(rep.all.unwrap().n, 3);
        assert!((rep.filtered.unwrap().mean_bias - 0.5).abs() < 1e-12);
    }
}
