use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mrc::MrcConfig;
use crate::roi::{DEFAULT_BLOCK, MIN_BLOCK};
use crate::tracking::TrackingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    DistancePpg,
    FaceAverage,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::DistancePpg => "distanceppg",
            Estimator::FaceAverage => "face_average",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distanceppg" => Ok(Estimator::DistancePpg),
            "face_average" => Ok(Estimator::FaceAverage),
            _ => Err(Error::Config(format!(
                "unknown estimator {s:?} (expected distanceppg or face_average)"
            ))),
        }
    }
}

/// Every tunable of an estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub estimator: Estimator,
    pub tracking: TrackingConfig,
    pub mrc: MrcConfig,
    pub block: usize,
    /// Seeds the tracker's consensus sampling.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            estimator: Estimator::DistancePpg,
            tracking: TrackingConfig::default(),
            mrc: MrcConfig::default(),
            block: DEFAULT_BLOCK,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: {value:?}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.tracking;
        let m = &mut self.mrc;
        match key {
            "estimator" => self.estimator = value.trim().parse()?,
            "block" => self.block = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "epoch_seconds" => t.epoch_seconds = parse(key, value)?,
            "features_per_region" => t.features_per_region = parse(key, value)?,
            "min_features" => t.min_features = parse(key, value)?,
            "fb_error_px" => t.fb_error_px = parse(key, value)?,
            "klt_window" => t.klt.window = parse(key, value)?,
            "klt_levels" => t.klt.pyramid_levels = parse(key, value)?,
            "klt_iterations" => t.klt.max_iterations = parse(key, value)?,
            "klt_epsilon" => t.klt.epsilon = parse(key, value)?,
            "klt_min_eigen" => t.klt.min_eigen = parse(key, value)?,
            "ransac_epsilon" => t.ransac.epsilon = parse(key, value)?,
            "ransac_inlier_fraction" => t.ransac.inlier_fraction = parse(key, value)?,
            "ransac_iterations" => t.ransac.max_iterations = parse(key, value)?,
            "a_th" => m.a_th = parse(key, value)?,
            "goodness_floor" => m.goodness_floor = parse(key, value)?,
            "pr_band_halfwidth_hz" => m.pr_band_halfwidth_hz = parse(key, value)?,
            "pr_jump_bpm" => m.pr_jump_bpm = parse(key, value)?,
            "goodness_cap" => m.goodness_cap = parse(key, value)?,
            "band_low_hz" => m.band_low_hz = parse(key, value)?,
            "band_high_hz" => m.band_high_hz = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.block < MIN_BLOCK {
            return bad("block is below the minimum ROI size");
        }
        if !(self.tracking.epoch_seconds > 0.0) {
            return bad("epoch_seconds must be positive");
        }
        if self.tracking.klt.window % 2 == 0 || self.tracking.klt.window < 3 {
            return bad("klt_window must be odd and at least 3");
        }
        if !(self.mrc.band_low_hz > 0.0 && self.mrc.band_high_hz > self.mrc.band_low_hz) {
            return bad("band_low_hz and band_high_hz must satisfy 0 < low < high");
        }
        if !(0.0..=1.0).contains(&self.tracking.ransac.inlier_fraction) {
            return bad("ransac_inlier_fraction must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn tracking_for_run(&self) -> TrackingConfig {
        let mut t = self.tracking.clone();
        t.ransac.seed = self.seed;
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply() {
        let mut c = RunConfig::default();
        c.apply_text("estimator = face_average\nepoch_seconds=5 # shorter\n\na_th=6").unwrap();
        assert_eq!(c.estimator, Estimator::FaceAverage);
        assert_eq!(c.tracking.epoch_seconds, 5.0);
        assert_eq!(c.mrc.a_th, 6.0);
    }

    #[test]
    fn rejects_unknowns() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("estimator=pca").is_err());
        assert!(c.apply_text("colour=blue").is_err());
        assert!(c.apply_text("block=2").is_err());
        assert!(c.apply_text("epoch_seconds").is_err());
    }
}
