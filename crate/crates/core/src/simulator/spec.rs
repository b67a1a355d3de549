use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::frameio::{PlanarRegion, RegionFile};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq)]
pub enum Illumination {
    Constant(f64),
    /// `i0 + gx * x + gy * y`.
    Gradient { i0: f64, gx: f64, gy: f64 },
    /// Gaussian spot over a floor level.
    Spotlight { peak: f64, floor: f64, center: Point, sigma: f64 },
}

impl Illumination {
    pub fn at(&self, p: Point) -> f64 {
        match *self {
            Illumination::Constant(v) => v,
            Illumination::Gradient { i0, gx, gy } => i0 + gx * p.x + gy * p.y,
            Illumination::Spotlight { peak, floor, center, sigma } => {
                let d2 = (p.x - center.x).powi(2) + (p.y - center.y).powi(2);
                floor + (peak - floor) * (-d2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfusionSpec {
    pub alpha_max: f64,
    /// Fraction of perfusion cells with almost no pulsatile modulation.
    pub near_zero_fraction: f64,
    /// Side of a perfusion cell, px, on a lattice anchored at the face center.
    pub cell: f64,
    /// Same `alpha_max` on all skin, ignoring cells and zones.
    pub uniform: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceNoise {
    /// Standard deviation in reflectance units.
    pub std: f64,
    /// Every component of the disturbance lies below this frequency, Hz.
    pub cutoff_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpgModel {
    pub pr_bpm: f64,
    /// Rate at the end of the scene; the rate moves linearly in between.
    pub pr_bpm_end: Option<f64>,
    /// Amplitudes of the first three harmonics (the first is normally 1).
    pub harmonics: [f64; 3],
    pub prv_jitter_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionKind {
    /// Constant velocity, px/frame.
    Translate { vx: f64, vy: f64 },
    /// Rotation about the current face (or region) center, rad/frame.
    Rotate { omega: f64 },
    /// Velocities `amp * cos(2 pi (t - t_start) / period)`.
    Oscillate { vx_amp: f64, vy_amp: f64, period_s: f64, omega_amp: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub kind: MotionKind,
}

impl MotionSegment {
    /// `(vx, vy, omega)` at time `t`, zero outside `[t_start, t_end)`.
    pub fn velocity(&self, t: f64) -> (f64, f64, f64) {
        if t < self.t_start || t >= self.t_end {
            return (0.0, 0.0, 0.0);
        }
        match self.kind {
            MotionKind::Translate { vx, vy } => (vx, vy, 0.0),
            MotionKind::Rotate { omega } => (0.0, 0.0, omega),
            MotionKind::Oscillate { vx_amp, vy_amp, period_s, omega_amp } => {
                let c = (2.0 * std::f64::consts::PI * (t - self.t_start) / period_s).cos();
                (vx_amp * c, vy_amp * c, omega_amp * c)
            }
        }
    }
}

/// Extra motion of one region on top of the face motion.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMotion {
    pub label: String,
    pub segment: MotionSegment,
}

/// Localized in-band reflectance disturbance attached to the face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burst {
    /// Position at frame 0.
    pub center: Point,
    pub radius: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Peak intensity swing, grey levels.
    pub amplitude: f64,
    pub freq_hz: f64,
}

impl Burst {
    /// Hann-windowed sinusoid over `[t_start, t_end]`.
    pub fn value(&self, t: f64) -> f64 {
        if t < self.t_start || t > self.t_end {
            return 0.0;
        }
        let u = (t - self.t_start) / (self.t_end - self.t_start);
        let env = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * u).cos();
        self.amplitude * env * (2.0 * std::f64::consts::PI * self.freq_hz * (t - self.t_start)).sin()
    }
}

/// Flat rectangle passing in front of the face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occluder {
    pub x0: f64,
    pub y0: f64,
    pub w: f64,
    pub h: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// px/frame.
    pub vx: f64,
    pub vy: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    pub center: Point,
    pub rx: f64,
    pub ry: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub duration: f64,
    pub seed: u64,
    pub quantize: bool,
    pub illumination: Illumination,
    /// Illumination scale moving smoothly from the first to the second value.
    pub lux_ramp: Option<(f64, f64)>,
    pub perfusion: PerfusionSpec,
    pub skin_reflectance: f64,
    pub background_reflectance: f64,
    /// Peak relative reflectance change of the feature texture spots.
    pub texture_amplitude: f64,
    pub surface_noise: SurfaceNoise,
    /// Additive Gaussian noise per pixel and frame, grey levels.
    pub sensor_noise_std: f64,
    pub ppg: PpgModel,
    pub face: FaceGeometry,
    pub motion: Vec<MotionSegment>,
    pub region_motion: Vec<RegionMotion>,
    pub bursts: Vec<Burst>,
    pub occluders: Vec<Occluder>,
    /// Empty means the standard face layout.
    pub regions: Vec<PlanarRegion>,
    /// Period of the region sets written for moving scenes, seconds.
    pub region_refresh_s: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        let (w, h) = (320usize, 240usize);
        let center = Point::new(w as f64 / 2.0, h as f64 / 2.0);
        SceneSpec {
            name: "custom".into(),
            width: w,
            height: h,
            fps: 30.0,
            duration: 40.0,
            seed: 1,
            quantize: true,
            illumination: Illumination::Constant(180.0),
            lux_ramp: None,
            perfusion: PerfusionSpec {
                alpha_max: 0.01,
                near_zero_fraction: 0.0,
                cell: 20.0,
                uniform: true,
            },
            skin_reflectance: 0.55,
            background_reflectance: 0.3,
            texture_amplitude: 0.22,
            surface_noise: SurfaceNoise { std: 0.0, cutoff_hz: 0.3 },
            sensor_noise_std: 0.0,
            ppg: PpgModel {
                pr_bpm: 72.0,
                pr_bpm_end: None,
                harmonics: [1.0, 0.25, 0.1],
                prv_jitter_ms: 0.0,
            },
            face: FaceGeometry { center, rx: 85.0, ry: 115.0 },
            motion: Vec::new(),
            region_motion: Vec::new(),
            bursts: Vec::new(),
            occluders: Vec::new(),
            regions: Vec::new(),
            region_refresh_s: 5.0,
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Scene(format!("bad value for {key}: {value:?}"))
}

fn nums(key: &str, value: &str, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = value
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(key, value))?;
    if v.len() != n {
        return Err(Error::Scene(format!("{key} needs {n} numbers, got {}", v.len())));
    }
    Ok(v)
}

fn num(key: &str, value: &str) -> Result<f64> {
    value.trim().parse::<f64>().map_err(|_| bad(key, value))
}

fn parse_segment(key: &str, fields: &[&str]) -> Result<MotionSegment> {
    let n = |i: usize| -> Result<f64> {
        fields
            .get(i)
            .ok_or_else(|| Error::Scene(format!("{key}: missing field {i}")))
            .and_then(|s| num(key, s))
    };
    let t_start = n(0)?;
    let t_end = n(1)?;
    let kind = match fields.get(2).map(|s| s.trim()) {
        Some("translate") => MotionKind::Translate { vx: n(3)?, vy: n(4)? },
        Some("rotate") => MotionKind::Rotate { omega: n(3)? },
        Some("oscillate") => MotionKind::Oscillate {
            vx_amp: n(3)?,
            vy_amp: n(4)?,
            period_s: n(5)?,
            omega_amp: n(6)?,
        },
        other => return Err(Error::Scene(format!("{key}: unknown motion kind {other:?}"))),
    };
    Ok(MotionSegment { t_start, t_end, kind })
}

fn segment_text(s: &MotionSegment) -> String {
    match s.kind {
        MotionKind::Translate { vx, vy } => format!("{},{},translate,{vx},{vy}", s.t_start, s.t_end),
        MotionKind::Rotate { omega } => format!("{},{},rotate,{omega}", s.t_start, s.t_end),
        MotionKind::Oscillate { vx_amp, vy_amp, period_s, omega_amp } => format!(
            "{},{},oscillate,{vx_amp},{vy_amp},{period_s},{omega_amp}",
            s.t_start, s.t_end
        ),
    }
}

impl SceneSpec {
    pub fn frame_count(&self) -> usize {
        (self.duration * self.fps).round() as usize
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and `#`
    /// comments are ignored; list keys (`motion`, `region_motion`, `burst`,
    /// `occluder`, `region`) append.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Scene(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "name" => self.name = value.to_string(),
            "width" => self.width = value.parse().map_err(|_| bad(key, value))?,
            "height" => self.height = value.parse().map_err(|_| bad(key, value))?,
            "fps" => self.fps = num(key, value)?,
            "duration" => self.duration = num(key, value)?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "quantize" => self.quantize = value.parse().map_err(|_| bad(key, value))?,
            "illumination" => {
                let (kind, rest) = value.split_once(' ').unwrap_or((value, ""));
                self.illumination = match kind {
                    "constant" => Illumination::Constant(num(key, rest)?),
                    "gradient" => {
                        let v = nums(key, rest, 3)?;
                        Illumination::Gradient { i0: v[0], gx: v[1], gy: v[2] }
                    }
                    "spotlight" => {
                        let v = nums(key, rest, 5)?;
                        Illumination::Spotlight {
                            peak: v[0],
                            floor: v[1],
                            center: Point::new(v[2], v[3]),
                            sigma: v[4],
                        }
                    }
                    _ => return Err(bad(key, value)),
                }
            }
            "lux_ramp" => {
                self.lux_ramp = if value == "none" {
                    None
                } else {
                    let v = nums(key, value, 2)?;
                    Some((v[0], v[1]))
                }
            }
            "alpha_max" => self.perfusion.alpha_max = num(key, value)?,
            "alpha_near_zero_fraction" => self.perfusion.near_zero_fraction = num(key, value)?,
            "alpha_cell" => self.perfusion.cell = num(key, value)?,
            "alpha_uniform" => self.perfusion.uniform = value.parse().map_err(|_| bad(key, value))?,
            "skin_reflectance" => self.skin_reflectance = num(key, value)?,
            "background_reflectance" => self.background_reflectance = num(key, value)?,
            "texture_amplitude" => self.texture_amplitude = num(key, value)?,
            "surface_noise_std" => self.surface_noise.std = num(key, value)?,
            "surface_noise_cutoff" => self.surface_noise.cutoff_hz = num(key, value)?,
            "sensor_noise_std" => self.sensor_noise_std = num(key, value)?,
            "pr_bpm" => self.ppg.pr_bpm = num(key, value)?,
            "pr_bpm_end" => {
                self.ppg.pr_bpm_end = if value == "none" { None } else { Some(num(key, value)?) }
            }
            "harmonics" => {
                let v = nums(key, value, 3)?;
                self.ppg.harmonics = [v[0], v[1], v[2]];
            }
            "prv_jitter_ms" => self.ppg.prv_jitter_ms = num(key, value)?,
            "face" => {
                let v = nums(key, value, 4)?;
                self.face = FaceGeometry { center: Point::new(v[0], v[1]), rx: v[2], ry: v[3] };
            }
            "motion" => {
                let f: Vec<&str> = value.split(',').collect();
                self.motion.push(parse_segment(key, &f)?);
            }
            "region_motion" => {
                let f: Vec<&str> = value.split(',').collect();
                let label = f.first().map(|s| s.trim().to_string()).unwrap_or_default();
                self.region_motion.push(RegionMotion { label, segment: parse_segment(key, &f[1..])? });
            }
            "burst" => {
                let v = nums(key, value, 7)?;
                self.bursts.push(Burst {
                    center: Point::new(v[0], v[1]),
                    radius: v[2],
                    t_start: v[3],
                    t_end: v[4],
                    amplitude: v[5],
                    freq_hz: v[6],
                });
            }
            "occluder" => {
                let v = nums(key, value, 9)?;
                self.occluders.push(Occluder {
                    x0: v[0],
                    y0: v[1],
                    w: v[2],
                    h: v[3],
                    t_start: v[4],
                    t_end: v[5],
                    vx: v[6],
                    vy: v[7],
                    intensity: v[8],
                });
            }
            "region" => {
                let parsed = RegionFile::parse(value).map_err(|e| Error::Scene(e.to_string()))?;
                self.regions.extend(parsed.regions_at(0).iter().cloned());
            }
            "region_refresh_s" => self.region_refresh_s = num(key, value)?,
            _ => return Err(Error::Scene(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Scene(m));
        if self.width < 32 || self.height < 32 {
            return fail(format!("frame {}x{} is too small", self.width, self.height));
        }
        if !(self.fps > 0.0) || !(self.duration > 0.0) {
            return fail("fps and duration must be positive".into());
        }
        if !(40.0..=180.0).contains(&self.ppg.pr_bpm)
            || self.ppg.pr_bpm_end.is_some_and(|p| !(40.0..=180.0).contains(&p))
        {
            return fail("pulse rate must lie in [40, 180] bpm".into());
        }
        if self.ppg.prv_jitter_ms < 0.0 || self.sensor_noise_std < 0.0 || self.surface_noise.std < 0.0 {
            return fail("noise levels must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.perfusion.near_zero_fraction) {
            return fail("alpha_near_zero_fraction must lie in [0, 1]".into());
        }
        if self.perfusion.alpha_max < 0.0 || !(self.perfusion.cell >= 1.0) {
            return fail("bad perfusion parameters".into());
        }
        if self.surface_noise.cutoff_hz <= 0.0 {
            return fail("surface noise cutoff must be positive".into());
        }
        if !(self.region_refresh_s > 0.0) {
            return fail("region_refresh_s must be positive".into());
        }
        for b in &self.bursts {
            if !(b.t_end > b.t_start) || b.radius <= 0.0 {
                return fail("burst needs t_end > t_start and a positive radius".into());
            }
        }
        for m in self.motion.iter().chain(self.region_motion.iter().map(|r| &r.segment)) {
            if let MotionKind::Oscillate { period_s, .. } = m.kind {
                if !(period_s > 0.0) {
                    return fail("oscillation period must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// Parses a full scene description on top of the desk defaults.
    pub fn parse(text: &str) -> Result<SceneSpec> {
        let mut s = SceneSpec::default();
        s.apply_text(text)?;
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "name={}", self.name);
        let _ = writeln!(o, "width={}\nheight={}\nfps={}\nduration={}", self.width, self.height, self.fps, self.duration);
        let _ = writeln!(o, "seed={}\nquantize={}", self.seed, self.quantize);
        let _ = match &self.illumination {
            Illumination::Constant(v) => writeln!(o, "illumination=constant {v}"),
            Illumination::Gradient { i0, gx, gy } => writeln!(o, "illumination=gradient {i0},{gx},{gy}"),
            Illumination::Spotlight { peak, floor, center, sigma } => writeln!(
                o,
                "illumination=spotlight {peak},{floor},{},{},{sigma}",
                center.x, center.y
            ),
        };
        match self.lux_ramp {
            Some((a, b)) => {
                let _ = writeln!(o, "lux_ramp={a},{b}");
            }
            None => {
                let _ = writeln!(o, "lux_ramp=none");
            }
        }
        let p = &self.perfusion;
        let _ = writeln!(
            o,
            "alpha_max={}\nalpha_near_zero_fraction={}\nalpha_cell={}\nalpha_uniform={}",
            p.alpha_max, p.near_zero_fraction, p.cell, p.uniform
        );
        let _ = writeln!(
            o,
            "skin_reflectance={}\nbackground_reflectance={}\ntexture_amplitude={}",
            self.skin_reflectance, self.background_reflectance, self.texture_amplitude
        );
        let _ = writeln!(
            o,
            "surface_noise_std={}\nsurface_noise_cutoff={}\nsensor_noise_std={}",
            self.surface_noise.std, self.surface_noise.cutoff_hz, self.sensor_noise_std
        );
        let _ = writeln!(o, "pr_bpm={}", self.ppg.pr_bpm);
        let _ = match self.ppg.pr_bpm_end {
            Some(v) => writeln!(o, "pr_bpm_end={v}"),
            None => writeln!(o, "pr_bpm_end=none"),
        };
        let [h1, h2, h3] = self.ppg.harmonics;
        let _ = writeln!(o, "harmonics={h1},{h2},{h3}\nprv_jitter_ms={}", self.ppg.prv_jitter_ms);
        let f = &self.face;
        let _ = writeln!(o, "face={},{},{},{}", f.center.x, f.center.y, f.rx, f.ry);
        let _ = writeln!(o, "region_refresh_s={}", self.region_refresh_s);
        for m in &self.motion {
            let _ = writeln!(o, "motion={}", segment_text(m));
        }
        for r in &self.region_motion {
            let _ = writeln!(o, "region_motion={},{}", r.label, segment_text(&r.segment));
        }
        for b in &self.bursts {
            let _ = writeln!(
                o,
                "burst={},{},{},{},{},{},{}",
                b.center.x, b.center.y, b.radius, b.t_start, b.t_end, b.amplitude, b.freq_hz
            );
        }
        for c in &self.occluders {
            let _ = writeln!(
                o,
                "occluder={},{},{},{},{},{},{},{},{}",
                c.x0, c.y0, c.w, c.h, c.t_start, c.t_end, c.vx, c.vy, c.intensity
            );
        }
        for r in &self.regions {
            let text = RegionFile::single(vec![r.clone()]).to_text();
            let _ = writeln!(o, "region={}", text.trim());
        }
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;

    #[test]
    fn text_round_trip() {
        let mut s = SceneSpec {
            illumination: Illumination::Spotlight {
                peak: 220.0,
                floor: 60.0,
                center: Point::new(140.0, 90.0),
                sigma: 70.0,
            },
            lux_ramp: Some((0.1, 1.3)),
            ..SceneSpec::default()
        };
        s.motion.push(MotionSegment {
            t_start: 0.0,
            t_end: 40.0,
            kind: MotionKind::Oscillate { vx_amp: 2.0, vy_amp: 0.0, period_s: 5.0, omega_amp: 0.001 },
        });
        s.region_motion.push(RegionMotion {
            label: "chin".into(),
            segment: MotionSegment { t_start: 1.0, t_end: 2.0, kind: MotionKind::Translate { vx: 0.0, vy: 1.0 } },
        });
        s.bursts.push(Burst {
            center: Point::new(100.0, 100.0),
            radius: 15.0,
            t_start: 3.0,
            t_end: 6.0,
            amplitude: 12.0,
            freq_hz: 2.0,
        });
        s.regions.push(PlanarRegion { label: "sq".into(), polygon: Polygon::rect(10.0, 10.0, 50.0, 50.0) });
        let back = SceneSpec::parse(&s.to_text()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SceneSpec::parse("pr_bpm=200").is_err());
        assert!(SceneSpec::parse("bogus=1").is_err());
        assert!(SceneSpec::parse("fps").is_err());
        assert!(SceneSpec::parse("motion=0,1,spin,3").is_err());
    }

    #[test]
    fn burst_envelope() {
        let b = Burst {
            center: Point::default(),
            radius: 1.0,
            t_start: 1.0,
            t_end: 3.0,
            amplitude: 10.0,
            freq_hz: 1.0,
        };
        assert_eq!(b.value(0.5), 0.0);
        assert_eq!(b.value(1.0), 0.0);
        assert!(b.value(2.0).abs() < 1e-9);
        let tau = 2.0 * std::f64::consts::PI;
        let want = 10.0 * (0.5 - 0.5 * (0.1 * tau).cos()) * (0.2 * tau).sin();
        assert!((b.value(1.2) - want).abs() < 1e-9);
    }
}
