use super::spec::{
    Burst, Illumination, MotionKind, MotionSegment, Occluder, RegionMotion, SceneSpec,
};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::seeds;

pub const PRESET_NAMES: [&str; 5] = ["static_fair", "static_dark", "lux_sweep", "reading", "talking_hard"];

/// Seed each preset is rendered with unless overridden.
pub const DEFAULT_SEED: u64 = 1;

const RATE_STREAM: u64 = 0x0BB3;
const DARK_SCALE: f64 = 0.25;

fn seeded_rate(seed: u64) -> f64 {
    66.0 + 12.0 * seeds::unit(seeds::derive(seed, RATE_STREAM, 0))
}

fn spotlight() -> Illumination {
    Illumination::Spotlight { peak: 220.0, floor: 55.0, center: Point::new(195.0, 85.0), sigma: 60.0 }
}

fn static_fair(seed: u64) -> SceneSpec {
    let mut s = SceneSpec { name: "static_fair".into(), seed, illumination: spotlight(), ..SceneSpec::default() };
    s.perfusion.alpha_max = 0.012;
    s.perfusion.uniform = false;
    s.perfusion.near_zero_fraction = 0.4;
    s.surface_noise.std = 0.005;
    s.surface_noise.cutoff_hz = 0.15;
    s.sensor_noise_std = 4.0;
    s.texture_amplitude = 0.45;
    s.ppg.pr_bpm = seeded_rate(seed);
    s.ppg.prv_jitter_ms = 30.0;
    s
}

fn static_dark(seed: u64) -> SceneSpec {
    let mut s = static_fair(seed);
    s.name = "static_dark".into();
    s.perfusion.alpha_max *= DARK_SCALE;
    s
}

fn lux_sweep(seed: u64) -> SceneSpec {
    let mut s = static_fair(seed);
    s.name = "lux_sweep".into();
    s.illumination = Illumination::Constant(300.0);
    s.perfusion.alpha_max = 0.008;
    s.lux_ramp = Some((0.2, 1.0));
    s
}

fn reading(seed: u64) -> SceneSpec {
    let mut s = static_fair(seed);
    s.name = "reading".into();
    s.ppg.prv_jitter_ms = 15.0;
    s.motion.push(MotionSegment {
        t_start: 0.0,
        t_end: s.duration,
        kind: MotionKind::Oscillate { vx_amp: 2.0, vy_amp: 0.3, period_s: 5.0, omega_amp: 0.0005 },
    });
    let c = s.face.center;
    for (dx, dy, t0, t1, f) in [(-40.0, 30.0, 6.0, 15.0, 2.0), (40.0, -60.0, 23.0, 32.0, 0.75)] {
        s.bursts.push(Burst {
            center: Point::new(c.x + dx, c.y + dy),
            radius: 22.0,
            t_start: t0,
            t_end: t1,
            amplitude: 14.0,
            freq_hz: f,
        });
    }
    s
}

fn talking_hard(seed: u64) -> SceneSpec {
    let mut s = static_fair(seed);
    s.name = "talking_hard".into();
    s.ppg.prv_jitter_ms = 15.0;
    let d = s.duration;
    s.motion.push(MotionSegment {
        t_start: 0.0,
        t_end: d,
        kind: MotionKind::Oscillate { vx_amp: 1.0, vy_amp: 0.5, period_s: 3.0, omega_amp: 0.001 },
    });
    for (label, vy, period) in [("chin_left", 0.8, 0.7), ("chin_right", -0.8, 0.9)] {
        s.region_motion.push(RegionMotion {
            label: label.into(),
            segment: MotionSegment {
                t_start: 0.0,
                t_end: d,
                kind: MotionKind::Oscillate { vx_amp: 0.0, vy_amp: vy, period_s: period, omega_amp: 0.0 },
            },
        });
    }
    let c = s.face.center;
    let spots = [
        (-30.0, -60.0, 1.7),
        (30.0, -60.0, 0.9),
        (-40.0, 30.0, 2.3),
        (40.0, 30.0, 1.6),
        (0.0, 90.0, 1.9),
    ];
    for (k, (dx, dy, f)) in spots.into_iter().enumerate() {
        let phase = 2.0 * k as f64;
        let mut t0 = phase;
        while t0 < d {
            s.bursts.push(Burst {
                center: Point::new(c.x + dx, c.y + dy),
                radius: 26.0,
                t_start: t0,
                t_end: (t0 + 8.0).min(d),
                amplitude: 16.0,
                freq_hz: f,
            });
            t0 += 9.0;
        }
    }
    s.occluders.push(Occluder {
        x0: -60.0,
        y0: 40.0,
        w: 60.0,
        h: 90.0,
        t_start: 12.0,
        t_end: 26.0,
        vx: 1.0,
        vy: 0.0,
        intensity: 40.0,
    });
    s
}

/// Named preset scene rendered with `seed`.
pub fn preset(name: &str, seed: u64) -> Result<SceneSpec> {
    Ok(match name {
        "static_fair" => static_fair(seed),
        "static_dark" => static_dark(seed),
        "lux_sweep" => lux_sweep(seed),
        "reading" => reading(seed),
        "talking_hard" => talking_hard(seed),
        _ => {
            return Err(Error::Scene(format!(
                "unknown scene {name:?}; presets are {}",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}

/// Every preset at its default seed.
pub fn preset_scenes() -> Vec<SceneSpec> {
    PRESET_NAMES.iter().map(|n| preset(n, DEFAULT_SEED).expect("known preset")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::Renderer;

    #[test]
    fn presets_build_without_overflow() {
        for s in preset_scenes() {
            s.validate().unwrap();
            Renderer::new(&s).unwrap_or_else(|e| panic!("{}: {e}", s.name));
        }
    }

    #[test]
    fn dark_amplitudes_are_a_quarter_of_fair() {
        let fair = Renderer::new(&preset("static_fair", 3).unwrap()).unwrap().truth();
        let dark = Renderer::new(&preset("static_dark", 3).unwrap()).unwrap().truth();
        assert_eq!(fair.roi_amplitudes.len(), dark.roi_amplitudes.len());
        for (f, d) in fair.roi_amplitudes.iter().zip(&dark.roi_amplitudes) {
            assert!((d.amplitude - 0.25 * f.amplitude).abs() < 1e-12);
        }
    }

    #[test]
    fn reading_displacement_matches_script() {
        let s = preset("reading", 2).unwrap();
        let truth = Renderer::new(&s).unwrap().truth();
        let f10 = (10.0 * s.fps) as usize;
        let mut dx = 0.0;
        for k in 1..=f10 {
            let t = (k - 1) as f64 / s.fps;
            dx += 2.0 * (2.0 * std::f64::consts::PI * t / 5.0).cos();
        }
        // the small rotation moves the translation part, so compare the face center
        let c = s.face.center;
        let moved = truth.face_affines[f10].apply(c);
        assert!((moved.x - c.x - dx).abs() < 1e-9, "{} vs {dx}", moved.x - c.x);
    }

    #[test]
    fn unknown_preset() {
        assert!(preset("studio", 1).is_err());
    }
}
