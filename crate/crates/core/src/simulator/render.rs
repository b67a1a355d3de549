use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::layout::{scene_regions, StaticFields};
use super::ppg::{synth_ppg, PpgTrack};
use super::spec::{Burst, MotionSegment, SceneSpec};
use crate::error::{Error, Result};
use crate::frameio::{Frame, FrameSequence, PlanarRegion, RegionFile, RegionSet};
use crate::geometry::{Affine, Point, Polygon};
use crate::dsp::{Bandpass, BandpassSpec};
use crate::roi::{average_field, average_roi, grid_regions, DEFAULT_BLOCK};
use crate::seeds;

const SENSOR_STREAM: u64 = 0x5E45;
const SURFACE_STREAM: u64 = 0x5F4C;
const SURFACE_SPACING: f64 = 40.0;
const SURFACE_COMPONENTS: usize = 3;
pub const TRUTH_RATE_HZ: f64 = 500.0;

/// True pulsatile amplitude `A_i = mean(I * alpha)` of one ROI at unit illumination scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiAmplitude {
    pub roi_id: usize,
    pub region_label: String,
    pub amplitude: f64,
    /// In-band power of the known pulsatile part of the ROI trace over the
    /// in-band power of everything else, dB. Filled in by [`render`].
    pub true_snr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneTruth {
    pub fps: f64,
    /// `p(t)` at frame instants.
    pub ppg: Vec<f64>,
    /// `p(t)` at 500 Hz from t = 0.
    pub ppg_500: Vec<f64>,
    pub beat_times: Vec<f64>,
    /// Cumulative map from frame-0 to frame-`f` coordinates of the face.
    pub face_affines: Vec<Affine>,
    /// Same per region (`[region][frame]`), including region-specific motion.
    pub region_affines: Vec<Vec<Affine>>,
    pub region_labels: Vec<String>,
    /// Region polygons at every refresh instant of a moving scene.
    pub regions: RegionFile,
    /// Per-ROI amplitudes of the 20 px grid over the frame-0 regions.
    pub roi_amplitudes: Vec<RoiAmplitude>,
    /// Illumination scale per frame.
    pub illumination_scale: Vec<f64>,
}

impl SceneTruth {
    /// Region polygon at `frame`.
    pub fn region_polygon(&self, region: usize, frame: usize) -> Polygon {
        self.regions.sets[0].regions[region]
            .polygon
            .transformed(&self.region_affines[region][frame])
    }

    /// Map of region `region` from frame `from` to frame `to`.
    pub fn relative_affine(&self, region: usize, from: usize, to: usize) -> Affine {
        let a = &self.region_affines[region];
        a[from].inverse().expect("scripted motion is invertible").then(&a[to])
    }
}

struct SurfaceNode {
    amp: [f64; SURFACE_COMPONENTS],
    freq: [f64; SURFACE_COMPONENTS],
    phase: [f64; SURFACE_COMPONENTS],
}

/// Frame-by-frame renderer of a scene; every frame depends only on the
/// scene and its index.
pub struct Renderer {
    spec: SceneSpec,
    fields: StaticFields,
    ppg: PpgTrack,
    regions: Vec<PlanarRegion>,
    face_affines: Vec<Affine>,
    region_affines: Vec<Vec<Affine>>,
    own_motion: Vec<usize>,
    nodes: Vec<SurfaceNode>,
    nodes_x: usize,
    nodes_y: usize,
}

fn velocity_sum(segments: &[&MotionSegment], t: f64) -> (f64, f64, f64) {
    segments.iter().fold((0.0, 0.0, 0.0), |acc, s| {
        let v = s.velocity(t);
        (acc.0 + v.0, acc.1 + v.1, acc.2 + v.2)
    })
}

/// Per-frame increment: rotation about `center`, then translation.
fn increment(v: (f64, f64, f64), center: Point) -> Affine {
    Affine::similarity_about(center, v.2, 1.0).then(&Affine::translation(v.0, v.1))
}

impl Renderer {
    pub fn new(spec: &SceneSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.frame_count();
        if n == 0 {
            return Err(Error::Scene("scene has no frames".into()));
        }
        let ppg = synth_ppg(&spec.ppg, spec.duration, spec.seed)?;
        let fields = StaticFields::build(spec);
        let regions = scene_regions(spec);
        for rm in &spec.region_motion {
            if !regions.iter().any(|r| r.label == rm.label) {
                return Err(Error::Scene(format!("region_motion names unknown region {}", rm.label)));
            }
        }

        let face_segments: Vec<&MotionSegment> = spec.motion.iter().collect();
        let mut face_affines = Vec::with_capacity(n);
        let mut cur = Affine::identity();
        face_affines.push(cur);
        let mut increments = Vec::with_capacity(n);
        increments.push(Affine::identity());
        for f in 1..n {
            let t = (f - 1) as f64 / spec.fps;
            let inc = increment(velocity_sum(&face_segments, t), cur.apply(spec.face.center));
            cur = cur.then(&inc);
            increments.push(inc);
            face_affines.push(cur);
        }

        let mut own_motion = Vec::new();
        let mut region_affines = Vec::with_capacity(regions.len());
        for (ri, r) in regions.iter().enumerate() {
            let segs: Vec<&MotionSegment> = spec
                .region_motion
                .iter()
                .filter(|m| m.label == r.label)
                .map(|m| &m.segment)
                .collect();
            if segs.is_empty() {
                region_affines.push(face_affines.clone());
                continue;
            }
            own_motion.push(ri);
            let centroid = r.polygon.bbox().center();
            let mut cur = Affine::identity();
            let mut track = vec![cur];
            for (f, face_inc) in increments.iter().enumerate().skip(1) {
                let t = (f - 1) as f64 / spec.fps;
                let after_face = cur.then(face_inc);
                let own = increment(velocity_sum(&segs, t), after_face.apply(centroid));
                cur = after_face.then(&own);
                track.push(cur);
            }
            region_affines.push(track);
        }

        let nodes_x = (spec.width as f64 / SURFACE_SPACING).ceil() as usize + 3;
        let nodes_y = (spec.height as f64 / SURFACE_SPACING).ceil() as usize + 3;
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(spec.seed, SURFACE_STREAM, 0));
        let comp_amp = spec.surface_noise.std * (2.0 / SURFACE_COMPONENTS as f64).sqrt();
        let nodes = (0..nodes_x * nodes_y)
            .map(|_| {
                let mut node = SurfaceNode {
                    amp: [comp_amp; SURFACE_COMPONENTS],
                    freq: [0.0; SURFACE_COMPONENTS],
                    phase: [0.0; SURFACE_COMPONENTS],
                };
                for c in 0..SURFACE_COMPONENTS {
                    node.freq[c] = rng.random_range(0.02..1.0) * spec.surface_noise.cutoff_hz;
                    node.phase[c] = rng.random_range(0.0..2.0 * PI);
                }
                node
            })
            .collect();

        let r = Renderer {
            spec: spec.clone(),
            fields,
            ppg,
            regions,
            face_affines,
            region_affines,
            own_motion,
            nodes,
            nodes_x,
            nodes_y,
        };
        r.check_range()?;
        Ok(r)
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn frame_count(&self) -> usize {
        self.face_affines.len()
    }

    pub fn ppg(&self) -> &PpgTrack {
        &self.ppg
    }

    pub fn fields(&self) -> &StaticFields {
        &self.fields
    }

    pub fn illumination_scale(&self, t: f64) -> f64 {
        match self.spec.lux_ramp {
            Some((a, b)) => {
                let u = (t / self.spec.duration).clamp(0.0, 1.0);
                a + (b - a) * u * u * (3.0 - 2.0 * u)
            }
            None => 1.0,
        }
    }

    fn surface_bound(&self) -> f64 {
        self.nodes.first().map_or(0.0, |n| n.amp.iter().sum())
    }

    /// Rejects scenes whose noise-free intensity can leave `[0, 255]`.
    fn check_range(&self) -> Result<()> {
        let pmax: f64 = self.spec.ppg.harmonics.iter().map(|a| a.abs()).sum();
        let (lo_scale, hi_scale) = match self.spec.lux_ramp {
            Some((a, b)) => (a.min(b), a.max(b)),
            None => (1.0, 1.0),
        };
        let s = self.surface_bound();
        let f = &self.fields;
        let w = f.width;
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for k in 0..f.illum.len() {
            let p = Point::new((k % w) as f64 + 0.5, (k / w) as f64 + 0.5);
            let here: Vec<&Burst> = self
                .spec
                .bursts
                .iter()
                .filter(|b| (p.x - b.center.x).powi(2) + (p.y - b.center.y).powi(2) <= b.radius * b.radius)
                .collect();
            let burst = here
                .iter()
                .map(|a| {
                    here.iter()
                        .filter(|b| b.t_start <= a.t_start && a.t_start <= b.t_end)
                        .map(|b| b.amplitude.abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            let swing = f.pulsatile[k].abs() * pmax + f.illum[k].abs() * s;
            hi = hi.max(hi_scale * (f.surface[k] + swing) + burst);
            lo = lo.min(lo_scale * (f.surface[k] - swing) - burst);
        }
        for o in &self.spec.occluders {
            hi = hi.max(o.intensity);
            lo = lo.min(o.intensity);
        }
        if hi > 255.0 || lo < 0.0 {
            return Err(Error::Scene(format!(
                "noise-free intensity spans [{lo:.1}, {hi:.1}], outside [0, 255]"
            )));
        }
        Ok(())
    }

    fn surface_nodes_at(&self, t: f64) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|n| {
                (0..SURFACE_COMPONENTS)
                    .map(|c| n.amp[c] * (2.0 * PI * n.freq[c] * t + n.phase[c]).sin())
                    .sum()
            })
            .collect()
    }

    fn surface_at(&self, nodes: &[f64], q: Point) -> f64 {
        let gx = (q.x / SURFACE_SPACING + 1.0).clamp(0.0, (self.nodes_x - 1) as f64 - 1e-9);
        let gy = (q.y / SURFACE_SPACING + 1.0).clamp(0.0, (self.nodes_y - 1) as f64 - 1e-9);
        let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
        let (tx, ty) = (gx - ix as f64, gy - iy as f64);
        let k = iy * self.nodes_x + ix;
        let top = nodes[k] * (1.0 - tx) + nodes[k + 1] * tx;
        let bot = nodes[k + self.nodes_x] * (1.0 - tx) + nodes[k + self.nodes_x + 1] * tx;
        top * (1.0 - ty) + bot * ty
    }

    /// Intensities of frame `f` before quantization, sensor noise included.
    pub fn frame_f64(&self, f: usize) -> Vec<f64> {
        let spec = &self.spec;
        let (w, h) = (spec.width, spec.height);
        let t = f as f64 / spec.fps;
        let p = self.ppg.value(t);
        let lux = self.illumination_scale(t);
        let nodes = self.surface_nodes_at(t);
        let face_inv = self.face_affines[f].inverse().expect("scripted motion is invertible");
        let static_face = self.face_affines[f] == Affine::identity();
        let own: Vec<(&Polygon, Affine)> = self
            .own_motion
            .iter()
            .map(|&ri| {
                (
                    &self.regions[ri].polygon,
                    self.region_affines[ri][f].inverse().expect("scripted motion is invertible"),
                )
            })
            .collect();
        let bursts: Vec<(Point, f64, f64)> = spec
            .bursts
            .iter()
            .filter_map(|b| {
                let v = b.value(t);
                (v != 0.0).then_some((b.center, b.radius * b.radius, v))
            })
            .collect();
        let frame_idx = f as f64;
        let occluders: Vec<(f64, f64, f64, f64, f64)> = spec
            .occluders
            .iter()
            .filter(|o| t >= o.t_start && t < o.t_end)
            .map(|o| {
                let start = (o.t_start * spec.fps).ceil();
                let x0 = o.x0 + o.vx * (frame_idx - start);
                let y0 = o.y0 + o.vy * (frame_idx - start);
                (x0, y0, x0 + o.w, y0 + o.h, o.intensity)
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(spec.seed, SENSOR_STREAM, f as u64));
        let sigma = spec.sensor_noise_std;
        let fields = &self.fields;

        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let k = y * w + x;
                let pc = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                let occluded = occluders
                    .iter()
                    .find(|o| pc.x >= o.0 && pc.x < o.2 && pc.y >= o.1 && pc.y < o.3);
                let mut v = if let Some(o) = occluded {
                    o.4
                } else {
                    let mut src = None;
                    for (poly, inv) in &own {
                        let q = inv.apply(pc);
                        if poly.contains(q) {
                            src = Some(q);
                            break;
                        }
                    }
                    let (q, a, b, i) = match src {
                        None if static_face => (pc, fields.pulsatile[k], fields.surface[k], fields.illum[k]),
                        other => {
                            let q = other.unwrap_or_else(|| face_inv.apply(pc));
                            (
                                q,
                                fields.sample(&fields.pulsatile, q),
                                fields.sample(&fields.surface, q),
                                fields.sample(&fields.illum, q),
                            )
                        }
                    };
                    let s = if nodes.is_empty() || spec.surface_noise.std == 0.0 {
                        0.0
                    } else {
                        self.surface_at(&nodes, q)
                    };
                    let mut v = lux * (a * p + b + i * s);
                    for (c, r2, amp) in &bursts {
                        if (q.x - c.x).powi(2) + (q.y - c.y).powi(2) <= *r2 {
                            v += amp;
                        }
                    }
                    v
                };
                if sigma > 0.0 {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    v += sigma * n;
                }
                out[k] = v;
            }
        }
        out
    }

    /// Frame `f` rounded to the nearest grey level and clamped to `[0, 255]`.
    pub fn frame(&self, f: usize) -> Frame {
        let data = self
            .frame_f64(f)
            .into_iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8)
            .collect();
        Frame::new(self.spec.width, self.spec.height, data)
    }

    pub fn truth(&self) -> SceneTruth {
        let spec = &self.spec;
        let n = self.frame_count();
        let moving = !spec.motion.is_empty() || !spec.region_motion.is_empty();
        let mut sets = vec![RegionSet { valid_from_frame: 0, regions: self.regions.clone() }];
        if moving {
            let step = ((spec.region_refresh_s * spec.fps).round() as usize).max(1);
            let mut f = step;
            while f < n {
                let regions = self
                    .regions
                    .iter()
                    .enumerate()
                    .map(|(ri, r)| PlanarRegion {
                        label: r.label.clone(),
                        polygon: r.polygon.transformed(&self.region_affines[ri][f]),
                    })
                    .collect();
                sets.push(RegionSet { valid_from_frame: f, regions });
                f += step;
            }
        }
        let grid = grid_regions(&self.regions, DEFAULT_BLOCK);
        let roi_amplitudes = grid
            .rois
            .iter()
            .map(|roi| RoiAmplitude {
                roi_id: roi.id,
                region_label: roi.region_label.clone(),
                amplitude: average_field(&self.fields.pulsatile, spec.width, spec.height, &roi.quad)
                    .unwrap_or(0.0),
                true_snr_db: None,
            })
            .collect();
        let n500 = (spec.duration * TRUTH_RATE_HZ).round() as usize;
        SceneTruth {
            fps: spec.fps,
            ppg: self.ppg.sample(spec.fps, n),
            ppg_500: self.ppg.sample(TRUTH_RATE_HZ, n500),
            beat_times: self.ppg.beat_times(),
            face_affines: self.face_affines.clone(),
            region_affines: self.region_affines.clone(),
            region_labels: self.regions.iter().map(|r| r.label.clone()).collect(),
            regions: RegionFile { sets },
            roi_amplitudes,
            illumination_scale: (0..n).map(|f| self.illumination_scale(f as f64 / spec.fps)).collect(),
        }
    }
}

/// Renders every frame of the scene with its ground truth.
pub fn render(spec: &SceneSpec) -> Result<(FrameSequence, SceneTruth)> {
    if !spec.quantize {
        return Err(Error::Scene(
            "8-bit frame output needs quantize=true; use Renderer::frame_f64 for raw intensities".into(),
        ));
    }
    let r = Renderer::new(spec)?;
    let frames = (0..r.frame_count()).map(|f| r.frame(f)).collect();
    let seq = FrameSequence::new(spec.fps, frames)?;
    let mut truth = r.truth();
    let snrs = roi_true_snr(&seq, &truth);
    for (a, s) in truth.roi_amplitudes.iter_mut().zip(snrs) {
        a.true_snr_db = s;
    }
    Ok((seq, truth))
}

/// Per-ROI SNR measured on the rendered frames. Each ROI follows its
/// region's scripted warp; the known pulsatile term `A_i * scale(t) * p(t)`
/// is the signal and the remainder of the trace is the noise, both in the
/// pulse band.
pub fn roi_true_snr(seq: &FrameSequence, truth: &SceneTruth) -> Vec<Option<f64>> {
    let grid = grid_regions(&truth.regions.sets[0].regions, DEFAULT_BLOCK);
    let Ok(filter) = Bandpass::design(BandpassSpec::pulse_band(seq.fps)) else {
        return vec![None; grid.len()];
    };
    grid.rois
        .iter()
        .zip(&truth.roi_amplitudes)
        .map(|(roi, amp)| {
            let mut signal = Vec::with_capacity(seq.len());
            let mut rest = Vec::with_capacity(seq.len());
            for (f, frame) in seq.frames.iter().enumerate() {
                let quad = roi.quad.transformed(&truth.region_affines[roi.region_index][f]);
                let v = average_roi(frame, &quad)?;
                let s = amp.amplitude * truth.illumination_scale[f] * truth.ppg[f];
                signal.push(s);
                rest.push(v - s);
            }
            let ps = power(&filter.filtfilt(&signal).ok()?);
            let pn = power(&filter.filtfilt(&rest).ok()?);
            (ps > 0.0 && pn > 0.0).then(|| 10.0 * (ps / pn).log10())
        })
        .collect()
}

fn power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}
