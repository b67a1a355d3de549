//! On-disk formats: PGM frame sequences, region files and ground-truth CSVs.
//!
//! A sequence directory holds `manifest.txt` (`fps=`, `frames=`, `width=`,
//! `height=` lines) next to binary PGM frames named `frame_%06d.pgm`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};

pub const MANIFEST_NAME: &str = "manifest.txt";

/// One 8-bit grayscale frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height, "frame buffer size");
        Frame {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Frame::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// Ordered frames sharing one size, with their capture rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub frames: Vec<Frame>,
}

impl FrameSequence {
    pub fn new(fps: f64, frames: Vec<Frame>) -> Result<Self> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(Error::InvalidArgument(format!("fps must be > 0, got {fps}")));
        }
        let first = frames.first().ok_or(Error::EmptySequence)?;
        let (w, h) = (first.width, first.height);
        for (index, f) in frames.iter().enumerate() {
            if f.width != w || f.height != h {
                return Err(Error::DimensionMismatch {
                    index,
                    got_w: f.width,
                    got_h: f.height,
                    want_w: w,
                    want_h: h,
                });
            }
        }
        Ok(FrameSequence {
            width: w,
            height: h,
            fps,
            frames,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }
}

fn frame_name(index: usize) -> String {
    format!("frame_{index:06}.pgm")
}

pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend_from_slice(&frame.data);
    out
}

/// Decodes a binary (P5) PGM with maxval 255. `#` comments in the header are skipped.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Frame> {
    let bad = |reason: &str| Error::Pgm {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(bad("not a binary P5 file"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("expected a number in header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("header number out of range"))?;
    }
    // exactly one whitespace byte separates header and raster
    if !bytes.get(pos).is_some_and(|c| c.is_ascii_whitespace()) {
        return Err(bad("missing separator after maxval"));
    }
    pos += 1;
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(bad(&format!("maxval {maxval}, expected 255")));
    }
    let need = w * h;
    if bytes.len() - pos < need {
        return Err(bad("truncated raster"));
    }
    Ok(Frame::new(w, h, bytes[pos..pos + need].to_vec()))
}

#[derive(Debug, Clone, PartialEq)]
struct Manifest {
    fps: f64,
    frames: usize,
    width: usize,
    height: usize,
}

fn parse_manifest(text: &str) -> Result<Manifest> {
    let mut fps = None;
    let mut frames = None;
    let mut width = None;
    let mut height = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Manifest(format!("expected key=value, got {line:?}")))?;
        let v = v.trim();
        let num_err = || Error::Manifest(format!("bad value for {}: {v:?}", k.trim()));
        match k.trim() {
            "fps" => fps = Some(v.parse::<f64>().map_err(|_| num_err())?),
            "frames" => frames = Some(v.parse::<usize>().map_err(|_| num_err())?),
            "width" => width = Some(v.parse::<usize>().map_err(|_| num_err())?),
            "height" => height = Some(v.parse::<usize>().map_err(|_| num_err())?),
            _ => {}
        }
    }
    let missing = |k: &str| Error::Manifest(format!("missing key {k}"));
    Ok(Manifest {
        fps: fps.ok_or_else(|| missing("fps"))?,
        frames: frames.ok_or_else(|| missing("frames"))?,
        width: width.ok_or_else(|| missing("width"))?,
        height: height.ok_or_else(|| missing("height"))?,
    })
}

/// Reads a sequence directory written by [`store_sequence`].
pub fn load_sequence(dir: impl AsRef<Path>) -> Result<FrameSequence> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_NAME);
    if !manifest_path.is_file() {
        return Err(Error::MissingManifest(dir.to_path_buf()));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let m = parse_manifest(&text)?;
    if !(m.fps > 0.0 && m.fps.is_finite()) {
        return Err(Error::Manifest(format!("fps must be > 0, got {}", m.fps)));
    }
    if m.frames == 0 {
        return Err(Error::EmptySequence);
    }
    let mut frames = Vec::with_capacity(m.frames);
    for index in 0..m.frames {
        let path = dir.join(frame_name(index));
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let f = decode_pgm(&bytes, &path)?;
        if f.width != m.width || f.height != m.height {
            return Err(Error::DimensionMismatch {
                index,
                got_w: f.width,
                got_h: f.height,
                want_w: m.width,
                want_h: m.height,
            });
        }
        frames.push(f);
    }
    FrameSequence::new(m.fps, frames)
}

pub fn store_sequence(seq: &FrameSequence, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    if seq.frames.is_empty() {
        return Err(Error::EmptySequence);
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, f) in seq.frames.iter().enumerate() {
        let path = dir.join(frame_name(i));
        fs::write(&path, encode_pgm(f)).map_err(|e| Error::io(&path, e))?;
    }
    let manifest = format!(
        "fps={}\nframes={}\nwidth={}\nheight={}\n",
        seq.fps,
        seq.frames.len(),
        seq.width,
        seq.height
    );
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
}

/// A labelled rigid face area (forehead, cheek, ...) tracked as one unit.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarRegion {
    pub label: String,
    pub polygon: Polygon,
}

/// Region polygons that apply from `valid_from_frame` until the next set.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSet {
    pub valid_from_frame: usize,
    pub regions: Vec<PlanarRegion>,
}

/// Trackable planar regions, optionally re-specified at later frames.
///
/// Eye and mouth areas must not be listed; keeping them out is up to
/// whoever writes the file.
///
/// Text form, one polygon per line, with `valid_from_frame=<n>` lines
/// opening a new set (lines before the first such marker belong to frame 0):
///
/// ```text
/// # comment
/// forehead-left: 100,40 150,40 150,80 100,80
/// valid_from_frame=300
/// forehead-left: 102,41 152,41 152,81 102,81
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct RegionFile {
    pub sets: Vec<RegionSet>,
}

impl RegionFile {
    pub fn single(regions: Vec<PlanarRegion>) -> Self {
        RegionFile {
            sets: vec![RegionSet {
                valid_from_frame: 0,
                regions,
            }],
        }
    }

    /// The region set in force at `frame` (latest set starting at or before it).
    pub fn regions_at(&self, frame: usize) -> &[PlanarRegion] {
        self.sets
            .iter()
            .filter(|s| s.valid_from_frame <= frame)
            .max_by_key(|s| s.valid_from_frame)
            .or_else(|| self.sets.first())
            .map(|s| s.regions.as_slice())
            .unwrap_or(&[])
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sets = vec![RegionSet {
            valid_from_frame: 0,
            regions: Vec::new(),
        }];
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |reason: String| Error::RegionFile {
                line: line_no,
                reason,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("valid_from_frame=") {
                let frame: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad frame index {v:?}")))?;
                let last = sets.last().unwrap();
                if frame == 0 && last.regions.is_empty() && sets.len() == 1 {
                    continue;
                }
                if frame <= last.valid_from_frame {
                    return Err(err("valid_from_frame must increase".into()));
                }
                sets.push(RegionSet {
                    valid_from_frame: frame,
                    regions: Vec::new(),
                });
                continue;
            }
            let (label, coords) = line
                .split_once(':')
                .ok_or_else(|| err("expected `label: x,y x,y ...`".into()))?;
            let label = label.trim();
            if label.is_empty() {
                return Err(err("empty label".into()));
            }
            let mut vertices = Vec::new();
            for tok in coords.split_whitespace() {
                let (x, y) = tok
                    .split_once(',')
                    .ok_or_else(|| err(format!("bad vertex {tok:?}")))?;
                let x: f64 = x.parse().map_err(|_| err(format!("bad x in {tok:?}")))?;
                let y: f64 = y.parse().map_err(|_| err(format!("bad y in {tok:?}")))?;
                vertices.push(Point::new(x, y));
            }
            if vertices.len() < 3 {
                return Err(err(format!("polygon {label} has fewer than 3 vertices")));
            }
            let polygon = Polygon::new(vertices);
            if !polygon.is_simple() {
                return Err(err(format!("polygon {label} is self-intersecting")));
            }
            sets.last_mut().unwrap().regions.push(PlanarRegion {
                label: label.to_string(),
                polygon,
            });
        }
        Ok(RegionFile { sets })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for set in &self.sets {
            if set.valid_from_frame > 0 {
                let _ = writeln!(out, "valid_from_frame={}", set.valid_from_frame);
            }
            for r in &set.regions {
                let _ = write!(out, "{}:", r.label);
                for v in &r.polygon.vertices {
                    let _ = write!(out, " {},{}", v.x, v.y);
                }
                out.push('\n');
            }
        }
        out
    }

    /// Checks every vertex lies inside a `width x height` frame.
    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        for set in &self.sets {
            for r in &set.regions {
                for v in &r.polygon.vertices {
                    if v.x < 0.0 || v.y < 0.0 || v.x > width as f64 || v.y > height as f64 {
                        return Err(Error::RegionFile {
                            line: 0,
                            reason: format!(
                                "region {} vertex ({}, {}) outside {width}x{height} frame",
                                r.label, v.x, v.y
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn load_regions(path: impl AsRef<Path>) -> Result<RegionFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RegionFile::parse(&text)
}

pub fn store_regions(regions: &RegionFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, regions.to_text()).map_err(|e| Error::io(path, e))
}

/// A reference waveform sampled at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub sample_rate: f64,
    /// Time of the first sample, seconds.
    pub start: f64,
    pub samples: Vec<f64>,
    pub beat_times: Option<Vec<f64>>,
}

impl GroundTruth {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

/// Relative deviation of any timestep from the median timestep that is tolerated.
pub const MAX_TIMESTEP_JITTER: f64 = 0.01;

fn is_header(record: &csv::StringRecord) -> bool {
    record
        .get(0)
        .is_some_and(|f| f.trim().parse::<f64>().is_err())
}

/// Builds a fixed-rate waveform from `(time, value)` rows.
pub fn ground_truth_from_rows(rows: &[(f64, f64)]) -> Result<GroundTruth> {
    if rows.len() < 2 {
        return Err(Error::GroundTruth(format!(
            "need at least 2 samples, got {}",
            rows.len()
        )));
    }
    if rows.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut steps: Vec<f64> = rows.windows(2).map(|w| w[1].0 - w[0].0).collect();
    if steps.iter().any(|&d| d <= 0.0) {
        return Err(Error::GroundTruth("timestamps are not strictly increasing".into()));
    }
    let max_dev_steps = steps.clone();
    steps.sort_by(f64::total_cmp);
    let n = steps.len();
    let median = if n % 2 == 1 {
        steps[n / 2]
    } else {
        0.5 * (steps[n / 2 - 1] + steps[n / 2])
    };
    let worst = max_dev_steps
        .iter()
        .map(|d| (d - median).abs() / median)
        .fold(0.0, f64::max);
    if worst > MAX_TIMESTEP_JITTER {
        return Err(Error::GroundTruth(format!(
            "timestep jitter {:.2}% exceeds {:.0}%",
            worst * 100.0,
            MAX_TIMESTEP_JITTER * 100.0
        )));
    }
    Ok(GroundTruth {
        sample_rate: 1.0 / median,
        start: rows[0].0,
        samples: rows.iter().map(|r| r.1).collect(),
        beat_times: None,
    })
}

/// Reads `time_s,value` rows (header optional) into a fixed-rate waveform.
pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if i == 0 && is_header(&rec) {
            continue;
        }
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::GroundTruth(format!("row {}: expected two numbers", i + 1)))
        };
        rows.push((parse(0)?, parse(1)?));
    }
    ground_truth_from_rows(&rows)
}

pub fn store_ground_truth(truth: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["time_s", "value"])?;
    for (i, v) in truth.samples.iter().enumerate() {
        let t = truth.start + i as f64 / truth.sample_rate;
        w.write_record([format!("{t:.6}"), format!("{v:.9}")])?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

/// Reads a single-column `beat_time_s` CSV.
pub fn load_beats(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if i == 0 && is_header(&rec) {
            continue;
        }
        let t = rec
            .get(0)
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| Error::GroundTruth(format!("beat row {}: not a number", i + 1)))?;
        out.push(t);
    }
    Ok(out)
}

pub fn store_beats(beats: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::from("beat_time_s\n");
    for b in beats {
        let _ = writeln!(text, "{b:.6}");
    }
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
