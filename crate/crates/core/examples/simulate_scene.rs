//! Renders a preset scene and writes frames plus ground truth to a directory.
//!
//! ```text
//! cargo run --release --example simulate_scene -- reading /tmp/reading 4
//! ```

use rppg::pipeline::write_simulation;
use rppg::simulator::{preset, render, PRESET_NAMES};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "static_fair".into());
    let out = args.next().unwrap_or_else(|| format!("target/scenes/{name}"));
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    if !PRESET_NAMES.contains(&name.as_str()) {
        anyhow::bail!("presets: {}", PRESET_NAMES.join(", "));
    }

    let mut spec = preset(&name, seed)?;
    spec.duration = spec.duration.min(20.0);
    let (frames, truth) = render(&spec)?;
    write_simulation(out.as_ref(), &spec, &frames, &truth)?;

    let pr = 60.0 * (truth.beat_times.len() - 1) as f64
        / (truth.beat_times[truth.beat_times.len() - 1] - truth.beat_times[0]);
    let amps: Vec<f64> = truth.roi_amplitudes.iter().map(|r| r.amplitude).collect();
    let (lo, hi) = amps.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    println!("{} frames {}x{} at {} fps -> {out}", frames.len(), spec.width, spec.height, spec.fps);
    println!("{} beats, mean rate {pr:.1} bpm", truth.beat_times.len());
    println!("{} ROIs, pulse amplitude {lo:.3}..{hi:.3} intensity units", amps.len());
    for (label, affines) in truth.region_labels.iter().zip(&truth.region_affines) {
        let last = affines.last().unwrap();
        let c = truth.regions.sets[0].regions.iter().find(|r| &r.label == label).unwrap().polygon.bbox().center();
        let moved = last.apply(c) - c;
        println!("  {label:<14} drifts ({:+.1}, {:+.1}) px", moved.x, moved.y);
    }
    Ok(())
}
