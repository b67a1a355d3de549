//! Tracks the face regions of a moving scene epoch by epoch and reports the
//! error of each region center against the scripted motion.

use rppg::simulator::{preset, render};
use rppg::tracking::{EpochState, Pyramid, TrackingConfig};

fn main() -> anyhow::Result<()> {
    let scene = std::env::args().nth(1).unwrap_or_else(|| "reading".into());
    let mut spec = preset(&scene, 1)?;
    spec.duration = 15.0;
    let (seq, truth) = render(&spec)?;

    let cfg = TrackingConfig { epoch_seconds: 5.0, ..TrackingConfig::default() };
    let ef = cfg.epoch_frames(seq.fps);
    let mut start = 0;
    while start + 1 < seq.len() {
        let end = (start + ef).min(seq.len());
        let regions = truth.regions.regions_at(start);
        let mut state = EpochState::start(&seq.frames[start], start, regions, 20, &cfg);
        let mut prev = Pyramid::build(&seq.frames[start], cfg.klt.pyramid_levels);
        for f in start + 1..end {
            let next = Pyramid::build(&seq.frames[f], cfg.klt.pyramid_levels);
            state.step(&prev, &next);
            prev = next;
        }
        println!("epoch at frame {start}: {} of {} regions tracked", state.tracked_region_count(), state.regions.len());
        for (i, r) in state.regions.iter().enumerate() {
            let c = regions[i].polygon.bbox().center();
            let want = truth.relative_affine(i, start, end - 1).apply(c);
            let err = (r.cumulative.apply(c) - want).norm();
            println!(
                "  {:<14} {:>3} features alive  error {:.2} px  {:?}",
                r.label,
                r.features.alive_count(),
                err,
                r.status
            );
        }
        start = end;
    }
    Ok(())
}
