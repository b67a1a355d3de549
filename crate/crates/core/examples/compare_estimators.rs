//! Renders a preset scene and scores both estimators against its truth.
//!
//! ```text
//! cargo run --release --example compare_estimators -- static_dark 3
//! ```

use std::time::Instant;

use rppg::pipeline::{compare, reference_waveform, RunConfig};
use rppg::simulator::{preset, render};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let scene = args.next().unwrap_or_else(|| "static_dark".to_string());
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let t0 = Instant::now();
    let spec = preset(&scene, seed)?;
    let (frames, truth) = render(&spec)?;
    let rendered = t0.elapsed();

    let mut cfg = RunConfig::default();
    if let Some(kv) = args.next() {
        cfg.apply_text(&kv.replace(';', "\n"))?;
    }
    let c = compare(&frames, &truth.regions, &reference_waveform(&truth), &cfg)?;
    println!("{scene} seed {seed}: render {:.1?}, total {:.1?}", rendered, t0.elapsed());
    for r in [&c.distance, &c.baseline] {
        let e = &r.evaluation;
        let errs: Vec<String> = e.window_errors().iter().map(|w| w.map_or("-".into(), |v| format!("{v:.1}"))).collect();
        println!(
            "{:>13}  snr {:6.2} dB  windows [{}]  ibi rmse {:?} ms  missing {:?}%  gated {}/{}",
            r.estimator.as_str(),
            e.snr.snr_db,
            errs.join(" "),
            e.ibi_rmse_ms().map(|v| (v * 10.0).round() / 10.0),
            e.missing_pct(),
            r.gated_roi_epochs,
            r.roi_epochs,
        );
    }
    println!("delta snr {:.2} dB", c.delta_snr_db());
    Ok(())
}
