use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rppg::frameio::{load_regions, load_sequence};
use rppg::pipeline::{
    compare, estimate, evaluate, goodness_scatter, load_ppg, load_reference, write_comparison, write_estimate,
    write_evaluation, write_goodness, write_plot, write_simulation, Estimator, RunConfig,
};
use rppg::simulator::{preset, render, SceneSpec, PRESET_NAMES};
use rppg::{Error, Result};

/// Camera-based pulse estimation on PGM frame sequences.
#[derive(Parser)]
#[command(name = "rppg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Seed for the scene or for RANSAC sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// File of `key=value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single `key=value` override, applied after `--config`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn text(&self) -> Result<String> {
        let mut text = match &self.config {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        for kv in &self.set {
            text.push('\n');
            text.push_str(kv);
        }
        Ok(text)
    }

    fn run_config(&self, estimator: Option<Estimator>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(&self.text()?)?;
        if let Some(e) = estimator {
            cfg.estimator = e;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render a preset or scene file into frames and ground truth.
    Simulate {
        /// Preset name or path to a scene file.
        scene: String,
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Estimate the pulse waveform of a frame sequence.
    Estimate {
        frames: PathBuf,
        regions: PathBuf,
        out: PathBuf,
        #[arg(long)]
        estimator: Option<Estimator>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Score an estimate against a reference waveform.
    Evaluate {
        ppg: PathBuf,
        truth: PathBuf,
        out: PathBuf,
        #[arg(long)]
        beats: Option<PathBuf>,
        /// `weights.csv` of the estimate, for the goodness scatter.
        #[arg(long, requires = "amplitudes")]
        weights: Option<PathBuf>,
        /// `roi_amplitudes.csv` of the simulation.
        #[arg(long, requires = "weights")]
        amplitudes: Option<PathBuf>,
        #[arg(long, default_value = "estimate")]
        label: String,
    },
    /// Run both estimators on one input and tabulate them side by side.
    Compare {
        frames: PathBuf,
        regions: PathBuf,
        truth: PathBuf,
        out: PathBuf,
        #[arg(long)]
        beats: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn scene(name: &str, overrides: &Overrides) -> Result<SceneSpec> {
    let seed = overrides.seed.unwrap_or(rppg::simulator::DEFAULT_SEED);
    let mut spec = if PRESET_NAMES.contains(&name) {
        preset(name, seed)?
    } else if Path::new(name).is_file() {
        let text = std::fs::read_to_string(name).map_err(|e| Error::Config(format!("{name}: {e}")))?;
        SceneSpec::parse(&text)?
    } else {
        return Err(Error::Scene(format!(
            "unknown scene {name:?}; presets are {}",
            PRESET_NAMES.join(", ")
        )));
    };
    spec.apply_text(&overrides.text()?)?;
    if let Some(s) = overrides.seed {
        spec.seed = s;
    }
    spec.validate()?;
    Ok(spec)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { scene: name, out, overrides } => {
            let spec = scene(&name, &overrides)?;
            let (seq, truth) = render(&spec)?;
            write_simulation(&out, &spec, &seq, &truth)?;
            println!("{} frames of {} written to {}", seq.len(), spec.name, out.display());
        }
        Command::Estimate { frames, regions, out, estimator, overrides } => {
            let cfg = overrides.run_config(estimator)?;
            let seq = load_sequence(&frames)?;
            let regions = load_regions(&regions)?;
            regions.check_bounds(seq.frames[0].width, seq.frames[0].height)?;
            let result = estimate(&seq, &regions, &cfg)?;
            write_estimate(&out, &result)?;
            println!("{} samples from {} written to {}", result.samples.len(), cfg.estimator, out.display());
        }
        Command::Evaluate { ppg, truth, out, beats, weights, amplitudes, label } => {
            let (samples, fs) = load_ppg(&ppg)?;
            let reference = load_reference(&truth, beats.as_deref())?;
            let e = evaluate(&samples, fs, &reference)?;
            write_evaluation(&out, &label, &e)?;
            if let (Some(w), Some(a)) = (weights, amplitudes) {
                write_goodness(&out.join("goodness.csv"), &goodness_scatter(&w, &a)?)?;
            }
            println!("snr {:.2} dB", e.snr.snr_db);
        }
        Command::Compare { frames, regions, truth, out, beats, overrides } => {
            let cfg = overrides.run_config(None)?;
            let seq = load_sequence(&frames)?;
            let regions = load_regions(&regions)?;
            regions.check_bounds(seq.frames[0].width, seq.frames[0].height)?;
            let reference = load_reference(&truth, beats.as_deref())?;
            let c = compare(&seq, &regions, &reference, &cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Config(format!("{}: {e}", out.display())))?;
            write_comparison(&out.join("compare.csv"), &c)?;
            write_plot(&out.join("plot.csv"), &c, &reference)?;
            println!(
                "distanceppg {:.2} dB, face_average {:.2} dB, delta {:.2} dB",
                c.distance.evaluation.snr.snr_db,
                c.baseline.evaluation.snr.snr_db,
                c.delta_snr_db()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_degenerate() { 1 } else { 2 })
        }
    }
}
