use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bsm_cli::config::{ExperimentConfig, MethodChoice, SAMPLE_RATE};
use bsm_cli::io::{normalization_gain, read_bank, read_wav, write_bank, write_wav};
use bsm_cli::{report, Experiment, ScenarioRef};
use clap::{Args, Parser, Subcommand};
use spectral::{istft, stft, DEFAULT_HOP, DEFAULT_WIN_LEN};

#[derive(Parser)]
#[command(name = "bsm", version, about = "Binaural rendering from head-worn microphone arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON); flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled scenario id (scenario1..3) or a scenario JSON file.
    #[arg(long)]
    scenario: Option<String>,
    /// Methods to run: BSM, COM, DBSM, REFERENCE. Repeatable.
    #[arg(long = "method", value_delimiter = ',')]
    methods: Vec<MethodChoice>,
    /// Array rotation relative to the head, degrees.
    #[arg(long)]
    rotation_deg: Option<f64>,
    /// DOA error as `azimuth[,theta]` in degrees.
    #[arg(long, value_delimiter = ',', num_args = 1..=2)]
    doa_error_deg: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// HRIR directory or analytic-sphere(radius_mm[, left_az, right_az]).
    #[arg(long)]
    hrtf: Option<String>,
    /// Sensor SNR in dB; `inf` disables noise.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Azimuth step of sweeps and maps, degrees.
    #[arg(long)]
    sweep_step_deg: Option<f64>,
    /// Use the scenario's own reverberation time and duration instead of desk-scale limits.
    #[arg(long)]
    full_scale: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the array capture and the reference binaural signal.
    Simulate(Common),
    /// Design filter banks and write them as CSV.
    Design {
        #[command(flatten)]
        common: Common,
        /// Design from this capture instead of simulating one.
        #[arg(long)]
        capture: Option<PathBuf>,
    },
    /// Apply a filter bank to a capture.
    Render {
        #[arg(long)]
        capture: PathBuf,
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Full pipeline: simulate, design, render, score against the reference.
    Evaluate(Common),
    /// Per-azimuth ITD/ILD with the source moved around the array.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Keep the source at the scenario direction and evaluate off-source.
        #[arg(long)]
        fixed_source: bool,
    },
    /// Directional-error surface over azimuth and frequency.
    Dirmap(Common),
    /// Per-method means of a report CSV.
    Report {
        input: PathBuf,
    },
}

fn build_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::bundled("scenario1")?,
    };
    if let Some(s) = &c.scenario {
        cfg.scenario = if Path::new(s).is_file() {
            let text = std::fs::read_to_string(s)?;
            ScenarioRef::Inline(serde_json::from_str(&text).with_context(|| format!("parsing {s}"))?)
        } else {
            ScenarioRef::Bundled(s.clone())
        };
    }
    if !c.methods.is_empty() {
        cfg.methods = c.methods.clone();
    }
    if let Some(r) = c.rotation_deg {
        cfg.rotation_deg = r;
    }
    if let Some(e) = &c.doa_error_deg {
        cfg.doa_error_deg = [e[0], e.get(1).copied().unwrap_or(0.0)];
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(h) = &c.hrtf {
        cfg.hrtf = h.clone();
    }
    if let Some(snr) = c.snr_db {
        cfg.snr_db = snr.is_finite().then_some(snr);
    }
    if let Some(step) = c.sweep_step_deg {
        cfg.sweep.step_deg = step;
        cfg.sweep.stop_deg = 360.0 - step;
    }
    cfg.full_scale |= c.full_scale;
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    std::fs::write(cfg.output_dir.join("config.json"), cfg.to_json())?;
    Ok(cfg)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(c) => {
            let cfg = build_config(&c)?;
            let exp = Experiment::new(cfg.clone())?;
            let sim = exp.simulate(None)?;
            let reference = exp.reference_binaural(&sim)?;
            write_wav(&cfg.output_dir.join("capture.wav"), &sim.capture.signals, SAMPLE_RATE, 1.0)?;
            let gain = normalization_gain([&reference]);
            write_wav(&cfg.output_dir.join("reference.wav"), &reference, SAMPLE_RATE, gain)?;
            println!("{} images, noise variance {:.3e}", sim.images.len(), sim.capture.noise_variance);
        }
        Command::Design { common, capture } => {
            let cfg = build_config(&common)?;
            let exp = Experiment::new(cfg.clone())?;
            let mut sim = exp.simulate(None)?;
            if let Some(path) = capture {
                let (signals, fs) = read_wav(&path)?;
                if signals.nrows() != bsm_cli::pipeline::MIC_COUNT {
                    bail!("{}: expected {} channels", path.display(), bsm_cli::pipeline::MIC_COUNT);
                }
                sim.tf = stft(&signals, fs, DEFAULT_WIN_LEN, DEFAULT_HOP)?;
                // unknown sensor noise: the designs fall back to a capture-relative level
                sim.capture.noise_variance = 0.0;
                sim.capture.signals = signals;
            }
            for m in cfg.design_methods() {
                let bank = exp.design(m, &sim)?;
                let path = cfg.output_dir.join(format!("bank_{}.csv", m.to_string().to_lowercase()));
                write_bank(&path, &bank)?;
                println!("{m}: {} bins -> {}", bank.len(), path.display());
            }
        }
        Command::Render { capture, bank, output } => {
            let (signals, fs) = read_wav(&capture)?;
            let bank = read_bank(&bank)?;
            let tf = stft(&signals, fs, DEFAULT_WIN_LEN, DEFAULT_HOP)?;
            let binaural = istft(&bank.apply(&tf)?)?;
            write_wav(&output, &binaural, fs, normalization_gain([&binaural]))?;
        }
        Command::Evaluate(c) => {
            let cfg = build_config(&c)?;
            let exp = Experiment::new(cfg.clone())?;
            let run = exp.run_scenario()?;
            let dir = &cfg.output_dir;
            report::write_nmse_csv(&dir.join("nmse.csv"), &cfg, &run)?;
            let rows: Vec<_> = run
                .results
                .iter()
                .map(|r| bsm_cli::CueRow {
                    method: r.method,
                    source_azimuth_deg: cfg.scenario_config().map(|s| s.source_direction_deg[0]).unwrap_or(0.0),
                    cues: r.report.cues[0].clone(),
                })
                .collect();
            report::write_cues_csv(&dir.join("cues.csv"), &cfg, &rows)?;
            let gain = normalization_gain(run.results.iter().map(|r| &r.binaural).chain([&run.reference]));
            write_wav(&dir.join("reference.wav"), &run.reference, SAMPLE_RATE, gain)?;
            for r in &run.results {
                let name = r.method.to_string().to_lowercase();
                write_wav(&dir.join(format!("{name}.wav")), &r.binaural, SAMPLE_RATE, gain)?;
                if let (Some(l), Some(rr)) = (r.report.band_nmse_db(0, 2000.0, 10_000.0), r.report.band_nmse_db(1, 2000.0, 10_000.0)) {
                    println!("{:<9} NMSE 2-10 kHz: left {l:7.2} dB, right {rr:7.2} dB", r.method);
                }
            }
        }
        Command::Sweep { common, fixed_source } => {
            let cfg = build_config(&common)?;
            let exp = Experiment::new(cfg.clone())?;
            let (rows, name) = if fixed_source {
                (exp.off_source_analysis()?, "off_source.csv")
            } else {
                (exp.sweep_doa()?, "sweep.csv")
            };
            let path = cfg.output_dir.join(name);
            report::write_cues_csv(&path, &cfg, &rows)?;
            for &m in &cfg.methods {
                if let Some(e) = report::mean_ild_error(&rows, m) {
                    println!("{m:<9} mean ILD error {e:.2} dB");
                }
            }
            println!("-> {}", path.display());
        }
        Command::Dirmap(c) => {
            let cfg = build_config(&c)?;
            let exp = Experiment::new(cfg.clone())?;
            let maps = exp.directional_error_map()?;
            let path = cfg.output_dir.join("dirmap.csv");
            report::write_dirmap_csv(&path, &cfg, &maps)?;
            println!("-> {}", path.display());
        }
        Command::Report { input } => {
            for (method, cols) in report::summarize_csv(&input)? {
                println!("{method}");
                for (name, mean) in cols {
                    println!("  {name:<16} {mean:.4}");
                }
            }
        }
    }
    Ok(())
}
