//! `uavradar` command-line driver.
//!
//! Any config key can be overridden with `--section.key=value` (or
//! `--section.key value`); overrides apply after `--config` and before
//! `--seed` / `--out`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uavradar::experiments::pipeline::{detect_cube, ensure_dir, load_or_synthesize, spectrogram_for, strongest, summary_text, PipelineReport};
use uavradar::experiments::tables::{
    detections_csv, map_csv, max_range_csv, pgm_db, roc_csv, spectrogram_csv, threshold_sweep_csv, write_text,
};
use uavradar::experiments::{run_max_range_table, run_pipeline, run_roc, run_threshold_sweep, write_iq, ExperimentConfig};
use uavradar::rdproc::range_doppler_map;
use uavradar::Error;

#[derive(Debug, Parser)]
#[command(name = "uavradar", version, about = "FMCW radar UAV detection experiments")]
struct Cli {
    /// Flat `section.key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize the configured scene and write cube.rdiq.
    Synth,
    /// Range-Doppler map of a cube, written to rdmap.csv.
    Rdmap(InputArgs),
    /// Micro-Doppler spectrogram of a cube, written to spectrogram.csv.
    Spectrogram(InputArgs),
    /// CFAR detections on a cube, written to detections.csv.
    Detect(InputArgs),
    /// Monte-Carlo ROC table, written to roc.csv.
    Roc,
    /// Weibull threshold versus P_fa, written to threshold_sweep.csv.
    ThresholdSweep,
    /// Maximum-range table, written to max_range.csv.
    MaxRange,
    /// Synthesize, process and write every artifact.
    Pipeline,
    /// Grayscale PGM previews of the map and spectrogram.
    Render(InputArgs),
}

#[derive(Debug, clap::Args)]
struct InputArgs {
    /// RDIQ file, or two-column I,Q CSV. Without it the configured scene is
    /// synthesized.
    #[arg(long)]
    input: Option<PathBuf>,
}

/// Splits `--a.b=v` / `--a.b v` overrides out of the argument list.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), Error> {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--") else {
            rest.push(a);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if !name.contains('.') {
            rest.push(a);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| Error::Config {
                key: name.clone(),
                reason: "missing value".into(),
            })?,
        };
        overrides.push((name, value));
    }
    Ok((rest, overrides))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Domain { .. } => 2,
        Error::Io { .. } | Error::Format { .. } => 3,
        Error::Invariant(_) => 4,
    }
}

fn load_config(cli: &Cli, overrides: &[(String, String)]) -> Result<ExperimentConfig, Error> {
    let mut all = overrides.to_vec();
    if let Some(s) = cli.seed {
        all.push(("seed".into(), s.to_string()));
    }
    if let Some(o) = &cli.out {
        all.push(("out".into(), o.display().to_string()));
    }
    ExperimentConfig::load(cli.config.as_deref(), &all)
}

fn emit(cfg: &ExperimentConfig, name: &str, text: &str) -> Result<PathBuf, Error> {
    ensure_dir(&cfg.out)?;
    let p = cfg.out.join(name);
    write_text(&p, text)?;
    Ok(p)
}

fn emit_bytes(cfg: &ExperimentConfig, name: &str, bytes: &[u8]) -> Result<PathBuf, Error> {
    ensure_dir(&cfg.out)?;
    let p = cfg.out.join(name);
    std::fs::write(&p, bytes).map_err(|e| Error::Io {
        path: p.clone(),
        source: e,
    })?;
    Ok(p)
}

fn input(args: &InputArgs) -> Option<&Path> {
    args.input.as_deref()
}

fn run(cli: &Cli, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, Error> {
    let mut written = Vec::new();
    match &cli.command {
        Command::Synth => {
            let scene = load_or_synthesize(cfg, None)?;
            ensure_dir(&cfg.out)?;
            let p = cfg.out.join("cube.rdiq");
            write_iq(&p, &scene.cube)?;
            written.push(p);
            let scr = scene
                .achieved_scr_db
                .map_or_else(|| "n/a (no signal)".to_string(), |v| format!("{v:.4}"));
            let mut summary = format!("achieved_scr_db: {scr}\n");
            for w in scene.cube.warnings() {
                summary.push_str(&format!("warning: {w:?}\n"));
            }
            written.push(emit(cfg, "synth_summary.txt", &summary)?);
        }
        Command::Rdmap(a) => {
            let scene = load_or_synthesize(cfg, input(a))?;
            let map = range_doppler_map(&scene.cube, cfg.windows)?;
            written.push(emit(cfg, "rdmap.csv", &map_csv(&map))?);
        }
        Command::Spectrogram(a) => {
            let scene = load_or_synthesize(cfg, input(a))?;
            let spec = spectrogram_for(cfg, &scene.cube)?;
            written.push(emit(cfg, "spectrogram.csv", &spectrogram_csv(&spec))?);
        }
        Command::Detect(a) => {
            let scene = load_or_synthesize(cfg, input(a))?;
            let p = detect_cube(cfg, &scene.cube)?;
            written.push(emit(cfg, "detections.csv", &detections_csv(&p.clusters))?);
            let report = PipelineReport {
                achieved_scr_db: scene.achieved_scr_db,
                raw_detections: p.detections.len(),
                strongest: strongest(&p.clusters),
                clusters: p.clusters,
                warnings: scene.cube.warnings().to_vec(),
                files: Vec::new(),
            };
            written.push(emit(cfg, "summary.txt", &summary_text(cfg, &report))?);
        }
        Command::Roc => {
            let rows = run_roc(cfg)?;
            written.push(emit(cfg, "roc.csv", &roc_csv(&rows))?);
        }
        Command::ThresholdSweep => {
            let rows = run_threshold_sweep(cfg.sweep.b_hat, &cfg.sweep.k, &cfg.sweep.pfa)?;
            written.push(emit(cfg, "threshold_sweep.csv", &threshold_sweep_csv(&rows))?);
        }
        Command::MaxRange => {
            let rows = run_max_range_table(&cfg.radar, &cfg.max_range.rcs_m2, &cfg.max_range.tx_power_dbm)?;
            written.push(emit(cfg, "max_range.csv", &max_range_csv(&rows))?);
        }
        Command::Pipeline => {
            let report = run_pipeline(cfg)?;
            written.extend(report.files);
        }
        Command::Render(a) => {
            let scene = load_or_synthesize(cfg, input(a))?;
            let map = range_doppler_map(&scene.cube, cfg.windows)?;
            let img = pgm_db(map.power(), map.num_doppler_bins(), map.num_range_bins(), 60.0);
            written.push(emit_bytes(cfg, "rdmap.pgm", &img)?);
            let spec = spectrogram_for(cfg, &scene.cube)?;
            let img = pgm_db(spec.power(), spec.num_freq_bins(), spec.num_frames(), 60.0);
            written.push(emit_bytes(cfg, "spectrogram.pgm", &img)?);
        }
    }
    Ok(written)
}

fn main() -> ExitCode {
    let (args, overrides) = match split_overrides(std::env::args().collect()) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let cli = Cli::parse_from(args);
    let result = load_config(&cli, &overrides).and_then(|cfg| run(&cli, &cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
