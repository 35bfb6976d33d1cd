//! End-to-end scene synthesis, processing and artifact output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::cfar::{cluster_detections, Cfar, Detection};
use crate::error::{Error, Result};
use crate::linkbudget::linear_to_db;
use crate::rdproc::{gate_around, range_doppler_map, spectrogram, RangeDopplerMap, Spectrogram};
use crate::synth::{mix_at_scr, synth_clutter_with, synth_noise, synth_point_target, synth_rotor, IqCube, SynthWarning};

use super::config::ExperimentConfig;
use super::iqfile::{read_cube, write_iq};
use super::tables::{detections_csv, map_csv, spectrogram_csv, write_text};

/// A synthesized cube plus how its signal was scaled.
#[derive(Debug, Clone)]
pub struct Scene {
    /// Rounded to the single precision of the I/Q file.
    pub cube: IqCube,
    pub gain: f64,
    pub achieved_scr_db: Option<f64>,
}

/// Clutter plus receiver noise at the configured clutter-to-noise ratio.
pub fn synthesize_background(cfg: &ExperimentConfig) -> Result<IqCube> {
    let w = cfg.clutter.weibull()?;
    let clutter = synth_clutter_with(&cfg.radar, &w, cfg.num_sweeps, cfg.seed, cfg.clutter.motion())?;
    let noise_power = w.second_moment() / 10f64.powf(cfg.clutter.cnr_db / 10.0);
    clutter.try_add(&synth_noise(&cfg.radar, noise_power, cfg.num_sweeps, cfg.seed)?)
}

/// Point target plus optional rotor, before SCR scaling.
pub fn synthesize_signal(cfg: &ExperimentConfig) -> Result<IqCube> {
    let mut signal = if cfg.target.rcs_amplitude > 0.0 {
        synth_point_target(&cfg.radar, &cfg.target, cfg.num_sweeps)?
    } else {
        IqCube::zeros(cfg.radar.clone(), cfg.num_sweeps)?
    };
    if cfg.rotor_enabled {
        signal = signal.try_add(&synth_rotor(&cfg.radar, &cfg.rotor, cfg.num_sweeps)?)?;
    }
    Ok(signal)
}

pub fn synthesize_scene(cfg: &ExperimentConfig) -> Result<Scene> {
    let signal = synthesize_signal(cfg)?;
    let background = synthesize_background(cfg)?;
    let mixed = mix_at_scr(&signal, &background, cfg.scr_db, cfg.windows)?;
    Ok(Scene {
        cube: mixed.cube.to_f32_precision(),
        gain: mixed.gain,
        achieved_scr_db: mixed.achieved_scr_db,
    })
}

/// Reads `input` if given, otherwise synthesizes the configured scene.
pub fn load_or_synthesize(cfg: &ExperimentConfig, input: Option<&Path>) -> Result<Scene> {
    match input {
        Some(p) => Ok(Scene {
            cube: read_cube(p, &cfg.radar)?,
            gain: f64::NAN,
            achieved_scr_db: None,
        }),
        None => synthesize_scene(cfg),
    }
}

#[derive(Debug, Clone)]
pub struct Processed {
    pub map: RangeDopplerMap,
    /// Every firing cell.
    pub detections: Vec<Detection>,
    /// One detection per connected group of firing cells.
    pub clusters: Vec<Detection>,
}

pub fn detect_cube(cfg: &ExperimentConfig, cube: &IqCube) -> Result<Processed> {
    let map = range_doppler_map(cube, cfg.windows)?;
    let detections = Cfar::from_config(&cfg.cfar)?.detect(&map)?;
    let clusters = cluster_detections(&detections);
    Ok(Processed {
        map,
        detections,
        clusters,
    })
}

pub fn spectrogram_for(cfg: &ExperimentConfig, cube: &IqCube) -> Result<Spectrogram> {
    let center = if cfg.spectrogram.gate_center_m >= 0.0 {
        cfg.spectrogram.gate_center_m
    } else {
        cfg.target.initial_range_m
    };
    let gate = gate_around(cube.radar(), center, cfg.spectrogram.gate_bins)?;
    spectrogram(cube, gate, cfg.spectrogram.stft())
}

pub fn strongest(dets: &[Detection]) -> Option<Detection> {
    dets.iter().copied().fold(None, |best: Option<Detection>, d| match best {
        Some(b) if b.power >= d.power => Some(b),
        _ => Some(d),
    })
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub achieved_scr_db: Option<f64>,
    pub raw_detections: usize,
    pub clusters: Vec<Detection>,
    pub strongest: Option<Detection>,
    pub warnings: Vec<SynthWarning>,
    pub files: Vec<PathBuf>,
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Synthesizes the scene, processes it and writes `cube.rdiq`, `rdmap.csv`,
/// `spectrogram.csv`, `detections.csv`, `config.txt` and `summary.txt` to
/// `cfg.out`.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineReport> {
    ensure_dir(&cfg.out)?;
    let scene = synthesize_scene(cfg)?;
    let processed = detect_cube(cfg, &scene.cube)?;
    let spec = spectrogram_for(cfg, &scene.cube)?;

    let path = |name: &str| cfg.out.join(name);
    let mut files = Vec::new();
    write_iq(&path("cube.rdiq"), &scene.cube)?;
    files.push(path("cube.rdiq"));
    for (name, text) in [
        ("rdmap.csv", map_csv(&processed.map)),
        ("spectrogram.csv", spectrogram_csv(&spec)),
        ("detections.csv", detections_csv(&processed.clusters)),
        ("config.txt", provenance_text(cfg)),
    ] {
        write_text(&path(name), &text)?;
        files.push(path(name));
    }
    let report = PipelineReport {
        achieved_scr_db: scene.achieved_scr_db,
        raw_detections: processed.detections.len(),
        strongest: strongest(&processed.clusters),
        clusters: processed.clusters,
        warnings: scene.cube.warnings().to_vec(),
        files,
    };
    write_text(&path("summary.txt"), &summary_text(cfg, &report))?;
    let mut report = report;
    report.files.push(path("summary.txt"));
    Ok(report)
}

/// Config text without the output directory, so that reruns into different
/// directories produce identical files.
pub fn provenance_text(cfg: &ExperimentConfig) -> String {
    cfg.to_text().lines().filter(|l| !l.starts_with("out =")).fold(String::new(), |mut s, l| {
        s.push_str(l);
        s.push('\n');
        s
    })
}

pub fn summary_text(cfg: &ExperimentConfig, r: &PipelineReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", cfg.scenario);
    let _ = writeln!(s, "seed: {}", cfg.seed);
    match r.achieved_scr_db {
        Some(v) => {
            let _ = writeln!(s, "achieved_scr_db: {v:.4}");
        }
        None => {
            let _ = writeln!(s, "achieved_scr_db: n/a (no signal)");
        }
    }
    let _ = writeln!(s, "cfar_mode: {}", cfg.cfar.mode);
    let _ = writeln!(s, "cfar_pfa: {}", cfg.cfar.pfa);
    let _ = writeln!(s, "cfar_training_cells: {}", cfg.cfar.num_training_cells());
    let _ = writeln!(s, "raw_detections: {}", r.raw_detections);
    let _ = writeln!(s, "clustered_detections: {}", r.clusters.len());
    if let Some(d) = r.strongest {
        let _ = writeln!(
            s,
            "strongest: doppler_idx={} range_idx={} range_m={:.4} doppler_hz={:.4} velocity_mps={:.4} power_db={:.2}",
            d.doppler_idx,
            d.range_idx,
            d.range_m,
            d.doppler_hz,
            d.velocity_mps,
            linear_to_db(d.power)
        );
    } else {
        let _ = writeln!(s, "strongest: none");
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w:?}");
    }
    s
}
