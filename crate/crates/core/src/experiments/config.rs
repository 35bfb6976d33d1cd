//! Flat `section.key = value` experiment configuration.
//!
//! Lines starting with `#` and blank lines are ignored. Lists are
//! comma-separated. Every key accepted in a file is also accepted as an
//! override, so a run is fully described by one config text plus overrides.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::cfar::{CfarConfig, DetectorRegistry, EdgePolicy};
use crate::error::{Error, Result};
use crate::linkbudget::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm, RadarParams};
use crate::rdproc::{MapWindows, StftParams, Window};
use crate::synth::{ClutterMotion, PointTarget, RotorModel};
use crate::weibull::WeibullParams;

#[derive(Debug, Clone, PartialEq)]
pub struct ClutterSettings {
    pub shape: f64,
    pub scale: f64,
    /// Clutter-to-noise ratio of the synthesized scene, dB.
    pub cnr_db: f64,
    /// Zero keeps the clutter stationary.
    pub doppler_jitter_hz: f64,
}

impl ClutterSettings {
    pub fn weibull(&self) -> Result<WeibullParams> {
        WeibullParams::new(self.shape, self.scale).map_err(|e| retag(e, "clutter"))
    }

    pub fn motion(&self) -> ClutterMotion {
        if self.doppler_jitter_hz > 0.0 {
            ClutterMotion::DopplerJitter {
                std_hz: self.doppler_jitter_hz,
            }
        } else {
            ClutterMotion::Stationary
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocSettings {
    pub scr_db: Vec<f64>,
    pub pfa: Vec<f64>,
    /// Zero selects `max(1e4, 100/P_fa)` capped at 1e6.
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub b_hat: f64,
    pub k: Vec<f64>,
    pub pfa: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxRangeSettings {
    pub rcs_m2: Vec<f64>,
    pub tx_power_dbm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramSettings {
    /// Negative centers the gate on the target range.
    pub gate_center_m: f64,
    pub gate_bins: usize,
    pub window_len: usize,
    pub hop: usize,
    pub fft_len: usize,
}

impl SpectrogramSettings {
    pub fn stft(&self) -> StftParams {
        StftParams {
            window_len: self.window_len,
            hop: self.hop,
            fft_len: self.fft_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub radar: RadarParams,
    pub num_sweeps: usize,
    pub clutter: ClutterSettings,
    pub windows: MapWindows,
    pub cfar: CfarConfig,
    pub target: PointTarget,
    pub rotor_enabled: bool,
    pub rotor: RotorModel,
    pub scr_db: f64,
    pub roc: RocSettings,
    pub sweep: SweepSettings,
    pub max_range: MaxRangeSettings,
    pub spectrogram: SpectrogramSettings,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: "uav_9m".into(),
            radar: RadarParams::table1(),
            num_sweeps: 128,
            clutter: ClutterSettings {
                shape: 2.0,
                scale: 1.0,
                cnr_db: 30.0,
                doppler_jitter_hz: 0.0,
            },
            windows: MapWindows::default(),
            cfar: CfarConfig::default(),
            target: PointTarget {
                initial_range_m: 9.0,
                radial_velocity_mps: 1.25,
                rcs_amplitude: 1.0,
            },
            rotor_enabled: true,
            rotor: RotorModel {
                num_blades: 3,
                blade_length_m: 0.12,
                rotation_rate_hz: 50.0,
                scatterers_per_blade: 10,
                rotation_axis: [0.0, 0.0, 1.0],
                initial_rotation_deg: 0.0,
                center_range_m: 9.0,
                los_direction: [1.0, 0.0, 0.0],
                hub_velocity_mps: 1.25,
                scatterer_amplitude: 0.003,
            },
            scr_db: 20.0,
            roc: RocSettings {
                scr_db: (-6..=6).map(|i| 5.0 * i as f64).collect(),
                pfa: vec![1e-2, 1e-3, 1e-4],
                trials: 0,
            },
            sweep: SweepSettings {
                b_hat: 1.65,
                k: vec![1.5, 2.0, 2.5],
                pfa: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            },
            max_range: MaxRangeSettings {
                rcs_m2: vec![0.01, 0.1, 1.0],
                tx_power_dbm: (0..=10).map(|i| 3.0 * i as f64).collect(),
            },
            spectrogram: SpectrogramSettings {
                gate_center_m: -1.0,
                gate_bins: 3,
                window_len: 32,
                hop: 4,
                fft_len: 64,
            },
            seed: 1,
            out: PathBuf::from("out"),
        }
    }
}

fn retag(e: Error, section: &str) -> Error {
    match e {
        Error::Domain { field, reason } => Error::config(format!("{section}.{field}"), reason),
        other => other,
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::config(key, format!("expected a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(Error::config(key, format!("must be finite, got `{v}`")));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::config(key, format!("expected a non-negative integer, got `{v}`")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse()
        .map_err(|_| Error::config(key, format!("expected a non-negative integer, got `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::config(key, format!("expected true or false, got `{v}`"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let items: Vec<f64> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::config(key, "list must not be empty"));
    }
    let ascending = items.windows(2).all(|w| w[0] < w[1]);
    let descending = items.windows(2).all(|w| w[0] > w[1]);
    if !(ascending || descending) {
        return Err(Error::config(key, "list must be strictly sorted"));
    }
    Ok(items)
}

fn parse_vec3(key: &str, v: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = v.split(',').map(|s| parse_f64(key, s.trim())).collect::<Result<_>>()?;
    match parts.as_slice() {
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(Error::config(key, format!("expected three components, got `{v}`"))),
    }
}

fn parse_window(key: &str, v: &str) -> Result<Window> {
    Window::from_name(v).ok_or_else(|| Error::config(key, format!("unknown window `{v}` (rectangular, hann)")))
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn fmt_vec3(v: [f64; 3]) -> String {
    fmt_list(&v)
}

/// Every key the config understands.
pub const KEYS: &[&str] = &[
    "scenario",
    "seed",
    "out",
    "scr_db",
    "radar.center_freq_hz",
    "radar.bandwidth_hz",
    "radar.sweep_time_s",
    "radar.samples_per_sweep",
    "radar.prf_hz",
    "radar.num_sweeps",
    "radar.tx_power_w",
    "radar.tx_power_dbm",
    "radar.antenna_gain_linear",
    "radar.antenna_gain_dbi",
    "radar.system_loss_linear",
    "radar.system_loss_db",
    "radar.noise_figure_db",
    "radar.min_detectable_power_w",
    "radar.min_detectable_power_dbm",
    "clutter.shape",
    "clutter.scale",
    "clutter.cnr_db",
    "clutter.doppler_jitter_hz",
    "windows.range",
    "windows.doppler",
    "cfar.mode",
    "cfar.train_range",
    "cfar.train_doppler",
    "cfar.guard",
    "cfar.pfa",
    "cfar.weibull_shape",
    "cfar.edge_policy",
    "target.range_m",
    "target.velocity_mps",
    "target.amplitude",
    "rotor.enabled",
    "rotor.num_blades",
    "rotor.blade_length_m",
    "rotor.rotation_rate_hz",
    "rotor.scatterers_per_blade",
    "rotor.axis",
    "rotor.initial_rotation_deg",
    "rotor.range_m",
    "rotor.los",
    "rotor.velocity_mps",
    "rotor.amplitude",
    "roc.scr_db",
    "roc.pfa",
    "roc.trials",
    "sweep.b_hat",
    "sweep.k",
    "sweep.pfa",
    "maxrange.rcs_m2",
    "maxrange.tx_power_dbm",
    "spectrogram.gate_center_m",
    "spectrogram.gate_bins",
    "spectrogram.window_len",
    "spectrogram.hop",
    "spectrogram.fft_len",
];

impl ExperimentConfig {
    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let f = || parse_f64(key, v);
        match key {
            "scenario" => self.scenario = v.to_string(),
            "seed" => self.seed = parse_u64(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "scr_db" => self.scr_db = f()?,
            "radar.center_freq_hz" => self.radar.center_freq_hz = f()?,
            "radar.bandwidth_hz" => self.radar.bandwidth_hz = f()?,
            "radar.sweep_time_s" => self.radar.sweep_time_s = f()?,
            "radar.samples_per_sweep" => self.radar.samples_per_sweep = parse_usize(key, v)?,
            "radar.prf_hz" => self.radar.prf_hz = f()?,
            "radar.num_sweeps" => self.num_sweeps = parse_usize(key, v)?,
            "radar.tx_power_w" => self.radar.tx_power_w = f()?,
            "radar.tx_power_dbm" => self.radar.tx_power_w = dbm_to_watts(f()?),
            "radar.antenna_gain_linear" => self.radar.antenna_gain_linear = f()?,
            "radar.antenna_gain_dbi" => self.radar.antenna_gain_linear = db_to_linear(f()?),
            "radar.system_loss_linear" => self.radar.system_loss_linear = f()?,
            "radar.system_loss_db" => self.radar.system_loss_linear = db_to_linear(f()?),
            "radar.noise_figure_db" => self.radar.noise_figure_db = f()?,
            "radar.min_detectable_power_w" => self.radar.min_detectable_power_w = f()?,
            "radar.min_detectable_power_dbm" => self.radar.min_detectable_power_w = dbm_to_watts(f()?),
            "clutter.shape" => self.clutter.shape = f()?,
            "clutter.scale" => self.clutter.scale = f()?,
            "clutter.cnr_db" => self.clutter.cnr_db = f()?,
            "clutter.doppler_jitter_hz" => self.clutter.doppler_jitter_hz = f()?,
            "windows.range" => self.windows.range = parse_window(key, v)?,
            "windows.doppler" => self.windows.doppler = parse_window(key, v)?,
            "cfar.mode" => self.cfar.mode = v.to_string(),
            "cfar.train_range" => self.cfar.train_cells_per_side_range = parse_usize(key, v)?,
            "cfar.train_doppler" => self.cfar.train_cells_per_side_doppler = parse_usize(key, v)?,
            "cfar.guard" => self.cfar.guard_cells_per_side = parse_usize(key, v)?,
            "cfar.pfa" => self.cfar.pfa = f()?,
            "cfar.weibull_shape" => self.cfar.weibull_shape_k = f()?,
            "cfar.edge_policy" => {
                self.cfar.edge_policy = EdgePolicy::from_name(v).ok_or_else(|| {
                    Error::config(key, format!("unknown edge policy `{v}` (truncate_window, skip_cell)"))
                })?
            }
            "target.range_m" => self.target.initial_range_m = f()?,
            "target.velocity_mps" => self.target.radial_velocity_mps = f()?,
            "target.amplitude" => self.target.rcs_amplitude = f()?,
            "rotor.enabled" => self.rotor_enabled = parse_bool(key, v)?,
            "rotor.num_blades" => self.rotor.num_blades = parse_usize(key, v)?,
            "rotor.blade_length_m" => self.rotor.blade_length_m = f()?,
            "rotor.rotation_rate_hz" => self.rotor.rotation_rate_hz = f()?,
            "rotor.scatterers_per_blade" => self.rotor.scatterers_per_blade = parse_usize(key, v)?,
            "rotor.axis" => self.rotor.rotation_axis = parse_vec3(key, v)?,
            "rotor.initial_rotation_deg" => self.rotor.initial_rotation_deg = f()?,
            "rotor.range_m" => self.rotor.center_range_m = f()?,
            "rotor.los" => self.rotor.los_direction = parse_vec3(key, v)?,
            "rotor.velocity_mps" => self.rotor.hub_velocity_mps = f()?,
            "rotor.amplitude" => self.rotor.scatterer_amplitude = f()?,
            "roc.scr_db" => self.roc.scr_db = parse_list(key, v)?,
            "roc.pfa" => self.roc.pfa = parse_list(key, v)?,
            "roc.trials" => self.roc.trials = parse_u64(key, v)?,
            "sweep.b_hat" => self.sweep.b_hat = f()?,
            "sweep.k" => self.sweep.k = parse_list(key, v)?,
            "sweep.pfa" => self.sweep.pfa = parse_list(key, v)?,
            "maxrange.rcs_m2" => self.max_range.rcs_m2 = parse_list(key, v)?,
            "maxrange.tx_power_dbm" => self.max_range.tx_power_dbm = parse_list(key, v)?,
            "spectrogram.gate_center_m" => self.spectrogram.gate_center_m = f()?,
            "spectrogram.gate_bins" => self.spectrogram.gate_bins = parse_usize(key, v)?,
            "spectrogram.window_len" => self.spectrogram.window_len = parse_usize(key, v)?,
            "spectrogram.hop" => self.spectrogram.hop = parse_usize(key, v)?,
            "spectrogram.fft_len" => self.spectrogram.fft_len = parse_usize(key, v)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    /// Loads the optional file, then applies `overrides` in order and
    /// validates the result.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            cfg.apply_text(&text)?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.radar.validate().map_err(|e| retag(e, "radar"))?;
        if self.num_sweeps < 2 {
            return Err(Error::config("radar.num_sweeps", "must be >= 2"));
        }
        self.clutter.weibull()?;
        if self.clutter.doppler_jitter_hz < 0.0 {
            return Err(Error::config("clutter.doppler_jitter_hz", "must be >= 0"));
        }
        self.cfar.validate().map_err(|e| retag(e, "cfar"))?;
        if !DetectorRegistry::with_builtin().contains(&self.cfar.mode) {
            return Err(Error::config(
                "cfar.mode",
                format!(
                    "unknown mode `{}` (known: {})",
                    self.cfar.mode,
                    DetectorRegistry::with_builtin().names().join(", ")
                ),
            ));
        }
        if !(self.target.initial_range_m > 0.0) {
            return Err(Error::config("target.range_m", "must be positive"));
        }
        if !(self.target.rcs_amplitude >= 0.0) {
            return Err(Error::config("target.amplitude", "must be >= 0"));
        }
        if self.rotor_enabled {
            self.rotor.validate().map_err(|e| retag(e, "rotor"))?;
        }
        for &p in &self.roc.pfa {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::config("roc.pfa", format!("{p} is outside (0, 1)")));
            }
        }
        if !(self.sweep.b_hat > 0.0) {
            return Err(Error::config("sweep.b_hat", "must be positive"));
        }
        if self.sweep.k.iter().any(|&k| !(k > 0.0)) {
            return Err(Error::config("sweep.k", "shapes must be positive"));
        }
        for &p in &self.sweep.pfa {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::config("sweep.pfa", format!("{p} is outside (0, 1)")));
            }
        }
        if self.max_range.rcs_m2.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::config("maxrange.rcs_m2", "values must be positive"));
        }
        let s = &self.spectrogram;
        if s.gate_bins == 0 {
            return Err(Error::config("spectrogram.gate_bins", "must be >= 1"));
        }
        if s.window_len == 0 || s.window_len > self.num_sweeps {
            return Err(Error::config("spectrogram.window_len", format!("must be in 1..={}", self.num_sweeps)));
        }
        if s.hop == 0 {
            return Err(Error::config("spectrogram.hop", "must be >= 1"));
        }
        if s.fft_len < s.window_len {
            return Err(Error::config("spectrogram.fft_len", "must be >= window_len"));
        }
        Ok(())
    }

    /// Canonical text form; parsing it reproduces this config.
    pub fn to_text(&self) -> String {
        let r = &self.radar;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("scenario", self.scenario.clone());
        kv("seed", self.seed.to_string());
        kv("out", self.out.display().to_string());
        kv("scr_db", self.scr_db.to_string());
        kv("radar.center_freq_hz", r.center_freq_hz.to_string());
        kv("radar.bandwidth_hz", r.bandwidth_hz.to_string());
        kv("radar.sweep_time_s", r.sweep_time_s.to_string());
        kv("radar.samples_per_sweep", r.samples_per_sweep.to_string());
        kv("radar.prf_hz", r.prf_hz.to_string());
        kv("radar.num_sweeps", self.num_sweeps.to_string());
        kv("radar.tx_power_w", r.tx_power_w.to_string());
        kv("radar.antenna_gain_linear", r.antenna_gain_linear.to_string());
        kv("radar.system_loss_linear", r.system_loss_linear.to_string());
        kv("radar.noise_figure_db", r.noise_figure_db.to_string());
        kv("radar.min_detectable_power_w", r.min_detectable_power_w.to_string());
        kv("clutter.shape", self.clutter.shape.to_string());
        kv("clutter.scale", self.clutter.scale.to_string());
        kv("clutter.cnr_db", self.clutter.cnr_db.to_string());
        kv("clutter.doppler_jitter_hz", self.clutter.doppler_jitter_hz.to_string());
        kv("windows.range", self.windows.range.name().into());
        kv("windows.doppler", self.windows.doppler.name().into());
        kv("cfar.mode", self.cfar.mode.clone());
        kv("cfar.train_range", self.cfar.train_cells_per_side_range.to_string());
        kv("cfar.train_doppler", self.cfar.train_cells_per_side_doppler.to_string());
        kv("cfar.guard", self.cfar.guard_cells_per_side.to_string());
        kv("cfar.pfa", self.cfar.pfa.to_string());
        kv("cfar.weibull_shape", self.cfar.weibull_shape_k.to_string());
        kv("cfar.edge_policy", self.cfar.edge_policy.name().into());
        kv("target.range_m", self.target.initial_range_m.to_string());
        kv("target.velocity_mps", self.target.radial_velocity_mps.to_string());
        kv("target.amplitude", self.target.rcs_amplitude.to_string());
        kv("rotor.enabled", self.rotor_enabled.to_string());
        kv("rotor.num_blades", self.rotor.num_blades.to_string());
        kv("rotor.blade_length_m", self.rotor.blade_length_m.to_string());
        kv("rotor.rotation_rate_hz", self.rotor.rotation_rate_hz.to_string());
        kv("rotor.scatterers_per_blade", self.rotor.scatterers_per_blade.to_string());
        kv("rotor.axis", fmt_vec3(self.rotor.rotation_axis));
        kv("rotor.initial_rotation_deg", self.rotor.initial_rotation_deg.to_string());
        kv("rotor.range_m", self.rotor.center_range_m.to_string());
        kv("rotor.los", fmt_vec3(self.rotor.los_direction));
        kv("rotor.velocity_mps", self.rotor.hub_velocity_mps.to_string());
        kv("rotor.amplitude", self.rotor.scatterer_amplitude.to_string());
        kv("roc.scr_db", fmt_list(&self.roc.scr_db));
        kv("roc.pfa", fmt_list(&self.roc.pfa));
        kv("roc.trials", self.roc.trials.to_string());
        kv("sweep.b_hat", self.sweep.b_hat.to_string());
        kv("sweep.k", fmt_list(&self.sweep.k));
        kv("sweep.pfa", fmt_list(&self.sweep.pfa));
        kv("maxrange.rcs_m2", fmt_list(&self.max_range.rcs_m2));
        kv("maxrange.tx_power_dbm", fmt_list(&self.max_range.tx_power_dbm));
        kv("spectrogram.gate_center_m", self.spectrogram.gate_center_m.to_string());
        kv("spectrogram.gate_bins", self.spectrogram.gate_bins.to_string());
        kv("spectrogram.window_len", self.spectrogram.window_len.to_string());
        kv("spectrogram.hop", self.spectrogram.hop.to_string());
        kv("spectrogram.fft_len", self.spectrogram.fft_len.to_string());
        s
    }

    /// Transmit power in dBm, for display.
    pub fn tx_power_dbm(&self) -> f64 {
        watts_to_dbm(self.radar.tx_power_w)
    }

    pub fn antenna_gain_dbi(&self) -> f64 {
        linear_to_db(self.radar.antenna_gain_linear)
    }
}
