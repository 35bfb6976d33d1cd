//! Dechirped FMCW baseband synthesis.
//!
//! Every scatterer contributes one complex tone per sweep (stop-and-hop):
//!
//! ```text
//! x[m, n] = a · exp(j2π (r / Δr) n / K) · exp(-j4π r / λ)
//! ```
//!
//! where `Δr = c/2B` is the range-cell size, `K` the samples per sweep and
//! `r` the scatterer distance at slow time `m / PRF`. A closing scatterer
//! therefore has positive Doppler.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{require_positive, Error, Result};
use crate::geom::{self, Vec3};
use crate::linkbudget::{range_resolution, RadarParams};
use crate::rdproc::{range_doppler_map, MapWindows, RangeDopplerMap};
use crate::rng::{complex_gaussian, open01, stream_rng};
use crate::weibull::WeibullParams;
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Measured,
    Synthetic,
}

/// Non-fatal conditions noted while synthesizing a cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthWarning {
    /// Some scatterer Doppler reaches PRF/2 and wraps in the slow-time spectrum.
    DopplerAliasing,
    /// A target moves more than one range cell over the coherent interval.
    RangeMigration,
}

/// Complex baseband data cube, slow time (sweeps) by fast time (samples).
#[derive(Debug, Clone, PartialEq)]
pub struct IqCube {
    data: Vec<Complex64>,
    num_sweeps: usize,
    radar: RadarParams,
    origin: Origin,
    warnings: Vec<SynthWarning>,
}

impl IqCube {
    /// Wraps sweep-major `data` of length `num_sweeps * radar.samples_per_sweep`.
    pub fn new(radar: RadarParams, num_sweeps: usize, data: Vec<Complex64>, origin: Origin) -> Result<Self> {
        radar.validate()?;
        if num_sweeps == 0 {
            return Err(Error::domain("num_sweeps", "must be >= 1"));
        }
        let expected = num_sweeps * radar.samples_per_sweep;
        if data.len() != expected {
            return Err(Error::domain(
                "data",
                format!("expected {expected} samples ({num_sweeps} x {}), got {}", radar.samples_per_sweep, data.len()),
            ));
        }
        if let Some(i) = data.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::domain("data", format!("non-finite sample at index {i}")));
        }
        Ok(IqCube {
            data,
            num_sweeps,
            radar,
            origin,
            warnings: Vec::new(),
        })
    }

    pub fn zeros(radar: RadarParams, num_sweeps: usize) -> Result<Self> {
        let n = num_sweeps * radar.samples_per_sweep;
        IqCube::new(radar, num_sweeps, vec![Complex64::new(0.0, 0.0); n], Origin::Synthetic)
    }

    pub fn num_sweeps(&self) -> usize {
        self.num_sweeps
    }

    pub fn samples_per_sweep(&self) -> usize {
        self.radar.samples_per_sweep
    }

    pub fn radar(&self) -> &RadarParams {
        &self.radar
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn warnings(&self) -> &[SynthWarning] {
        &self.warnings
    }

    pub fn has_warning(&self, w: SynthWarning) -> bool {
        self.warnings.contains(&w)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn sweep(&self, m: usize) -> &[Complex64] {
        let k = self.samples_per_sweep();
        &self.data[m * k..(m + 1) * k]
    }

    pub fn get(&self, sweep: usize, sample: usize) -> Complex64 {
        self.data[sweep * self.samples_per_sweep() + sample]
    }

    fn warn(&mut self, w: SynthWarning) {
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    fn check_compatible(&self, other: &IqCube) -> Result<()> {
        if self.num_sweeps != other.num_sweeps || self.samples_per_sweep() != other.samples_per_sweep() {
            return Err(Error::domain(
                "cube",
                format!(
                    "dimension mismatch: {}x{} vs {}x{}",
                    self.num_sweeps,
                    self.samples_per_sweep(),
                    other.num_sweeps,
                    other.samples_per_sweep()
                ),
            ));
        }
        if self.radar != other.radar {
            return Err(Error::domain("cube", "radar parameters differ"));
        }
        Ok(())
    }

    /// Element-wise sum; warnings of both operands carry over.
    pub fn try_add(&self, other: &IqCube) -> Result<IqCube> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        for &w in &other.warnings {
            out.warn(w);
        }
        Ok(out)
    }

    pub fn scaled(&self, g: f64) -> IqCube {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|c| *c *= g);
        out
    }

    pub fn conj(&self) -> IqCube {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|c| *c = c.conj());
        out
    }

    /// Rounds every sample to single precision, the resolution of the I/Q file
    /// payload.
    pub fn to_f32_precision(&self) -> IqCube {
        let mut out = self.clone();
        out.data
            .iter_mut()
            .for_each(|c| *c = Complex64::new(c.re as f32 as f64, c.im as f32 as f64));
        out
    }

    pub fn total_energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Slow-time behavior of the clutter field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ClutterMotion {
    /// Constant across sweeps: all clutter lands on the zero-Doppler ridge.
    #[default]
    Stationary,
    /// Each fast-time clutter sample rotates at its own Gaussian Doppler
    /// offset with the given standard deviation.
    DopplerJitter { std_hz: f64 },
}

/// Weibull-amplitude, uniform-phase ground clutter that is stationary in slow
/// time.
pub fn synth_clutter(radar: &RadarParams, w: &WeibullParams, num_sweeps: usize, seed: u64) -> Result<IqCube> {
    synth_clutter_with(radar, w, num_sweeps, seed, ClutterMotion::Stationary)
}

pub fn synth_clutter_with(
    radar: &RadarParams,
    w: &WeibullParams,
    num_sweeps: usize,
    seed: u64,
    motion: ClutterMotion,
) -> Result<IqCube> {
    radar.validate()?;
    let k = radar.samples_per_sweep;
    if let ClutterMotion::DopplerJitter { std_hz } = motion {
        require_positive("std_hz", std_hz)?;
    }
    let mut rng = stream_rng(seed, 0);
    let mut jitter_rng = stream_rng(seed, 2);
    let mut cells = Vec::with_capacity(k);
    for _ in 0..k {
        let amp = w.draw(&mut rng);
        let phase = TAU * open01(&mut rng);
        let doppler = match motion {
            ClutterMotion::Stationary => 0.0,
            ClutterMotion::DopplerJitter { std_hz } => {
                std_hz * complex_gaussian(&mut jitter_rng).re * std::f64::consts::SQRT_2
            }
        };
        cells.push((Complex64::from_polar(amp, phase), doppler));
    }
    let mut data = Vec::with_capacity(num_sweeps * k);
    for m in 0..num_sweeps {
        let t = m as f64 / radar.prf_hz;
        data.extend(cells.iter().map(|&(c, fd)| {
            if fd == 0.0 {
                c
            } else {
                c * Complex64::from_polar(1.0, TAU * fd * t)
            }
        }));
    }
    IqCube::new(radar.clone(), num_sweeps, data, Origin::Synthetic)
}

/// White complex Gaussian receiver noise with mean cell power `noise_power`.
pub fn synth_noise(radar: &RadarParams, noise_power: f64, num_sweeps: usize, seed: u64) -> Result<IqCube> {
    radar.validate()?;
    require_positive("noise_power", noise_power)?;
    let k = radar.samples_per_sweep;
    let sigma = noise_power.sqrt();
    let mut rng = stream_rng(seed, 1);
    let data = (0..num_sweeps * k).map(|_| complex_gaussian(&mut rng) * sigma).collect();
    IqCube::new(radar.clone(), num_sweeps, data, Origin::Synthetic)
}

/// A translating point scatterer.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTarget {
    pub initial_range_m: f64,
    /// Positive when closing.
    pub radial_velocity_mps: f64,
    pub rcs_amplitude: f64,
}

fn beat_phasor(range_m: f64, cell_m: f64, samples: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (range_m / cell_m) * n as f64 / samples as f64)
}

/// Single point target. Range migration is not modeled: the beat frequency is
/// fixed at the initial range and only the carrier phase follows the motion.
pub fn synth_point_target(radar: &RadarParams, t: &PointTarget, num_sweeps: usize) -> Result<IqCube> {
    radar.validate()?;
    require_positive("initial_range_m", t.initial_range_m)?;
    require_positive("rcs_amplitude", t.rcs_amplitude)?;
    if num_sweeps == 0 {
        return Err(Error::domain("num_sweeps", "must be >= 1"));
    }
    let r_max = radar.max_unambiguous_range_m();
    if t.initial_range_m >= r_max {
        return Err(Error::domain(
            "range",
            format!("ambiguous: {} m is beyond the {r_max} m beat-frequency limit", t.initial_range_m),
        ));
    }
    let v_max = radar.max_unambiguous_velocity_mps();
    if t.radial_velocity_mps.abs() >= v_max {
        return Err(Error::domain(
            "velocity",
            format!("ambiguous: |{}| m/s reaches the {v_max} m/s Doppler limit", t.radial_velocity_mps),
        ));
    }
    let k = radar.samples_per_sweep;
    let cell = range_resolution(radar)?;
    let lambda = radar.wavelength_m();
    let beat: Vec<Complex64> = (0..k)
        .map(|n| beat_phasor(t.initial_range_m, cell, k, n) * t.rcs_amplitude)
        .collect();
    let mut data = Vec::with_capacity(num_sweeps * k);
    for m in 0..num_sweeps {
        let r = t.initial_range_m - t.radial_velocity_mps * m as f64 / radar.prf_hz;
        let carrier = Complex64::from_polar(1.0, -4.0 * PI * r / lambda);
        data.extend(beat.iter().map(|&b| b * carrier));
    }
    let mut cube = IqCube::new(radar.clone(), num_sweeps, data, Origin::Synthetic)?;
    if t.radial_velocity_mps.abs() * num_sweeps as f64 / radar.prf_hz > cell {
        cube.warn(SynthWarning::RangeMigration);
    }
    Ok(cube)
}

/// Rotating-blade scatterer model.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorModel {
    pub num_blades: usize,
    pub blade_length_m: f64,
    /// Revolutions per second.
    pub rotation_rate_hz: f64,
    /// Point scatterers per blade, evenly spaced out to the tip.
    pub scatterers_per_blade: usize,
    pub rotation_axis: Vec3,
    pub initial_rotation_deg: f64,
    /// Hub distance from the radar at t = 0.
    pub center_range_m: f64,
    /// Unit vector from the radar toward the hub.
    pub los_direction: Vec3,
    /// Hub radial speed, positive when closing.
    pub hub_velocity_mps: f64,
    pub scatterer_amplitude: f64,
}

impl RotorModel {
    pub fn validate(&self) -> Result<()> {
        if self.num_blades == 0 {
            return Err(Error::domain("num_blades", "must be >= 1"));
        }
        if self.scatterers_per_blade == 0 {
            return Err(Error::domain("scatterers_per_blade", "must be >= 1"));
        }
        require_positive("blade_length_m", self.blade_length_m)?;
        require_positive("rotation_rate_hz", self.rotation_rate_hz)?;
        require_positive("center_range_m", self.center_range_m)?;
        require_positive("scatterer_amplitude", self.scatterer_amplitude)?;
        if (geom::norm(self.rotation_axis) - 1.0).abs() > 1e-12 {
            return Err(Error::domain("rotation_axis", "must be a unit vector"));
        }
        if (geom::norm(self.los_direction) - 1.0).abs() > 1e-12 {
            return Err(Error::domain("los_direction", "must be a unit vector"));
        }
        if self.tip_speed_mps() >= SPEED_OF_LIGHT / 1000.0 {
            return Err(Error::domain("rotation_rate_hz", "blade tip speed exceeds c/1000"));
        }
        Ok(())
    }

    pub fn angular_rate(&self) -> f64 {
        TAU * self.rotation_rate_hz
    }

    pub fn tip_speed_mps(&self) -> f64 {
        self.angular_rate() * self.blade_length_m
    }

    /// Peak micro-Doppler `2 f Ω L / c`, reached when the line of sight lies in
    /// the rotation plane.
    pub fn peak_micro_doppler_hz(&self, radar: &RadarParams) -> f64 {
        2.0 * radar.center_freq_hz * self.tip_speed_mps() / SPEED_OF_LIGHT
    }

    /// In-plane unit vector that blade 0 points along at zero rotation: the
    /// projection of the line of sight onto the rotation plane, or any
    /// in-plane vector when the two are parallel.
    fn reference_direction(&self) -> Vec3 {
        let a = self.rotation_axis;
        let n = self.los_direction;
        let proj = geom::sub(n, geom::scale(a, geom::dot(n, a)));
        if geom::norm(proj) > 1e-9 {
            geom::normalize(proj)
        } else {
            geom::any_orthogonal(a)
        }
    }

    /// Scatterer offsets from the hub at time `t`.
    pub fn scatterer_offsets(&self, t: f64) -> Vec<Vec3> {
        let u0 = self.reference_direction();
        let base = self.initial_rotation_deg.to_radians() + self.angular_rate() * t;
        let mut out = Vec::with_capacity(self.num_blades * self.scatterers_per_blade);
        for b in 0..self.num_blades {
            let angle = base + TAU * b as f64 / self.num_blades as f64;
            let dir = geom::mat_vec(&geom::rodrigues(self.rotation_axis, angle), u0);
            for s in 0..self.scatterers_per_blade {
                let rho = self.blade_length_m * (s + 1) as f64 / self.scatterers_per_blade as f64;
                out.push(geom::scale(dir, rho));
            }
        }
        out
    }
}

/// Rotating blades built from point scatterers whose positions follow the
/// Euler-Rodrigues rotation; each echo phase is `-4π r(t)/λ` for the exact
/// scatterer distance.
pub fn synth_rotor(radar: &RadarParams, rotor: &RotorModel, num_sweeps: usize) -> Result<IqCube> {
    radar.validate()?;
    rotor.validate()?;
    if num_sweeps == 0 {
        return Err(Error::domain("num_sweeps", "must be >= 1"));
    }
    let r_max = radar.max_unambiguous_range_m();
    if rotor.center_range_m + rotor.blade_length_m >= r_max {
        return Err(Error::domain("center_range_m", format!("ambiguous: rotor extends beyond {r_max} m")));
    }
    let k = radar.samples_per_sweep;
    let cell = range_resolution(radar)?;
    let lambda = radar.wavelength_m();
    let mut data = vec![Complex64::new(0.0, 0.0); num_sweeps * k];
    data.par_chunks_mut(k).enumerate().for_each(|(m, row)| {
        let t = m as f64 / radar.prf_hz;
        let hub = geom::scale(rotor.los_direction, rotor.center_range_m - rotor.hub_velocity_mps * t);
        for offset in rotor.scatterer_offsets(t) {
            let r = geom::norm(geom::add(hub, offset));
            let carrier = Complex64::from_polar(rotor.scatterer_amplitude, -4.0 * PI * r / lambda);
            for (n, x) in row.iter_mut().enumerate() {
                *x += beat_phasor(r, cell, k, n) * carrier;
            }
        }
    });
    let mut cube = IqCube::new(radar.clone(), num_sweeps, data, Origin::Synthetic)?;
    let worst_doppler = rotor.peak_micro_doppler_hz(radar) + 2.0 * rotor.hub_velocity_mps.abs() / lambda;
    if worst_doppler >= radar.prf_hz / 2.0 {
        cube.warn(SynthWarning::DopplerAliasing);
    }
    Ok(cube)
}

/// Output of [`mix_at_scr`].
#[derive(Debug, Clone)]
pub struct MixedCube {
    pub cube: IqCube,
    /// Amplitude gain applied to the signal cube.
    pub gain: f64,
    /// Peak signal-cell power over mean clutter-cell power after scaling, dB.
    /// `None` when the signal cube is identically zero.
    pub achieved_scr_db: Option<f64>,
}

/// Returns `g · signal + clutter` with `g` chosen so that the peak signal cell
/// power over the mean clutter cell power of the range-Doppler maps (built
/// with `windows`) equals `scr_db`.
pub fn mix_at_scr(signal: &IqCube, clutter: &IqCube, scr_db: f64, windows: MapWindows) -> Result<MixedCube> {
    signal.check_compatible(clutter)?;
    if !scr_db.is_finite() {
        return Err(Error::domain("scr_db", "must be finite"));
    }
    let sig_map = range_doppler_map(signal, windows)?;
    let clu_map = range_doppler_map(clutter, windows)?;
    let peak = sig_map.peak().map(|(_, _, p)| p).unwrap_or(0.0);
    let mean_clutter = clu_map.mean_power();
    if !(mean_clutter > 0.0) {
        return Err(Error::domain("clutter", "clutter cube has zero power"));
    }
    if peak == 0.0 {
        return Ok(MixedCube {
            cube: clutter.try_add(&signal.scaled(0.0))?,
            gain: 0.0,
            achieved_scr_db: None,
        });
    }
    let target = 10f64.powf(scr_db / 10.0);
    let gain = (target * mean_clutter / peak).sqrt();
    let achieved = 10.0 * (gain * gain * peak / mean_clutter).log10();
    Ok(MixedCube {
        cube: signal.scaled(gain).try_add(clutter)?,
        gain,
        achieved_scr_db: Some(achieved),
    })
}

/// Target-free range-Doppler map whose cells carry iid Weibull(k, b)
/// amplitudes, i.e. cell power `z²`. Rows are Doppler bins.
pub fn homogeneous_clutter_map(
    radar: &RadarParams,
    w: &WeibullParams,
    doppler_bins: usize,
    range_bins: usize,
    seed: u64,
    stream: u64,
) -> Result<RangeDopplerMap> {
    let mut rng = stream_rng(seed, stream);
    let power = (0..doppler_bins * range_bins)
        .map(|_| {
            let z = w.draw(&mut rng);
            z * z
        })
        .collect();
    RangeDopplerMap::from_power(radar.clone(), doppler_bins, range_bins, power)
}
