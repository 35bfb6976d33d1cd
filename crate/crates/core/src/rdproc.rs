//! Range-Doppler maps and slow-time spectrograms.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linkbudget::{range_resolution, velocity_from_doppler, RadarParams};
use crate::synth::IqCube;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rectangular,
    /// Periodic Hann.
    Hann,
}

impl Window {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::Hann => "hann",
        }
    }

    pub fn from_name(name: &str) -> Option<Window> {
        match name {
            "rectangular" | "rect" | "none" => Some(Window::Rectangular),
            "hann" | "hanning" => Some(Window::Hann),
            _ => None,
        }
    }
}

/// Per-axis tapers for the range-Doppler transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapWindows {
    pub range: Window,
    pub doppler: Window,
}

impl MapWindows {
    pub fn uniform(w: Window) -> Self {
        MapWindows { range: w, doppler: w }
    }
}

impl Default for MapWindows {
    /// Rectangular in fast time, Hann in slow time.
    fn default() -> Self {
        MapWindows {
            range: Window::Rectangular,
            doppler: Window::Hann,
        }
    }
}

fn plan(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(n)
}

/// Center-shift so index `floor(n/2)` is zero frequency.
fn fftshift<T: Clone>(v: &[T]) -> Vec<T> {
    let n = v.len();
    let s = n - n / 2;
    v[s..].iter().chain(&v[..s]).cloned().collect()
}

/// Windowed 2-D spectrum, Doppler-major (`M` rows of `K` range bins), with the
/// Doppler axis center-shifted. Scaled by `1 / (Σw_range · Σw_doppler)` so that
/// an on-bin unit tone yields unit magnitude.
pub fn range_doppler_complex(cube: &IqCube, windows: MapWindows) -> Result<Vec<Complex64>> {
    let m = cube.num_sweeps();
    let k = cube.samples_per_sweep();
    if m < 2 {
        return Err(Error::domain("num_sweeps", format!("range-Doppler map needs >= 2 sweeps, got {m}")));
    }
    let wr = windows.range.coefficients(k);
    let wd = windows.doppler.coefficients(m);
    let norm = 1.0 / (wr.iter().sum::<f64>() * wd.iter().sum::<f64>());

    // Fast-time transform, one sweep per row.
    let fft_r = plan(k);
    let mut rows = cube.data().to_vec();
    rows.par_chunks_mut(k).for_each(|row| {
        for (x, w) in row.iter_mut().zip(&wr) {
            *x *= w;
        }
        fft_r.process(row);
    });

    // Slow-time transform, one range bin per column.
    let fft_d = plan(m);
    let cols: Vec<Vec<Complex64>> = (0..k)
        .into_par_iter()
        .map(|r| {
            let mut col: Vec<Complex64> = (0..m).map(|i| rows[i * k + r] * wd[i]).collect();
            fft_d.process(&mut col);
            fftshift(&col)
        })
        .collect();

    let mut out = vec![Complex64::new(0.0, 0.0); m * k];
    for (r, col) in cols.iter().enumerate() {
        for (d, x) in col.iter().enumerate() {
            out[d * k + r] = x * norm;
        }
    }
    Ok(out)
}

pub fn range_doppler_map(cube: &IqCube, windows: MapWindows) -> Result<RangeDopplerMap> {
    let spectrum = range_doppler_complex(cube, windows)?;
    let power = spectrum.iter().map(|c| c.norm_sqr()).collect();
    RangeDopplerMap::from_power(cube.radar().clone(), cube.num_sweeps(), cube.samples_per_sweep(), power)
}

/// Power map, rows are Doppler bins and columns range bins.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    power: Vec<f64>,
    num_doppler_bins: usize,
    num_range_bins: usize,
    range_axis_m: Vec<f64>,
    doppler_axis_hz: Vec<f64>,
    radar: RadarParams,
}

/// Axis values and power at one map cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    pub range_m: f64,
    pub doppler_hz: f64,
    pub velocity_mps: f64,
    pub power: f64,
}

impl RangeDopplerMap {
    /// Builds a map from row-major (Doppler-major) cell powers. Axes follow
    /// the radar: range bins `c/2B` apart from zero, Doppler bins `PRF/M` apart
    /// covering `[-PRF/2, PRF/2)`.
    pub fn from_power(
        radar: RadarParams,
        num_doppler_bins: usize,
        num_range_bins: usize,
        power: Vec<f64>,
    ) -> Result<Self> {
        radar.validate()?;
        if num_doppler_bins == 0 || num_range_bins == 0 {
            return Err(Error::domain("map", "dimensions must be positive"));
        }
        if power.len() != num_doppler_bins * num_range_bins {
            return Err(Error::domain(
                "map",
                format!(
                    "expected {} cells, got {}",
                    num_doppler_bins * num_range_bins,
                    power.len()
                ),
            ));
        }
        if let Some(i) = power.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::domain("map", format!("cell {i} is negative or non-finite")));
        }
        let dr = range_resolution(&radar)?;
        let df = radar.prf_hz / num_doppler_bins as f64;
        let half = (num_doppler_bins / 2) as f64;
        Ok(RangeDopplerMap {
            power,
            num_doppler_bins,
            num_range_bins,
            range_axis_m: (0..num_range_bins).map(|r| r as f64 * dr).collect(),
            doppler_axis_hz: (0..num_doppler_bins).map(|d| (d as f64 - half) * df).collect(),
            radar,
        })
    }

    pub fn num_doppler_bins(&self) -> usize {
        self.num_doppler_bins
    }

    pub fn num_range_bins(&self) -> usize {
        self.num_range_bins
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn range_axis_m(&self) -> &[f64] {
        &self.range_axis_m
    }

    pub fn doppler_axis_hz(&self) -> &[f64] {
        &self.doppler_axis_hz
    }

    pub fn radar(&self) -> &RadarParams {
        &self.radar
    }

    pub fn get(&self, doppler_idx: usize, range_idx: usize) -> f64 {
        self.power[doppler_idx * self.num_range_bins + range_idx]
    }

    pub fn row(&self, doppler_idx: usize) -> &[f64] {
        let n = self.num_range_bins;
        &self.power[doppler_idx * n..(doppler_idx + 1) * n]
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn mean_power(&self) -> f64 {
        self.total_power() / self.power.len() as f64
    }

    /// Strongest cell as `(doppler_idx, range_idx, power)`; the first in
    /// row-major order wins ties.
    pub fn peak(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &p) in self.power.iter().enumerate() {
            if best.map_or(true, |(_, b)| p > b) {
                best = Some((i, p));
            }
        }
        best.map(|(i, p)| (i / self.num_range_bins, i % self.num_range_bins, p))
    }

    pub fn scaled(&self, g: f64) -> RangeDopplerMap {
        let mut out = self.clone();
        out.power.iter_mut().for_each(|p| *p *= g);
        out
    }

    pub fn readout(&self, doppler_idx: usize, range_idx: usize) -> Result<Readout> {
        if doppler_idx >= self.num_doppler_bins || range_idx >= self.num_range_bins {
            return Err(Error::domain(
                "cell",
                format!(
                    "({doppler_idx}, {range_idx}) outside {}x{} map",
                    self.num_doppler_bins, self.num_range_bins
                ),
            ));
        }
        let doppler_hz = self.doppler_axis_hz[doppler_idx];
        Ok(Readout {
            range_m: self.range_axis_m[range_idx],
            doppler_hz,
            velocity_mps: velocity_from_doppler(&self.radar, doppler_hz)?,
            power: self.get(doppler_idx, range_idx),
        })
    }
}

/// Frame layout of a short-time Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftParams {
    pub window_len: usize,
    pub hop: usize,
    /// Transform length; values above `window_len` zero-pad each frame.
    pub fft_len: usize,
}

impl StftParams {
    pub fn validate(&self, series_len: usize) -> Result<()> {
        if self.window_len == 0 || self.window_len > series_len {
            return Err(Error::domain(
                "window_len",
                format!("must be in 1..={series_len}, got {}", self.window_len),
            ));
        }
        if self.hop == 0 {
            return Err(Error::domain("hop", "must be >= 1"));
        }
        if self.fft_len < self.window_len {
            return Err(Error::domain(
                "fft_len",
                format!("must be >= window_len ({}), got {}", self.window_len, self.fft_len),
            ));
        }
        Ok(())
    }

    pub fn num_frames(&self, series_len: usize) -> usize {
        (series_len - 1) / self.hop + 1
    }
}

/// Power spectrogram, frequency-major (`num_freq_bins` rows of frames).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    power: Vec<f64>,
    time_axis_s: Vec<f64>,
    freq_axis_hz: Vec<f64>,
    pub window_len: usize,
    pub hop: usize,
}

impl Spectrogram {
    pub fn num_freq_bins(&self) -> usize {
        self.freq_axis_hz.len()
    }

    pub fn num_frames(&self) -> usize {
        self.time_axis_s.len()
    }

    pub fn time_axis_s(&self) -> &[f64] {
        &self.time_axis_s
    }

    pub fn freq_axis_hz(&self) -> &[f64] {
        &self.freq_axis_hz
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn get(&self, freq_idx: usize, frame: usize) -> f64 {
        self.power[freq_idx * self.num_frames() + frame]
    }

    pub fn bin_width_hz(&self) -> f64 {
        match self.freq_axis_hz.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }

    /// Frequency of the strongest bin in every frame.
    pub fn ridge_hz(&self) -> Vec<f64> {
        (0..self.num_frames())
            .map(|t| {
                let mut best = 0;
                for f in 1..self.num_freq_bins() {
                    if self.get(f, t) > self.get(best, t) {
                        best = f;
                    }
                }
                self.freq_axis_hz[best]
            })
            .collect()
    }

    /// Largest `|f|` reached by the ridge.
    pub fn max_ridge_excursion_hz(&self) -> f64 {
        self.ridge_hz().into_iter().map(f64::abs).fold(0.0, f64::max)
    }

    /// Per-frame power summed over bins with `lo_hz <= f < hi_hz`.
    pub fn band_energy(&self, lo_hz: f64, hi_hz: f64) -> Vec<f64> {
        let bins: Vec<usize> = (0..self.num_freq_bins())
            .filter(|&f| self.freq_axis_hz[f] >= lo_hz && self.freq_axis_hz[f] < hi_hz)
            .collect();
        (0..self.num_frames())
            .map(|t| bins.iter().map(|&f| self.get(f, t)).sum())
            .collect()
    }

    /// Repetition rate of the band energy in `[lo_hz, hi_hz)`, from the
    /// strongest autocorrelation peak. `None` when no periodicity is found.
    pub fn flash_rate_hz(&self, lo_hz: f64, hi_hz: f64) -> Option<f64> {
        let frame_dt = match self.time_axis_s.as_slice() {
            [a, b, ..] => b - a,
            _ => return None,
        };
        dominant_period(&self.band_energy(lo_hz, hi_hz)).map(|lag| 1.0 / (lag * frame_dt))
    }
}

/// Dominant period of `x` in samples from the biased autocorrelation: the
/// highest peak after its first negative excursion, refined by a parabola.
pub fn dominant_period(x: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 4 {
        return None;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let max_lag = n / 2;
    let ac: Vec<f64> = (0..=max_lag)
        .map(|lag| c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    if !(ac[0] > 0.0) {
        return None;
    }
    let start = ac.iter().position(|&v| v < 0.0)?;
    let (mut best, mut best_v) = (None, f64::NEG_INFINITY);
    for lag in start.max(1)..max_lag {
        if ac[lag] > best_v && ac[lag] >= ac[lag - 1] && ac[lag] >= ac[lag + 1] {
            best = Some(lag);
            best_v = ac[lag];
        }
    }
    let lag = best?;
    let (a, b, c) = (ac[lag - 1], ac[lag], ac[lag + 1]);
    let denom = a - 2.0 * b + c;
    let delta = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Some(lag as f64 + delta)
}

/// Slow-time series formed by coherently summing range bins `gate` of the
/// normalized fast-time spectrum of every sweep.
pub fn slow_time_series(cube: &IqCube, gate: Range<usize>) -> Result<Vec<Complex64>> {
    let k = cube.samples_per_sweep();
    if gate.is_empty() {
        return Err(Error::domain("range_gate", "empty range gate"));
    }
    if gate.end > k {
        return Err(Error::domain(
            "range_gate",
            format!("{}..{} exceeds {k} range bins", gate.start, gate.end),
        ));
    }
    let fft = plan(k);
    let scale = 1.0 / k as f64;
    Ok((0..cube.num_sweeps())
        .into_par_iter()
        .map(|m| {
            let mut row = cube.sweep(m).to_vec();
            fft.process(&mut row);
            row[gate.clone()].iter().sum::<Complex64>() * scale
        })
        .collect())
}

/// Hann-windowed STFT of `series` sampled at `sample_rate_hz`. Frame `j` is
/// centered on sample `j * hop`, with zeros outside the series. Power is
/// scaled by `1 / (Σw)²` and the frequency axis is center-shifted.
pub fn stft(series: &[Complex64], sample_rate_hz: f64, p: StftParams) -> Result<Spectrogram> {
    p.validate(series.len())?;
    let w = Window::Hann.coefficients(p.window_len);
    let norm = 1.0 / w.iter().sum::<f64>().powi(2);
    let fft = plan(p.fft_len);
    let frames = p.num_frames(series.len());
    let half = (p.window_len / 2) as isize;
    let columns: Vec<Vec<f64>> = (0..frames)
        .into_par_iter()
        .map(|j| {
            let start = (j * p.hop) as isize - half;
            let mut buf = vec![Complex64::new(0.0, 0.0); p.fft_len];
            for (i, wi) in w.iter().enumerate() {
                let s = start + i as isize;
                if s >= 0 && (s as usize) < series.len() {
                    buf[i] = series[s as usize] * wi;
                }
            }
            fft.process(&mut buf);
            fftshift(&buf).iter().map(|c| c.norm_sqr() * norm).collect()
        })
        .collect();
    let nf = p.fft_len;
    let mut power = vec![0.0; nf * frames];
    for (t, col) in columns.iter().enumerate() {
        for (f, v) in col.iter().enumerate() {
            power[f * frames + t] = *v;
        }
    }
    let df = sample_rate_hz / nf as f64;
    let center = (nf / 2) as f64;
    Ok(Spectrogram {
        power,
        time_axis_s: (0..frames).map(|j| (j * p.hop) as f64 / sample_rate_hz).collect(),
        freq_axis_hz: (0..nf).map(|f| (f as f64 - center) * df).collect(),
        window_len: p.window_len,
        hop: p.hop,
    })
}

/// Micro-Doppler spectrogram of the range bins in `gate`.
pub fn spectrogram(cube: &IqCube, gate: Range<usize>, p: StftParams) -> Result<Spectrogram> {
    let series = slow_time_series(cube, gate)?;
    stft(&series, cube.radar().prf_hz, p)
}

/// Range gate of `width` bins centered on the bin nearest `range_m`, clipped
/// to the map.
pub fn gate_around(radar: &RadarParams, range_m: f64, width: usize) -> Result<Range<usize>> {
    if width == 0 {
        return Err(Error::domain("gate_bins", "must be >= 1"));
    }
    let k = radar.samples_per_sweep;
    let center = (range_m / range_resolution(radar)?).round().max(0.0) as usize;
    let lo = center.saturating_sub(width / 2).min(k.saturating_sub(width));
    Ok(lo..(lo + width).min(k))
}
