//! CSV renderings of experiment outputs.
//!
//! Numbers use the shortest text that parses back to the same `f64`, so the
//! output is stable across platforms and runs.

use std::fmt::Write as _;
use std::path::Path;

use crate::cfar::Detection;
use crate::error::{Error, Result};
use crate::rdproc::{RangeDopplerMap, Spectrogram};

use super::roc::RocRow;
use super::sweeps::{MaxRangeRow, ThresholdRow};

pub const DETECTIONS_HEADER: &str = "doppler_idx,range_idx,range_m,doppler_hz,velocity_mps,power,threshold,local_stat";

/// Grid with range (m) across and Doppler (Hz) down; cells are linear power.
pub fn map_csv(map: &RangeDopplerMap) -> String {
    let mut s = String::from("doppler_hz\\range_m");
    for r in map.range_axis_m() {
        let _ = write!(s, ",{r}");
    }
    s.push('\n');
    for (d, f) in map.doppler_axis_hz().iter().enumerate() {
        let _ = write!(s, "{f}");
        for p in map.row(d) {
            let _ = write!(s, ",{p}");
        }
        s.push('\n');
    }
    s
}

/// Grid with time (s) across and frequency (Hz) down; cells are linear power.
pub fn spectrogram_csv(spec: &Spectrogram) -> String {
    let mut s = String::from("freq_hz\\time_s");
    for t in spec.time_axis_s() {
        let _ = write!(s, ",{t}");
    }
    s.push('\n');
    for (fi, f) in spec.freq_axis_hz().iter().enumerate() {
        let _ = write!(s, "{f}");
        for t in 0..spec.num_frames() {
            let _ = write!(s, ",{}", spec.get(fi, t));
        }
        s.push('\n');
    }
    s
}

pub fn detections_csv(dets: &[Detection]) -> String {
    let mut s = String::from(DETECTIONS_HEADER);
    s.push('\n');
    for d in dets {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            d.doppler_idx, d.range_idx, d.range_m, d.doppler_hz, d.velocity_mps, d.power, d.threshold, d.local_stat
        );
    }
    s
}

pub fn roc_csv(rows: &[RocRow]) -> String {
    let mut s = String::from("scr_db,pfa_design,pd_measured,ci_low,ci_high\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.scr_db, r.pfa, r.pd, r.ci_low, r.ci_high);
    }
    s
}

pub fn threshold_sweep_csv(rows: &[ThresholdRow]) -> String {
    let mut s = String::from("k,pfa,threshold\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.k, r.pfa, r.threshold);
    }
    s
}

pub fn max_range_csv(rows: &[MaxRangeRow]) -> String {
    let mut s = String::from("tx_power_dbm,tx_power_w,rcs_m2,range_m\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.tx_power_dbm, r.tx_power_w, r.rcs_m2, r.range_m);
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Binary PGM (P5) of `values` in dB, scaled so the top `dynamic_range_db`
/// spans black to white. Row 0 is the first row of `values`.
pub fn pgm_db(values: &[f64], rows: usize, cols: usize, dynamic_range_db: f64) -> Vec<u8> {
    let db: Vec<f64> = values.iter().map(|&v| 10.0 * v.max(1e-300).log10()).collect();
    let top = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(db.iter().map(|&v| {
        let x = ((v - (top - dynamic_range_db)) / dynamic_range_db).clamp(0.0, 1.0);
        (x * 255.0).round() as u8
    }));
    out
}
