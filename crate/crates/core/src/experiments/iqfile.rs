//! RDIQ binary cube format and CSV import.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field              |
//! |--------|------|--------------------|
//! | 0      | 4    | magic `RDIQ`       |
//! | 4      | 4    | version (u32, = 1) |
//! | 8      | 4    | num_sweeps (u32)   |
//! | 12     | 4    | samples_per_sweep  |
//! | 16     | 8    | center_freq_hz     |
//! | 24     | 8    | bandwidth_hz       |
//! | 32     | 8    | sweep_time_s       |
//! | 40     | 8    | prf_hz             |
//! | 48     | 8·MK | f32 I, f32 Q pairs |
//!
//! Samples are sweep-major: all of sweep 0, then sweep 1, and so on.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linkbudget::RadarParams;
use crate::synth::{IqCube, Origin};

pub const MAGIC: [u8; 4] = *b"RDIQ";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqFileHeader {
    pub version: u32,
    pub num_sweeps: u32,
    pub samples_per_sweep: u32,
    pub center_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub sweep_time_s: f64,
    pub prf_hz: f64,
}

impl IqFileHeader {
    pub fn for_cube(cube: &IqCube) -> Result<Self> {
        let r = cube.radar();
        let dim = |field: &'static str, n: usize| {
            u32::try_from(n).map_err(|_| Error::domain(field, format!("{n} does not fit in 32 bits")))
        };
        Ok(IqFileHeader {
            version: VERSION,
            num_sweeps: dim("num_sweeps", cube.num_sweeps())?,
            samples_per_sweep: dim("samples_per_sweep", cube.samples_per_sweep())?,
            center_freq_hz: r.center_freq_hz,
            bandwidth_hz: r.bandwidth_hz,
            sweep_time_s: r.sweep_time_s,
            prf_hz: r.prf_hz,
        })
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..8].copy_from_slice(&self.version.to_le_bytes());
        b[8..12].copy_from_slice(&self.num_sweeps.to_le_bytes());
        b[12..16].copy_from_slice(&self.samples_per_sweep.to_le_bytes());
        b[16..24].copy_from_slice(&self.center_freq_hz.to_le_bytes());
        b[24..32].copy_from_slice(&self.bandwidth_hz.to_le_bytes());
        b[32..40].copy_from_slice(&self.sweep_time_s.to_le_bytes());
        b[40..48].copy_from_slice(&self.prf_hz.to_le_bytes());
        b
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format {
                offset: bytes.len() as u64,
                reason: format!("header truncated: need {HEADER_LEN} bytes, have {}", bytes.len()),
            });
        }
        if bytes[0..4] != MAGIC {
            return Err(Error::Format {
                offset: 0,
                reason: format!("bad magic {:?}, expected \"RDIQ\"", &bytes[0..4]),
            });
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let h = IqFileHeader {
            version: u32_at(4),
            num_sweeps: u32_at(8),
            samples_per_sweep: u32_at(12),
            center_freq_hz: f64_at(16),
            bandwidth_hz: f64_at(24),
            sweep_time_s: f64_at(32),
            prf_hz: f64_at(40),
        };
        if h.version != VERSION {
            return Err(Error::Format {
                offset: 4,
                reason: format!("unsupported version {}, expected {VERSION}", h.version),
            });
        }
        if h.num_sweeps == 0 {
            return Err(Error::Format {
                offset: 8,
                reason: "num_sweeps is zero".into(),
            });
        }
        if h.samples_per_sweep == 0 {
            return Err(Error::Format {
                offset: 12,
                reason: "samples_per_sweep is zero".into(),
            });
        }
        Ok(h)
    }

    pub fn payload_len(&self) -> u64 {
        self.num_sweeps as u64 * self.samples_per_sweep as u64 * 8
    }

    /// `template` with the waveform fields replaced by the header's.
    pub fn radar(&self, template: &RadarParams) -> RadarParams {
        RadarParams {
            center_freq_hz: self.center_freq_hz,
            bandwidth_hz: self.bandwidth_hz,
            sweep_time_s: self.sweep_time_s,
            samples_per_sweep: self.samples_per_sweep as usize,
            prf_hz: self.prf_hz,
            ..template.clone()
        }
    }
}

/// Serializes a cube. Samples are stored as `f32`.
pub fn encode_iq(cube: &IqCube) -> Result<Vec<u8>> {
    let header = IqFileHeader::for_cube(cube)?;
    let mut out = Vec::with_capacity(HEADER_LEN + header.payload_len() as usize);
    out.extend_from_slice(&header.to_bytes());
    for c in cube.data() {
        out.extend_from_slice(&(c.re as f32).to_le_bytes());
        out.extend_from_slice(&(c.im as f32).to_le_bytes());
    }
    Ok(out)
}

/// Parses a cube. Link-budget fields that the file does not carry come from
/// `template`; the result is tagged [`Origin::Measured`].
pub fn decode_iq(bytes: &[u8], template: &RadarParams) -> Result<IqCube> {
    let h = IqFileHeader::parse(bytes)?;
    let expected = h.payload_len();
    let actual = (bytes.len() - HEADER_LEN) as u64;
    if actual != expected {
        return Err(Error::Format {
            offset: HEADER_LEN as u64 + actual.min(expected),
            reason: format!(
                "payload length mismatch: expected {expected} bytes for {} x {} samples, found {actual}",
                h.num_sweeps, h.samples_per_sweep
            ),
        });
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|b| {
            let re = f32::from_le_bytes(b[0..4].try_into().unwrap());
            let im = f32::from_le_bytes(b[4..8].try_into().unwrap());
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    IqCube::new(h.radar(template), h.num_sweeps as usize, data, Origin::Measured).map_err(|e| Error::Format {
        offset: 0,
        reason: e.to_string(),
    })
}

pub fn write_iq(path: &Path, cube: &IqCube) -> Result<()> {
    let bytes = encode_iq(cube)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_iq(path: &Path, template: &RadarParams) -> Result<IqCube> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_iq(&bytes, template)
}

/// Parses two-column `I,Q` text, one sample per line in sweep-major order.
/// A non-numeric first line is taken as a header. The row count must be a
/// multiple of `radar.samples_per_sweep`.
pub fn parse_iq_csv(text: &str, radar: &RadarParams) -> Result<IqCube> {
    let mut data = Vec::new();
    let mut offset = 0u64;
    for (i, line) in text.lines().enumerate() {
        let line_offset = offset;
        offset += line.len() as u64 + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let mut cols = t.split(',').map(str::trim);
        let (a, b) = match (cols.next(), cols.next(), cols.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Format {
                    offset: line_offset,
                    reason: format!("line {}: expected two columns I,Q", i + 1),
                })
            }
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(re), Ok(im)) => data.push(Complex64::new(re, im)),
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Format {
                    offset: line_offset,
                    reason: format!("line {}: non-numeric sample `{t}`", i + 1),
                })
            }
        }
    }
    let k = radar.samples_per_sweep;
    if data.is_empty() || data.len() % k != 0 {
        return Err(Error::Format {
            offset,
            reason: format!("{} samples is not a positive multiple of {k} samples per sweep", data.len()),
        });
    }
    let m = data.len() / k;
    IqCube::new(radar.clone(), m, data, Origin::Measured)
}

pub fn read_iq_csv(path: &Path, radar: &RadarParams) -> Result<IqCube> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_iq_csv(&text, radar)
}

/// Reads `.csv` files as text and anything else as RDIQ.
pub fn read_cube(path: &Path, template: &RadarParams) -> Result<IqCube> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_iq_csv(path, template)
    } else {
        read_iq(path, template)
    }
}
