//! Low-grazing-angle FMCW radar toolkit for micro-UAV detection in Weibull
//! ground clutter.
//!
//! The crate is organized bottom-up:
//!
//! - [`linkbudget`]: radar range equations, resolution and Doppler/velocity relations.
//! - [`weibull`]: the clutter amplitude law, sampling and known-shape scale estimation.
//! - [`synth`]: dechirped I/Q cube synthesis for clutter, point targets and rotors.
//! - [`rdproc`]: range-Doppler maps and micro-Doppler spectrograms.
//! - [`cfar`]: cell-averaging CFAR with runtime-selectable threshold strategies.
//! - [`experiments`]: configuration, file formats and experiment drivers.
//! - [`stats`]: goodness-of-fit and binomial interval helpers shared by the harnesses.

pub mod cfar;
pub mod error;
pub mod experiments;
pub mod geom;
pub mod linkbudget;
pub mod rdproc;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod weibull;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
