//! Experiment drivers, configuration and file formats.

pub mod config;
pub mod iqfile;
pub mod pipeline;
pub mod roc;
pub mod sweeps;
pub mod tables;

pub use config::ExperimentConfig;
pub use iqfile::{decode_iq, encode_iq, read_cube, read_iq, read_iq_csv, write_iq, IqFileHeader};
pub use pipeline::{detect_cube, run_pipeline, synthesize_scene, PipelineReport, Processed, Scene};
pub use roc::{run_roc, RocRow};
pub use sweeps::{run_max_range_table, run_threshold_sweep, MaxRangeRow, ThresholdRow};
