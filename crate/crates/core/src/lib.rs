//! Window and storey counting for vertical UAV facade surveys.
//!
//! A drone climbs straight up in front of a facade and records frames plus
//! telemetry. Per-frame window detections are completed by template
//! matching within each storey strip ([`postprocess`]), lifted onto a
//! metric plane parallel to the facade ([`plane_map`]), deduplicated across
//! frames and clustered into storeys. [`synth`] builds sequences with known
//! ground truth; [`pipeline`] runs the whole chain from files on disk.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod pipeline;
pub mod plane_map;
pub mod postprocess;
pub mod report;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
