use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used to pick a process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or missing input (exit 2).
    Validation,
    /// Inputs were accepted but processing failed (exit 3).
    Processing,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("telemetry line {line}: {reason}")]
    TelemetryParse { line: u64, reason: String },

    #[error("telemetry line {line}: timestamp {t} does not increase (previous {prev})")]
    TelemetryOrder { line: u64, t: f64, prev: f64 },

    #[error("telemetry log has no samples")]
    EmptyLog,

    #[error("frame `{frame}` at t={t} s is outside the telemetry range [{lo}, {hi}] s")]
    Sync { frame: String, t: f64, lo: f64, hi: f64 },

    #[error("detections: {0}")]
    Detections(String),

    #[error("detections: unknown frame id `{0}`")]
    UnknownFrame(String),

    #[error("sequence config: {0}")]
    Config(String),

    #[error("unsupported image format: {0}")]
    UnsupportedImage(String),

    #[error("truncated image: expected {expected} bytes of pixel data, found {found}")]
    TruncatedImage { expected: usize, found: usize },

    #[error("image is {found_w}x{found_h}, sequence expects {expected_w}x{expected_h}")]
    ImageDimensions {
        expected_w: u32,
        expected_h: u32,
        found_w: u32,
        found_h: u32,
    },

    #[error("no seed detections: template completion needs at least one detected window")]
    NoSeed,

    #[error("template height {template_h} px does not fit the {band_h} px search band")]
    BandTooSmall { template_h: usize, band_h: usize },

    #[error("pitch {0} rad is outside (-pi/2, pi/2)")]
    InvalidPitch(f64),

    #[error("facade extent has zero area")]
    ZeroExtent,

    #[error("synthetic plan/layout mismatch: {0}")]
    Synth(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NoSeed
            | Error::BandTooSmall { .. }
            | Error::InvalidPitch(_)
            | Error::ZeroExtent
            | Error::Sync { .. } => ErrorClass::Processing,
            Error::Io { source, .. } if source.kind() != std::io::ErrorKind::NotFound => {
                ErrorClass::Processing
            }
            _ => ErrorClass::Validation,
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidBox(_) => "invalid_box",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::TelemetryParse { .. } => "telemetry_parse",
            Error::TelemetryOrder { .. } => "telemetry_order",
            Error::EmptyLog => "empty_log",
            Error::Sync { .. } => "sync",
            Error::Detections(_) => "detections",
            Error::UnknownFrame(_) => "unknown_frame",
            Error::Config(_) => "config",
            Error::UnsupportedImage(_) => "unsupported_image",
            Error::TruncatedImage { .. } => "truncated_image",
            Error::ImageDimensions { .. } => "image_dimensions",
            Error::NoSeed => "no_seed",
            Error::BandTooSmall { .. } => "band_too_small",
            Error::InvalidPitch(_) => "invalid_pitch",
            Error::ZeroExtent => "zero_extent",
            Error::Synth(_) => "synth",
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
