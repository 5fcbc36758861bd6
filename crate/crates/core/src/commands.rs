//! The `pipeline`, `synth`, `eval` and `report` subcommands as library
//! calls, plus the exit-code and error-report conventions of the binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, ErrorClass, Result};
use crate::ingest::{parse_detections, read_text};
use crate::pipeline::{run_pipeline, PipelineOutput, RunConfig};
use crate::plane_map::MetricsDocument;
use crate::postprocess::{match_predictions, metrics_from_flags, DetectionMetrics, MatchFlag};
use crate::report::render_panorama;
use crate::synth::{
    corrupt_detections, covering_plan, gen_sequence, write_dataset, CorruptionParams,
    DatasetPaths, FacadeLayout, FlightPlan,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PROCESSING: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Validation => EXIT_VALIDATION,
        ErrorClass::Processing => EXIT_PROCESSING,
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    class: &'a str,
    message: String,
}

/// One-line JSON description of an error, written to stderr by the binary.
pub fn error_json(e: &Error) -> String {
    let report = ErrorReport {
        error: e.code(),
        class: match e.class() {
            ErrorClass::Validation => "validation",
            ErrorClass::Processing => "processing",
        },
        message: e.to_string(),
    };
    serde_json::to_string(&report).expect("error serialize")
}

pub fn cmd_pipeline(cfg: &RunConfig) -> Result<PipelineOutput> {
    run_pipeline(cfg)
}

/// Options of `synth`. Layout and flight values not listed here take the
/// library defaults; the altitude range is chosen to cover every storey.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub storeys: usize,
    pub windows: usize,
    pub frames: usize,
    pub seed: u64,
    pub dropout: f64,
    pub jitter_px: f64,
    pub pitch_noise_rad: f64,
    pub render_noise: u8,
    pub storey_intensity_step: f32,
    pub out_dir: PathBuf,
}

impl SynthOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        SynthOptions {
            storeys: 4,
            windows: 5,
            frames: 12,
            seed: 0,
            dropout: 0.0,
            jitter_px: 0.0,
            pitch_noise_rad: 0.0,
            render_noise: 0,
            storey_intensity_step: 0.0,
            out_dir: out_dir.into(),
        }
    }
}

/// Generates a sequence and writes it as a dataset directory. The
/// detections file holds the corrupted truth.
pub fn cmd_synth(opts: &SynthOptions) -> Result<DatasetPaths> {
    let layout = FacadeLayout {
        storeys: opts.storeys,
        windows_per_storey: opts.windows,
        storey_intensity_step: opts.storey_intensity_step,
        ..FacadeLayout::default()
    };
    let plan = FlightPlan {
        frame_count: opts.frames,
        seed: opts.seed,
        pitch_noise_sigma_rad: opts.pitch_noise_rad,
        render_noise: opts.render_noise,
        ..covering_plan(&layout, &FlightPlan::default())
    };
    let seq = gen_sequence(&layout, &plan)?;
    let corruption = CorruptionParams {
        dropout_p: opts.dropout,
        jitter_sigma_px: opts.jitter_px,
        seed: opts.seed.wrapping_add(1),
    };
    let detections = corrupt_detections(&seq.truth(), &corruption, &plan.camera)?;
    write_dataset(&seq, &detections, &opts.out_dir)
}

/// Per-frame and pooled detection metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub match_iou: f64,
    pub frames: Vec<FrameEval>,
    pub pooled: DetectionMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameEval {
    pub frame: String,
    #[serde(flatten)]
    pub metrics: DetectionMetrics,
}

/// Evaluates a predictions file against an annotations file. Frames absent
/// from the predictions count as frames with no predictions.
pub fn cmd_eval(predictions: &Path, truth: &Path, match_iou: f64) -> Result<EvalReport> {
    let pred = parse_detections(&read_text(predictions)?)?;
    let truth = parse_detections(&read_text(truth)?)?;
    if let Some(f) = pred.iter().find(|p| !truth.iter().any(|t| t.id == p.id)) {
        return Err(Error::UnknownFrame(f.id.clone()));
    }
    let mut frames = Vec::with_capacity(truth.len());
    let mut all_flags: Vec<MatchFlag> = Vec::new();
    let mut all_truth = 0;
    for t in &truth {
        let boxes = pred
            .iter()
            .find(|p| p.id == t.id)
            .map_or(&[][..], |p| &p.boxes[..]);
        let flags = match_predictions(boxes, &t.boxes, match_iou)?;
        frames.push(FrameEval {
            frame: t.id.clone(),
            metrics: metrics_from_flags(&flags, t.boxes.len()),
        });
        all_flags.extend(flags);
        all_truth += t.boxes.len();
    }
    Ok(EvalReport {
        match_iou,
        frames,
        pooled: metrics_from_flags(&all_flags, all_truth),
    })
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.digits$}"))
}

impl EvalReport {
    /// Aligned text table: one row per frame and a final pooled row.
    pub fn table(&self) -> String {
        let mut rows: Vec<[String; 8]> = vec![[
            "frame", "pred", "truth", "matched", "precision", "recall", "accuracy%", "ap",
        ]
        .map(String::from)];
        let row = |name: &str, m: &DetectionMetrics| {
            [
                name.to_string(),
                m.predicted.to_string(),
                m.truth.to_string(),
                m.matched.to_string(),
                cell(m.precision, 4),
                cell(m.recall, 4),
                cell(m.accuracy, 2),
                cell(m.ap, 4),
            ]
        };
        for f in &self.frames {
            rows.push(row(&f.frame, &f.metrics));
        }
        rows.push(row("ALL", &self.pooled));

        let widths: Vec<usize> = (0..8)
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (v, w))| if c == 0 { format!("{v:<w$}") } else { format!("{v:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("eval serialize")
    }
}

/// Renders a metrics file to an SVG panorama.
pub fn cmd_report(metrics: &Path, out: &Path, band_overlap_min: f64) -> Result<()> {
    let doc = MetricsDocument::parse(&read_text(metrics)?)?;
    let svg = render_panorama(&doc, band_overlap_min)?;
    fs::write(out, svg).map_err(|e| Error::io(out, e))
}
