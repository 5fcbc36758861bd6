//! End-to-end run: completion per frame, plane mapping, dedup, storeys and
//! area ratio.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PixelBox, PlaneBox};
use crate::ingest::{load_frame_image, sync_pose, GrayImage, Pose, Sequence, SyncParams};
use crate::plane_map::{
    area_ratio, attitude_warnings, auto_extent, count_storeys, dedup_plane, project_box,
    FacadeExtent, FacadeMetrics, MappingContext, XMode,
};
use crate::postprocess::{post_process_frame, FrameDiagnostics, MatchParams};
use crate::report::render_panorama;

/// Score factor for boxes touching the top or bottom image border before
/// plane dedup, so a full view of a window beats a clipped one.
pub const EDGE_SCORE_FACTOR: f64 = 0.5;

/// Numeric knobs of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub match_params: MatchParams,
    pub dedup_iou: f64,
    pub band_overlap_min: f64,
    /// Facade rectangle for the area ratio; `None` derives it from the
    /// windows grown by `wall_margin_m`.
    pub extent: Option<FacadeExtent>,
    pub wall_margin_m: f64,
    pub skip_postprocess: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            match_params: MatchParams::default(),
            dedup_iou: 0.3,
            band_overlap_min: 0.5,
            extent: None,
            wall_margin_m: 1.0,
            skip_postprocess: false,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        self.match_params.validate()?;
        if !(0.0..=1.0).contains(&self.dedup_iou) {
            return Err(Error::param("dedup_iou", "must be in [0, 1]"));
        }
        if !(self.band_overlap_min > 0.0 && self.band_overlap_min <= 1.0) {
            return Err(Error::param("band_overlap_min", "must be in (0, 1]"));
        }
        if !(self.wall_margin_m >= 0.0 && self.wall_margin_m.is_finite()) {
            return Err(Error::param("wall_margin_m", "must be >= 0"));
        }
        if let Some(e) = self.extent {
            if !(e.w_m > 0.0 && e.h_m > 0.0) {
                return Err(Error::ZeroExtent);
            }
        }
        Ok(())
    }
}

/// One frame ready for processing.
#[derive(Debug, Clone)]
pub struct FrameInput {
    pub id: String,
    pub pose: Pose,
    pub image: Option<GrayImage>,
    pub detections: Vec<PixelBox>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub metrics: FacadeMetrics,
    /// Per-frame boxes after completion (the input detections when
    /// post-processing is skipped).
    pub frame_boxes: Vec<Vec<PixelBox>>,
    pub diagnostics: Vec<FrameDiagnostics>,
    pub warnings: Vec<String>,
}

impl PipelineOutput {
    pub fn summary_line(&self) -> String {
        format!(
            "windows={} storeys={} area_ratio={:.4}",
            self.metrics.window_count, self.metrics.storey_count, self.metrics.area_ratio
        )
    }
}

/// Runs completion, mapping and the facade metrics over in-memory frames.
/// Frames are completed in parallel; everything after is sequential and
/// ordered by frame.
pub fn run_frames(
    frames: &[FrameInput],
    ctx: &MappingContext,
    params: &PipelineParams,
) -> Result<PipelineOutput> {
    params.validate()?;

    let completed: Vec<Result<(Vec<PixelBox>, FrameDiagnostics)>> = frames
        .par_iter()
        .map(|f| complete_frame(f, params))
        .collect();

    let mut frame_boxes = Vec::with_capacity(frames.len());
    let mut diagnostics = Vec::with_capacity(frames.len());
    let mut warnings = Vec::new();
    let mut plane = Vec::new();
    let img_h = f64::from(ctx.camera.height_px);
    for (f, done) in frames.iter().zip(completed) {
        let (boxes, diag) = done?;
        warnings.extend(diag.warnings.iter().map(|w| format!("frame `{}`: {w}", f.id)));
        warnings.extend(attitude_warnings(&f.id, &f.pose));
        for b in &boxes {
            let mut p = project_box(b, &f.id, &f.pose, ctx)?;
            if touches_vertical_border(b, img_h) {
                p.score *= EDGE_SCORE_FACTOR;
            }
            plane.push(p);
        }
        frame_boxes.push(boxes);
        diagnostics.push(diag);
    }

    let unique = dedup_plane(&plane, params.dedup_iou)?;
    let storeys = count_storeys(&unique, params.band_overlap_min)?;
    let extent = match params.extent {
        Some(e) => Some(e),
        None => auto_extent(&unique, params.wall_margin_m),
    };
    let ratio = match &extent {
        Some(e) => area_ratio(&unique, e)?,
        None => 0.0,
    };
    let unique = order_unique(unique);

    Ok(PipelineOutput {
        metrics: FacadeMetrics {
            window_count: unique.len(),
            storey_count: storeys.storey_count,
            windows_per_storey: storeys.windows_per_storey.clone(),
            area_ratio: ratio,
            facade_extent: extent,
            unique_windows: unique,
            storeys,
        },
        frame_boxes,
        diagnostics,
        warnings,
    })
}

fn complete_frame(f: &FrameInput, params: &PipelineParams) -> Result<(Vec<PixelBox>, FrameDiagnostics)> {
    let passthrough = |warnings: Vec<String>| {
        let diag = FrameDiagnostics {
            frame: f.id.clone(),
            originals: f.detections.len(),
            candidates: 0,
            kept: f.detections.len(),
            warnings,
        };
        Ok((f.detections.clone(), diag))
    };
    if params.skip_postprocess {
        return passthrough(Vec::new());
    }
    if f.detections.is_empty() {
        return passthrough(vec!["no detections; completion skipped".into()]);
    }
    let Some(image) = &f.image else {
        return passthrough(vec!["no image; completion skipped".into()]);
    };
    let done = post_process_frame(image, &f.detections, &params.match_params)?;
    let diag = done.diagnostics(&f.id);
    Ok((done.boxes, diag))
}

fn touches_vertical_border(b: &PixelBox, img_h: f64) -> bool {
    let margin = (0.15 * b.h).max(2.0);
    b.y <= margin || b.bottom() >= img_h - margin
}

/// Bottom-up, then left to right.
fn order_unique(mut unique: Vec<PlaneBox>) -> Vec<PlaneBox> {
    unique.sort_by(|a, b| a.y_m.total_cmp(&b.y_m).then(a.x_m.total_cmp(&b.x_m)));
    unique
}

/// Inputs and switches of a run from disk.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub params: PipelineParams,
    pub x_mode: XMode,
    pub sync: SyncParams,
}

impl RunConfig {
    pub fn new(config_path: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            config_path: config_path.into(),
            out_dir: out_dir.into(),
            params: PipelineParams::default(),
            x_mode: XMode::Metric,
            sync: SyncParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.config_path.is_file() {
            return Err(Error::io(
                &self.config_path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "config file not found"),
            ));
        }
        self.params.validate()
    }
}

/// Loads a sequence, synchronises poses and reads the frames. The mapping
/// reference pitch is the first frame's.
pub fn load_frames(seq: &Sequence, sync: &SyncParams, x_mode: XMode) -> Result<(Vec<FrameInput>, MappingContext)> {
    let poses: Vec<Pose> = seq
        .meta
        .frames
        .iter()
        .map(|f| sync_pose(&f.id, f.t_s, &seq.telemetry, sync))
        .collect::<Result<_>>()?;
    let beta0 = poses.first().map_or(0.0, |p| p.pitch_rad);
    let ctx = MappingContext::new(seq.meta.depth_m, seq.meta.camera, beta0)?.with_x_mode(x_mode);
    let cam = seq.meta.camera;
    let images: Vec<Option<GrayImage>> = seq
        .meta
        .frames
        .par_iter()
        .map(|f| {
            f.image
                .as_deref()
                .map(|p| load_frame_image(p, cam.width_px, cam.height_px))
                .transpose()
        })
        .collect::<Result<_>>()?;
    let frames = seq
        .meta
        .frames
        .iter()
        .zip(poses)
        .zip(images)
        .zip(&seq.detections)
        .map(|(((m, pose), image), det)| FrameInput {
            id: m.id.clone(),
            pose,
            image,
            detections: det.clone(),
        })
        .collect();
    Ok((frames, ctx))
}

/// Output file names inside the run directory.
pub const METRICS_FILE: &str = "metrics.json";
pub const PANORAMA_FILE: &str = "panorama.svg";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";

#[derive(Debug, Serialize)]
struct DiagnosticsDocument<'a> {
    frames: &'a [FrameDiagnostics],
    warnings: &'a [String],
}

/// Runs the pipeline from a sequence config and writes metrics, panorama
/// and diagnostics into `out_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let seq = Sequence::load(&cfg.config_path)?;
    let (frames, ctx) = load_frames(&seq, &cfg.sync, cfg.x_mode)?;
    let out = run_frames(&frames, &ctx, &cfg.params)?;

    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let doc = out.metrics.to_document();
    write(&cfg.out_dir.join(METRICS_FILE), &doc.to_json())?;
    write(
        &cfg.out_dir.join(PANORAMA_FILE),
        &render_panorama(&doc, cfg.params.band_overlap_min)?,
    )?;
    let diag = DiagnosticsDocument {
        frames: &out.diagnostics,
        warnings: &out.warnings,
    };
    write(
        &cfg.out_dir.join(DIAGNOSTICS_FILE),
        &serde_json::to_string_pretty(&diag).expect("diagnostics serialize"),
    )?;
    Ok(out)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
