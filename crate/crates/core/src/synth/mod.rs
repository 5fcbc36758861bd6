//! Synthetic facades and vertical flights with known ground truth.
//!
//! Truth boxes come from inverting the plane mapping, so a sequence mapped
//! back with its own telemetry lands exactly on the layout. Frames are drawn
//! as flat rectangles: wall, window frame, glass, and a mullion/transom
//! cross.

mod corrupt;
mod dataset;
mod render;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use self::corrupt::{corrupt_detections, corrupt_detections_traced, CorruptionParams};
pub use self::dataset::{write_dataset, DatasetPaths};
pub use self::render::render_frame;
use crate::error::{Error, Result};
use crate::geometry::PixelBox;
use crate::ingest::{CameraModel, FrameTime, GrayImage, Pose, SequenceConfig};
use crate::plane_map::{pitch_correction, FacadeExtent, MappingContext, XMode};

/// Storey/window grid of a synthetic facade, centered on the camera's
/// optical column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacadeLayout {
    pub storeys: usize,
    pub windows_per_storey: usize,
    pub window_w_m: f64,
    pub window_h_m: f64,
    pub h_gap_m: f64,
    pub v_gap_m: f64,
    /// Height of the lowest windows' bottom edge.
    pub sill_m: f64,
    pub wall_intensity: f32,
    pub window_intensity: f32,
    /// Added to the glass intensity per storey; nonzero values give each
    /// storey its own texture.
    pub storey_intensity_step: f32,
}

impl Default for FacadeLayout {
    fn default() -> Self {
        FacadeLayout {
            storeys: 4,
            windows_per_storey: 5,
            window_w_m: 1.2,
            window_h_m: 1.5,
            h_gap_m: 0.8,
            v_gap_m: 1.2,
            sill_m: 1.0,
            wall_intensity: 170.0,
            window_intensity: 50.0,
            storey_intensity_step: 0.0,
        }
    }
}

/// Storey (bottom-up) and position (left to right) of a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowId {
    pub storey: usize,
    pub index: usize,
}

impl std::fmt::Display for WindowId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "S{}W{}", self.storey, self.index)
    }
}

/// One window of the layout on the facade plane (`y_m` is its bottom).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutWindow {
    pub id: WindowId,
    pub x_m: f64,
    pub y_m: f64,
    pub w_m: f64,
    pub h_m: f64,
}

impl FacadeLayout {
    pub fn validate(&self) -> Result<()> {
        if self.storeys == 0 || self.windows_per_storey == 0 {
            return Err(Error::Synth("layout needs at least one window".into()));
        }
        let dims = [
            self.window_w_m,
            self.window_h_m,
            self.h_gap_m,
            self.v_gap_m,
            self.sill_m,
        ];
        if dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::Synth("layout dimensions must be positive".into()));
        }
        if self.window_intensity == self.wall_intensity {
            return Err(Error::Synth(
                "window and wall intensity must differ".into(),
            ));
        }
        Ok(())
    }

    pub fn total_width_m(&self) -> f64 {
        let n = self.windows_per_storey as f64;
        n * self.window_w_m + (n - 1.0) * self.h_gap_m
    }

    pub fn storey_pitch_m(&self) -> f64 {
        self.window_h_m + self.v_gap_m
    }

    pub fn top_m(&self) -> f64 {
        self.sill_m + (self.storeys as f64 - 1.0) * self.storey_pitch_m() + self.window_h_m
    }

    pub fn windows(&self) -> Vec<LayoutWindow> {
        let x0 = -self.total_width_m() / 2.0;
        let mut out = Vec::with_capacity(self.storeys * self.windows_per_storey);
        for s in 0..self.storeys {
            for k in 0..self.windows_per_storey {
                out.push(LayoutWindow {
                    id: WindowId { storey: s, index: k },
                    x_m: x0 + k as f64 * (self.window_w_m + self.h_gap_m),
                    y_m: self.sill_m + s as f64 * self.storey_pitch_m(),
                    w_m: self.window_w_m,
                    h_m: self.window_h_m,
                });
            }
        }
        out
    }

    /// Wall rectangle: from the ground line to one vertical gap above the top
    /// windows, one horizontal gap beyond the outer windows.
    pub fn facade_extent(&self) -> FacadeExtent {
        let w = self.total_width_m() + 2.0 * self.h_gap_m;
        FacadeExtent {
            x_m: -w / 2.0,
            y_m: 0.0,
            w_m: w,
            h_m: self.top_m() + self.v_gap_m,
        }
    }

    pub fn analytic_area_ratio(&self) -> f64 {
        let n = (self.storeys * self.windows_per_storey) as f64;
        n * self.window_w_m * self.window_h_m / self.facade_extent().area()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightPlan {
    pub frame_count: usize,
    pub start_h_m: f64,
    pub end_h_m: f64,
    pub depth_m: f64,
    pub pitch_noise_sigma_rad: f64,
    pub camera: CameraModel,
    pub seed: u64,
    pub frame_interval_s: f64,
    /// Uniform integer noise of ±this many gray levels added to every pixel.
    pub render_noise: u8,
    /// Fraction of a window that must be inside the frame for it to be in
    /// that frame's truth.
    pub min_visible: f64,
}

impl Default for FlightPlan {
    fn default() -> Self {
        FlightPlan {
            frame_count: 12,
            start_h_m: 2.5,
            end_h_m: 10.5,
            depth_m: 12.0,
            pitch_noise_sigma_rad: 0.0,
            camera: CameraModel {
                focal_px: 280.0,
                width_px: 400,
                height_px: 176,
            },
            seed: 0,
            frame_interval_s: 1.0,
            render_noise: 0,
            min_visible: 0.6,
        }
    }
}

/// Minimum vertical overlap between consecutive frames.
pub const MIN_FRAME_OVERLAP: f64 = 0.3;

impl FlightPlan {
    pub fn validate(&self) -> Result<()> {
        if self.frame_count < 2 {
            return Err(Error::Synth(format!(
                "frame_count must be at least 2, got {}",
                self.frame_count
            )));
        }
        if !(self.end_h_m > self.start_h_m) {
            return Err(Error::Synth("end altitude must exceed start altitude".into()));
        }
        if !(self.depth_m > 0.0 && self.depth_m.is_finite()) {
            return Err(Error::Synth("depth must be positive".into()));
        }
        if !(self.pitch_noise_sigma_rad >= 0.0 && self.pitch_noise_sigma_rad < 0.5) {
            return Err(Error::Synth("pitch noise sigma must be in [0, 0.5)".into()));
        }
        if !(self.frame_interval_s > 0.0) {
            return Err(Error::Synth("frame interval must be positive".into()));
        }
        if !(self.min_visible > 0.0 && self.min_visible <= 1.0) {
            return Err(Error::Synth("min_visible must be in (0, 1]".into()));
        }
        self.camera.validate()?;
        let step_px = self.altitude_step_m() * self.camera.focal_px / self.depth_m;
        let max_step = (1.0 - MIN_FRAME_OVERLAP) * f64::from(self.camera.height_px);
        if step_px > max_step {
            return Err(Error::Synth(format!(
                "consecutive frames move {step_px:.1} px; at most {max_step:.1} px keeps {}% overlap",
                MIN_FRAME_OVERLAP * 100.0
            )));
        }
        Ok(())
    }

    pub fn altitude_step_m(&self) -> f64 {
        (self.end_h_m - self.start_h_m) / (self.frame_count - 1) as f64
    }
}

/// Image row of facade height `y_m`: the inverse of
/// [`project_point`](crate::plane_map::project_point).
pub fn inverse_project(y_m: f64, pose: &Pose, ctx: &MappingContext) -> Result<f64> {
    let y_c = pitch_correction(ctx.depth_m, ctx.beta_rel(pose))?;
    let half_h = f64::from(ctx.camera.height_px) / 2.0;
    Ok(half_h - (y_m - pose.altitude_m - y_c) / ctx.scale())
}

/// Image column of plane coordinate `x_m` (metric mode).
pub fn inverse_x(x_m: f64, ctx: &MappingContext) -> f64 {
    match ctx.x_mode {
        XMode::Metric => x_m / ctx.scale() + f64::from(ctx.camera.width_px) / 2.0,
        XMode::Pixel => x_m,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFrame {
    pub id: String,
    pub t_s: f64,
    pub pose: Pose,
    pub truth: Vec<PixelBox>,
    /// Layout window behind each truth box.
    pub truth_ids: Vec<WindowId>,
    pub image: GrayImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence {
    pub layout: FacadeLayout,
    pub plan: FlightPlan,
    pub frames: Vec<SyntheticFrame>,
}

impl SyntheticSequence {
    pub fn poses(&self) -> Vec<Pose> {
        self.frames.iter().map(|f| f.pose).collect()
    }

    pub fn truth(&self) -> Vec<Vec<PixelBox>> {
        self.frames.iter().map(|f| f.truth.clone()).collect()
    }

    pub fn mapping_context(&self) -> MappingContext {
        MappingContext {
            depth_m: self.plan.depth_m,
            camera: self.plan.camera,
            beta0_rad: self.frames[0].pose.pitch_rad,
            x_mode: XMode::Metric,
        }
    }

    pub fn config(&self) -> SequenceConfig {
        SequenceConfig {
            depth_m: self.plan.depth_m,
            focal_px: self.plan.camera.focal_px,
            width_px: self.plan.camera.width_px,
            height_px: self.plan.camera.height_px,
            telemetry: DatasetPaths::TELEMETRY.into(),
            detections: DatasetPaths::DETECTIONS.into(),
            frame_times: self
                .frames
                .iter()
                .map(|f| FrameTime {
                    id: f.id.clone(),
                    t_s: f.t_s,
                })
                .collect(),
        }
    }
}

pub fn frame_id(k: usize) -> String {
    format!("frame_{k:03}")
}

/// Flies `plan` past `layout`: poses, per-frame truth boxes and rendered
/// frames.
pub fn gen_sequence(layout: &FacadeLayout, plan: &FlightPlan) -> Result<SyntheticSequence> {
    layout.validate()?;
    plan.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let pitch = Normal::new(0.0, plan.pitch_noise_sigma_rad)
        .map_err(|e| Error::Synth(e.to_string()))?;
    let poses: Vec<Pose> = (0..plan.frame_count)
        .map(|k| Pose {
            t: k as f64 * plan.frame_interval_s,
            altitude_m: plan.start_h_m + k as f64 * plan.altitude_step_m(),
            roll_rad: 0.0,
            pitch_rad: pitch.sample(&mut rng),
            yaw_rad: 0.0,
        })
        .collect();

    let ctx = MappingContext {
        depth_m: plan.depth_m,
        camera: plan.camera,
        beta0_rad: poses[0].pitch_rad,
        x_mode: XMode::Metric,
    };
    let windows = layout.windows();
    let (img_w, img_h) = (
        f64::from(plan.camera.width_px),
        f64::from(plan.camera.height_px),
    );
    for w in &windows {
        let (x0, x1) = (inverse_x(w.x_m, &ctx), inverse_x(w.x_m + w.w_m, &ctx));
        if x0 < 0.0 || x1 > img_w {
            return Err(Error::Synth(format!(
                "window {} spans columns {x0:.1}..{x1:.1}, outside the {img_w} px frame",
                w.id
            )));
        }
        if w.h_m / ctx.scale() > img_h {
            return Err(Error::Synth("windows are taller than the frame".into()));
        }
    }

    let mut seen = vec![false; windows.len()];
    let mut frames = Vec::with_capacity(plan.frame_count);
    for (k, pose) in poses.iter().enumerate() {
        let mut rects = Vec::with_capacity(windows.len());
        let mut truth = Vec::new();
        let mut truth_ids = Vec::new();
        for (i, w) in windows.iter().enumerate() {
            let top = inverse_project(w.y_m + w.h_m, pose, &ctx)?;
            let bottom = inverse_project(w.y_m, pose, &ctx)?;
            let left = inverse_x(w.x_m, &ctx);
            let right = inverse_x(w.x_m + w.w_m, &ctx);
            rects.push((w.id, [left, top, right, bottom]));

            let (cl, ct) = (left.max(0.0), top.max(0.0));
            let (cr, cb) = (right.min(img_w), bottom.min(img_h));
            if cr <= cl || cb <= ct {
                continue;
            }
            let visible = (cr - cl) * (cb - ct) / ((right - left) * (bottom - top));
            if visible >= plan.min_visible {
                truth.push(PixelBox::new(cl, ct, cr - cl, cb - ct, 1.0)?);
                truth_ids.push(w.id);
                seen[i] = true;
            }
        }
        let image = render_frame(layout, plan, &rects, &mut rng);
        frames.push(SyntheticFrame {
            id: frame_id(k),
            t_s: pose.t,
            pose: *pose,
            truth,
            truth_ids,
            image,
        });
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::Synth(format!(
            "window {} is never at least {:.0}% visible; widen the altitude range",
            windows[i].id,
            plan.min_visible * 100.0
        )));
    }

    Ok(SyntheticSequence {
        layout: layout.clone(),
        plan: plan.clone(),
        frames,
    })
}

/// A plan whose first frame is centered on the lowest storey's windows and
/// whose last frame is centered on the top storey's.
pub fn covering_plan(layout: &FacadeLayout, base: &FlightPlan) -> FlightPlan {
    let half_window = layout.window_h_m / 2.0;
    FlightPlan {
        start_h_m: layout.sill_m + half_window,
        end_h_m: (layout.top_m() - half_window).max(layout.sill_m + half_window + 0.5),
        ..base.clone()
    }
}
