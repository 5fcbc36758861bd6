//! Projection of image detections onto one vertical plane parallel to the
//! facade, and the facade-level metrics computed there.
//!
//! The camera looks horizontally at a facade `D` meters away while climbing.
//! A pixel row `y` maps to the height
//!
//! ```text
//! Y = (h/2 - y) * D/f  -  D * tan(beta - beta0)  +  H
//! ```
//!
//! where `H` is the altitude and `beta - beta0` the pitch relative to the
//! first frame. The pitch term is a metric offset: it can equally be read as
//! `-f * tan(beta - beta0)` pixels added before the `D/f` scaling, which gives
//! the same `Y`.

mod dedup;
mod metrics;
mod storeys;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

pub use self::dedup::dedup_plane;
pub use self::metrics::{
    area_ratio, auto_extent, ExtentSize, FacadeExtent, FacadeMetrics, MetricsDocument,
    UniqueWindow,
};
pub use self::storeys::{count_storeys, StoreyBand, StoreyCount};
use crate::error::{Error, Result};
use crate::geometry::{PixelBox, PlaneBox};
use crate::ingest::{CameraModel, Pose};

/// Roll or yaw above this magnitude is reported; neither is compensated.
pub const ATTITUDE_WARN_RAD: f64 = 0.05;

/// Horizontal coordinate convention on the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XMode {
    /// `(x - width/2) * D/f` meters.
    #[default]
    Metric,
    /// Raw image column, as in the original formulation. Counts are the
    /// same because the flight is purely vertical.
    Pixel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingContext {
    pub depth_m: f64,
    pub camera: CameraModel,
    /// Pitch of the first frame; all pitch is taken relative to it.
    pub beta0_rad: f64,
    pub x_mode: XMode,
}

impl MappingContext {
    pub fn new(depth_m: f64, camera: CameraModel, beta0_rad: f64) -> Result<Self> {
        if !(depth_m.is_finite() && depth_m > 0.0) {
            return Err(Error::param("depth_m", format!("{depth_m} must be positive")));
        }
        camera.validate()?;
        Ok(MappingContext {
            depth_m,
            camera,
            beta0_rad,
            x_mode: XMode::Metric,
        })
    }

    pub fn with_x_mode(self, x_mode: XMode) -> Self {
        MappingContext { x_mode, ..self }
    }

    /// Meters per pixel on the facade plane.
    pub fn scale(&self) -> f64 {
        self.depth_m / self.camera.focal_px
    }

    pub fn beta_rel(&self, pose: &Pose) -> f64 {
        pose.pitch_rad - self.beta0_rad
    }
}

/// Vertical offset on the facade caused by pitching the camera by
/// `beta_rel` relative to the reference frame: `-D * tan(beta_rel)`.
pub fn pitch_correction(depth_m: f64, beta_rel: f64) -> Result<f64> {
    if !(beta_rel.abs() < FRAC_PI_2) {
        return Err(Error::InvalidPitch(beta_rel));
    }
    Ok(-depth_m * beta_rel.tan())
}

/// Height above the facade/ground line of image row `y_px`.
pub fn project_point(y_px: f64, pose: &Pose, ctx: &MappingContext) -> Result<f64> {
    let half_h = f64::from(ctx.camera.height_px) / 2.0;
    let y_c = pitch_correction(ctx.depth_m, ctx.beta_rel(pose))?;
    Ok((half_h - y_px) * ctx.scale() + y_c + pose.altitude_m)
}

/// Horizontal plane coordinate of image column `x_px`.
pub fn project_x(x_px: f64, ctx: &MappingContext) -> f64 {
    match ctx.x_mode {
        XMode::Metric => (x_px - f64::from(ctx.camera.width_px) / 2.0) * ctx.scale(),
        XMode::Pixel => x_px,
    }
}

/// Maps an image box to the plane. The bottom image row becomes `y_m`; the
/// height is `h * D/f`, the difference of the top and bottom projections, in
/// which altitude and pitch cancel.
pub fn project_box(
    b: &PixelBox,
    frame: &str,
    pose: &Pose,
    ctx: &MappingContext,
) -> Result<PlaneBox> {
    b.validate()?;
    let y_m = project_point(b.bottom(), pose, ctx)?;
    let h_m = b.h * ctx.scale();
    let (x_m, w_m) = match ctx.x_mode {
        XMode::Metric => (project_x(b.x, ctx), b.w * ctx.scale()),
        XMode::Pixel => (b.x, b.w),
    };
    Ok(PlaneBox {
        x_m,
        y_m,
        w_m,
        h_m,
        score: b.score,
        source_frames: vec![frame.to_string()],
    })
}

/// Roll/yaw magnitudes worth flagging for one frame.
pub fn attitude_warnings(frame: &str, pose: &Pose) -> Vec<String> {
    let mut out = Vec::new();
    for (name, v) in [("roll", pose.roll_rad), ("yaw", pose.yaw_rad)] {
        if v.abs() > ATTITUDE_WARN_RAD {
            out.push(format!(
                "frame `{frame}`: {name} {v:.3} rad exceeds {ATTITUDE_WARN_RAD} rad and is not compensated"
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> CameraModel {
        CameraModel {
            focal_px: 920.0,
            width_px: 1280,
            height_px: 720,
        }
    }

    fn pose(h: f64, pitch: f64) -> Pose {
        Pose {
            t: 0.0,
            altitude_m: h,
            roll_rad: 0.0,
            pitch_rad: pitch,
            yaw_rad: 0.0,
        }
    }

    #[test]
    fn pitch_correction_values() {
        assert_eq!(pitch_correction(5.0, 0.0).unwrap(), 0.0);
        assert!((pitch_correction(5.0, 0.12).unwrap() + 0.602_896_7).abs() < 1e-6);
        assert!((pitch_correction(3.0, -0.1).unwrap() - 0.301_004_0).abs() < 1e-6);
        assert!(matches!(
            pitch_correction(3.0, FRAC_PI_2),
            Err(Error::InvalidPitch(_))
        ));
    }

    #[test]
    fn optical_axis_hits_altitude() {
        let ctx = MappingContext::new(5.0, cam(), 0.0).unwrap();
        assert_eq!(project_point(360.0, &pose(10.0, 0.0), &ctx).unwrap(), 10.0);
    }

    #[test]
    fn top_row_worked_example() {
        let ctx = MappingContext::new(5.0, cam(), 0.0).unwrap();
        let y = project_point(0.0, &pose(4.0, 0.0), &ctx).unwrap();
        assert!((y - (360.0 * 5.0 / 920.0 + 4.0)).abs() < 1e-12);
        assert!((y - 5.956_521_7).abs() < 1e-6);
        let y = project_point(0.0, &pose(4.0, 0.12), &ctx).unwrap();
        assert!((y - 5.353_625_1).abs() < 1e-6);
    }

    #[test]
    fn pitch_is_relative_to_first_frame() {
        let ctx = MappingContext::new(5.0, cam(), 0.05).unwrap();
        let a = project_point(100.0, &pose(4.0, 0.05), &ctx).unwrap();
        let flat = MappingContext::new(5.0, cam(), 0.0).unwrap();
        let b = project_point(100.0, &pose(4.0, 0.0), &flat).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn box_height_and_center() {
        let ctx = MappingContext::new(5.0, cam(), 0.0).unwrap();
        let b = PixelBox::new(600.0, 100.0, 80.0, 92.0, 0.9).unwrap();
        let p = project_box(&b, "f", &pose(7.0, 0.1), &ctx).unwrap();
        assert!((p.h_m - 0.5).abs() < 1e-12);
        // x centered on the optical column maps to 0
        let c = PixelBox::new(600.0, 100.0, 80.0, 92.0, 0.9).unwrap();
        let p = project_box(&c, "f", &pose(7.0, 0.0), &ctx).unwrap();
        assert!((p.x_m + p.w_m / 2.0).abs() < 1e-12);
        assert_eq!(p.source_frames, vec!["f".to_string()]);
    }

    #[test]
    fn altitude_shift_moves_box() {
        let ctx = MappingContext::new(5.0, cam(), 0.0).unwrap();
        let b = PixelBox::new(10.0, 200.0, 40.0, 50.0, 0.9).unwrap();
        let p4 = project_box(&b, "a", &pose(4.0, 0.0), &ctx).unwrap();
        let p5 = project_box(&b, "b", &pose(5.0, 0.0), &ctx).unwrap();
        assert!((p5.y_m - p4.y_m - 1.0).abs() < 1e-12);
        assert_eq!(p5.x_m, p4.x_m);
    }

    #[test]
    fn pixel_x_mode() {
        let ctx = MappingContext::new(5.0, cam(), 0.0)
            .unwrap()
            .with_x_mode(XMode::Pixel);
        let b = PixelBox::new(10.0, 200.0, 40.0, 50.0, 0.9).unwrap();
        let p = project_box(&b, "a", &pose(4.0, 0.0), &ctx).unwrap();
        assert_eq!((p.x_m, p.w_m), (10.0, 40.0));
    }

    #[test]
    fn warns_on_roll() {
        let mut p = pose(1.0, 0.0);
        assert!(attitude_warnings("f", &p).is_empty());
        p.roll_rad = 0.08;
        assert_eq!(attitude_warnings("f", &p).len(), 1);
    }
}
