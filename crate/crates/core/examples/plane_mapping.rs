//! Map one window seen from two altitudes onto the facade plane.

use facade_survey::geometry::PixelBox;
use facade_survey::ingest::{CameraModel, Pose};
use facade_survey::plane_map::{pitch_correction, project_box, project_point, MappingContext};

fn main() -> facade_survey::Result<()> {
    let camera = CameraModel { focal_px: 920.0, width_px: 1280, height_px: 720 };
    let ctx = MappingContext::new(5.0, camera, 0.0)?;
    let level = Pose { t: 0.0, altitude_m: 4.0, roll_rad: 0.0, pitch_rad: 0.0, yaw_rad: 0.0 };
    let tilted = Pose { pitch_rad: 0.12, ..level };

    println!("pitch correction at 0.12 rad: {:.6} m", pitch_correction(5.0, 0.12)?);
    println!("top row, level:  Y = {:.6} m", project_point(0.0, &level, &ctx)?);
    println!("top row, tilted: Y = {:.6} m", project_point(0.0, &tilted, &ctx)?);

    let b = PixelBox::new(600.0, 300.0, 80.0, 92.0, 0.9)?;
    for (id, pose) in [("low", level), ("high", Pose { altitude_m: 5.0, ..level })] {
        let p = project_box(&b, id, &pose, &ctx)?;
        println!(
            "{id:>4}: x={:.3} y={:.3} w={:.3} h={:.3}",
            p.x_m, p.y_m, p.w_m, p.h_m
        );
    }
    Ok(())
}
