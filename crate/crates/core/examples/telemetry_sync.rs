//! Parse a flight log and look up the pose of frames between samples.

use facade_survey::ingest::{parse_telemetry, sync_pose, SyncMode, SyncParams};

const LOG: &str = "\
t_s,altitude_m,roll_rad,pitch_rad,yaw_rad
0.0,2.00,0.0,0.010,0.0
1.0,3.00,0.0,0.030,0.0
2.0,4.10,0.0,0.020,0.0
";

fn main() -> facade_survey::Result<()> {
    let log = parse_telemetry(LOG)?;
    for mode in [SyncMode::Linear, SyncMode::Nearest] {
        let params = SyncParams { mode, ..SyncParams::default() };
        println!("{mode:?}");
        for (id, t) in [("f0", 0.0), ("f1", 0.4), ("f2", 1.75), ("f3", 2.05)] {
            let p = sync_pose(id, t, &log, &params)?;
            println!("  {id} t={t:<4} H={:.3} m pitch={:.4} rad", p.altitude_m, p.pitch_rad);
        }
    }

    let params = SyncParams::default();
    match sync_pose("late", 3.0, &log, &params) {
        Ok(_) => println!("unexpected"),
        Err(e) => println!("frame outside the log: {e}"),
    }
    Ok(())
}
