use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact header line of the telemetry CSV.
pub const TELEMETRY_HEADER: &str = "t_s,altitude_m,roll_rad,pitch_rad,yaw_rad";

/// UAV state at one timestamp. Altitude is measured from the facade's ground
/// line, not from the takeoff point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub t: f64,
    pub altitude_m: f64,
    pub roll_rad: f64,
    pub pitch_rad: f64,
    pub yaw_rad: f64,
}

impl Pose {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let fields = [
            ("t_s", self.t),
            ("altitude_m", self.altitude_m),
            ("roll_rad", self.roll_rad),
            ("pitch_rad", self.pitch_rad),
            ("yaw_rad", self.yaw_rad),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(format!("{name} is not finite"));
            }
        }
        for (name, v) in &fields[2..] {
            if v.abs() >= PI {
                return Err(format!("{name} = {v} is not inside (-pi, pi)"));
            }
        }
        Ok(())
    }

    fn lerp(&self, other: &Pose, w: f64) -> Pose {
        let mix = |a: f64, b: f64| a + (b - a) * w;
        Pose {
            t: mix(self.t, other.t),
            altitude_m: mix(self.altitude_m, other.altitude_m),
            roll_rad: mix(self.roll_rad, other.roll_rad),
            pitch_rad: mix(self.pitch_rad, other.pitch_rad),
            yaw_rad: mix(self.yaw_rad, other.yaw_rad),
        }
    }
}

/// Parses the telemetry CSV. Accepts LF or CRLF line endings and ignores
/// blank lines.
pub fn parse_telemetry(text: &str) -> Result<Vec<Pose>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    match records.next() {
        None => return Err(Error::EmptyLog),
        Some(Err(e)) => {
            return Err(Error::TelemetryParse {
                line: 1,
                reason: e.to_string(),
            })
        }
        Some(Ok(header)) => {
            let got: Vec<&str> = header.iter().collect();
            if got.join(",") != TELEMETRY_HEADER {
                return Err(Error::TelemetryParse {
                    line: 1,
                    reason: format!("expected header `{TELEMETRY_HEADER}`"),
                });
            }
        }
    }

    let mut poses: Vec<Pose> = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| Error::TelemetryParse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 5 {
            return Err(Error::TelemetryParse {
                line,
                reason: format!("expected 5 fields, found {}", rec.len()),
            });
        }
        let mut v = [0.0f64; 5];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|_| Error::TelemetryParse {
                line,
                reason: format!("`{field}` is not a number"),
            })?;
        }
        let pose = Pose {
            t: v[0],
            altitude_m: v[1],
            roll_rad: v[2],
            pitch_rad: v[3],
            yaw_rad: v[4],
        };
        pose.validate()
            .map_err(|reason| Error::TelemetryParse { line, reason })?;
        if let Some(prev) = poses.last() {
            if pose.t <= prev.t {
                return Err(Error::TelemetryOrder {
                    line,
                    t: pose.t,
                    prev: prev.t,
                });
            }
        }
        poses.push(pose);
    }
    if poses.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(poses)
}

/// Writes poses in the telemetry CSV format. Floats use the shortest
/// representation that parses back to the same value.
pub fn serialize_telemetry(poses: &[Pose]) -> String {
    let mut out = String::with_capacity(TELEMETRY_HEADER.len() + 48 * poses.len());
    out.push_str(TELEMETRY_HEADER);
    out.push('\n');
    for p in poses {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.t, p.altitude_m, p.roll_rad, p.pitch_rad, p.yaw_rad
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncMode {
    #[default]
    Linear,
    Nearest,
}

/// Pose lookup for a frame timestamp.
#[derive(Debug, Clone, Copy)]
pub struct SyncParams {
    /// Allowed distance outside the log's time span, seconds.
    pub slack_s: f64,
    pub mode: SyncMode,
}

impl Default for SyncParams {
    fn default() -> Self {
        SyncParams {
            slack_s: 0.1,
            mode: SyncMode::Linear,
        }
    }
}

/// Pose at `frame_t`, interpolated between the bracketing samples.
pub fn sync_pose(frame: &str, frame_t: f64, log: &[Pose], params: &SyncParams) -> Result<Pose> {
    let (first, last) = match (log.first(), log.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::EmptyLog),
    };
    let out_of_range = || Error::Sync {
        frame: frame.to_string(),
        t: frame_t,
        lo: first.t - params.slack_s,
        hi: last.t + params.slack_s,
    };
    if !frame_t.is_finite() || frame_t < first.t - params.slack_s || frame_t > last.t + params.slack_s
    {
        return Err(out_of_range());
    }
    if frame_t <= first.t {
        return Ok(Pose { t: frame_t, ..*first });
    }
    if frame_t >= last.t {
        return Ok(Pose { t: frame_t, ..*last });
    }

    // first index with t >= frame_t; exists and is > 0 here
    let hi = log.partition_point(|p| p.t < frame_t);
    let upper = &log[hi];
    if upper.t == frame_t {
        return Ok(*upper);
    }
    let lower = &log[hi - 1];
    match params.mode {
        SyncMode::Linear => {
            let w = (frame_t - lower.t) / (upper.t - lower.t);
            Ok(Pose {
                t: frame_t,
                ..lower.lerp(upper, w)
            })
        }
        SyncMode::Nearest => {
            let near = if frame_t - lower.t <= upper.t - frame_t {
                lower
            } else {
                upper
            };
            Ok(Pose { t: frame_t, ..*near })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose(t: f64, h: f64) -> Pose {
        Pose {
            t,
            altitude_m: h,
            roll_rad: 0.0,
            pitch_rad: 0.0,
            yaw_rad: 0.0,
        }
    }

    #[test]
    fn parses_single_row() {
        let text = format!("{TELEMETRY_HEADER}\n0.0,4.0,0.0,0.12,0.0\n");
        let poses = parse_telemetry(&text).unwrap();
        assert_eq!(
            poses,
            vec![Pose {
                t: 0.0,
                altitude_m: 4.0,
                roll_rad: 0.0,
                pitch_rad: 0.12,
                yaw_rad: 0.0
            }]
        );
    }

    #[test]
    fn accepts_crlf_and_blank_lines() {
        let text = format!("{TELEMETRY_HEADER}\r\n0,1,0,0,0\r\n\r\n1,2,0,0,0\r\n");
        assert_eq!(parse_telemetry(&text).unwrap().len(), 2);
    }

    #[test]
    fn rejects_decreasing_time() {
        let text = format!("{TELEMETRY_HEADER}\n1.0,4,0,0,0\n0.5,4,0,0,0\n");
        match parse_telemetry(&text) {
            Err(Error::TelemetryOrder { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_only_is_empty() {
        assert!(matches!(
            parse_telemetry(&format!("{TELEMETRY_HEADER}\n")),
            Err(Error::EmptyLog)
        ));
        assert!(matches!(parse_telemetry(""), Err(Error::EmptyLog)));
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = format!("{TELEMETRY_HEADER}\n0,1,0,0,0\n1,abc,0,0,0\n");
        match parse_telemetry(&text) {
            Err(Error::TelemetryParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = format!("{TELEMETRY_HEADER}\n0,1,0,0\n");
        assert!(matches!(
            parse_telemetry(&text),
            Err(Error::TelemetryParse { line: 2, .. })
        ));
        assert!(matches!(
            parse_telemetry("t,h\n0,1\n"),
            Err(Error::TelemetryParse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_out_of_range_angle() {
        let text = format!("{TELEMETRY_HEADER}\n0,1,0,3.5,0\n");
        assert!(matches!(
            parse_telemetry(&text),
            Err(Error::TelemetryParse { .. })
        ));
    }

    #[test]
    fn sync_midpoint_and_exact() {
        let log = [pose(0.0, 1.0), pose(1.0, 2.0)];
        let p = sync_pose("f", 0.5, &log, &SyncParams::default()).unwrap();
        assert_eq!(p.altitude_m, 1.5);
        let p = sync_pose("f", 1.0, &log, &SyncParams::default()).unwrap();
        assert_eq!(p, log[1]);
        let p = sync_pose("f", 0.0, &log, &SyncParams::default()).unwrap();
        assert_eq!(p, log[0]);
    }

    #[test]
    fn sync_clamps_within_slack() {
        let log = [pose(0.0, 1.0), pose(1.0, 2.0)];
        let p = sync_pose("f", 1.05, &log, &SyncParams::default()).unwrap();
        assert_eq!(p.altitude_m, 2.0);
        let p = sync_pose("f", -0.05, &log, &SyncParams::default()).unwrap();
        assert_eq!(p.altitude_m, 1.0);
    }

    #[test]
    fn sync_out_of_range() {
        let log = [pose(0.0, 1.0), pose(1.0, 2.0)];
        let err = sync_pose("frame_7", 2.0, &log, &SyncParams::default()).unwrap_err();
        assert!(matches!(err, Error::Sync { .. }));
        assert!(err.to_string().contains("frame_7"));
    }

    #[test]
    fn sync_nearest_mode() {
        let log = [pose(0.0, 1.0), pose(1.0, 2.0)];
        let params = SyncParams {
            mode: SyncMode::Nearest,
            ..SyncParams::default()
        };
        assert_eq!(sync_pose("f", 0.4, &log, &params).unwrap().altitude_m, 1.0);
        assert_eq!(sync_pose("f", 0.6, &log, &params).unwrap().altitude_m, 2.0);
    }
}
