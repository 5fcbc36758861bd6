use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use facade_survey::commands::{
    cmd_eval, cmd_pipeline, cmd_report, cmd_synth, error_json, exit_code, SynthOptions,
};
use facade_survey::ingest::{SyncMode, SyncParams};
use facade_survey::pipeline::{PipelineParams, RunConfig};
use facade_survey::plane_map::{FacadeExtent, XMode};
use facade_survey::postprocess::MatchParams;
use facade_survey::Result;

#[derive(Parser)]
#[command(name = "facade-survey", version, about = "Window and storey counts from vertical facade flights")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complete, map and count one sequence.
    Pipeline(PipelineArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Score predictions against annotations.
    Eval(EvalArgs),
    /// Render a metrics file as a panorama SVG.
    Report(ReportArgs),
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.80)]
    ncc_threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    strip_margin: f64,
    #[arg(long, default_value_t = 0.3)]
    nms_iou: f64,
    #[arg(long)]
    peak_separation: Option<f64>,
    #[arg(long, default_value_t = 0.3)]
    dedup_iou: f64,
    #[arg(long, default_value_t = 0.5)]
    band_overlap: f64,
    /// Facade rectangle as `x,y,w,h` in metres (y is the bottom edge).
    #[arg(long, value_parser = parse_extent)]
    extent: Option<FacadeExtent>,
    #[arg(long, default_value_t = 1.0)]
    wall_margin: f64,
    /// Keep plane X in raw pixels.
    #[arg(long)]
    pixel_x: bool,
    /// Use the nearest telemetry sample instead of interpolating.
    #[arg(long)]
    nearest_sync: bool,
    #[arg(long, default_value_t = 0.1)]
    sync_slack: f64,
    #[arg(long)]
    skip_postprocess: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 4)]
    storeys: usize,
    #[arg(long, default_value_t = 5)]
    windows: usize,
    #[arg(long, default_value_t = 12)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
    /// Corner jitter sigma in pixels.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// Pitch noise sigma in radians.
    #[arg(long, default_value_t = 0.0)]
    pitch_noise: f64,
    #[arg(long, default_value_t = 0)]
    render_noise: u8,
    #[arg(long, default_value_t = 0.0)]
    storey_step: f32,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    /// Also write the metrics as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    metrics: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    band_overlap: f64,
}

fn parse_extent(s: &str) -> std::result::Result<FacadeExtent, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x_m, y_m, w_m, h_m] => Ok(FacadeExtent { x_m, y_m, w_m, h_m }),
        _ => Err("expected x,y,w,h".into()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pipeline(a) => {
            let mut cfg = RunConfig::new(a.config, a.out);
            cfg.params = PipelineParams {
                match_params: MatchParams {
                    ncc_threshold: a.ncc_threshold,
                    strip_margin: a.strip_margin,
                    nms_iou: a.nms_iou,
                    peak_min_separation: a.peak_separation,
                },
                dedup_iou: a.dedup_iou,
                band_overlap_min: a.band_overlap,
                extent: a.extent,
                wall_margin_m: a.wall_margin,
                skip_postprocess: a.skip_postprocess,
            };
            cfg.x_mode = if a.pixel_x { XMode::Pixel } else { XMode::Metric };
            cfg.sync = SyncParams {
                slack_s: a.sync_slack,
                mode: if a.nearest_sync { SyncMode::Nearest } else { SyncMode::Linear },
            };
            let out = cmd_pipeline(&cfg)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", out.summary_line());
        }
        Command::Synth(a) => {
            let opts = SynthOptions {
                storeys: a.storeys,
                windows: a.windows,
                frames: a.frames,
                seed: a.seed,
                dropout: a.dropout,
                jitter_px: a.jitter,
                pitch_noise_rad: a.pitch_noise,
                render_noise: a.render_noise,
                storey_intensity_step: a.storey_step,
                out_dir: a.out,
            };
            let paths = cmd_synth(&opts)?;
            println!("{}", paths.config.display());
        }
        Command::Eval(a) => {
            let report = cmd_eval(&a.predictions, &a.truth, a.iou)?;
            print!("{}", report.table());
            if let Some(path) = a.json {
                std::fs::write(&path, report.to_json())
                    .map_err(|e| facade_survey::Error::Io { path, source: e })?;
            }
        }
        Command::Report(a) => cmd_report(&a.metrics, &a.out, a.band_overlap)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
