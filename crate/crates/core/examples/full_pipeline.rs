//! Generate a dataset, run the pipeline on it from disk and compare with
//! the layout.

use facade_survey::commands::{cmd_synth, SynthOptions};
use facade_survey::pipeline::{run_pipeline, RunConfig};

fn main() -> facade_survey::Result<()> {
    let root = std::env::temp_dir().join("facade-pipeline");
    let opts = SynthOptions {
        storeys: 5,
        windows: 6,
        frames: 14,
        seed: 11,
        dropout: 0.15,
        jitter_px: 2.0,
        pitch_noise_rad: 0.03,
        ..SynthOptions::new(root.join("data"))
    };
    let paths = cmd_synth(&opts)?;

    let full = run_pipeline(&RunConfig::new(&paths.config, root.join("run")))?;
    let mut raw_cfg = RunConfig::new(&paths.config, root.join("run-raw"));
    raw_cfg.params.skip_postprocess = true;
    let raw = run_pipeline(&raw_cfg)?;

    println!("layout:              windows={} storeys={}", opts.storeys * opts.windows, opts.storeys);
    println!("with completion:     {}", full.summary_line());
    println!("without completion:  {}", raw.summary_line());
    println!("windows per storey:  {:?}", full.metrics.windows_per_storey);
    println!("outputs in {}", root.join("run").display());
    Ok(())
}
