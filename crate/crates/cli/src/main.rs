use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use omnipl_cli::{run, ConfigSource, Mode, RunOptions};

/// Omni-directional pathloss from rotated directional-antenna sweeps.
#[derive(Debug, Parser)]
#[command(name = "omnipl", version)]
struct Args {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario (los_8m, los_14m, ..., nlos_33_4m, single_path, co_delay_pair).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; must be empty unless --force.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "simulate")]
    mode: Mode,
    /// Sweep directory with `vaa/` and `dss/` subfolders of `angle_<i>.csv`.
    #[arg(long, required_if_eq("mode", "ingest"))]
    sweeps: Option<PathBuf>,
    /// Overwrite files in a non-empty output directory.
    #[arg(long)]
    force: bool,
    /// Noise seed, overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Zero-padding factor of the delay transform, overrides the config.
    #[arg(long)]
    zero_pad: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the sweeps used under `<out>/sweeps/`.
    #[arg(long)]
    export_sweeps: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let config = match (args.config, args.preset) {
        (Some(path), _) => ConfigSource::File(path),
        (None, Some(name)) => ConfigSource::Preset(name),
        (None, None) => unreachable!("clap requires one of --config/--preset"),
    };
    let opts = RunOptions {
        config,
        out_dir: args.out,
        mode: args.mode,
        sweeps: args.sweeps,
        force: args.force,
        seed: args.seed,
        zero_pad: args.zero_pad,
        threads: args.threads,
        export_sweeps: args.export_sweeps,
    };
    match run(&opts) {
        Ok(m) => {
            for o in &m.outputs {
                log::debug!("wrote {}", o.path);
            }
            log::info!("{} outputs written to {}", m.outputs.len() + 1, opts.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
