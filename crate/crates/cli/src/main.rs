//! `pedsim`: simulate scenarios, synthesize detections, track and evaluate.
//!
//! Exit status is 0 on success, 1 for invalid input or configuration and 2
//! for file-system failures.

mod commands;
mod manifest;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "pedsim",
    version,
    about = "Pedestrian scenario simulation, ground truth and MOT evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write one annotation JSON per camera.
    Simulate(SimulateArgs),
    /// Turn annotations into synthetic detections (MOT text).
    Detect(DetectArgs),
    /// Link detections into tracks (MOT text).
    Track(TrackArgs),
    /// Score tracks against annotations.
    Eval(EvalArgs),
    /// Simulate, detect, track and evaluate every camera of a scenario.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario file.
    scenario: PathBuf,
    /// Output directory, created if missing.
    out_dir: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, env = "PEDSIM_SEED")]
    seed: Option<u64>,
    /// Also write per-frame instance masks (PGM).
    #[arg(long)]
    masks: bool,
    /// Mask raster is the camera resolution divided by this.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    mask_divisor: u32,
    /// Also write the raw simulation trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Annotation JSON.
    annotations: PathBuf,
    /// Profile name (clear, fog-light, fog, fog-dense, night) or a profile
    /// file with a `[degradation]` table.
    #[arg(long, default_value = "clear")]
    profile: String,
    /// Detector seed; defaults to the seed recorded in the annotations.
    #[arg(long, env = "PEDSIM_SEED")]
    seed: Option<u64>,
    /// Output file; stdout if omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum TrackerKind {
    Iou,
    Kalman,
}

#[derive(Debug, Clone, Args)]
struct TrackerFlags {
    #[arg(long, value_enum, default_value_t = TrackerKind::Kalman)]
    tracker: TrackerKind,
    /// Association IoU gate [default: 0.3].
    #[arg(long)]
    iou_min: Option<f64>,
    /// Frames a track survives without a match [default: iou 10, kalman 30].
    #[arg(long)]
    max_age: Option<u32>,
    /// Consecutive matches before a track is reported [default: iou 2, kalman 3].
    #[arg(long)]
    min_hits: Option<u32>,
    /// Kalman process noise scale.
    #[arg(long, default_value_t = 1.0)]
    process_noise: f64,
    /// Kalman measurement noise scale.
    #[arg(long, default_value_t = 1.0)]
    measurement_noise: f64,
    /// Kalman: report predicted boxes on missed frames.
    #[arg(long)]
    emit_predictions: bool,
}

#[derive(Debug, Args)]
struct TrackArgs {
    /// Detections (MOT text).
    detections: PathBuf,
    #[command(flatten)]
    tracker: TrackerFlags,
    /// Output file; stdout if omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct EvalFlags {
    /// Match IoU threshold, in (0, 1].
    #[arg(long = "iou", default_value_t = 0.5)]
    iou_threshold: f64,
    /// Ignore ground truth less visible than this, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    visibility_floor: f64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Annotation JSON (ground truth).
    annotations: PathBuf,
    /// Tracks (MOT text).
    tracks: PathBuf,
    #[command(flatten)]
    eval: EvalFlags,
    /// Write the JSON report here instead of printing it.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Scenario file; not needed with --manifest.
    #[arg(required_unless_present = "manifest")]
    scenario: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, short)]
    out_dir: PathBuf,
    /// Re-run exactly what an earlier manifest records.
    #[arg(long, conflicts_with = "scenario")]
    manifest: Option<PathBuf>,
    /// Profile name, `scenario` for the scenario's own degradation, or a
    /// profile file.
    #[arg(long, default_value = "scenario")]
    profile: String,
    #[arg(long, env = "PEDSIM_SEED")]
    seed: Option<u64>,
    #[command(flatten)]
    tracker: TrackerFlags,
    #[command(flatten)]
    eval: EvalFlags,
}

fn main() -> ExitCode {
    // usage errors are user errors (exit 1), not clap's default 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Detect(a) => commands::detect(a),
        Command::Track(a) => commands::track(a),
        Command::Eval(a) => commands::eval(a),
        Command::Pipeline(a) => commands::pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
