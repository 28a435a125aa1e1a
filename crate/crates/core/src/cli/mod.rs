//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.

mod draw;
mod eval;
mod io;
mod measure;
mod synth;
mod track;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::Error;

pub use draw::{palette, Canvas, PALETTE};
pub use io::{list_frames, read_mask, read_rgb, RunManifest};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 2;
    /// No vessel near the requested point, or the data cannot be measured.
    pub const DOMAIN: i32 = 3;
    pub const TRACKING_LOST: i32 = 4;
    pub const USAGE: i32 = 64;
    pub const CONFIG: i32 = 65;
}

/// A failed run: exit code plus the message printed to stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: exit::USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } | Error::Decode { .. } => exit::IO,
            Error::TrackingLost { .. } => exit::TRACKING_LOST,
            Error::TooShort { .. } | Error::OutOfRange { .. } => exit::USAGE,
            Error::Validation { .. } | Error::Parse { .. } | Error::InvalidParameter { .. } | Error::Shape(..) => {
                exit::CONFIG
            }
            Error::NoVessel { .. }
            | Error::LowContrast
            | Error::DegeneratePath(_)
            | Error::InsufficientPulsation
            | Error::UndefinedMetric(_)
            | Error::TooFewPoints(_) => exit::DOMAIN,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult<T = ()> = std::result::Result<T, Failure>;

#[derive(Debug, Parser)]
#[command(name = "fundus-pulse", version, about = "Retinal vessel segmentation, caliber and pulsation analysis")]
struct Cli {
    /// Settings file (`[section]` headers with `key = value` lines).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment vessels and label centerline segments.
    Segment(SegmentArgs),
    /// Measure the width of one vessel along its centerline.
    Measure(MeasureArgs),
    /// Follow vessels through a frame sequence and estimate heart rate.
    Track(TrackArgs),
    /// Score segmentation or width estimates against ground truth.
    Eval(EvalArgs),
    /// Render a synthetic scene with exact ground truth.
    Synth(SynthArgs),
}

/// Pixel coordinate given as `x,y`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got `{s}`"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
    Ok(Point { x: num(x)?, y: num(y)? })
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SegmentArgs {
    /// Fundus image (PNG, PPM, BMP, GIF or TIFF; 8-bit).
    pub input: PathBuf,
    /// Output directory.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Also write every intermediate stage under `stages/`.
    #[arg(long)]
    pub debug: bool,
}

#[derive(Debug, Args, serde::Serialize)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["at", "segment"])))]
pub struct MeasureArgs {
    pub input: PathBuf,
    /// Measure the segment nearest to this point.
    #[arg(long, value_parser = parse_point, value_name = "X,Y")]
    pub at: Option<Point>,
    /// Measure the segment with this id (see `segments.csv` from `segment`).
    #[arg(long, value_name = "ID")]
    pub segment: Option<usize>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct TrackArgs {
    /// Directory of frames or a glob pattern; file-name order is time order.
    pub frames: String,
    /// Vessel to follow; repeat to follow several.
    #[arg(long, value_parser = parse_point, value_name = "X,Y", required = true)]
    pub at: Vec<Point>,
    /// Frame rate; overrides the configured value.
    #[arg(long)]
    pub fps: Option<f64>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
#[command(group(clap::ArgGroup::new("dataset").required(true).args(["drive", "review"])))]
pub struct EvalArgs {
    /// Segmentation dataset root with `images/`, `1st_manual/` and optional `mask/`.
    #[arg(long, value_name = "DIR")]
    pub drive: Option<PathBuf>,
    /// Width annotations CSV (`image,segment,point,cx,cy,width`).
    #[arg(long, value_name = "CSV")]
    pub review: Option<PathBuf>,
    /// Where the annotated images live; defaults to the CSV's directory.
    #[arg(long, value_name = "DIR", requires = "review")]
    pub images: Option<PathBuf>,
    /// Score these masks (`<image stem>.png`) instead of running segmentation.
    #[arg(long, value_name = "DIR", requires = "drive")]
    pub predictions: Option<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SynthArgs {
    /// Scene description file.
    pub scene: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Noise seed; overrides the scene's own.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn load_config(path: Option<&Path>) -> CliResult<(RunConfig, Vec<PathBuf>)> {
    match path {
        Some(p) => Ok((RunConfig::load(p)?, vec![p.to_path_buf()])),
        None => Ok((RunConfig::default(), Vec::new())),
    }
}

fn dispatch(cli: Cli) -> CliResult {
    let (cfg, cfg_inputs) = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Segment(a) => measure::segment(a, &cfg, cfg_inputs),
        Command::Measure(a) => measure::measure(a, &cfg, cfg_inputs),
        Command::Track(a) => track::track(a, &cfg, cfg_inputs),
        Command::Eval(a) => eval::eval(a, &cfg, cfg_inputs),
        Command::Synth(a) => synth::synth(a, &cfg, cfg_inputs),
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit code. Diagnostics go to stderr; summaries go to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => exit::OK,
                _ => exit::USAGE,
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => exit::OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
