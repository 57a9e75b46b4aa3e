//! `gaussflow`: measure, verify and generate from the command line.
//!
//! Exit codes: 0 ok, 2 bad input, 3 numeric failure, 4 inequality violated.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "gaussflow", version, about = "Gaussian area, entropy and density bounds for translators and their boundaries")]
pub struct Cli {
    /// TOML run configuration (seed, tolerances, flow runs).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized optimizer starts; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report or mesh here instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Gaussian area Φ_d of a mesh at the standard window.
    PhiArea(MeshArg),
    /// Entropy: supremum of the Gaussian area over translations and dilations.
    Entropy(MeshArg),
    /// Maximal density ratio over all balls.
    Mdr(MeshArg),
    /// Maximal cone density over all translates.
    Mcd(MeshArg),
    /// Density of the cone over the mesh shifted by -SHIFT.
    ConeDensity {
        #[command(flatten)]
        mesh: MeshArg,
        /// Comma-separated shift vector.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        shift: Vec<f64>,
    },
    /// Check an inequality and report every term.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Write a generated mesh in SMF format.
    Generate {
        shape: Shape,
        #[command(flatten)]
        params: ShapeParams,
    },
}

#[derive(Args, Debug)]
pub struct MeshArg {
    /// Mesh file in SMF format.
    pub mesh: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// entropy(M) ≤ Σ (entropy(Σ_k) + mcd(Σ_k)) for a translator M.
    TranslatorBound(SourceArgs),
    /// Gaussian area of the translator sweep of Σ against entropy + mcd.
    SweepBound {
        #[command(flatten)]
        source: SourceArgs,
        /// Height offset of the sweep; the speed is --v.
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
    },
    /// Gaussian slicing inequality for a surface.
    Slicing(SourceArgs),
    /// Difference-form monotonicity along a curve shortening flow run.
    Monotonicity,
}

#[derive(Args, Debug)]
pub struct SourceArgs {
    /// Read the object from an SMF file.
    #[arg(long, conflicts_with = "gen")]
    pub mesh: Option<PathBuf>,
    /// Generate the object instead.
    #[arg(long)]
    pub gen: Option<Shape>,
    #[command(flatten)]
    pub params: ShapeParams,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    GrimReaper,
    BowlCap,
    Circle,
    Polygon,
    Square,
    TwoPoints,
    Sphere,
    Torus,
}

#[derive(Args, Debug, Clone)]
pub struct ShapeParams {
    /// Translation speed.
    #[arg(long = "v", id = "shape_v", default_value_t = 1.0)]
    pub speed: f64,
    /// Grim reaper cut height.
    #[arg(long, default_value_t = 2.0)]
    pub ycut: f64,
    /// Bowl cap radius.
    #[arg(long, default_value_t = 3.0)]
    pub rmax: f64,
    /// Bowl dimension m.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Resolution: samples for the grim reaper, angular points for the bowl cap.
    #[arg(long)]
    pub res: Option<usize>,
    /// Radius of circles and spheres, minor radius of tori.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Segments of a circle or major grid of a torus.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Torus major radius.
    #[arg(long, default_value_t = 2.0)]
    pub big: f64,
    /// Octahedral subdivision level of a sphere.
    #[arg(long, default_value_t = 16)]
    pub level: usize,
    /// Separation of two points.
    #[arg(long, default_value_t = 2.0)]
    pub sep: f64,
    /// Ambient dimension of two points.
    #[arg(long, default_value_t = 1)]
    pub ambient: usize,
    /// Square side.
    #[arg(long, default_value_t = 2.0)]
    pub side: f64,
    /// Polygon vertices as "x,y;x,y;...".
    #[arg(long, allow_hyphen_values = true)]
    pub vertices: Option<String>,
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("GAUSSFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::BadInput(format!("GAUSSFLOW_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Numeric(format!("cannot build thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gaussflow: {e}");
            e.exit_code()
        }
    }
}
