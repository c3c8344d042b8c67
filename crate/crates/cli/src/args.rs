//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pldos", version, about = "Spontaneous emission of a two-level emitter in structured dielectrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output file; standard output when absent.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for the compute kernels (0 = all cores). Never affects results.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Add the non-resonant Lamb-shift term to delta.
    #[arg(long, global = true)]
    pub include_nonresonant: bool,
    /// Relative residual of the iterative solver [1e-14, 1e-3]; overrides PLDOS_SOLVER_TOL.
    #[arg(long, global = true)]
    pub solver_tol: Option<f64>,
    /// Convergence tolerance of the Bromwich quadrature [1e-8, 1e-1]; overrides PLDOS_QUAD_TOL.
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// Upper frequency of the Lamb-shift integrals, in units of omega0 (> 10).
    #[arg(long, global = true, default_value_t = 20.0)]
    pub lamb_cutoff: f64,
    /// Quadrature nodes of the Lamb-shift integrals [64, 1e6].
    #[arg(long, global = true, default_value_t = 4000)]
    pub lamb_points: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// LDOS on a grid of positions at a fixed frequency.
    LdosMap(LdosMapArgs),
    /// Decay rate, Lamb shift and optionally the amplitude S(t).
    Decay(DecayArgs),
    /// Optical Bloch trajectory and steady state under the scene's drive.
    Bloch(BlochArgs),
    /// Total field of a scattered plane wave on a grid.
    Scatter(ScatterArgs),
    /// Runs the built-in acceptance suite and checks the given scenes.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// x samples as `start,stop,n`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0,1")]
    pub x: String,
    /// y samples as `start,stop,n`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0,1")]
    pub y: String,
    /// z samples as `start,stop,n`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0,1")]
    pub z: String,
}

#[derive(Debug, Clone, Args)]
pub struct LdosMapArgs {
    pub scene: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Frequency; defaults to the emitter's omega0.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Projection direction `x,y,z`; defaults to the emitter dipole, else z.
    #[arg(long, allow_hyphen_values = true)]
    pub orientation: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DecayArgs {
    pub scene: PathBuf,
    /// Also write S(t) to this file.
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Add the numerically inverted amplitude to the series.
    #[arg(long, requires = "series")]
    pub numeric: bool,
    /// End of the series; defaults to 5/Gamma.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of series samples.
    #[arg(long, default_value_t = 201)]
    pub t_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RatesAt {
    /// Gamma' and delta' evaluated at the laser frequency.
    Laser,
    /// Gamma and delta at the transition frequency.
    Transition,
}

#[derive(Debug, Clone, Args)]
pub struct BlochArgs {
    pub scene: PathBuf,
    #[arg(long, value_enum, default_value_t = RatesAt::Laser)]
    pub rates_at: RatesAt,
    /// RK4 step; defaults to 0.05 / (largest rate).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Integration time; defaults to 30 / Gamma'.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Write every n-th step.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ScatterArgs {
    pub scene: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Wave vector `kx,ky,kz`.
    #[arg(long, allow_hyphen_values = true)]
    pub k: String,
    /// Real unit polarization `px,py,pz`, orthogonal to k.
    #[arg(long, allow_hyphen_values = true)]
    pub pol: String,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Scene files to sanity-check in addition to the built-in suite.
    pub scenes: Vec<PathBuf>,
}
