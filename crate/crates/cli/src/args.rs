use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Transmission spectra, residue maps and oracle checks for a pair of
/// vacuum-coupled two-level emitters. Every flag can also be set through the
/// environment variable shown in its help.
#[derive(Debug, Parser)]
#[command(name = "collres", version, about)]
pub struct Cli {
    /// JSON system and pulse description; the reference A/B pair with a flat
    /// phase when absent. Ignored by `presets`.
    #[arg(long, global = true, env = "COLLRES_CONFIG")]
    pub config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, env = "COLLRES_OUT", default_value = "out")]
    pub out: PathBuf,

    /// Divide every written signal by the largest |value| of its file.
    #[arg(long, global = true, env = "COLLRES_NORMALIZE")]
    pub normalize: bool,

    /// Broadband grid step of 1D scans, cm^-1.
    #[arg(long, global = true, env = "COLLRES_GRID_STEP", default_value_t = 5.0)]
    pub grid_step: f64,

    /// Worker threads; all cores when absent.
    #[arg(long, global = true, env = "COLLRES_JOBS")]
    pub jobs: Option<usize>,

    /// Largest relative oracle difference accepted by `oracle-check`.
    #[arg(long, global = true, env = "COLLRES_TOLERANCE", default_value_t = 1e-4)]
    pub tolerance: f64,

    /// Also write SVG plots next to the CSV files.
    #[arg(long, global = true, env = "COLLRES_SVG")]
    pub svg: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Signal against the broadband frequency at fixed narrowband frequency.
    Scan1d(Scan1dArgs),
    /// Signal over a grid of broadband and narrowband frequencies.
    Scan2d(Scan2dArgs),
    /// Chirp residue `S(C2) - S(-C2)` over the two-photon or Raman grid.
    ResidueMap(ResidueArgs),
    /// One 1D scan per interatomic distance.
    DistanceSweep(SweepArgs),
    /// Closed-form signal against direct quadrature at random points.
    OracleCheck(OracleArgs),
    /// Parameter sets of the reference figures.
    Presets(PresetArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Part {
    Total,
    #[value(name = "s-i")]
    SI,
    #[value(name = "s-ii")]
    SII,
}

#[derive(Debug, Args)]
pub struct Span {
    /// Lowest broadband frequency, cm^-1.
    #[arg(long, default_value_t = 1000.0)]
    pub from: f64,
    /// Highest broadband frequency, cm^-1.
    #[arg(long, default_value_t = 27000.0)]
    pub to: f64,
}

#[derive(Debug, Args)]
pub struct Scan1dArgs {
    #[command(flatten)]
    pub span: Span,
    /// Narrowband frequency, cm^-1; the configured one when absent.
    #[arg(long)]
    pub omega_p: Option<f64>,
    /// Signal parts to evaluate.
    #[arg(long, value_enum, default_value_t = Part::Total)]
    pub part: Part,
}

#[derive(Debug, Args)]
pub struct Scan2dArgs {
    #[command(flatten)]
    pub span: Span,
    #[arg(long, default_value_t = 1000.0)]
    pub pump_from: f64,
    #[arg(long, default_value_t = 16000.0)]
    pub pump_to: f64,
    /// Points along each axis.
    #[arg(long, default_value_t = 300)]
    pub points: usize,
    /// Quantity written as `value`.
    #[arg(long, value_enum, default_value_t = Part::Total)]
    pub part: Part,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rows {
    /// Rows at constant `w + w_p`: two-photon lines are horizontal.
    Sum,
    /// Rows at constant `w - w_p`: Raman lines are horizontal.
    Difference,
}

#[derive(Debug, Args)]
pub struct ResidueArgs {
    #[arg(long, value_enum, default_value_t = Rows::Sum)]
    pub rows: Rows,
    /// Chirp rate, (cm^-1)^-2; the configured chirp or 5e-9 when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<f64>,
    /// Points along each axis.
    #[arg(long, default_value_t = 300)]
    pub points: usize,
    /// Quantity written as `value`.
    #[arg(long, value_enum, default_value_t = Part::Total)]
    pub part: Part,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub span: Span,
    /// Distances as fractions of `lambda_a = 1 / w_a`.
    #[arg(long, value_delimiter = ',', default_values_t = collres::setups::DISTANCES)]
    pub r_over_lambda: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Number of random `(w, w_p)` points.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Signal parts compared.
    #[arg(long, value_enum, default_value_t = Part::Total)]
    pub part: Part,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Flat phases 0, pi/2, pi, 3pi/2.
    #[value(name = "fig4-row1")]
    Fig4Row1,
    /// Delays 17, 33, 330 and 3300 fs.
    #[value(name = "fig4-row2")]
    Fig4Row2,
    /// Chirps 5e-9 to 5e-8 (cm^-1)^-2 and the negative 5e-8.
    #[value(name = "fig4-row3")]
    Fig4Row3,
    /// Residue maps of the A/B, A/A and B/B pairs.
    Fig5,
    /// Full signal at four interatomic distances.
    Fig6,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    #[arg(value_enum)]
    pub name: Preset,
    /// Points along each axis of 2D maps.
    #[arg(long, default_value_t = 300)]
    pub points: usize,
}
