use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "topophase", version, about = "Aharonov-Bohm family phases, loop integrals and ring path integrals")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalArgs {
    /// Unit system for hbar and c.
    #[arg(long, global = true, value_enum)]
    pub units: Option<UnitSystem>,
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    Natural,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form AB, scalar AB, AC and scalar AC phases.
    Phase {
        #[arg(value_enum)]
        kind: PhaseKind,
        #[command(flatten)]
        args: PhaseArgs,
    },
    /// Discretized loop integral of a source's gauge potential.
    Loop(LoopArgs),
    /// Two-body interaction identities on seeded random configurations.
    Equiv(EquivArgs),
    /// Clifford relations, spin-matrix scan and Dirac equivalence.
    Gamma(GammaArgs),
    /// Ring path integral by winding number.
    Ring(RingArgs),
    /// Field map of a source on a grid, as CSV.
    Field(FieldArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Ab,
    Sab,
    Ac,
    Sac,
}

impl PhaseKind {
    pub fn name(self) -> &'static str {
        match self {
            PhaseKind::Ab => "ab",
            PhaseKind::Sab => "sab",
            PhaseKind::Ac => "ac",
            PhaseKind::Sac => "sac",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseArgs {
    /// Charge.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Enclosed magnetic flux.
    #[arg(long, allow_negative_numbers = true)]
    pub flux: Option<f64>,
    /// Magnetic moment.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Linear charge density of the wire.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// CSV `t,value` with the potential or field difference.
    #[arg(long)]
    pub series: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    #[default]
    Midpoint,
    Simpson,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopArgs {
    /// CSV `t,x,y,z` of a closed path.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// TOML source spec with a `kind` key.
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub rule: Option<Rule>,
    /// Charge carried around a flux source.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Moment carried around a charged wire.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Spin eigenvalue along the wire, +1 or -1.
    #[arg(long, allow_negative_numbers = true)]
    pub spin: Option<f64>,
    /// Allowed deviation from the closed form.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivArgs {
    #[arg(long)]
    pub trials: Option<usize>,
    /// Only configurations with both particles at rest.
    #[arg(long = "static")]
    pub at_rest: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaArgs {
    /// Random planar field configurations for the Dirac check.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteChoice {
    Spectral,
    Covering,
    Both,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RingArgs {
    /// `m R^2 / hbar eps`; selects the dimensionless model.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Flux phase per winding of the dipole.
    #[arg(long, allow_negative_numbers = true)]
    pub phi1: Option<f64>,
    /// Number of time steps M.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z_m: Option<f64>,
    /// Total time T; selects the physical model.
    #[arg(long)]
    pub time: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Replace the dipole by a thin magnet.
    #[arg(long)]
    pub solenoid: bool,
    /// Flux phase of the magnet, `q Phi / hbar c`.
    #[arg(long, allow_negative_numbers = true)]
    pub phi_ab: Option<f64>,
    /// Magnet flux in the physical model.
    #[arg(long, allow_negative_numbers = true)]
    pub flux: Option<f64>,
    #[arg(long)]
    pub magnet_radius: Option<f64>,
    /// Per-winding phase of a line of dipoles along the axis.
    #[arg(long)]
    pub dipole_line: bool,
    /// Linear dipole density of the line.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub density: Option<f64>,
    /// Use `theta` in place of `sin theta` in the flux term.
    #[arg(long)]
    pub linearized: bool,
    #[arg(long, value_enum)]
    pub route: Option<RouteChoice>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// `phi1=a:b:points` or `phi_ab=a:b:points`.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Allowed relative disagreement between routes.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldArgs {
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Lower grid corner `x,y,z`.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub lo: Option<Vec<f64>>,
    /// Upper grid corner `x,y,z`.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub hi: Option<Vec<f64>>,
    /// Points per axis `nx,ny,nz`.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
}
