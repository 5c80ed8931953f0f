use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "brems", version, about = "Bremsstrahlung from two-momentum electron superpositions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Angular differential cross section dσ/dk at one photon direction.
    Adcs(AdcsArgs),
    /// Cross-section or power maps over angle and energy grids.
    Map(MapArgs),
    /// Run the seeded invariant suites.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Coherent,
    Incoherent,
    Single,
    /// Coherent and incoherent.
    Both,
}

impl ModeArg {
    pub fn modes(self) -> Vec<brems::Mode> {
        use brems::Mode;
        match self {
            ModeArg::Coherent => vec![Mode::Coherent],
            ModeArg::Incoherent => vec![Mode::Incoherent],
            ModeArg::Single => vec![Mode::Single],
            ModeArg::Both => vec![Mode::Coherent, Mode::Incoherent],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// keV-based natural units.
    Natural,
    /// Barn instead of keV⁻².
    Barn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Pgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    /// dσ/dk over (θ_k, φ_k) at fixed ω.
    Adcs,
    /// ω dσ/dk over (ω, θ_k) at fixed φ_k.
    Adp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Electron kinetic energy in keV.
    #[arg(long = "t-kev", default_value_t = 200.0)]
    pub kinetic_energy_kev: f64,
    /// Opening angle between the two momenta in degrees.
    #[arg(long = "sep-deg", default_value_t = 30.0)]
    pub separation_deg: f64,
    /// Relative phase in radians; accepts forms like `pi`, `pi/2`, `3pi/4`.
    #[arg(long, default_value = "0", value_parser = parse_phase, allow_hyphen_values = true)]
    pub xi: f64,
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    /// Gauss-Legendre order in the polar variable.
    #[arg(long, default_value_t = 64)]
    pub n_theta: usize,
    /// Trapezoid points in azimuth.
    #[arg(long, default_value_t = 128)]
    pub n_phi: usize,
    /// Relative change accepted between successive refinements.
    #[arg(long, default_value_t = 1e-5)]
    pub refine_tol: f64,
    #[arg(long, default_value_t = 4)]
    pub max_doublings: u32,
}

impl QuadArgs {
    pub fn spec(&self) -> brems::cross_section::QuadratureSpec {
        brems::cross_section::QuadratureSpec {
            n_theta: self.n_theta,
            n_phi: self.n_phi,
            refine_tol: self.refine_tol,
            max_doublings: self.max_doublings,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AdcsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long = "omega-kev", allow_negative_numbers = true)]
    pub omega_kev: f64,
    #[arg(long = "theta-deg", allow_negative_numbers = true)]
    pub theta_deg: f64,
    #[arg(long = "phi-deg", default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_deg: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Coherent)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Units::Natural)]
    pub units: Units,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// Write a JSON result file.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Record wall-clock time in the result file.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    #[arg(long, value_enum, default_value_t = MapKind::Adcs)]
    pub kind: MapKind,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Photon energy in keV: one value for adcs maps, a grid for adp maps.
    #[arg(long = "omega-kev", value_parser = parse_grid, allow_hyphen_values = true)]
    pub omega_kev: Grid,
    /// Photon polar angles in degrees; negative angles mirror across the z axis.
    #[arg(long = "theta-deg", value_parser = parse_grid, allow_hyphen_values = true)]
    pub theta_deg: Grid,
    /// Photon azimuths in degrees: a grid for adcs maps, one value for adp maps.
    #[arg(long = "phi-deg", default_value = "0", value_parser = parse_grid, allow_hyphen_values = true)]
    pub phi_deg: Grid,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Units::Natural)]
    pub units: Units,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write a 16-bit PGM heatmap next to each grid.
    #[arg(long)]
    pub heatmap: bool,
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    pub level: LevelArg,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Electron mass override in keV, for checking that the snapshot suite notices.
    #[arg(long = "electron-mass-kev")]
    pub electron_mass_kev: Option<f64>,
    /// Also write the report to this file.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// A grid given as `start:stop:n` or a comma-separated list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(text: &str) -> Result<Grid, String> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, n] = parts[..] else {
            return Err(format!("expected start:stop:n, got `{text}`"));
        };
        let start: f64 = start.trim().parse().map_err(|_| format!("bad grid start `{start}`"))?;
        let stop: f64 = stop.trim().parse().map_err(|_| format!("bad grid stop `{stop}`"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad grid count `{n}`"))?;
        if n == 0 {
            return Err("grid count must be at least 1".into());
        }
        if n == 1 {
            if start != stop {
                return Err("a one-point grid needs start == stop".into());
            }
            return Ok(Grid(vec![start]));
        }
        let step = (stop - start) / (n - 1) as f64;
        let mut values: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
        values[n - 1] = stop;
        return check_finite(values);
    }
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad grid value `{v}`")))
        .collect::<Result<Vec<_>, _>>()?;
    check_finite(values)
}

fn check_finite(values: Vec<f64>) -> Result<Grid, String> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(Grid(values))
    } else {
        Err("grid values must be finite".into())
    }
}

/// Parses a phase in radians: a plain number, or a multiple of π such as
/// `pi`, `-pi/2`, `3pi/4`, `0.5*pi`.
pub fn parse_phase(text: &str) -> Result<f64, String> {
    let t: String = text.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read phase `{text}`; use a number or a form like pi/2");
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    };
    let (head, tail) = (t[..at].trim_end_matches('*'), &t[at + 2..]);
    let coefficient = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match tail {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(bad)?,
    };
    let value = coefficient * PI / divisor;
    value.is_finite().then_some(value).ok_or_else(bad)
}
