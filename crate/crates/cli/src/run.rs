use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use brems::amplitude::AmplitudeError;
use brems::cross_section::{adcs_components, CrossSectionError, DifferentialCrossSection, QuadratureSpec};
use brems::kinematics::{superposition_geometry, KinematicsError};
use brems::spectrum::{adcs_component_map, adp_component_map, peak_curve, EmissionGrid, PeakCurve, SpectrumError};
use brems::validate::{self, Level, ValidationOptions};
use brems::{Interaction, Mode, PhotonSpec, PhysicalConstants, SuperpositionConfig};

use crate::args::{AdcsArgs, Cli, Command, Format, LevelArg, MapArgs, MapKind, ModeArg, SourceArgs, Units, ValidateArgs};
use crate::output::{grid_csv, grid_pgm, peaks_csv, with_suffix, write_atomic};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_KINEMATICS: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Kinematics(String),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Kinematics(_) => EXIT_KINEMATICS,
            CliError::Numerical(_) => EXIT_CONVERGENCE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

impl From<KinematicsError> for CliError {
    fn from(e: KinematicsError) -> Self {
        match e {
            KinematicsError::KinematicallyForbidden { .. } => CliError::Kinematics(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CrossSectionError> for CliError {
    fn from(e: CrossSectionError) -> Self {
        match e {
            CrossSectionError::Kinematics(k) | CrossSectionError::Amplitude(AmplitudeError::Kinematics(k)) => k.into(),
            CrossSectionError::InvalidQuadrature(_) => CliError::Usage(e.to_string()),
            CrossSectionError::Amplitude(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::CrossSection(c) => c.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Everything needed to repeat a computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub kind: Option<MapKind>,
    pub kinetic_energy_kev: f64,
    pub separation_deg: f64,
    pub xi_rad: f64,
    pub mode: ModeArg,
    pub omega_kev: Vec<f64>,
    pub theta_deg: Vec<f64>,
    pub phi_deg: Vec<f64>,
    pub quadrature: QuadratureSpec,
    pub units: Units,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope<T> {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub constants: PhysicalConstants,
    pub result: T,
    /// Only present when requested, so repeated runs stay byte-identical.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub unit: String,
    pub values: Vec<DifferentialCrossSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapResult {
    pub grids: Vec<EmissionGrid>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub peaks: Option<PeakCurve>,
}

/// Runs a parsed command, writing human-readable output to `out`.
/// Returns the exit code for completed runs.
pub fn run(cli: Cli, out: &mut String) -> Result<i32, CliError> {
    match cli.command {
        Command::Adcs(a) => cmd_adcs(&a, out),
        Command::Map(m) => cmd_map(&m, out),
        Command::Validate(v) => cmd_validate(&v, out),
    }
}

fn source_config(s: &SourceArgs, constants: &PhysicalConstants) -> Result<SuperpositionConfig, CliError> {
    if !(s.kinetic_energy_kev > 0.0 && s.kinetic_energy_kev.is_finite()) {
        return Err(CliError::Usage(format!(
            "--t-kev must be a positive number of keV, got {}",
            s.kinetic_energy_kev
        )));
    }
    if !(0.0..=180.0).contains(&s.separation_deg) {
        return Err(CliError::Usage(format!(
            "--sep-deg must lie in [0, 180], got {}",
            s.separation_deg
        )));
    }
    Ok(superposition_geometry(s.kinetic_energy_kev, s.separation_deg.to_radians(), constants)?.with_xi(s.xi))
}

fn check_quadrature(q: &QuadratureSpec) -> Result<(), CliError> {
    q.validate().map_err(|e| CliError::Usage(e.to_string()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn point_unit(units: Units) -> &'static str {
    match units {
        Units::Natural => "keV^-3 sr^-1",
        Units::Barn => "b keV^-1 sr^-1",
    }
}

fn cmd_adcs(a: &AdcsArgs, out: &mut String) -> Result<i32, CliError> {
    let started = Instant::now();
    let it = Interaction::default();
    let quad = a.quad.spec();
    check_quadrature(&quad)?;
    let cfg = source_config(&a.source, &it.constants)?;
    if !(0.0..=180.0).contains(&a.theta_deg) {
        return Err(CliError::Usage(format!("--theta-deg must lie in [0, 180], got {}", a.theta_deg)));
    }
    let photon = PhotonSpec::new(a.omega_kev, a.theta_deg.to_radians(), a.phi_deg.to_radians())?;
    let components = adcs_components(&cfg.into(), &photon, &quad, &it)?;
    let values: Vec<DifferentialCrossSection> = a
        .mode
        .modes()
        .into_iter()
        .map(|m| {
            let v = components.value(m);
            match a.units {
                Units::Natural => v,
                Units::Barn => v.in_barn(it.constants.hbar_c_sq_barn),
            }
        })
        .collect();
    let unit = point_unit(a.units);
    for v in &values {
        let _ = writeln!(
            out,
            "{:<10} {:e} {unit}  error={:.3e} converged={} n_theta={} n_phi={} near_singular={}",
            v.mode.name(),
            v.value,
            v.error_estimate,
            v.converged,
            v.n_theta,
            v.n_phi,
            v.near_singular
        );
    }
    if let Some(path) = &a.output {
        let envelope = ResultEnvelope {
            tool: "brems".into(),
            version: VERSION.into(),
            config: RunConfig {
                command: "adcs".into(),
                kind: None,
                kinetic_energy_kev: a.source.kinetic_energy_kev,
                separation_deg: a.source.separation_deg,
                xi_rad: a.source.xi,
                mode: a.mode,
                omega_kev: vec![a.omega_kev],
                theta_deg: vec![a.theta_deg],
                phi_deg: vec![a.phi_deg],
                quadrature: quad,
                units: a.units,
                format: Some(Format::Json),
            },
            constants: it.constants,
            result: PointResult {
                unit: unit.into(),
                values: values.clone(),
            },
            elapsed_ms: a.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
        };
        write_file(path, to_json(&envelope).as_bytes())?;
    }
    eprintln!("elapsed {:.1} ms", started.elapsed().as_secs_f64() * 1e3);
    if values.iter().all(|v| v.converged) {
        Ok(EXIT_OK)
    } else {
        eprintln!("warning: quadrature did not reach the requested tolerance");
        Ok(EXIT_CONVERGENCE)
    }
}

fn single_value(values: &[f64], flag: &str, kind: &str) -> Result<f64, CliError> {
    match values {
        [v] => Ok(*v),
        _ => Err(CliError::Usage(format!("{flag} takes a single value for --kind {kind} maps"))),
    }
}

fn cmd_map(m: &MapArgs, out: &mut String) -> Result<i32, CliError> {
    let started = Instant::now();
    let it = Interaction::default();
    let quad = m.quad.spec();
    check_quadrature(&quad)?;
    let cfg = source_config(&m.source, &it.constants)?;
    let thetas: Vec<f64> = m.theta_deg.0.iter().map(|d| d.to_radians()).collect();
    let components = match m.kind {
        MapKind::Adcs => {
            let omega = single_value(&m.omega_kev.0, "--omega-kev", "adcs")?;
            let phis: Vec<f64> = m.phi_deg.0.iter().map(|d| d.to_radians()).collect();
            adcs_component_map(&cfg, omega, &thetas, &phis, &quad, &it)?
        }
        MapKind::Adp => {
            let phi = single_value(&m.phi_deg.0, "--phi-deg", "adp")?;
            adp_component_map(&cfg, &m.omega_kev.0, &thetas, phi.to_radians(), &quad, &it)?
        }
    };
    let grids: Vec<EmissionGrid> = m
        .mode
        .modes()
        .into_iter()
        .map(|mode| {
            let g = components.project(mode, None);
            match m.units {
                Units::Natural => g,
                Units::Barn => {
                    let mut g = g.scaled(it.constants.hbar_c_sq_barn);
                    g.metadata.unit = match m.kind {
                        MapKind::Adcs => "b keV^-1 sr^-1".into(),
                        MapKind::Adp => "b sr^-1".into(),
                    };
                    g
                }
            }
        })
        .collect();
    let peaks = match (m.kind, grids.as_slice()) {
        (MapKind::Adp, [coherent, incoherent]) => Some(peak_curve(coherent, incoherent)?),
        _ => None,
    };

    let config = RunConfig {
        command: "map".into(),
        kind: Some(m.kind),
        kinetic_energy_kev: m.source.kinetic_energy_kev,
        separation_deg: m.source.separation_deg,
        xi_rad: m.source.xi,
        mode: m.mode,
        omega_kev: m.omega_kev.0.clone(),
        theta_deg: m.theta_deg.0.clone(),
        phi_deg: m.phi_deg.0.clone(),
        quadrature: quad,
        units: m.units,
        format: Some(m.format),
    };
    let header = vec![
        format!("brems {VERSION} map --kind {}", kind_name(m.kind)),
        format!("config: {}", serde_json::to_string(&config).expect("serializable")),
        format!("constants: {}", serde_json::to_string(&it.constants).expect("serializable")),
    ];

    let mut written = Vec::new();
    let several = grids.len() > 1;
    let grid_path = |mode: Mode, ext: &str| {
        if several {
            with_suffix(&m.output, mode.name(), ext)
        } else {
            m.output.clone()
        }
    };
    match m.format {
        Format::Json => {
            let envelope = ResultEnvelope {
                tool: "brems".into(),
                version: VERSION.into(),
                config: config.clone(),
                constants: it.constants,
                result: MapResult {
                    grids: grids.clone(),
                    peaks: peaks.clone(),
                },
                elapsed_ms: m.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
            };
            write_file(&m.output, to_json(&envelope).as_bytes())?;
            written.push(m.output.clone());
        }
        Format::Csv => {
            for g in &grids {
                let path = grid_path(g.metadata.mode, "csv");
                write_file(&path, grid_csv(g, &header).as_bytes())?;
                written.push(path);
            }
            if let Some(p) = &peaks {
                let path = with_suffix(&m.output, "peaks", "csv");
                write_file(&path, peaks_csv(p, &header).as_bytes())?;
                written.push(path);
            }
        }
        Format::Pgm => {
            for g in &grids {
                let path = grid_path(g.metadata.mode, "pgm");
                write_file(&path, &grid_pgm(g, &heat_label(m, g)))?;
                written.push(path);
            }
            if let Some(p) = &peaks {
                let path = with_suffix(&m.output, "peaks", "csv");
                write_file(&path, peaks_csv(p, &header).as_bytes())?;
                written.push(path);
            }
        }
    }
    if m.heatmap && m.format != Format::Pgm {
        for g in &grids {
            let path = with_suffix(&m.output, g.metadata.mode.name(), "pgm");
            write_file(&path, &grid_pgm(g, &heat_label(m, g)))?;
            written.push(path);
        }
    }

    let unconverged: usize = grids.iter().map(|g| g.metadata.unconverged).sum();
    for g in &grids {
        let (rows, cols) = g.shape();
        let _ = writeln!(
            out,
            "{:<10} {rows}x{cols} {}  missing={} unconverged={} near_singular={}",
            g.metadata.mode.name(),
            g.metadata.unit,
            g.metadata.missing,
            g.metadata.unconverged,
            g.metadata.near_singular
        );
    }
    if let Some(p) = &peaks {
        if let Some(sep) = p.max_separation() {
            let _ = writeln!(out, "peak separation max {:.4} deg", sep.to_degrees());
        }
    }
    for path in &written {
        let _ = writeln!(out, "wrote {}", path.display());
    }
    eprintln!("elapsed {:.1} ms", started.elapsed().as_secs_f64() * 1e3);
    if unconverged > 0 {
        eprintln!("warning: {unconverged} grid cells did not reach the requested tolerance");
        return Ok(EXIT_CONVERGENCE);
    }
    Ok(EXIT_OK)
}

fn kind_name(kind: MapKind) -> &'static str {
    match kind {
        MapKind::Adcs => "adcs",
        MapKind::Adp => "adp",
    }
}

fn heat_label(m: &MapArgs, g: &EmissionGrid) -> String {
    format!(
        "brems {} {} rows={} cols={}",
        kind_name(m.kind),
        g.metadata.mode.name(),
        g.axis_1.name,
        g.axis_2.name
    )
}

fn cmd_validate(v: &ValidateArgs, out: &mut String) -> Result<i32, CliError> {
    let level = match v.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let mut options = ValidationOptions::new(level, v.seed);
    if let Some(mass) = v.electron_mass_kev {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(CliError::Usage(format!("--electron-mass-kev must be positive, got {mass}")));
        }
        options.constants = options.constants.with_electron_mass(mass);
    }
    let started = Instant::now();
    let report = validate::run(&options);
    let text = report.render();
    out.push_str(&text);
    if let Some(path) = &v.output {
        write_file(path, text.as_bytes())?;
    }
    eprintln!("elapsed {:.2} s", started.elapsed().as_secs_f64());
    Ok(if report.passed() { EXIT_OK } else { EXIT_VALIDATION })
}
