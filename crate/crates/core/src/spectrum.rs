//! Parameter sweeps over photon angle and energy, peak tracking, and
//! angular widths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::{Interaction, Mode};
use crate::cross_section::{adcs_components, AdcsComponents, CrossSectionError, QuadratureSpec};
use crate::kinematics::{PhotonSpec, Source, SuperpositionConfig};

/// Values within this relative distance of a row maximum count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grids do not share axes")]
    AxisMismatch,
    #[error("angular width undefined: {0}")]
    WidthUndefined(&'static str),
    #[error(transparent)]
    CrossSection(#[from] CrossSectionError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, unit: &str, values: Vec<f64>) -> Self {
        Axis {
            name: name.to_string(),
            unit: unit.to_string(),
            values,
        }
    }

    fn check(&self) -> Result<(), SpectrumError> {
        if self.values.is_empty() {
            return Err(SpectrumError::InvalidGrid(format!("axis {} is empty", self.name)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(SpectrumError::InvalidGrid(format!("axis {} has non-finite values", self.name)));
        }
        let up = self.values.windows(2).all(|w| w[0] < w[1]);
        let down = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return Err(SpectrumError::InvalidGrid(format!("axis {} is not strictly monotone", self.name)));
        }
        Ok(())
    }
}

/// Provenance carried with every grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub source: Source,
    pub mode: Mode,
    /// Relative phase used for coherent values.
    pub xi: f64,
    pub quadrature: QuadratureSpec,
    /// Unit of the values.
    pub unit: String,
    /// Quantities held fixed across the grid, e.g. photon energy or azimuth.
    pub fixed: Vec<(String, f64)>,
    pub near_singular: u64,
    pub unconverged: usize,
    pub missing: usize,
}

/// A rectangular grid of cross-section values; `values[i][j]` belongs to
/// `axis_1.values[i]` and `axis_2.values[j]`. `None` marks a kinematically
/// forbidden point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionGrid {
    pub axis_1: Axis,
    pub axis_2: Axis,
    pub values: Vec<Vec<Option<f64>>>,
    pub metadata: GridMetadata,
}

impl EmissionGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.axis_1.values.len(), self.axis_2.values.len())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for row in &mut out.values {
            for v in row.iter_mut().flatten() {
                *v *= factor;
            }
        }
        out
    }

    pub fn same_axes(&self, other: &EmissionGrid) -> bool {
        self.axis_1 == other.axis_1 && self.axis_2 == other.axis_2
    }

    /// FWHM along `axis_2` for row `row`.
    pub fn row_fwhm(&self, row: usize) -> Result<f64, SpectrumError> {
        let values: Option<Vec<f64>> = self.values[row].iter().copied().collect();
        let values = values.ok_or(SpectrumError::WidthUndefined("row has missing values"))?;
        angular_fwhm(&self.axis_2.values, &values)
    }
}

/// Angular integrals at every grid point, before choosing a mode. Each cell
/// is multiplied by `row_scale[i]` on projection (ω for power maps).
#[derive(Debug, Clone)]
pub struct ComponentGrid {
    pub axis_1: Axis,
    pub axis_2: Axis,
    pub cells: Vec<Vec<Option<AdcsComponents>>>,
    pub row_scale: Vec<f64>,
    pub source: Source,
    pub quadrature: QuadratureSpec,
    pub unit: String,
    pub fixed: Vec<(String, f64)>,
}

impl ComponentGrid {
    /// Values for `mode`; coherent values use `xi`, or the source phase if `None`.
    pub fn project(&self, mode: Mode, xi: Option<f64>) -> EmissionGrid {
        let source_xi = match self.source {
            Source::Superposition(c) => c.xi,
            Source::Electron(_) => 0.0,
        };
        let xi = xi.unwrap_or(source_xi);
        let mut near_singular = 0;
        let mut unconverged = 0;
        let mut missing = 0;
        let values = self
            .cells
            .iter()
            .zip(&self.row_scale)
            .map(|(row, &scale)| {
                row.iter()
                    .map(|cell| match cell {
                        Some(c) => {
                            let v = match mode {
                                Mode::Coherent if c.single.len() == 2 => c.coherent_at(xi),
                                _ => c.value(mode),
                            };
                            near_singular += v.near_singular;
                            if !v.converged {
                                unconverged += 1;
                            }
                            Some(v.value * scale)
                        }
                        None => {
                            missing += 1;
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        let source = match self.source {
            Source::Superposition(c) => Source::Superposition(c.with_xi(xi)),
            s => s,
        };
        EmissionGrid {
            axis_1: self.axis_1.clone(),
            axis_2: self.axis_2.clone(),
            values,
            metadata: GridMetadata {
                source,
                mode,
                xi,
                quadrature: self.quadrature,
                unit: self.unit.clone(),
                fixed: self.fixed.clone(),
                near_singular,
                unconverged,
                missing,
            },
        }
    }
}

fn evaluate_cells(
    source: &Source,
    photons: Vec<Vec<Result<PhotonSpec, CrossSectionError>>>,
    quad: &QuadratureSpec,
    interaction: &Interaction,
) -> Result<Vec<Vec<Option<AdcsComponents>>>, SpectrumError> {
    quad.validate()?;
    let width = photons.first().map_or(0, |r| r.len());
    let flat: Vec<_> = photons.into_iter().flatten().collect();
    let cells: Vec<Option<AdcsComponents>> = flat
        .into_par_iter()
        .map(|photon| {
            let photon = match photon {
                Ok(p) => p,
                Err(e) if e.is_kinematic() => return Ok(None),
                Err(e) => return Err(e),
            };
            match adcs_components(source, &photon, quad, interaction) {
                Ok(c) => Ok(Some(c)),
                Err(e) if e.is_kinematic() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(cells.chunks(width.max(1)).map(|c| c.to_vec()).collect())
}

fn photon_at(omega: f64, theta: f64, phi: f64) -> Result<PhotonSpec, CrossSectionError> {
    Ok(PhotonSpec::signed(omega, theta, phi)?)
}

fn check_energies(cfg: &SuperpositionConfig, omega: f64) -> Result<(), CrossSectionError> {
    let max = cfg.kinetic_energy();
    if !(omega > 0.0 && omega < max) {
        return Err(crate::kinematics::KinematicsError::KinematicallyForbidden { omega, max }.into());
    }
    Ok(())
}

/// Angular integrals over a (θ_k, φ_k) grid at fixed ω. Negative θ_k is
/// read as the mirror direction at azimuth φ_k + π.
pub fn adcs_component_map(
    cfg: &SuperpositionConfig,
    omega: f64,
    thetas: &[f64],
    phis: &[f64],
    quad: &QuadratureSpec,
    interaction: &Interaction,
) -> Result<ComponentGrid, SpectrumError> {
    let axis_1 = Axis::new("theta_k", "rad", thetas.to_vec());
    let axis_2 = Axis::new("phi_k", "rad", phis.to_vec());
    axis_1.check()?;
    axis_2.check()?;
    let photons = thetas
        .iter()
        .map(|&t| {
            phis.iter()
                .map(|&p| check_energies(cfg, omega).and_then(|_| photon_at(omega, t, p)))
                .collect()
        })
        .collect();
    let source = Source::Superposition(*cfg);
    let cells = evaluate_cells(&source, photons, quad, interaction)?;
    Ok(ComponentGrid {
        row_scale: vec![1.0; thetas.len()],
        axis_1,
        axis_2,
        cells,
        source,
        quadrature: *quad,
        unit: "keV^-3 sr^-1".into(),
        fixed: vec![("omega_kev".into(), omega)],
    })
}

/// `dσ/dk` over a (θ_k, φ_k) grid at fixed ω, one grid per mode.
pub fn adcs_map(
    cfg: &SuperpositionConfig,
    omega: f64,
    thetas: &[f64],
    phis: &[f64],
    modes: &[Mode],
    quad: &QuadratureSpec,
    interaction: &Interaction,
) -> Result<Vec<EmissionGrid>, SpectrumError> {
    let comps = adcs_component_map(cfg, omega, thetas, phis, quad, interaction)?;
    Ok(modes.iter().map(|&m| comps.project(m, None)).collect())
}

/// Angular integrals over a (ω, θ_k) grid at fixed φ_k, scaled by ω.
/// θ_k is signed across the z axis within the plane of φ_k.
pub fn adp_component_map(
    cfg: &SuperpositionConfig,
    omegas: &[f64],
    thetas: &[f64],
    phi: f64,
    quad: &QuadratureSpec,
    interaction: &Interaction,
) -> Result<ComponentGrid, SpectrumError> {
    let axis_1 = Axis::new("omega", "keV", omegas.to_vec());
    let axis_2 = Axis::new("theta_k", "rad", thetas.to_vec());
    axis_1.check()?;
    axis_2.check()?;
    let photons = omegas
        .iter()
        .map(|&w| {
            thetas
                .iter()
                .map(|&t| check_energies(cfg, w).and_then(|_| photon_at(w, t, phi)))
                .collect()
        })
        .collect();
    let source = Source::Superposition(*cfg);
    let cells = evaluate_cells(&source, photons, quad, interaction)?;
    Ok(ComponentGrid {
        row_scale: omegas.to_vec(),
        axis_1,
        axis_2,
        cells,
        source,
        quadrature: *quad,
        unit: "keV^-2 sr^-1".into(),
        fixed: vec![("phi_k_rad".into(), phi)],
    })
}

/// `ω dσ/dk` over a (ω, θ_k) grid at fixed φ_k, one grid per mode.
pub fn adp_map(
    cfg: &SuperpositionConfig,
    omegas: &[f64],
    thetas: &[f64],
    phi: f64,
    modes: &[Mode],
    quad: &QuadratureSpec,
    interaction: &Interaction,
) -> Result<Vec<EmissionGrid>, SpectrumError> {
    let comps = adp_component_map(cfg, omegas, thetas, phi, quad, interaction)?;
    Ok(modes.iter().map(|&m| comps.project(m, None)).collect())
}

/// Peak emission angle per photon energy for coherent and incoherent maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakCurve {
    /// keV
    pub energies: Vec<f64>,
    /// rad; `None` where a row had no values
    pub coherent: Vec<Option<f64>>,
    pub incoherent: Vec<Option<f64>>,
}

impl PeakCurve {
    /// Largest `|θ*_coh - θ*_incoh|` over rows where both peaks exist.
    pub fn max_separation(&self) -> Option<f64> {
        self.coherent
            .iter()
            .zip(&self.incoherent)
            .filter_map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).abs()))
            .reduce(f64::max)
    }
}

/// Refined location of the maximum of `values` over `angles`.
///
/// The discrete maximum (ties within [`TIE_TOLERANCE`] resolved toward the
/// smaller angle) is refined by the vertex of the parabola through it and
/// its two neighbours.
pub fn peak_angle(angles: &[f64], values: &[Option<f64>]) -> Option<f64> {
    let max = values.iter().flatten().copied().reduce(f64::max)?;
    let threshold = max - TIE_TOLERANCE * max.abs();
    let best = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_some_and(|v| v >= threshold))
        .map(|(i, _)| i)
        .min_by(|&a, &b| angles[a].total_cmp(&angles[b]))?;
    if best == 0 || best + 1 == values.len() {
        return Some(angles[best]);
    }
    let (Some(y0), Some(y1), Some(y2)) = (values[best - 1], values[best], values[best + 1]) else {
        return Some(angles[best]);
    };
    let (x0, x1, x2) = (angles[best - 1], angles[best], angles[best + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 || !den.is_finite() {
        return Some(x1);
    }
    let vertex = x1 - 0.5 * num / den;
    Some(vertex.clamp(x0.min(x2), x0.max(x2)))
}

/// Peak curves from coherent and incoherent power maps on shared axes.
pub fn peak_curve(coherent: &EmissionGrid, incoherent: &EmissionGrid) -> Result<PeakCurve, SpectrumError> {
    if !coherent.same_axes(incoherent) {
        return Err(SpectrumError::AxisMismatch);
    }
    let angles = &coherent.axis_2.values;
    Ok(PeakCurve {
        energies: coherent.axis_1.values.clone(),
        coherent: coherent.values.iter().map(|row| peak_angle(angles, row)).collect(),
        incoherent: incoherent.values.iter().map(|row| peak_angle(angles, row)).collect(),
    })
}

/// Full width at half maximum about the global maximum, with linear
/// interpolation of both half-maximum crossings.
pub fn angular_fwhm(angles: &[f64], values: &[f64]) -> Result<f64, SpectrumError> {
    if angles.len() != values.len() || values.len() < 3 {
        return Err(SpectrumError::WidthUndefined("need at least three matching samples"));
    }
    let opts: Vec<Option<f64>> = values.iter().map(|&v| Some(v)).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(SpectrumError::WidthUndefined("no positive maximum"));
    }
    let threshold = max - TIE_TOLERANCE * max;
    let peak = (0..values.len())
        .filter(|&i| opts[i].is_some_and(|v| v >= threshold))
        .min_by(|&a, &b| angles[a].total_cmp(&angles[b]))
        .expect("maximum exists");
    if peak == 0 || peak + 1 == values.len() {
        return Err(SpectrumError::WidthUndefined("maximum on the domain boundary"));
    }
    let half = 0.5 * values[peak];
    let crossing = |i: usize, j: usize| {
        // values[i] <= half < values[j]
        angles[i] + (half - values[i]) * (angles[j] - angles[i]) / (values[j] - values[i])
    };
    let left = (0..peak)
        .rev()
        .find(|&i| values[i] <= half)
        .map(|i| crossing(i, i + 1))
        .ok_or(SpectrumError::WidthUndefined("no half-maximum crossing below the peak"))?;
    let right = (peak + 1..values.len())
        .find(|&i| values[i] <= half)
        .map(|i| crossing(i, i - 1))
        .ok_or(SpectrumError::WidthUndefined("no half-maximum crossing above the peak"))?;
    Ok((right - left).abs())
}
