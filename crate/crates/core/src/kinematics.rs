//! On-shell states, energy conservation against a static field, and the
//! two-momentum scattering geometry.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{FourVector, ThreeVector};

/// CODATA 2018 electron mass in keV.
pub const ELECTRON_MASS_KEV: f64 = 510.998_950_00;
/// CODATA 2018 inverse fine-structure constant.
pub const INVERSE_ALPHA: f64 = 137.035_999_084;
/// ħc in keV·fm.
pub const HBAR_C_KEV_FM: f64 = 197_326.980_4;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KinematicsError {
    #[error(
        "photon energy {omega} keV is kinematically forbidden: it must lie in (0, {}) keV \
         so the final electron stays on shell",
        tidy(*max)
    )]
    KinematicallyForbidden { omega: f64, max: f64 },
    #[error("superposed electrons must have equal kinetic energies, got {first} and {second} keV")]
    UnequalEnergies { first: f64, second: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// Rounds to nine decimals for messages, hiding `E - m` rounding noise.
fn tidy(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// Electron mass, coupling, and unit conversion. Natural units ħ = c = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// keV
    pub electron_mass: f64,
    pub alpha: f64,
    /// Multiply a keV⁻² area by this to get barn.
    pub hbar_c_sq_barn: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        // 1 fm² = 0.01 barn
        PhysicalConstants {
            electron_mass: ELECTRON_MASS_KEV,
            alpha: 1.0 / INVERSE_ALPHA,
            hbar_c_sq_barn: HBAR_C_KEV_FM * HBAR_C_KEV_FM * 0.01,
        }
    }
}

impl PhysicalConstants {
    /// Elementary charge in Heaviside-Lorentz units, `e = √(4πα)`.
    pub fn charge(&self) -> f64 {
        (4.0 * PI * self.alpha).sqrt()
    }

    pub fn with_electron_mass(self, electron_mass: f64) -> Self {
        PhysicalConstants { electron_mass, ..self }
    }
}

/// An on-shell free electron with definite momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectronState {
    /// keV
    pub kinetic_energy: f64,
    pub direction: ThreeVector,
    /// keV
    pub mass: f64,
}

impl ElectronState {
    pub fn new(kinetic_energy: f64, direction: ThreeVector, mass: f64) -> Result<Self, KinematicsError> {
        if !(kinetic_energy > 0.0 && kinetic_energy.is_finite()) {
            return Err(KinematicsError::InvalidInput("kinetic energy must be positive and finite"));
        }
        if !(mass > 0.0) {
            return Err(KinematicsError::InvalidInput("electron mass must be positive"));
        }
        let direction = direction
            .normalize()
            .map_err(|_| KinematicsError::InvalidInput("electron direction has zero length"))?;
        Ok(ElectronState {
            kinetic_energy,
            direction,
            mass,
        })
    }

    pub fn total_energy(&self) -> f64 {
        self.kinetic_energy + self.mass
    }

    pub fn momentum(&self) -> f64 {
        // (E - m)(E + m) avoids cancellation for slow electrons
        (self.kinetic_energy * (self.kinetic_energy + 2.0 * self.mass)).sqrt()
    }

    pub fn beta(&self) -> f64 {
        self.momentum() / self.total_energy()
    }

    pub fn four_momentum(&self) -> FourVector {
        FourVector::from_parts(self.total_energy(), self.direction * self.momentum())
    }
}

/// An emitted photon: energy and spherical angles of its direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonSpec {
    /// keV
    pub omega: f64,
    pub theta: f64,
    pub phi: f64,
}

impl PhotonSpec {
    /// `phi` is wrapped into [0, 2π).
    pub fn new(omega: f64, theta: f64, phi: f64) -> Result<Self, KinematicsError> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(KinematicsError::InvalidInput("photon energy must be positive and finite"));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(KinematicsError::InvalidInput("photon polar angle must lie in [0, π]"));
        }
        if !phi.is_finite() {
            return Err(KinematicsError::InvalidInput("photon azimuth must be finite"));
        }
        Ok(PhotonSpec {
            omega,
            theta,
            phi: phi.rem_euclid(TAU),
        })
    }

    /// Builds a photon from a signed polar angle in a fixed azimuthal plane:
    /// negative `theta` points to azimuth `phi + π`.
    pub fn signed(omega: f64, theta: f64, phi: f64) -> Result<Self, KinematicsError> {
        if theta < 0.0 {
            Self::new(omega, -theta, phi + PI)
        } else {
            Self::new(omega, theta, phi)
        }
    }

    pub fn direction(&self) -> ThreeVector {
        ThreeVector::from_spherical(self.theta, self.phi)
    }

    pub fn four_momentum(&self) -> FourVector {
        FourVector::from_parts(self.omega, self.direction() * self.omega)
    }
}

/// Equal-weight superposition of two equal-energy momentum eigenstates with
/// relative phase `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionConfig {
    pub electron_1: ElectronState,
    pub electron_2: ElectronState,
    /// radians
    pub xi: f64,
}

impl SuperpositionConfig {
    /// Kinetic energies must agree to 1e-9 relative; the second is then
    /// snapped to the first so both branches share one final-state energy.
    pub fn new(electron_1: ElectronState, electron_2: ElectronState, xi: f64) -> Result<Self, KinematicsError> {
        let (t1, t2) = (electron_1.kinetic_energy, electron_2.kinetic_energy);
        if (t1 - t2).abs() > 1e-9 * t1 || electron_1.mass != electron_2.mass {
            return Err(KinematicsError::UnequalEnergies { first: t1, second: t2 });
        }
        if !xi.is_finite() {
            return Err(KinematicsError::InvalidInput("relative phase must be finite"));
        }
        let electron_2 = ElectronState {
            kinetic_energy: t1,
            ..electron_2
        };
        Ok(SuperpositionConfig {
            electron_1,
            electron_2,
            xi,
        })
    }

    pub fn with_xi(self, xi: f64) -> Self {
        SuperpositionConfig { xi, ..self }
    }

    pub fn electrons(&self) -> [ElectronState; 2] {
        [self.electron_1, self.electron_2]
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.electron_1.kinetic_energy
    }
}

/// Final electron `r`, photon `k`, and Coulomb transfer `q = p - r - k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalStateKinematics {
    pub r: FourVector,
    pub k: FourVector,
    pub q: FourVector,
}

/// `E_r = E_p - ω`; the static field transfers no energy.
pub fn final_electron_energy(e_p: f64, omega: f64, mass: f64) -> Result<f64, KinematicsError> {
    let max = e_p - mass;
    if !(omega > 0.0 && omega < max) {
        return Err(KinematicsError::KinematicallyForbidden { omega, max });
    }
    Ok(e_p - omega)
}

/// Momentum magnitude of the final electron after emitting `omega`.
pub(crate) fn final_momentum(kinetic: f64, omega: f64, mass: f64) -> f64 {
    let t_r = kinetic - omega;
    (t_r * (t_r + 2.0 * mass)).sqrt()
}

pub fn build_final_state(
    p: FourVector,
    omega: f64,
    k_dir: ThreeVector,
    r_dir: ThreeVector,
    mass: f64,
) -> Result<FinalStateKinematics, KinematicsError> {
    let e_r = final_electron_energy(p.time(), omega, mass)?;
    let k_dir = k_dir
        .normalize()
        .map_err(|_| KinematicsError::InvalidInput("photon direction has zero length"))?;
    let r_dir = r_dir
        .normalize()
        .map_err(|_| KinematicsError::InvalidInput("electron direction has zero length"))?;
    let r_mag = ((e_r - mass) * (e_r + mass)).sqrt();
    let r = FourVector::from_parts(e_r, r_dir * r_mag);
    let k = FourVector::from_parts(omega, k_dir * omega);
    let q = FourVector::from_parts(0.0, p.spatial() - r.spatial() - k.spatial());
    Ok(FinalStateKinematics { r, k, q })
}

/// Symmetric two-beam geometry: momenta at polar angles `±separation/2`
/// in the x-z plane (azimuths 0 and π), bisector along +z, `xi = 0`.
pub fn superposition_geometry(
    kinetic_energy: f64,
    separation: f64,
    constants: &PhysicalConstants,
) -> Result<SuperpositionConfig, KinematicsError> {
    if !(0.0..=PI).contains(&separation) {
        return Err(KinematicsError::InvalidInput("beam separation must lie in [0, π]"));
    }
    let half = 0.5 * separation;
    let m = constants.electron_mass;
    let e1 = ElectronState::new(kinetic_energy, ThreeVector::from_spherical(half, 0.0), m)?;
    let e2 = ElectronState::new(kinetic_energy, ThreeVector::from_spherical(half, PI), m)?;
    SuperpositionConfig::new(e1, e2, 0.0)
}

/// Either a single momentum eigenstate or a two-momentum superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Source {
    Electron(ElectronState),
    Superposition(SuperpositionConfig),
}

impl Source {
    pub fn kinetic_energy(&self) -> f64 {
        match self {
            Source::Electron(e) => e.kinetic_energy,
            Source::Superposition(c) => c.kinetic_energy(),
        }
    }

    /// The reference electron fixing `E_p` and `|p|` for the prefactor.
    pub fn leading_electron(&self) -> ElectronState {
        match self {
            Source::Electron(e) => *e,
            Source::Superposition(c) => c.electron_1,
        }
    }
}

impl From<ElectronState> for Source {
    fn from(e: ElectronState) -> Self {
        Source::Electron(e)
    }
}

impl From<SuperpositionConfig> for Source {
    fn from(c: SuperpositionConfig) -> Self {
        Source::Superposition(c)
    }
}
