//! Tree-level Bremsstrahlung amplitude in a static Coulomb field.
//!
//! For one incoming momentum `p` the amplitude is
//!
//! ```text
//! iM = (-i e³ / |q|²) ū_s'(r) [ ε̸ (r̸ + k̸ + m) γ⁰ / (2 r·k) - γ⁰ (p̸ - k̸ + m) ε̸ / (2 p·k) ] u_s(p)
//! ```
//!
//! with `q = p - r - k` and `q⁰ = 0`. Two evaluation paths exist: the public
//! per-channel functions build the bracket explicitly, and [`PhotonKernel`]
//! reuses everything that does not depend on the final electron direction.
//! [`trace_summed_square`] is an independent check through the spinor
//! completeness relation.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    dirac_adjoint, gamma, polarization_pair, slash_complex, slash_plus_mass, spinor_u_unchecked, AlgebraError,
    BiSpinor, Complex, FourVector, Matrix4, Polarization, PolarizationVector, RowSpinor, Spin, ThreeVector,
};
use crate::kinematics::{build_final_state, FinalStateKinematics, KinematicsError, PhysicalConstants, PhotonSpec, Source, SuperpositionConfig};

/// Default floor on `|q|²` in keV².
pub const DEFAULT_Q2_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum AmplitudeError {
    #[error("momentum transfer |q|² = {q2:e} keV² is at or below the floor {floor:e} keV²")]
    NearSingularTransfer { q2: f64, floor: f64 },
    #[error("branch {branch}: momentum transfer |q|² = {q2:e} keV² is at or below the floor {floor:e} keV²")]
    BranchNearSingular { branch: usize, q2: f64, floor: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl AmplitudeError {
    fn tag_branch(self, branch: usize) -> Self {
        match self {
            AmplitudeError::NearSingularTransfer { q2, floor } => {
                AmplitudeError::BranchNearSingular { branch, q2, floor }
            }
            other => other,
        }
    }

    pub fn is_near_singular(&self) -> bool {
        matches!(
            self,
            AmplitudeError::NearSingularTransfer { .. } | AmplitudeError::BranchNearSingular { .. }
        )
    }
}

/// Physical constants plus the near-singular transfer floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub constants: PhysicalConstants,
    /// keV²
    pub q2_floor: f64,
}

impl Default for Interaction {
    fn default() -> Self {
        Interaction {
            constants: PhysicalConstants::default(),
            q2_floor: DEFAULT_Q2_FLOOR,
        }
    }
}

impl Interaction {
    pub fn new(constants: PhysicalConstants) -> Self {
        Interaction {
            constants,
            ..Default::default()
        }
    }

    pub fn mass(&self) -> f64 {
        self.constants.electron_mass
    }

    fn coulomb_factor(&self, q: FourVector) -> Result<Complex, AmplitudeError> {
        let q2 = q.spatial().norm_sqr();
        if !(q2 > self.q2_floor) {
            return Err(AmplitudeError::NearSingularTransfer {
                q2,
                floor: self.q2_floor,
            });
        }
        let e = self.constants.charge();
        Ok(Complex::new(0.0, -e * e * e / q2))
    }
}

/// Initial spin, final spin, and photon polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinChannel {
    pub s: Spin,
    pub s_prime: Spin,
    pub pol: Polarization,
}

impl SpinChannel {
    /// All eight channels, ordered by [`SpinChannel::index`].
    pub const ALL: [SpinChannel; 8] = {
        use Polarization::*;
        use Spin::*;
        [
            SpinChannel { s: Up, s_prime: Up, pol: First },
            SpinChannel { s: Up, s_prime: Up, pol: Second },
            SpinChannel { s: Up, s_prime: Down, pol: First },
            SpinChannel { s: Up, s_prime: Down, pol: Second },
            SpinChannel { s: Down, s_prime: Up, pol: First },
            SpinChannel { s: Down, s_prime: Up, pol: Second },
            SpinChannel { s: Down, s_prime: Down, pol: First },
            SpinChannel { s: Down, s_prime: Down, pol: Second },
        ]
    };

    pub fn index(&self) -> usize {
        4 * self.s.index() + 2 * self.s_prime.index() + self.pol.index()
    }
}

/// How the two momentum branches are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One momentum eigenstate (the first branch of a superposition).
    Single,
    /// Squared sum of amplitudes, with the source's relative phase.
    Coherent,
    /// Mean of the two single-branch results.
    Incoherent,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Coherent => "coherent",
            Mode::Incoherent => "incoherent",
        }
    }
}

/// The Dirac-matrix bracket between `ū(r)` and `u(p)` for a current `current`
/// (a polarization vector, or `k` itself for the Ward identity).
pub fn bracket(p: FourVector, r: FourVector, k: FourVector, current: &[Complex; 4], m: f64) -> Matrix4 {
    let eps = slash_complex(current);
    let g0 = gamma(0);
    let first = eps * slash_plus_mass(r + k, m) * g0 * (0.5 / r.dot(k));
    let second = g0 * slash_plus_mass(p - k, m) * eps * (0.5 / p.dot(k));
    first - second
}

fn photon_direction(fs: &FinalStateKinematics) -> ThreeVector {
    fs.k.spatial()
}

fn polarization(fs: &FinalStateKinematics, pol: Polarization) -> Result<PolarizationVector, AmplitudeError> {
    let (e1, e2) = polarization_pair(photon_direction(fs))?;
    Ok(match pol {
        Polarization::First => e1,
        Polarization::Second => e2,
    })
}

/// `iM` for a single incoming momentum `p` and one spin channel.
pub fn matrix_element(
    p: FourVector,
    fs: &FinalStateKinematics,
    ch: SpinChannel,
    interaction: &Interaction,
) -> Result<Complex, AmplitudeError> {
    let factor = interaction.coulomb_factor(fs.q)?;
    let m = interaction.mass();
    let eps = polarization(fs, ch.pol)?;
    let gamma_mat = bracket(p, fs.r, fs.k, &eps.components, m);
    let u = spinor_u_unchecked(p, ch.s, m);
    let ubar = dirac_adjoint(&spinor_u_unchecked(fs.r, ch.s_prime, m));
    Ok(factor * ubar.dot(&gamma_mat.mul_vec(&u)))
}

/// The amplitude with the polarization replaced by the photon momentum.
/// Gauge invariance makes this vanish for on-shell spinors.
pub fn ward_element(
    p: FourVector,
    fs: &FinalStateKinematics,
    s: Spin,
    s_prime: Spin,
    interaction: &Interaction,
) -> Result<Complex, AmplitudeError> {
    let factor = interaction.coulomb_factor(fs.q)?;
    let m = interaction.mass();
    let gamma_mat = bracket(p, fs.r, fs.k, &fs.k.to_complex(), m);
    let u = spinor_u_unchecked(p, s, m);
    let ubar = dirac_adjoint(&spinor_u_unchecked(fs.r, s_prime, m));
    Ok(factor * ubar.dot(&gamma_mat.mul_vec(&u)))
}

/// `(1/2) Σ_{s,s',ε} |iM|²` through `Tr[(r̸+m) Γ (p̸+m) Γ̄]` with
/// `Γ̄ = γ⁰ Γ† γ⁰`; no spinors are constructed.
pub fn trace_summed_square(
    p: FourVector,
    fs: &FinalStateKinematics,
    interaction: &Interaction,
) -> Result<f64, AmplitudeError> {
    let factor = interaction.coulomb_factor(fs.q)?.norm_sqr();
    let m = interaction.mass();
    let (e1, e2) = polarization_pair(photon_direction(fs))?;
    let g0 = gamma(0);
    let r_num = slash_plus_mass(fs.r, m);
    let p_num = slash_plus_mass(p, m);
    let mut total = 0.0;
    for eps in [e1, e2] {
        let g = bracket(p, fs.r, fs.k, &eps.components, m);
        let g_bar = g0 * g.adjoint() * g0;
        total += (r_num * g * p_num * g_bar).trace().re;
    }
    Ok(0.5 * factor * total)
}

/// Final state for one branch of a superposition: the shared `(r_dir, ω, k_dir)`
/// with that branch's own transfer `q_i = p_i - r - k`.
fn branch_final_state(
    p: FourVector,
    r_dir: ThreeVector,
    photon: &PhotonSpec,
    m: f64,
) -> Result<FinalStateKinematics, KinematicsError> {
    build_final_state(p, photon.omega, photon.direction(), r_dir, m)
}

/// `(M₁ + e^{iξ} M₂)/√2` for one spin channel.
pub fn superposition_element(
    cfg: &SuperpositionConfig,
    r_dir: ThreeVector,
    photon: &PhotonSpec,
    ch: SpinChannel,
    interaction: &Interaction,
) -> Result<Complex, AmplitudeError> {
    let m = interaction.mass();
    let mut amps = [Complex::new(0.0, 0.0); 2];
    for (i, e) in cfg.electrons().iter().enumerate() {
        let p = e.four_momentum();
        let fs = branch_final_state(p, r_dir, photon, m)?;
        amps[i] = matrix_element(p, &fs, ch, interaction).map_err(|err| err.tag_branch(i + 1))?;
    }
    Ok((amps[0] + Complex::from_polar(1.0, cfg.xi) * amps[1]) * FRAC_1_SQRT_2)
}

/// `(1/2) Σ_ch |a_ch|²`
pub fn spin_sum(amps: &[Complex; 8]) -> f64 {
    0.5 * amps.iter().map(|a| a.norm_sqr()).sum::<f64>()
}

/// `(1/2) Σ_ch conj(a_ch) b_ch`, the interference term of two branches.
pub fn cross_sum(a: &[Complex; 8], b: &[Complex; 8]) -> Complex {
    let s: Complex = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    s * 0.5
}

/// Spin-averaged, polarization-summed squared amplitude at one final
/// electron direction.
///
/// For a single-electron source every mode returns the single-branch value.
pub fn summed_square(
    source: &Source,
    r_dir: ThreeVector,
    photon: &PhotonSpec,
    mode: Mode,
    interaction: &Interaction,
) -> Result<f64, AmplitudeError> {
    let m = interaction.mass();
    match source {
        Source::Electron(e) => {
            let p = e.four_momentum();
            let fs = branch_final_state(p, r_dir, photon, m)?;
            let amps = channel_amplitudes(p, &fs, interaction)?;
            Ok(spin_sum(&amps))
        }
        Source::Superposition(cfg) => {
            let mut amps = [[Complex::new(0.0, 0.0); 8]; 2];
            for (i, e) in cfg.electrons().iter().enumerate() {
                if mode == Mode::Single && i == 1 {
                    break;
                }
                let p = e.four_momentum();
                let fs = branch_final_state(p, r_dir, photon, m)?;
                amps[i] = channel_amplitudes(p, &fs, interaction).map_err(|err| err.tag_branch(i + 1))?;
            }
            Ok(match mode {
                Mode::Single => spin_sum(&amps[0]),
                Mode::Incoherent => 0.5 * (spin_sum(&amps[0]) + spin_sum(&amps[1])),
                Mode::Coherent => {
                    let phase = Complex::from_polar(1.0, cfg.xi);
                    let coh: [Complex; 8] =
                        std::array::from_fn(|c| (amps[0][c] + phase * amps[1][c]) * FRAC_1_SQRT_2);
                    spin_sum(&coh)
                }
            })
        }
    }
}

/// All eight channel amplitudes through the explicit-bracket path.
pub fn channel_amplitudes(
    p: FourVector,
    fs: &FinalStateKinematics,
    interaction: &Interaction,
) -> Result<[Complex; 8], AmplitudeError> {
    let mut out = [Complex::new(0.0, 0.0); 8];
    for ch in SpinChannel::ALL {
        out[ch.index()] = matrix_element(p, fs, ch, interaction)?;
    }
    Ok(out)
}

/// Everything about the amplitude that is fixed once the photon is fixed.
#[derive(Debug, Clone)]
pub struct PhotonKernel {
    k: FourVector,
    eps_slash: [Matrix4; 2],
    mass: f64,
    e_cubed: f64,
    q2_floor: f64,
}

/// Per-branch constants: `γ⁰u_s(p)` and the whole second diagram applied to `u_s(p)`.
#[derive(Debug, Clone)]
pub struct BranchKernel {
    p: ThreeVector,
    first: [BiSpinor; 2],
    second: [[BiSpinor; 2]; 2],
}

/// Per-node constants shared by both branches.
#[derive(Debug, Clone)]
pub struct FinalElectron {
    r: ThreeVector,
    bar: [RowSpinor; 2],
    propagator: Matrix4,
}

impl PhotonKernel {
    pub fn new(photon: &PhotonSpec, interaction: &Interaction) -> Result<Self, AmplitudeError> {
        let (e1, e2) = polarization_pair(photon.direction())?;
        Ok(Self::with_polarizations(photon.four_momentum(), [e1, e2], interaction))
    }

    /// Uses an arbitrary transverse basis instead of the default one.
    pub fn with_polarizations(k: FourVector, eps: [PolarizationVector; 2], interaction: &Interaction) -> Self {
        let e = interaction.constants.charge();
        PhotonKernel {
            k,
            eps_slash: eps.map(|e| e.slash()),
            mass: interaction.mass(),
            e_cubed: e * e * e,
            q2_floor: interaction.q2_floor,
        }
    }

    pub fn branch(&self, p: FourVector) -> BranchKernel {
        let m = self.mass;
        let g0 = gamma(0);
        let second_num = g0 * slash_plus_mass(p - self.k, m) * (0.5 / p.dot(self.k));
        let mut first = [BiSpinor::default(); 2];
        let mut second = [[BiSpinor::default(); 2]; 2];
        for s in Spin::ALL {
            let u = spinor_u_unchecked(p, s, m);
            first[s.index()] = g0.mul_vec(&u);
            for pol in Polarization::ALL {
                second[s.index()][pol.index()] = second_num.mul_vec(&self.eps_slash[pol.index()].mul_vec(&u));
            }
        }
        BranchKernel {
            p: p.spatial(),
            first,
            second,
        }
    }

    /// `r` must be on shell.
    pub fn final_electron(&self, r: FourVector) -> FinalElectron {
        let m = self.mass;
        let propagator = slash_plus_mass(r + self.k, m) * (0.5 / r.dot(self.k));
        FinalElectron {
            r: r.spatial(),
            bar: Spin::ALL.map(|s| dirac_adjoint(&spinor_u_unchecked(r, s, m))),
            propagator,
        }
    }

    /// Returns `|q|²` for this branch and node.
    pub fn transfer_sq(&self, branch: &BranchKernel, fe: &FinalElectron) -> f64 {
        (branch.p - fe.r - self.k.spatial()).norm_sqr()
    }

    /// The eight channel amplitudes, indexed by [`SpinChannel::index`].
    pub fn amplitudes(&self, branch: &BranchKernel, fe: &FinalElectron) -> Result<[Complex; 8], AmplitudeError> {
        let q2 = self.transfer_sq(branch, fe);
        if !(q2 > self.q2_floor) {
            return Err(AmplitudeError::NearSingularTransfer {
                q2,
                floor: self.q2_floor,
            });
        }
        let factor = Complex::new(0.0, -self.e_cubed / q2);
        let mut out = [Complex::new(0.0, 0.0); 8];
        for s in 0..2 {
            let v = fe.propagator.mul_vec(&branch.first[s]);
            for pol in 0..2 {
                let bu = self.eps_slash[pol].mul_vec(&v) - branch.second[s][pol];
                for sp in 0..2 {
                    out[4 * s + 2 * sp + pol] = factor * fe.bar[sp].dot(&bu);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FourVector;
    use crate::kinematics::{superposition_geometry, ElectronState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn random_dir(rng: &mut ChaCha8Rng) -> ThreeVector {
        ThreeVector::from_spherical(rng.gen_range(-1.0f64..1.0).acos(), rng.gen_range(0.0..TAU))
    }

    struct Config {
        p: FourVector,
        fs: FinalStateKinematics,
    }

    fn random_config(rng: &mut ChaCha8Rng, it: &Interaction) -> Config {
        let m = it.mass();
        let t = (rng.gen_range(20.0f64.ln()..2000.0f64.ln())).exp();
        let frac = if rng.gen_bool(0.1) {
            1.0 - rng.gen_range(1e-9..1e-4)
        } else {
            rng.gen_range(0.05..0.95)
        };
        let e = ElectronState::new(t, random_dir(rng), m).unwrap();
        let p = e.four_momentum();
        let fs = build_final_state(p, frac * t, random_dir(rng), random_dir(rng), m).unwrap();
        Config { p, fs }
    }

    #[test]
    fn ward_identity() {
        let it = Interaction::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let c = random_config(&mut rng, &it);
            let amps = channel_amplitudes(c.p, &c.fs, &it).unwrap();
            let max = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
            for s in Spin::ALL {
                for sp in Spin::ALL {
                    let w = ward_element(c.p, &c.fs, s, sp, &it).unwrap();
                    assert!(w.norm() <= 1e-10 * max, "ward {} vs {}", w.norm(), max);
                }
            }
        }
    }

    #[test]
    fn trace_oracle_agrees_with_spinor_sum() {
        let it = Interaction::default();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..1000 {
            let c = random_config(&mut rng, &it);
            let explicit = spin_sum(&channel_amplitudes(c.p, &c.fs, &it).unwrap());
            let trace = trace_summed_square(c.p, &c.fs, &it).unwrap();
            assert!((explicit - trace).abs() <= 1e-10 * trace, "{explicit} vs {trace}");
        }
    }

    #[test]
    fn kernel_matches_explicit_path() {
        let it = Interaction::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let c = random_config(&mut rng, &it);
            let k = c.fs.k;
            let photon = PhotonSpec::new(k.time(), (k[3] / k.time()).clamp(-1.0, 1.0).acos(), k[2].atan2(k[1])).unwrap();
            let fs = build_final_state(c.p, photon.omega, photon.direction(), c.fs.r.spatial(), it.mass()).unwrap();
            let kernel = PhotonKernel::new(&photon, &it).unwrap();
            let fast = kernel
                .amplitudes(&kernel.branch(c.p), &kernel.final_electron(fs.r))
                .unwrap();
            let slow = channel_amplitudes(c.p, &fs, &it).unwrap();
            let scale = slow.iter().map(|a| a.norm()).fold(0.0, f64::max);
            for (f, s) in fast.iter().zip(&slow) {
                assert!((f - s).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn coupling_scaling() {
        let it = Interaction::default();
        let mut strong = it;
        strong.constants.alpha *= 4.0; // e -> 2e
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..50 {
            let c = random_config(&mut rng, &it);
            for ch in SpinChannel::ALL {
                let a = matrix_element(c.p, &c.fs, ch, &it).unwrap();
                let b = matrix_element(c.p, &c.fs, ch, &strong).unwrap();
                assert!((b - a * 8.0).norm() <= 1e-13 * b.norm().max(1e-300));
            }
            let a = trace_summed_square(c.p, &c.fs, &it).unwrap();
            let b = trace_summed_square(c.p, &c.fs, &strong).unwrap();
            assert!((b / a - 64.0).abs() < 1e-12);
        }
    }

    #[test]
    fn near_singular_transfer_is_reported() {
        let it = Interaction {
            q2_floor: 1e12,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let c = random_config(&mut rng, &it);
        let err = matrix_element(c.p, &c.fs, SpinChannel::ALL[0], &it).unwrap_err();
        assert!(err.is_near_singular());
    }

    fn degenerate_cfg(xi: f64, it: &Interaction) -> SuperpositionConfig {
        let e = ElectronState::new(200.0, ThreeVector::from_spherical(0.2, 0.4), it.mass()).unwrap();
        SuperpositionConfig::new(e, e, xi).unwrap()
    }

    #[test]
    fn degenerate_superposition() {
        let it = Interaction::default();
        let photon = PhotonSpec::new(10.0, 0.5, 1.0).unwrap();
        let r_dir = ThreeVector::from_spherical(0.3, 2.0);
        let e = degenerate_cfg(0.0, &it).electron_1;
        let p = e.four_momentum();
        let fs = build_final_state(p, photon.omega, photon.direction(), r_dir, it.mass()).unwrap();
        for ch in SpinChannel::ALL {
            let single = matrix_element(p, &fs, ch, &it).unwrap();
            let out = superposition_element(&degenerate_cfg(PI, &it), r_dir, &photon, ch, &it).unwrap();
            assert!(out.norm() <= 1e-12 * single.norm());
            let inphase = superposition_element(&degenerate_cfg(0.0, &it), r_dir, &photon, ch, &it).unwrap();
            assert!((inphase - single * 2f64.sqrt()).norm() <= 1e-12 * single.norm());
        }
    }

    #[test]
    fn quarter_phase_identity() {
        let it = Interaction::default();
        let cfg = superposition_geometry(200.0, PI / 6.0, &it.constants).unwrap().with_xi(PI / 2.0);
        let photon = PhotonSpec::new(10.0, 0.3, 0.2).unwrap();
        let r_dir = ThreeVector::from_spherical(0.4, 1.0);
        for ch in SpinChannel::ALL {
            let mut m = [Complex::new(0.0, 0.0); 2];
            for (i, e) in cfg.electrons().iter().enumerate() {
                let p = e.four_momentum();
                let fs = build_final_state(p, photon.omega, photon.direction(), r_dir, it.mass()).unwrap();
                m[i] = matrix_element(p, &fs, ch, &it).unwrap();
            }
            let sup = superposition_element(&cfg, r_dir, &photon, ch, &it).unwrap();
            // e^{iπ/2} = i, so the interference term is 2 Im(M₁ conj(M₂))
            let expect = 0.5 * (m[0].norm_sqr() + m[1].norm_sqr() + 2.0 * (m[0] * m[1].conj()).im);
            assert!((sup.norm_sqr() - expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn phase_average_equals_incoherent() {
        let it = Interaction::default();
        let base = superposition_geometry(200.0, PI / 6.0, &it.constants).unwrap();
        let photon = PhotonSpec::new(50.0, 0.7, 2.5).unwrap();
        let r_dir = ThreeVector::from_spherical(1.1, 0.3);
        let inc = summed_square(&base.into(), r_dir, &photon, Mode::Incoherent, &it).unwrap();
        for n in [2usize, 3, 8, 13] {
            let avg: f64 = (0..n)
                .map(|j| {
                    let cfg = base.with_xi(TAU * j as f64 / n as f64);
                    summed_square(&cfg.into(), r_dir, &photon, Mode::Coherent, &it).unwrap()
                })
                .sum::<f64>()
                / n as f64;
            assert!((avg - inc).abs() <= 1e-12 * inc, "n = {n}");
        }
    }

    #[test]
    fn decomposition_matches_superposition_elements() {
        let it = Interaction::default();
        let cfg = superposition_geometry(500.0, 0.8, &it.constants).unwrap().with_xi(1.3);
        let photon = PhotonSpec::new(120.0, 0.9, 0.1).unwrap();
        let r_dir = ThreeVector::from_spherical(0.5, 5.0);
        let kernel = PhotonKernel::new(&photon, &it).unwrap();
        let fe = {
            let p = cfg.electron_1.four_momentum();
            kernel.final_electron(build_final_state(p, photon.omega, photon.direction(), r_dir, it.mass()).unwrap().r)
        };
        let a1 = kernel.amplitudes(&kernel.branch(cfg.electron_1.four_momentum()), &fe).unwrap();
        let a2 = kernel.amplitudes(&kernel.branch(cfg.electron_2.four_momentum()), &fe).unwrap();
        let decomposed =
            0.5 * (spin_sum(&a1) + spin_sum(&a2)) + (Complex::from_polar(1.0, cfg.xi) * cross_sum(&a1, &a2)).re;
        let literal: f64 = 0.5
            * SpinChannel::ALL
                .iter()
                .map(|&ch| superposition_element(&cfg, r_dir, &photon, ch, &it).unwrap().norm_sqr())
                .sum::<f64>();
        let via_summed = summed_square(&cfg.into(), r_dir, &photon, Mode::Coherent, &it).unwrap();
        assert!((decomposed - literal).abs() <= 1e-12 * literal);
        assert!((via_summed - literal).abs() <= 1e-12 * literal);
    }

    #[test]
    fn polarization_basis_independence() {
        let it = Interaction::default();
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..100 {
            let c = random_config(&mut rng, &it);
            let (e1, e2) = polarization_pair(c.fs.k.spatial()).unwrap();
            let reference = {
                let kernel = PhotonKernel::with_polarizations(c.fs.k, [e1, e2], &it);
                spin_sum(&kernel.amplitudes(&kernel.branch(c.p), &kernel.final_electron(c.fs.r)).unwrap())
            };
            let psi = rng.gen_range(0.0..TAU);
            let (s, co) = psi.sin_cos();
            let rot = |a: f64, b: f64, label| PolarizationVector {
                components: std::array::from_fn(|i| e1.components[i] * a + e2.components[i] * b),
                label,
            };
            let rotated = [rot(co, s, Polarization::First), rot(-s, co, Polarization::Second)];
            // helicity basis (complex)
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let helicity = [
                PolarizationVector {
                    components: std::array::from_fn(|i| (e1.components[i] + e2.components[i] * Complex::i()) * h),
                    label: Polarization::First,
                },
                PolarizationVector {
                    components: std::array::from_fn(|i| (e1.components[i] - e2.components[i] * Complex::i()) * h),
                    label: Polarization::Second,
                },
            ];
            for basis in [rotated, helicity] {
                let kernel = PhotonKernel::with_polarizations(c.fs.k, basis, &it);
                let value =
                    spin_sum(&kernel.amplitudes(&kernel.branch(c.p), &kernel.final_electron(c.fs.r)).unwrap());
                assert!((value - reference).abs() <= 1e-12 * reference);
            }
        }
    }

    #[test]
    fn rotation_invariance() {
        let it = Interaction::default();
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for _ in 0..100 {
            let axis = random_dir(&mut rng);
            let angle = rng.gen_range(0.0..TAU);
            let rotate = |v: ThreeVector| {
                let (s, c) = angle.sin_cos();
                v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
            };
            let t = rng.gen_range(20.0..2000.0);
            let m = it.mass();
            let d1 = random_dir(&mut rng);
            let d2 = random_dir(&mut rng);
            let kd = random_dir(&mut rng);
            let rd = random_dir(&mut rng);
            let omega = rng.gen_range(0.05..0.95) * t;
            let xi = rng.gen_range(0.0..TAU);
            let make = |a: ThreeVector, b: ThreeVector| {
                SuperpositionConfig::new(
                    ElectronState::new(t, a, m).unwrap(),
                    ElectronState::new(t, b, m).unwrap(),
                    xi,
                )
                .unwrap()
            };
            let photon_of = |d: ThreeVector| {
                PhotonSpec::new(omega, d[2].clamp(-1.0, 1.0).acos(), d[1].atan2(d[0])).unwrap()
            };
            let base = summed_square(&make(d1, d2).into(), rd, &photon_of(kd), Mode::Coherent, &it).unwrap();
            let rotated = summed_square(
                &make(rotate(d1), rotate(d2)).into(),
                rotate(rd),
                &photon_of(rotate(kd)),
                Mode::Coherent,
                &it,
            )
            .unwrap();
            assert!((base - rotated).abs() <= 1e-10 * base);
        }
    }

    #[test]
    fn summed_square_is_nonnegative() {
        let it = Interaction::default();
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        for _ in 0..200 {
            let cfg = superposition_geometry(rng.gen_range(20.0..2000.0), rng.gen_range(0.0..PI), &it.constants)
                .unwrap()
                .with_xi(rng.gen_range(0.0..TAU));
            let t = cfg.kinetic_energy();
            let photon = PhotonSpec::new(
                rng.gen_range(0.05..0.95) * t,
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..TAU),
            )
            .unwrap();
            let rd = random_dir(&mut rng);
            for mode in [Mode::Single, Mode::Coherent, Mode::Incoherent] {
                let v = summed_square(&cfg.into(), rd, &photon, mode, &it).unwrap();
                assert!(v >= 0.0 && v.is_finite());
            }
        }
    }
}
