//! Photon-energy and photon-angle differential cross section `dσ/dk`,
//! integrated over the unobserved final electron direction:
//!
//! ```text
//! dσ/dk = ω |r| / (8 (2π)⁵ |p|) ∫ dΩ_r (1/2) Σ |iM|²
//! ```
//!
//! The integrand carries `1/|q|⁴` and is sharply peaked where the final
//! electron runs along `p - k`. Each branch therefore gets its own
//! integration frame: polar axis along `p - k`, Gauss-Legendre in
//! `ln |q|²` (which flattens the peak), periodic trapezoid in azimuth.
//!
//! A coherent superposition splits exactly into the two single-branch
//! integrands plus an interference term. The single-branch pieces are
//! integrated in their own frames. The interference term has a peak under
//! each branch and is split between the two frames with the smooth weights
//! `h_i = |q_j|⁴ / (|q_1|⁴ + |q_2|⁴)`, which sum to one.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Complex, FourVector, ThreeVector};
use crate::amplitude::{cross_sum, spin_sum, AmplitudeError, BranchKernel, Interaction, Mode, PhotonKernel};
use crate::kinematics::{final_electron_energy, final_momentum, KinematicsError, PhotonSpec, Source};
use crate::quadrature::{gauss_legendre, pairwise_sum, pairwise_sum_complex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrossSectionError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Amplitude(#[from] AmplitudeError),
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),
}

impl CrossSectionError {
    pub fn is_kinematic(&self) -> bool {
        matches!(
            self,
            CrossSectionError::Kinematics(KinematicsError::KinematicallyForbidden { .. })
        )
    }
}

/// Tensor rule orders over the final electron sphere and the refinement policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss-Legendre order in the polar variable.
    pub n_theta: usize,
    /// Trapezoid points in azimuth.
    pub n_phi: usize,
    pub refine_tol: f64,
    pub max_doublings: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            n_theta: 64,
            n_phi: 128,
            refine_tol: 1e-5,
            max_doublings: 4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), CrossSectionError> {
        if self.n_theta < 8 {
            return Err(CrossSectionError::InvalidQuadrature(format!(
                "n_theta must be at least 8, got {}",
                self.n_theta
            )));
        }
        if self.n_phi < 16 {
            return Err(CrossSectionError::InvalidQuadrature(format!(
                "n_phi must be at least 16, got {}",
                self.n_phi
            )));
        }
        if !(self.refine_tol > 0.0) {
            return Err(CrossSectionError::InvalidQuadrature(format!(
                "refine_tol must be positive, got {}",
                self.refine_tol
            )));
        }
        if self.max_doublings > 10 {
            return Err(CrossSectionError::InvalidQuadrature(format!(
                "max_doublings must be at most 10, got {}",
                self.max_doublings
            )));
        }
        Ok(())
    }

    /// Both orders doubled.
    pub fn doubled(self) -> Self {
        QuadratureSpec {
            n_theta: 2 * self.n_theta,
            n_phi: 2 * self.n_phi,
            ..self
        }
    }

    /// A fixed rule with no refinement.
    pub fn fixed(n_theta: usize, n_phi: usize) -> Self {
        QuadratureSpec {
            n_theta,
            n_phi,
            max_doublings: 0,
            ..Default::default()
        }
    }

    /// Orders at refinement level `level`; level -1 is the half rule used
    /// for the first error estimate.
    fn orders(&self, level: i32) -> (usize, usize) {
        if level < 0 {
            (self.n_theta / 2, self.n_phi / 2)
        } else {
            (self.n_theta << level, self.n_phi << level)
        }
    }
}

/// `dσ/dk` in keV⁻³ sr⁻¹ (area per keV per steradian).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferentialCrossSection {
    pub value: f64,
    pub mode: Mode,
    /// `|value(N) - value(N/2)| / value(N)`
    pub error_estimate: f64,
    pub converged: bool,
    /// Integrand terms dropped because `|q|²` fell below the floor.
    pub near_singular: u64,
    /// Finest orders used.
    pub n_theta: usize,
    pub n_phi: usize,
}

impl DifferentialCrossSection {
    /// The same quantity with the area converted from keV⁻² to barn.
    pub fn in_barn(self, hbar_c_sq_barn: f64) -> Self {
        DifferentialCrossSection {
            value: self.value * hbar_c_sq_barn,
            ..self
        }
    }
}

/// One angular integral together with the value one refinement level earlier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined<T> {
    pub value: T,
    pub previous: T,
    pub converged: bool,
    pub n_theta: usize,
    pub n_phi: usize,
}

/// Angular integrals from which every mode and phase is assembled.
///
/// `single[i]` is `∫dΩ (1/2)Σ|M_i|²`; `cross` is `∫dΩ (1/2)Σ conj(M₁) M₂`.
/// The coherent value for phase ξ is
/// `prefactor · [(single₁ + single₂)/2 + Re(e^{iξ} cross)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdcsComponents {
    pub prefactor: f64,
    pub xi: f64,
    pub single: Vec<Refined<f64>>,
    pub cross: Option<Refined<Complex>>,
    pub near_singular: u64,
}

#[derive(Clone, Copy)]
enum Stage {
    Current,
    Previous,
}

impl AdcsComponents {
    fn pick<T: Copy>(r: &Refined<T>, stage: Stage) -> T {
        match stage {
            Stage::Current => r.value,
            Stage::Previous => r.previous,
        }
    }

    fn incoherent_raw(&self, stage: Stage) -> f64 {
        let n = self.single.len() as f64;
        self.single.iter().map(|r| Self::pick(r, stage)).sum::<f64>() / n
    }

    fn coherent_raw(&self, xi: f64, stage: Stage) -> f64 {
        let cross = self
            .cross
            .as_ref()
            .map(|c| (Complex::from_polar(1.0, xi) * Self::pick(c, stage)).re)
            .unwrap_or(0.0);
        // the split integration can undershoot an exact cancellation by roundoff
        (self.incoherent_raw(stage) + cross).max(0.0)
    }

    fn finish(&self, mode: Mode, current: f64, previous: f64, parts: &[(bool, usize, usize)]) -> DifferentialCrossSection {
        let value = self.prefactor * current;
        let prev = self.prefactor * previous;
        let diff = (value - prev).abs();
        let error_estimate = if diff == 0.0 { 0.0 } else { diff / value.abs() };
        DifferentialCrossSection {
            value,
            mode,
            error_estimate,
            converged: parts.iter().all(|p| p.0),
            near_singular: self.near_singular,
            n_theta: parts.iter().map(|p| p.1).max().unwrap_or(0),
            n_phi: parts.iter().map(|p| p.2).max().unwrap_or(0),
        }
    }

    fn meta<T>(r: &Refined<T>) -> (bool, usize, usize) {
        (r.converged, r.n_theta, r.n_phi)
    }

    /// Single-branch result for branch `branch` (0-based).
    pub fn single(&self, branch: usize) -> DifferentialCrossSection {
        let r = &self.single[branch];
        self.finish(Mode::Single, r.value, r.previous, &[Self::meta(r)])
    }

    pub fn incoherent(&self) -> DifferentialCrossSection {
        let parts: Vec<_> = self.single.iter().map(Self::meta).collect();
        self.finish(
            Mode::Incoherent,
            self.incoherent_raw(Stage::Current),
            self.incoherent_raw(Stage::Previous),
            &parts,
        )
    }

    /// Coherent result for an arbitrary relative phase.
    pub fn coherent_at(&self, xi: f64) -> DifferentialCrossSection {
        let mut parts: Vec<_> = self.single.iter().map(Self::meta).collect();
        parts.extend(self.cross.as_ref().map(Self::meta));
        self.finish(
            Mode::Coherent,
            self.coherent_raw(xi, Stage::Current),
            self.coherent_raw(xi, Stage::Previous),
            &parts,
        )
    }

    /// Result for `mode`, using the source's relative phase for coherent mode.
    /// A single-electron source gives the same value in every mode.
    pub fn value(&self, mode: Mode) -> DifferentialCrossSection {
        if self.single.len() == 1 {
            let mut out = self.single(0);
            out.mode = mode;
            return out;
        }
        match mode {
            Mode::Single => self.single(0),
            Mode::Incoherent => self.incoherent(),
            Mode::Coherent => self.coherent_at(self.xi),
        }
    }
}

/// Which angular integrals to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Wanted {
    single: [bool; 2],
    cross: bool,
}

impl Wanted {
    fn for_mode(mode: Mode, branches: usize) -> Self {
        if branches == 1 {
            return Wanted {
                single: [true, false],
                cross: false,
            };
        }
        match mode {
            Mode::Single => Wanted {
                single: [true, false],
                cross: false,
            },
            Mode::Incoherent => Wanted {
                single: [true, true],
                cross: false,
            },
            Mode::Coherent => Wanted::all(),
        }
    }

    fn all() -> Self {
        Wanted {
            single: [true, true],
            cross: true,
        }
    }

    fn any(&self) -> bool {
        self.single[0] || self.single[1] || self.cross
    }

    fn needs_channel(&self, c: usize) -> bool {
        self.single[c] || self.cross
    }
}

/// Integration frame for one branch: polar axis along `p - k`, with
/// `|q|² = P² + R² - 2PR cosθ'` mapped logarithmically.
#[derive(Debug, Clone, Copy)]
struct ChannelFrame {
    axis: ThreeVector,
    e1: ThreeVector,
    e2: ThreeVector,
    /// `(P - R)²`, the smallest reachable `|q|²`.
    q2_min: f64,
    /// Length of the `ln |q|²` interval.
    log_span: f64,
    /// `2PR`
    b: f64,
}

impl ChannelFrame {
    fn new(p: FourVector, k: FourVector, r_mag: f64) -> Self {
        let pk = p.spatial() - k.spatial();
        let big_p = pk.norm();
        let axis = pk * (1.0 / big_p);
        let helper = if axis[2].abs() < 0.9 { ThreeVector::Z } else { ThreeVector::X };
        let e1 = helper.cross(axis);
        let e1 = e1 * (1.0 / e1.norm());
        let e2 = axis.cross(e1);
        // P² - R² = 2 p·k, so P - R is free of cancellation
        let q_min = 2.0 * p.dot(k) / (big_p + r_mag);
        let ratio = r_mag / big_p;
        ChannelFrame {
            axis,
            e1,
            e2,
            q2_min: q_min * q_min,
            log_span: 2.0 * (ratio.ln_1p() - (-ratio).ln_1p()),
            b: 2.0 * big_p * r_mag,
        }
    }

    /// Final electron directions and solid-angle weights, polar-major order.
    fn nodes(&self, n_theta: usize, n_phi: usize) -> Vec<(ThreeVector, f64)> {
        let (u, w) = gauss_legendre(n_theta);
        let dphi = TAU / n_phi as f64;
        let azimuth: Vec<(f64, f64)> = (0..n_phi).map(|l| (dphi * l as f64).sin_cos()).collect();
        let mut out = Vec::with_capacity(n_theta * n_phi);
        for (&u, &w) in u.iter().zip(&w) {
            let delta = 0.5 * (u + 1.0) * self.log_span;
            let q2 = self.q2_min * delta.exp();
            let one_minus_cos = (self.q2_min * delta.exp_m1() / self.b).clamp(0.0, 2.0);
            let cos = 1.0 - one_minus_cos;
            let sin = (one_minus_cos * (2.0 - one_minus_cos)).sqrt();
            let weight = w * 0.5 * self.log_span * q2 / self.b * dphi;
            for &(sp, cp) in &azimuth {
                let dir = self.axis * cos + (self.e1 * cp + self.e2 * sp) * sin;
                out.push((dir, weight));
            }
        }
        out
    }
}

/// Everything fixed by (source, photon).
struct Integrand {
    kernel: PhotonKernel,
    branches: Vec<BranchKernel>,
    frames: Vec<ChannelFrame>,
    e_r: f64,
    r_mag: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct LevelSums {
    single: [f64; 2],
    cross: Complex,
    near_singular: u64,
}

impl Integrand {
    fn new(source: &Source, photon: &PhotonSpec, interaction: &Interaction) -> Result<Self, CrossSectionError> {
        let m = interaction.mass();
        let lead = source.leading_electron();
        let e_r = final_electron_energy(lead.total_energy(), photon.omega, m)?;
        let r_mag = final_momentum(lead.kinetic_energy, photon.omega, m);
        let kernel = PhotonKernel::new(photon, interaction)?;
        let momenta: Vec<FourVector> = match source {
            Source::Electron(e) => vec![e.four_momentum()],
            Source::Superposition(c) => c.electrons().iter().map(|e| e.four_momentum()).collect(),
        };
        let k = photon.four_momentum();
        Ok(Integrand {
            branches: momenta.iter().map(|&p| kernel.branch(p)).collect(),
            frames: momenta.iter().map(|&p| ChannelFrame::new(p, k, r_mag)).collect(),
            kernel,
            e_r,
            r_mag,
        })
    }

    fn level(&self, n_theta: usize, n_phi: usize, wanted: Wanted) -> LevelSums {
        let mut sums = LevelSums::default();
        let two = self.branches.len() == 2;
        for c in 0..self.branches.len() {
            if !wanted.needs_channel(c) {
                continue;
            }
            let nodes = self.frames[c].nodes(n_theta, n_phi);
            let other = 1 - c;
            let terms: Vec<(f64, Complex, u64)> = nodes
                .par_iter()
                .with_min_len(64)
                .map(|&(dir, w)| {
                    let r = FourVector::from_parts(self.e_r, dir * self.r_mag);
                    let fe = self.kernel.final_electron(r);
                    let own = self.kernel.amplitudes(&self.branches[c], &fe);
                    let mut skipped = 0;
                    let single = match &own {
                        Ok(a) if wanted.single[c] => w * spin_sum(a),
                        Ok(_) => 0.0,
                        Err(_) => {
                            skipped += 1;
                            0.0
                        }
                    };
                    let mut cross = Complex::new(0.0, 0.0);
                    if two && wanted.cross {
                        match (&own, self.kernel.amplitudes(&self.branches[other], &fe)) {
                            (Ok(a), Ok(b)) => {
                                let q2_own = self.kernel.transfer_sq(&self.branches[c], &fe);
                                let q2_other = self.kernel.transfer_sq(&self.branches[other], &fe);
                                let ratio = q2_own / q2_other;
                                let h = 1.0 / (1.0 + ratio * ratio);
                                // cross_sum is conj(M₁)M₂ regardless of which frame we are in
                                let x = if c == 0 { cross_sum(a, &b) } else { cross_sum(&b, a) };
                                cross = x * (w * h);
                            }
                            _ => skipped += 1,
                        }
                    }
                    (single, cross, skipped)
                })
                .collect();
            let singles: Vec<f64> = terms.iter().map(|t| t.0).collect();
            let crosses: Vec<Complex> = terms.iter().map(|t| t.1).collect();
            if wanted.single[c] {
                sums.single[c] = pairwise_sum(&singles);
            }
            if wanted.cross {
                sums.cross += pairwise_sum_complex(&crosses);
            }
            sums.near_singular += terms.iter().map(|t| t.2).sum::<u64>();
        }
        sums
    }
}

fn prefactor(source: &Source, photon: &PhotonSpec, r_mag: f64) -> f64 {
    let p_mag = source.leading_electron().momentum();
    photon.omega * r_mag / (8.0 * TAU.powi(5) * p_mag)
}

fn integrate(
    source: &Source,
    photon: &PhotonSpec,
    wanted: Wanted,
    quad: &QuadratureSpec,
    interaction: &Interaction,
) -> Result<AdcsComponents, CrossSectionError> {
    quad.validate()?;
    let integrand = Integrand::new(source, photon, interaction)?;
    let branches = integrand.branches.len();
    let wanted = Wanted {
        single: [wanted.single[0], wanted.single[1] && branches == 2],
        cross: wanted.cross && branches == 2,
    };

    let (nt, np) = quad.orders(-1);
    let half = integrand.level(nt, np, wanted);
    let (nt, np) = quad.orders(0);
    let full = integrand.level(nt, np, wanted);
    let mut near_singular = half.near_singular + full.near_singular;

    let mut single: Vec<Refined<f64>> = (0..branches)
        .map(|b| Refined {
            value: full.single[b],
            previous: half.single[b],
            converged: false,
            n_theta: nt,
            n_phi: np,
        })
        .collect();
    let mut cross = wanted.cross.then(|| Refined {
        value: full.cross,
        previous: half.cross,
        converged: false,
        n_theta: nt,
        n_phi: np,
    });

    let tol = quad.refine_tol;
    let mut level = 0;
    loop {
        for (b, s) in single.iter_mut().enumerate() {
            if wanted.single[b] && !s.converged {
                s.converged = (s.value - s.previous).abs() <= tol * s.value.abs();
            }
        }
        if let Some(x) = cross.as_mut() {
            if !x.converged {
                let scale = 0.5 * (single[0].value + single.get(1).map_or(0.0, |s| s.value));
                x.converged = (x.value - x.previous).norm() <= tol * scale;
            }
        }
        let pending = Wanted {
            single: [
                wanted.single[0] && !single[0].converged,
                wanted.single[1] && !single[1].converged,
            ],
            cross: cross.as_ref().is_some_and(|x| !x.converged),
        };
        if !pending.any() || level >= quad.max_doublings as i32 {
            break;
        }
        level += 1;
        let (nt, np) = quad.orders(level);
        let next = integrand.level(nt, np, pending);
        near_singular += next.near_singular;
        for (b, s) in single.iter_mut().enumerate() {
            if pending.single[b] {
                *s = Refined {
                    value: next.single[b],
                    previous: s.value,
                    converged: false,
                    n_theta: nt,
                    n_phi: np,
                };
            }
        }
        if pending.cross {
            if let Some(x) = cross.as_mut() {
                *x = Refined {
                    value: next.cross,
                    previous: x.value,
                    converged: false,
                    n_theta: nt,
                    n_phi: np,
                };
            }
        }
    }
    // components that were never requested count as converged
    for (b, s) in single.iter_mut().enumerate() {
        if !wanted.single[b] {
            s.converged = true;
        }
    }

    let xi = match source {
        Source::Superposition(c) => c.xi,
        Source::Electron(_) => 0.0,
    };
    Ok(AdcsComponents {
        prefactor: prefactor(source, photon, integrand.r_mag),
        xi,
        single,
        cross,
        near_singular,
    })
}

/// All angular integrals for a source and photon, from which any mode and
/// any relative phase can be read off.
pub fn adcs_components(
    source: &Source,
    photon: &PhotonSpec,
    quad: &QuadratureSpec,
    interaction: &Interaction,
) -> Result<AdcsComponents, CrossSectionError> {
    integrate(source, photon, Wanted::all(), quad, interaction)
}

/// Angular differential cross section `dσ/(dω dΩ_k)`.
pub fn adcs(
    source: &Source,
    photon: &PhotonSpec,
    mode: Mode,
    quad: &QuadratureSpec,
    interaction: &Interaction,
) -> Result<DifferentialCrossSection, CrossSectionError> {
    let branches = match source {
        Source::Electron(_) => 1,
        Source::Superposition(_) => 2,
    };
    let comps = integrate(source, photon, Wanted::for_mode(mode, branches), quad, interaction)?;
    Ok(comps.value(mode))
}

/// Angular differential power `ω dσ/dk`.
pub fn adp(
    source: &Source,
    photon: &PhotonSpec,
    mode: Mode,
    quad: &QuadratureSpec,
    interaction: &Interaction,
) -> Result<DifferentialCrossSection, CrossSectionError> {
    let mut out = adcs(source, photon, mode, quad, interaction)?;
    out.value *= photon.omega;
    Ok(out)
}

/// The largest photon energy (exclusive) the source can emit.
pub fn max_photon_energy(source: &Source) -> f64 {
    source.kinetic_energy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::summed_square;
    use crate::kinematics::{superposition_geometry, ElectronState};
    use std::f64::consts::{FRAC_PI_6, PI};

    fn cfg() -> crate::kinematics::SuperpositionConfig {
        superposition_geometry(200.0, FRAC_PI_6, &Default::default()).unwrap()
    }

    #[test]
    fn frame_nodes_cover_the_sphere() {
        let it = Interaction::default();
        let e = ElectronState::new(200.0, ThreeVector::from_spherical(0.3, 0.2), it.mass()).unwrap();
        let photon = PhotonSpec::new(10.0, 0.8, 2.0).unwrap();
        let r_mag = final_momentum(200.0, 10.0, it.mass());
        let frame = ChannelFrame::new(e.four_momentum(), photon.four_momentum(), r_mag);
        let nodes = frame.nodes(64, 128);
        let total = pairwise_sum(&nodes.iter().map(|n| n.1).collect::<Vec<_>>());
        assert!((total - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
        // smooth test function: ∫ z² dΩ = 4π/3
        let z2 = pairwise_sum(&nodes.iter().map(|n| n.1 * n.0[2] * n.0[2]).collect::<Vec<_>>());
        assert!((z2 - 4.0 * PI / 3.0).abs() < 1e-10);
        assert!(nodes.iter().all(|n| (n.0.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn incoherent_is_mean_of_singles() {
        let it = Interaction::default();
        let quad = QuadratureSpec::default();
        let c = cfg();
        let photon = PhotonSpec::new(10.0, 0.4, 0.7).unwrap();
        let inc = adcs(&c.into(), &photon, Mode::Incoherent, &quad, &it).unwrap();
        let s1 = adcs(&c.electron_1.into(), &photon, Mode::Single, &quad, &it).unwrap();
        let s2 = adcs(&c.electron_2.into(), &photon, Mode::Single, &quad, &it).unwrap();
        let mean = 0.5 * (s1.value + s2.value);
        assert!((inc.value - mean).abs() <= 1e-12 * mean);
    }

    #[test]
    fn single_electron_azimuthal_symmetry() {
        let it = Interaction::default();
        let e = ElectronState::new(200.0, ThreeVector::Z, it.mass()).unwrap();
        let quad = QuadratureSpec::default();
        let reference = adcs(&e.into(), &PhotonSpec::new(10.0, 0.5, 0.0).unwrap(), Mode::Single, &quad, &it)
            .unwrap()
            .value;
        for j in 1..8 {
            let photon = PhotonSpec::new(10.0, 0.5, j as f64 * PI / 4.0).unwrap();
            let v = adcs(&e.into(), &photon, Mode::Single, &quad, &it).unwrap().value;
            assert!((v - reference).abs() <= 1e-8 * reference, "phi index {j}: {v} vs {reference}");
        }
    }

    #[test]
    fn components_agree_with_direct_modes() {
        let it = Interaction::default();
        let quad = QuadratureSpec::default();
        let c = cfg().with_xi(0.9);
        let photon = PhotonSpec::new(40.0, 0.2, 1.0).unwrap();
        let comps = adcs_components(&c.into(), &photon, &quad, &it).unwrap();
        for mode in [Mode::Single, Mode::Incoherent, Mode::Coherent] {
            let direct = adcs(&c.into(), &photon, mode, &quad, &it).unwrap();
            assert!((comps.value(mode).value - direct.value).abs() <= 1e-13 * direct.value, "{mode:?}");
        }
    }

    #[test]
    fn plain_tensor_rule_oracle() {
        // Brute force in the lab frame: Gauss-Legendre in cosθ_r split into
        // panels graded toward the peak, with the coherent integrand evaluated
        // through the explicit per-channel path.
        let it = Interaction::default();
        let c = superposition_geometry(500.0, 0.8, &it.constants).unwrap().with_xi(1.0);
        let photon = PhotonSpec::new(250.0, 0.6, 0.4).unwrap();
        let fast = adcs(&c.into(), &photon, Mode::Coherent, &QuadratureSpec::default(), &it).unwrap();
        assert!(fast.converged);

        let source: Source = c.into();
        let (gx, gw) = gauss_legendre(16);
        // panels in the polar angle about each branch axis cannot be shared, so
        // integrate over the lab sphere with many uniform panels in θ and φ
        let n_theta_panels = 96;
        let n_phi = 256;
        let r_mag = final_momentum(500.0, 250.0, it.mass());
        let mut total = 0.0;
        for panel in 0..n_theta_panels {
            let a = PI * panel as f64 / n_theta_panels as f64;
            let b = PI * (panel + 1) as f64 / n_theta_panels as f64;
            for (x, w) in gx.iter().zip(&gw) {
                let theta = 0.5 * (a + b) + 0.5 * (b - a) * x;
                let wt = 0.5 * (b - a) * w * theta.sin();
                let mut row = 0.0;
                for l in 0..n_phi {
                    let phi = TAU * (l as f64 + 0.5) / n_phi as f64;
                    let dir = ThreeVector::from_spherical(theta, phi);
                    row += summed_square(&source, dir, &photon, Mode::Coherent, &it).unwrap();
                }
                total += wt * row * TAU / n_phi as f64;
            }
        }
        let brute = total * photon.omega * r_mag / (8.0 * TAU.powi(5) * c.electron_1.momentum());
        assert!((brute - fast.value).abs() <= 1e-4 * fast.value, "brute {brute} vs fast {}", fast.value);
    }
}
