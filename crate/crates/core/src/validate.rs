//! Seeded invariant suites with a plain-text report.
//!
//! The report contains no timings, so equal seeds and levels give
//! byte-identical text regardless of the worker count.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{FourVector, Spin, ThreeVector};
use crate::amplitude::{channel_amplitudes, spin_sum, trace_summed_square, ward_element, Interaction, Mode};
use crate::cross_section::{adcs, adcs_components, CrossSectionError, QuadratureSpec};
use crate::kinematics::{
    build_final_state, superposition_geometry, ElectronState, FinalStateKinematics, PhotonSpec, PhysicalConstants,
    Source, SuperpositionConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Quick => "quick",
            Level::Full => "full",
        }
    }

    fn pick(self, quick: usize, full: usize) -> usize {
        match self {
            Level::Quick => quick,
            Level::Full => full,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub level: Level,
    pub seed: u64,
    pub constants: PhysicalConstants,
}

impl ValidationOptions {
    pub fn new(level: Level, seed: u64) -> Self {
        ValidationOptions {
            level,
            seed,
            constants: PhysicalConstants::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub description: &'static str,
    pub checks: usize,
    /// Largest deviation found, in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    /// Set when a check could not be evaluated at all.
    pub error: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.worst <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub level: Level,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "validation level={} seed={}", self.level.name(), self.seed);
        for s in &self.suites {
            let status = if s.passed() { "PASS" } else { "FAIL" };
            let _ = write!(
                out,
                "{status} {:<12} checks={:<5} worst={:.3e} tol={:.1e}  {}",
                s.name, s.checks, s.worst, s.tolerance, s.description
            );
            if let Some(e) = &s.error {
                let _ = write!(out, "  error: {e}");
            }
            out.push('\n');
        }
        let passed = self.suites.iter().filter(|s| s.passed()).count();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{verdict} {passed}/{} suites", self.suites.len());
        out
    }
}

pub fn run(options: &ValidationOptions) -> ValidationReport {
    let it = Interaction::new(options.constants);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let level = options.level;
    let suites = vec![
        ward_suite(&mut rng, level.pick(1000, 10_000), &it),
        oracle_suite(&mut rng, level.pick(1000, 10_000), &it),
        phase_average_suite(&mut rng, level.pick(20, 60), &it),
        degenerate_suite(&mut rng, level.pick(5, 20), &it),
        mirror_suite(&mut rng, level.pick(10, 40), &it),
        convergence_suite(&mut rng, level.pick(8, 20), &it),
        golden_suite(&it),
    ];
    ValidationReport {
        level,
        seed: options.seed,
        suites,
    }
}

fn random_direction(rng: &mut ChaCha8Rng) -> ThreeVector {
    ThreeVector::from_spherical(rng.gen_range(-1.0f64..1.0).acos(), rng.gen_range(0.0..TAU))
}

/// A random point with `T ∈ [20, 2000]` keV (log-uniform) and `ω/T ∈ [0.05, 0.95]`.
fn random_kinematics(rng: &mut ChaCha8Rng, mass: f64) -> (FourVector, FinalStateKinematics) {
    let t = rng.gen_range(20.0f64.ln()..2000.0f64.ln()).exp();
    let frac = rng.gen_range(0.05..0.95);
    let p = ElectronState::new(t, random_direction(rng), mass)
        .expect("valid electron")
        .four_momentum();
    let fs = build_final_state(p, frac * t, random_direction(rng), random_direction(rng), mass).expect("allowed");
    (p, fs)
}

fn random_photon(rng: &mut ChaCha8Rng, omega: f64) -> PhotonSpec {
    let theta = rng.gen_range(-1.0f64..1.0).acos();
    PhotonSpec::new(omega, theta, rng.gen_range(0.0..TAU)).expect("valid photon")
}

/// A random photon with `ω/T ∈ [0.05, 0.95]`.
fn random_emission(rng: &mut ChaCha8Rng, kinetic_energy: f64) -> PhotonSpec {
    let omega = rng.gen_range(0.05..0.95) * kinetic_energy;
    random_photon(rng, omega)
}

fn figure_source(it: &Interaction) -> SuperpositionConfig {
    superposition_geometry(200.0, 30f64.to_radians(), &it.constants).expect("valid geometry")
}

/// Collects per-check deviations; the first evaluation error is kept.
fn finish(
    name: &'static str,
    description: &'static str,
    tolerance: f64,
    results: Vec<Result<f64, String>>,
) -> SuiteResult {
    let checks = results.len();
    let mut worst = 0.0f64;
    let mut error = None;
    for r in results {
        match r {
            Ok(d) if d.is_nan() => worst = f64::INFINITY,
            Ok(d) => worst = worst.max(d),
            Err(e) => {
                error.get_or_insert(e);
            }
        }
    }
    SuiteResult {
        name,
        description,
        checks,
        worst,
        tolerance,
        error,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ward_suite(rng: &mut ChaCha8Rng, n: usize, it: &Interaction) -> SuiteResult {
    let configs: Vec<_> = (0..n).map(|_| random_kinematics(rng, it.mass())).collect();
    let results = configs
        .par_iter()
        .map(|(p, fs)| {
            let amps = channel_amplitudes(*p, fs, it).map_err(|e| e.to_string())?;
            let scale = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
            let mut worst = 0.0f64;
            for s in Spin::ALL {
                for sp in Spin::ALL {
                    let w = ward_element(*p, fs, s, sp, it).map_err(|e| e.to_string())?;
                    worst = worst.max(w.norm() / scale);
                }
            }
            Ok(worst)
        })
        .collect();
    finish("ward", "|M(eps->k)| / max|M|", 1e-10, results)
}

fn oracle_suite(rng: &mut ChaCha8Rng, n: usize, it: &Interaction) -> SuiteResult {
    let configs: Vec<_> = (0..n).map(|_| random_kinematics(rng, it.mass())).collect();
    let results = configs
        .par_iter()
        .map(|(p, fs)| {
            let explicit = spin_sum(&channel_amplitudes(*p, fs, it).map_err(|e| e.to_string())?);
            let trace = trace_summed_square(*p, fs, it).map_err(|e| e.to_string())?;
            Ok(rel(explicit, trace))
        })
        .collect();
    finish("oracle", "spinor sum vs trace, relative", 1e-10, results)
}

fn phase_average_suite(rng: &mut ChaCha8Rng, n: usize, it: &Interaction) -> SuiteResult {
    let cfg = figure_source(it);
    let photons: Vec<_> = (0..n)
        .map(|_| random_emission(rng, 200.0))
        .collect();
    let quad = QuadratureSpec::default();
    let results = photons
        .iter()
        .map(|photon| {
            let c = adcs_components(&cfg.into(), photon, &quad, it).map_err(|e| e.to_string())?;
            let phases = 8;
            let mean = (0..phases)
                .map(|j| c.coherent_at(TAU * j as f64 / phases as f64).value)
                .sum::<f64>()
                / phases as f64;
            Ok(rel(mean, c.incoherent().value))
        })
        .collect();
    finish("xi-average", "mean over 8 phases vs incoherent", 1e-10, results)
}

fn degenerate_suite(rng: &mut ChaCha8Rng, n: usize, it: &Interaction) -> SuiteResult {
    let quad = QuadratureSpec::default();
    let cases: Vec<_> = (0..n)
        .map(|_| {
            let t = rng.gen_range(20.0f64.ln()..2000.0f64.ln()).exp();
            let e = ElectronState::new(t, random_direction(rng), it.mass()).expect("valid electron");
            (e, random_emission(rng, t))
        })
        .collect();
    let results = cases
        .iter()
        .map(|(e, photon)| {
            let single = adcs(&(*e).into(), photon, Mode::Single, &quad, it).map_err(|x| x.to_string())?;
            let cfg = SuperpositionConfig::new(*e, *e, 0.0).map_err(|x| x.to_string())?;
            let c = adcs_components(&cfg.into(), photon, &quad, it).map_err(|x| x.to_string())?;
            let doubled = rel(c.coherent_at(0.0).value, 2.0 * single.value);
            let cancelled = c.coherent_at(PI).value / single.value;
            Ok(doubled.max(cancelled))
        })
        .collect();
    finish("degenerate", "p1 = p2: xi=0 doubles, xi=pi cancels", 1e-12, results)
}

fn mirror_suite(rng: &mut ChaCha8Rng, n: usize, it: &Interaction) -> SuiteResult {
    let quad = QuadratureSpec::default();
    let cfg = figure_source(it);
    let photons: Vec<_> = (0..n)
        .map(|_| random_emission(rng, 200.0))
        .collect();
    let results = photons
        .iter()
        .enumerate()
        .map(|(i, photon)| {
            let source: Source = cfg.with_xi(if i % 2 == 0 { 0.0 } else { PI }).into();
            let mirrored = PhotonSpec::new(photon.omega, photon.theta, -photon.phi).map_err(|e| e.to_string())?;
            let a = adcs(&source, photon, Mode::Coherent, &quad, it).map_err(|e| e.to_string())?;
            let b = adcs(&source, &mirrored, Mode::Coherent, &quad, it).map_err(|e| e.to_string())?;
            Ok(rel(a.value, b.value))
        })
        .collect();
    finish("mirror", "phi_k -> -phi_k for xi in {0, pi}, relative", 1e-8, results)
}

fn convergence_suite(rng: &mut ChaCha8Rng, n: usize, it: &Interaction) -> SuiteResult {
    let quad = QuadratureSpec::default();
    let cfg = figure_source(it);
    let photons: Vec<_> = (0..n).map(|_| random_photon(rng, 10.0)).collect();
    let results = photons
        .iter()
        .map(|photon| {
            let a = adcs(&cfg.into(), photon, Mode::Coherent, &quad, it).map_err(|e| e.to_string())?;
            let b = adcs(&cfg.into(), photon, Mode::Coherent, &quad.doubled(), it).map_err(|e| e.to_string())?;
            Ok(rel(a.value, b.value))
        })
        .collect();
    finish("convergence", "default vs doubled orders, relative", 1e-5, results)
}

/// Frozen `dσ/dk` values in keV⁻³ sr⁻¹ at the default quadrature:
/// (T, separation°, ξ, mode, ω, θ_k°, φ_k°, value).
const GOLDEN: [(f64, f64, f64, Mode, f64, f64, f64, f64); 8] = [
    (200.0, 0.0, 0.0, Mode::Single, 20.0, 30.0, 0.0, 6.94673367159337e-13),
    (200.0, 0.0, 0.0, Mode::Single, 100.0, 30.0, 0.0, 6.362941453791016e-14),
    (200.0, 0.0, 0.0, Mode::Single, 180.0, 30.0, 0.0, 1.2226165261962406e-14),
    (200.0, 30.0, 0.0, Mode::Coherent, 10.0, 15.0, 0.0, 2.962355060019646e-12),
    (200.0, 30.0, PI, Mode::Coherent, 10.0, 15.0, 0.0, 2.4147436862263345e-12),
    (200.0, 30.0, 0.0, Mode::Incoherent, 100.0, 40.0, 90.0, 4.5025692110737187e-14),
    (20.0, 30.0, PI / 2.0, Mode::Coherent, 10.0, 60.0, 45.0, 2.0619898327246735e-12),
    (2000.0, 30.0, 0.0, Mode::Coherent, 1000.0, 15.0, 0.0, 5.55904372190198e-14),
];

pub(crate) fn golden_value(
    entry: &(f64, f64, f64, Mode, f64, f64, f64, f64),
    it: &Interaction,
) -> Result<f64, CrossSectionError> {
    let &(t, sep, xi, mode, omega, theta, phi, _) = entry;
    let cfg = superposition_geometry(t, sep.to_radians(), &it.constants)?.with_xi(xi);
    let source: Source = if mode == Mode::Single { cfg.electron_1.into() } else { cfg.into() };
    let photon = PhotonSpec::new(omega, theta.to_radians(), phi.to_radians())?;
    Ok(adcs(&source, &photon, mode, &QuadratureSpec::default(), it)?.value)
}

fn golden_suite(it: &Interaction) -> SuiteResult {
    let results = GOLDEN
        .iter()
        .map(|entry| {
            let v = golden_value(entry, it).map_err(|e| e.to_string())?;
            Ok(rel(v, entry.7))
        })
        .collect();
    finish("golden", "frozen spectrum points, relative", 1e-8, results)
}
