//! Dirac algebra in the standard (Dirac) representation.
//!
//! Metric signature is (+,-,-,-). Four-vectors are contravariant with the
//! time component at index 0. All energies and momenta are in keV.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Complex = Complex64;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

/// Relative tolerance on `p·p - m²` accepted by [`spinor_u`].
pub const ON_SHELL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum AlgebraError {
    #[error("momentum is off shell: p·p = {invariant} keV², expected m² = {mass_sq} keV²")]
    OffShell { invariant: f64, mass_sq: f64 },
    #[error("energy {energy} keV is below the rest mass {mass} keV")]
    BelowMass { energy: f64, mass: f64 },
    #[error("direction vector has zero length")]
    ZeroDirection,
}

/// A Cartesian 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThreeVector(pub [f64; 3]);

impl ThreeVector {
    pub const X: ThreeVector = ThreeVector([1.0, 0.0, 0.0]);
    pub const Y: ThreeVector = ThreeVector([0.0, 1.0, 0.0]);
    pub const Z: ThreeVector = ThreeVector([0.0, 0.0, 1.0]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        ThreeVector([x, y, z])
    }

    /// Unit vector with polar angle `theta` from +z and azimuth `phi` from +x.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        ThreeVector([st * cp, st * sp, ct])
    }

    pub fn dot(self, other: ThreeVector) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(self, other: ThreeVector) -> ThreeVector {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        ThreeVector([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(self) -> Result<ThreeVector, AlgebraError> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(AlgebraError::ZeroDirection);
        }
        Ok(self * (1.0 / n))
    }
}

impl Index<usize> for ThreeVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for ThreeVector {
    type Output = ThreeVector;
    fn add(self, o: ThreeVector) -> ThreeVector {
        ThreeVector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for ThreeVector {
    type Output = ThreeVector;
    fn sub(self, o: ThreeVector) -> ThreeVector {
        ThreeVector([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for ThreeVector {
    type Output = ThreeVector;
    fn neg(self) -> ThreeVector {
        ThreeVector([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for ThreeVector {
    type Output = ThreeVector;
    fn mul(self, s: f64) -> ThreeVector {
        ThreeVector([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Mul<ThreeVector> for f64 {
    type Output = ThreeVector;
    fn mul(self, v: ThreeVector) -> ThreeVector {
        v * self
    }
}

/// A contravariant Minkowski four-vector `(t, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector([t, x, y, z])
    }

    pub fn from_parts(t: f64, space: ThreeVector) -> Self {
        FourVector([t, space.0[0], space.0[1], space.0[2]])
    }

    pub fn time(self) -> f64 {
        self.0[0]
    }

    pub fn spatial(self) -> ThreeVector {
        ThreeVector([self.0[1], self.0[2], self.0[3]])
    }

    /// Minkowski product with metric diag(+1,-1,-1,-1).
    pub fn dot(self, o: FourVector) -> f64 {
        self.0[0] * o.0[0] - self.0[1] * o.0[1] - self.0[2] * o.0[2] - self.0[3] * o.0[3]
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    /// The same vector with complex components, for slashing together with
    /// polarization vectors.
    pub fn to_complex(self) -> [Complex; 4] {
        self.0.map(|c| Complex::new(c, 0.0))
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|c| -c))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector(self.0.map(|c| c * s))
    }
}

/// Minkowski product of two complex four-vectors, conjugating the first.
pub fn minkowski_conj_dot(a: &[Complex; 4], b: &[Complex; 4]) -> Complex {
    a[0].conj() * b[0] - a[1].conj() * b[1] - a[2].conj() * b[2] - a[3].conj() * b[3]
}

/// A 4x4 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix4(pub [[Complex; 4]; 4]);

impl Matrix4 {
    pub const ZERO: Matrix4 = Matrix4([[ZERO; 4]; 4]);
    pub const IDENTITY: Matrix4 = Matrix4([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ONE, ZERO, ZERO],
        [ZERO, ZERO, ONE, ZERO],
        [ZERO, ZERO, ZERO, ONE],
    ]);

    pub fn scaled(&self, s: Complex) -> Matrix4 {
        Matrix4(self.0.map(|row| row.map(|x| x * s)))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix4 {
        Matrix4(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i].conj())))
    }

    pub fn trace(&self) -> Complex {
        self.0[0][0] + self.0[1][1] + self.0[2][2] + self.0[3][3]
    }

    pub fn mul_vec(&self, v: &BiSpinor) -> BiSpinor {
        BiSpinor(std::array::from_fn(|i| {
            let r = &self.0[i];
            r[0] * v.0[0] + r[1] * v.0[1] + r[2] * v.0[2] + r[3] * v.0[3]
        }))
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }
}

impl Add for Matrix4 {
    type Output = Matrix4;
    fn add(self, o: Matrix4) -> Matrix4 {
        Matrix4(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }
}

impl AddAssign for Matrix4 {
    fn add_assign(&mut self, o: Matrix4) {
        *self = *self + o;
    }
}

impl Sub for Matrix4 {
    type Output = Matrix4;
    fn sub(self, o: Matrix4) -> Matrix4 {
        Matrix4(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] - o.0[i][j])))
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, o: Matrix4) -> Matrix4 {
        Matrix4(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                self.0[i][0] * o.0[0][j]
                    + self.0[i][1] * o.0[1][j]
                    + self.0[i][2] * o.0[2][j]
                    + self.0[i][3] * o.0[3][j]
            })
        }))
    }
}

impl Mul<f64> for Matrix4 {
    type Output = Matrix4;
    fn mul(self, s: f64) -> Matrix4 {
        Matrix4(self.0.map(|row| row.map(|x| x * s)))
    }
}

/// A four-component Dirac column spinor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BiSpinor(pub [Complex; 4]);

impl BiSpinor {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: Complex) -> BiSpinor {
        BiSpinor(self.0.map(|c| c * s))
    }
}

impl Sub for BiSpinor {
    type Output = BiSpinor;
    fn sub(self, o: BiSpinor) -> BiSpinor {
        BiSpinor(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Add for BiSpinor {
    type Output = BiSpinor;
    fn add(self, o: BiSpinor) -> BiSpinor {
        BiSpinor(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

/// A row spinor, the result of [`dirac_adjoint`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RowSpinor(pub [Complex; 4]);

impl RowSpinor {
    /// Row times column.
    pub fn dot(&self, v: &BiSpinor) -> Complex {
        self.0[0] * v.0[0] + self.0[1] * v.0[1] + self.0[2] * v.0[2] + self.0[3] * v.0[3]
    }

    pub fn mul_mat(&self, m: &Matrix4) -> RowSpinor {
        RowSpinor(std::array::from_fn(|j| {
            self.0[0] * m.0[0][j] + self.0[1] * m.0[1][j] + self.0[2] * m.0[2][j] + self.0[3] * m.0[3][j]
        }))
    }

    /// Inverts [`dirac_adjoint`]: returns `γ⁰ (ū)†`.
    pub fn dirac_adjoint(&self) -> BiSpinor {
        let c = self.0.map(|x| x.conj());
        BiSpinor([c[0], c[1], -c[2], -c[3]])
    }
}

/// `ū = u†γ⁰`.
pub fn dirac_adjoint(u: &BiSpinor) -> RowSpinor {
    let c = u.0.map(|x| x.conj());
    RowSpinor([c[0], c[1], -c[2], -c[3]])
}

const GAMMA: [Matrix4; 4] = [
    Matrix4([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ONE, ZERO, ZERO],
        [ZERO, ZERO, Complex::new(-1.0, 0.0), ZERO],
        [ZERO, ZERO, ZERO, Complex::new(-1.0, 0.0)],
    ]),
    Matrix4([
        [ZERO, ZERO, ZERO, ONE],
        [ZERO, ZERO, ONE, ZERO],
        [ZERO, Complex::new(-1.0, 0.0), ZERO, ZERO],
        [Complex::new(-1.0, 0.0), ZERO, ZERO, ZERO],
    ]),
    Matrix4([
        [ZERO, ZERO, ZERO, Complex::new(0.0, -1.0)],
        [ZERO, ZERO, I, ZERO],
        [ZERO, I, ZERO, ZERO],
        [Complex::new(0.0, -1.0), ZERO, ZERO, ZERO],
    ]),
    Matrix4([
        [ZERO, ZERO, ONE, ZERO],
        [ZERO, ZERO, ZERO, Complex::new(-1.0, 0.0)],
        [Complex::new(-1.0, 0.0), ZERO, ZERO, ZERO],
        [ZERO, ONE, ZERO, ZERO],
    ]),
];

/// Dirac-representation gamma matrix `γ^mu`.
///
/// Panics if `mu > 3`.
pub fn gamma(mu: usize) -> Matrix4 {
    assert!(mu < 4, "gamma matrix index {mu} out of range 0..=3");
    GAMMA[mu]
}

/// `γ^μ a_μ` for a complex four-vector `a` (contravariant components).
pub fn slash_complex(a: &[Complex; 4]) -> Matrix4 {
    // [[a0, -σ·a], [σ·a, -a0]] with σ·a = [[a3, a1 - i a2], [a1 + i a2, -a3]]
    let [a0, a1, a2, a3] = *a;
    let minus = a1 - I * a2;
    let plus = a1 + I * a2;
    Matrix4([
        [a0, ZERO, -a3, -minus],
        [ZERO, a0, -plus, a3],
        [a3, minus, -a0, ZERO],
        [plus, -a3, ZERO, -a0],
    ])
}

/// `p̸ = γ^μ p_μ`.
pub fn slash(p: FourVector) -> Matrix4 {
    slash_complex(&p.to_complex())
}

/// `p̸ + m I`, the completeness-relation numerator.
pub fn slash_plus_mass(p: FourVector, m: f64) -> Matrix4 {
    let mut s = slash(p);
    for i in 0..4 {
        s.0[i][i] += m;
    }
    s
}

/// Spin projection along the lab z axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Positive-energy spinor `u_s(p) = √(E+m) (χ_s, σ·p χ_s / (E+m))`,
/// normalized to `ū u = 2m`.
pub fn spinor_u(p: FourVector, s: Spin, m: f64) -> Result<BiSpinor, AlgebraError> {
    let e = p.time();
    if e < m {
        return Err(AlgebraError::BelowMass { energy: e, mass: m });
    }
    let inv = p.norm_sqr();
    if (inv - m * m).abs() > ON_SHELL_TOLERANCE * m * m {
        return Err(AlgebraError::OffShell {
            invariant: inv,
            mass_sq: m * m,
        });
    }
    Ok(spinor_u_unchecked(p, s, m))
}

/// [`spinor_u`] without the on-shell check, for callers that construct
/// on-shell momenta themselves.
pub(crate) fn spinor_u_unchecked(p: FourVector, s: Spin, m: f64) -> BiSpinor {
    let e_plus_m = p.time() + m;
    let norm = e_plus_m.sqrt();
    let [_, px, py, pz] = p.0;
    let scale = norm / e_plus_m;
    let c = |x: f64| Complex::new(x * scale, 0.0);
    match s {
        Spin::Up => BiSpinor([
            Complex::new(norm, 0.0),
            ZERO,
            c(pz),
            Complex::new(px * scale, py * scale),
        ]),
        Spin::Down => BiSpinor([
            ZERO,
            Complex::new(norm, 0.0),
            Complex::new(px * scale, -py * scale),
            c(-pz),
        ]),
    }
}

/// Transverse photon polarization label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    First,
    Second,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::First, Polarization::Second];

    pub fn index(self) -> usize {
        match self {
            Polarization::First => 0,
            Polarization::Second => 1,
        }
    }
}

/// A photon polarization four-vector in Coulomb gauge (`ε⁰ = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationVector {
    pub components: [Complex; 4],
    pub label: Polarization,
}

impl PolarizationVector {
    pub fn from_real(v: ThreeVector, label: Polarization) -> Self {
        PolarizationVector {
            components: [ZERO, v[0].into(), v[1].into(), v[2].into()],
            label,
        }
    }

    pub fn slash(&self) -> Matrix4 {
        slash_complex(&self.components)
    }
}

/// Deterministic real transverse basis for a photon travelling along `k_dir`:
/// `ε¹ = ẑ×k̂ / |ẑ×k̂|` (or `x̂` when k̂ is along the z axis) and `ε² = k̂×ε¹`.
pub fn polarization_pair(
    k_dir: ThreeVector,
) -> Result<(PolarizationVector, PolarizationVector), AlgebraError> {
    let k = k_dir.normalize()?;
    let zk = ThreeVector::Z.cross(k);
    let e1 = if zk.norm() < 1e-8 {
        ThreeVector::X
    } else {
        zk.normalize()?
    };
    let e2 = k.cross(e1);
    Ok((
        PolarizationVector::from_real(e1, Polarization::First),
        PolarizationVector::from_real(e2, Polarization::Second),
    ))
}
