//! Tree-level QED Bremsstrahlung of a free electron prepared in a
//! superposition of two momenta, scattering off a static Coulomb field.
//!
//! Units are natural (ħ = c = 1) with energies and momenta in keV.

pub mod algebra;
pub mod amplitude;
pub mod cross_section;
pub mod kinematics;
pub mod quadrature;
pub mod spectrum;
pub mod validate;

pub use algebra::{Complex, FourVector, ThreeVector};
pub use amplitude::{Interaction, Mode, SpinChannel};
pub use kinematics::{ElectronState, PhotonSpec, PhysicalConstants, Source, SuperpositionConfig};
