//! Absolute normalization against the closed-form Born-approximation
//! Bethe-Heitler cross section for an unscreened point charge (the 2BN
//! formula), which integrates the final electron direction analytically.

use brems::cross_section::{adcs, QuadratureSpec};
use brems::{ElectronState, Interaction, Mode, PhotonSpec, ThreeVector};

/// dσ/(dk dΩ_k) in keV⁻³ sr⁻¹ for Z = 1.
fn bethe_heitler_2bn(t_kev: f64, k_kev: f64, theta: f64, m: f64, alpha: f64) -> f64 {
    let e0 = (t_kev + m) / m;
    let k = k_kev / m;
    let e = e0 - k;
    let p0 = (e0 * e0 - 1.0).sqrt();
    let p = (e * e - 1.0).sqrt();
    let (s, c) = theta.sin_cos();
    let s2 = s * s;
    let d0 = e0 - p0 * c;
    let q = (p0 * p0 + k * k - 2.0 * p0 * k * c).sqrt();
    let l = ((e * e0 - 1.0 + p * p0) / (e * e0 - 1.0 - p * p0)).ln();
    let eps = ((e + p) / (e - p)).ln();
    let eps_q = ((q + p) / (q - p)).ln();
    let p02 = p0 * p0;
    let braces = 8.0 * s2 * (2.0 * e0 * e0 + 1.0) / (p02 * d0.powi(4))
        - 2.0 * (5.0 * e0 * e0 + 2.0 * e * e0 + 3.0) / (p02 * d0 * d0)
        - 2.0 * (p02 - k * k) / (q * q * d0 * d0)
        + 4.0 * e / (p02 * d0)
        + l / (p * p0)
            * (4.0 * e0 * s2 * (3.0 * k - p02 * e) / (p02 * d0.powi(4))
                + 4.0 * e0 * e0 * (e0 * e0 + e * e) / (p02 * d0 * d0)
                + (2.0 - 2.0 * (7.0 * e0 * e0 - 3.0 * e * e0 + e * e)) / (p02 * d0 * d0)
                + 2.0 * k * (e0 * e0 + e * e0 - 1.0) / (p02 * d0))
        - 4.0 * eps / (p * d0)
        + eps_q / (p * q) * (4.0 / (d0 * d0) - 6.0 * k / d0 - 2.0 * k * (p02 - k * k) / (q * q * d0));
    alpha.powi(3) / (8.0 * std::f64::consts::PI * m * m) / k_kev * (p / p0) * braces
}

#[test]
fn matches_closed_form_bethe_heitler() {
    let it = Interaction::default();
    let m = it.constants.electron_mass;
    let quad = QuadratureSpec::default();
    for &(t, frac) in &[(20.0, 0.1), (200.0, 0.05), (200.0, 0.5), (2000.0, 0.3), (2000.0, 0.9)] {
        let e = ElectronState::new(t, ThreeVector::Z, m).unwrap();
        for &theta in &[0.0, 0.1, 0.5, 1.2, 2.5] {
            let photon = PhotonSpec::new(frac * t, theta, 0.3).unwrap();
            let ours = adcs(&e.into(), &photon, Mode::Single, &quad, &it).unwrap();
            let closed = bethe_heitler_2bn(t, frac * t, theta, m, it.constants.alpha);
            let rel = (ours.value - closed).abs() / closed;
            println!("T={t} ω/T={frac} θ={theta}: ours {:.9e} closed {:.9e} rel {rel:.2e}", ours.value, closed);
            assert!(rel < 1e-9, "T={t} frac={frac} theta={theta}: rel {rel}");
        }
    }
}
