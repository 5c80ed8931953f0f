// The amplitude written out with literal Dirac matrices, explicit spinors
// and generic matrix products, shared with nothing in the library.

use brems::algebra::{Polarization, Spin};
use brems::amplitude::{matrix_element, Interaction, SpinChannel};
use brems::kinematics::{build_final_state, ElectronState, PhotonSpec};
use brems::{Complex, ThreeVector};

type M4 = [[Complex; 4]; 4];

const MASS: f64 = 510.99895;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn zero() -> M4 {
    [[c(0.0, 0.0); 4]; 4]
}

fn identity() -> M4 {
    let mut m = zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

fn from_rows(rows: [[(f64, f64); 4]; 4]) -> M4 {
    rows.map(|r| r.map(|(a, b)| c(a, b)))
}

fn gammas() -> [M4; 4] {
    let o = (0.0, 0.0);
    let p = (1.0, 0.0);
    let n = (-1.0, 0.0);
    let pi = (0.0, 1.0);
    let ni = (0.0, -1.0);
    [
        from_rows([[p, o, o, o], [o, p, o, o], [o, o, n, o], [o, o, o, n]]),
        from_rows([[o, o, o, p], [o, o, p, o], [o, n, o, o], [n, o, o, o]]),
        from_rows([[o, o, o, ni], [o, o, pi, o], [o, pi, o, o], [ni, o, o, o]]),
        from_rows([[o, o, p, o], [o, o, o, n], [n, o, o, o], [o, p, o, o]]),
    ]
}

fn mul(a: &M4, b: &M4) -> M4 {
    let mut out = zero();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn add(a: &M4, b: &M4, sb: Complex) -> M4 {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] += sb * b[i][j];
        }
    }
    out
}

fn scale(a: &M4, s: Complex) -> M4 {
    add(&zero(), a, s)
}

/// γ^μ v_μ for contravariant components `v`.
fn slash(v: [Complex; 4]) -> M4 {
    let g = gammas();
    let metric = [1.0, -1.0, -1.0, -1.0];
    let mut out = zero();
    for mu in 0..4 {
        out = add(&out, &g[mu], v[mu] * metric[mu]);
    }
    out
}

fn real4(v: [f64; 4]) -> [Complex; 4] {
    v.map(|x| c(x, 0.0))
}

fn dot(a: [f64; 4], b: [f64; 4]) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

fn spinor(p: [f64; 4], up: bool) -> [Complex; 4] {
    let e = p[0];
    let n = (e + MASS).sqrt();
    let chi = if up { [c(1.0, 0.0), c(0.0, 0.0)] } else { [c(0.0, 0.0), c(1.0, 0.0)] };
    // σ·p χ
    let sp = [
        chi[0] * p[3] + chi[1] * c(p[1], -p[2]),
        chi[0] * c(p[1], p[2]) - chi[1] * p[3],
    ];
    [chi[0] * n, chi[1] * n, sp[0] * (n / (e + MASS)), sp[1] * (n / (e + MASS))]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn amplitude(p: [f64; 4], r: [f64; 4], k: [f64; 4], up: bool, up_prime: bool, first: bool) -> Complex {
    let khat = [k[1] / k[0], k[2] / k[0], k[3] / k[0]];
    let zk = cross([0.0, 0.0, 1.0], khat);
    let n = (zk[0] * zk[0] + zk[1] * zk[1] + zk[2] * zk[2]).sqrt();
    let e1 = if n < 1e-8 { [1.0, 0.0, 0.0] } else { [zk[0] / n, zk[1] / n, zk[2] / n] };
    let e2 = cross(khat, e1);
    let eps = if first { e1 } else { e2 };
    let eps_slash = slash(real4([0.0, eps[0], eps[1], eps[2]]));

    let m_id = scale(&identity(), c(MASS, 0.0));
    let g0 = gammas()[0];
    let rk = [r[0] + k[0], r[1] + k[1], r[2] + k[2], r[3] + k[3]];
    let pk = [p[0] - k[0], p[1] - k[1], p[2] - k[2], p[3] - k[3]];
    let first_term = mul(&mul(&eps_slash, &add(&slash(real4(rk)), &m_id, c(1.0, 0.0))), &g0);
    let first_term = scale(&first_term, c(1.0 / (2.0 * dot(r, k)), 0.0));
    let second_term = mul(&mul(&g0, &add(&slash(real4(pk)), &m_id, c(1.0, 0.0))), &eps_slash);
    let second_term = scale(&second_term, c(1.0 / (2.0 * dot(p, k)), 0.0));
    let bracket = add(&first_term, &second_term, c(-1.0, 0.0));

    let u = spinor(p, up);
    let ur = spinor(r, up_prime);
    // ū = u† γ⁰
    let mut ubar = [c(0.0, 0.0); 4];
    for j in 0..4 {
        for i in 0..4 {
            ubar[j] += ur[i].conj() * g0[i][j];
        }
    }
    let mut sandwich = c(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            sandwich += ubar[i] * bracket[i][j] * u[j];
        }
    }
    let q = [p[1] - r[1] - k[1], p[2] - r[2] - k[2], p[3] - r[3] - k[3]];
    let q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    let e = (4.0 * std::f64::consts::PI / 137.035999084f64).sqrt();
    c(0.0, -e * e * e / q2) * sandwich
}

struct Point {
    p: [f64; 4],
    r: [f64; 4],
    k: [f64; 4],
}

/// T = 200 keV along +z, ω = 10 keV at θ_k = 20°, φ_k = 0, and the final
/// electron at polar 25°, azimuth 200°.
fn reference_point() -> Point {
    let t: f64 = 200.0;
    let omega: f64 = 10.0;
    let e = t + MASS;
    let pm = (t * (t + 2.0 * MASS)).sqrt();
    let er = e - omega;
    let rm = (er * er - MASS * MASS).sqrt();
    let (tk, tr, pr) = (20f64.to_radians(), 25f64.to_radians(), 200f64.to_radians());
    Point {
        p: [e, 0.0, 0.0, pm],
        r: [er, rm * tr.sin() * pr.cos(), rm * tr.sin() * pr.sin(), rm * tr.cos()],
        k: [omega, omega * tk.sin(), 0.0, omega * tk.cos()],
    }
}

fn library_element(point: &Point, ch: SpinChannel) -> Complex {
    let it = Interaction::default();
    let p = ElectronState::new(200.0, ThreeVector::Z, MASS).unwrap().four_momentum();
    let k_dir = PhotonSpec::new(10.0, 20f64.to_radians(), 0.0).unwrap().direction();
    let r_dir = ThreeVector([point.r[1], point.r[2], point.r[3]]);
    let fs = build_final_state(p, 10.0, k_dir, r_dir, MASS).unwrap();
    matrix_element(p, &fs, ch, &it).unwrap()
}

// iM for (up, up, first polarization), from the literal evaluator above.
const FROZEN_UP_UP_FIRST: (f64, f64) = (2.0305705626501563e-7, -1.7879176603582825e-5);

#[test]
fn frozen_value_matches_literal_evaluation() {
    let pt = reference_point();
    let v = amplitude(pt.p, pt.r, pt.k, true, true, true);
    let frozen = c(FROZEN_UP_UP_FIRST.0, FROZEN_UP_UP_FIRST.1);
    assert!((v - frozen).norm() <= 1e-12 * frozen.norm(), "{v:e}");
}

#[test]
fn library_matches_literal_evaluation_in_every_channel() {
    let pt = reference_point();
    let pairs: Vec<(Complex, Complex)> = SpinChannel::ALL
        .iter()
        .map(|&ch| {
            let expect = amplitude(
                pt.p,
                pt.r,
                pt.k,
                ch.s == Spin::Up,
                ch.s_prime == Spin::Up,
                ch.pol == Polarization::First,
            );
            (library_element(&pt, ch), expect)
        })
        .collect();
    let scale = pairs.iter().map(|(_, e)| e.norm()).fold(0.0, f64::max);
    for (ch, (got, expect)) in SpinChannel::ALL.iter().zip(&pairs) {
        assert!((got - expect).norm() <= 1e-12 * scale, "{ch:?}: {got} vs {expect}");
    }
}
