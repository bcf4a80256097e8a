//! Numerical Levi forms and the current identity of the diagonal potential.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::profile::Herm2;
use crate::error::Result;
use crate::hyp::C64;
use crate::quad::integrate;

/// `χ(z, w) = tanh²(d(z, w)/2)`.
pub fn chi(z: C64, w: C64) -> f64 {
    ((w - z) / (C64::new(1.0, 0.0) - z.conj() * w)).norm_sqr()
}

/// The potential `F₀ = f₀(log χ)` with `f₀(s) = -2 log(e^{-s} - 1)`.
pub fn f0_potential(z: C64, w: C64) -> f64 {
    let c = chi(z, w);
    -2.0 * ((1.0 - c) / c).ln()
}

/// Second directional derivative along `v ∈ R⁴` by a fourth order stencil.
fn second_directional<F: Fn(C64, C64) -> f64>(f: &F, z: C64, w: C64, v: [f64; 4], h: f64) -> f64 {
    let at = |t: f64| f(z + C64::new(v[0], v[1]) * t, w + C64::new(v[2], v[3]) * t);
    (-at(2.0 * h) + 16.0 * at(h) - 30.0 * at(0.0) + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h)
}

/// `∂_j ∂̄_k F` at `(z, w)` by finite differences, as a Hermitian matrix.
pub fn numerical_levi_form<F: Fn(C64, C64) -> f64>(f: &F, z: C64, w: C64, h: f64) -> Herm2 {
    let e = |i: usize| {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        v
    };
    let d2 = |v: [f64; 4]| second_directional(f, z, w, v, h);
    let mixed = |i: usize, j: usize| {
        let mut p = e(i);
        let mut m = e(i);
        p[j] += 1.0;
        m[j] -= 1.0;
        0.25 * (d2(p) - d2(m))
    };
    // ∂z∂z̄ = Δ_z / 4 and ∂z∂w̄ = (F_xu + F_yv + i(F_xv - F_yu)) / 4.
    let a = 0.25 * (d2(e(0)) + d2(e(1)));
    let d = 0.25 * (d2(e(2)) + d2(e(3)));
    let b = C64::new(mixed(0, 2) + mixed(1, 3), mixed(0, 3) - mixed(1, 2)) * 0.25;
    Herm2 { a, b, d }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentIdentityReport {
    /// Largest entrywise deviation of `i∂∂̄F₀` from `ω_std` over the grid,
    /// relative to the size of `ω_std` there.
    pub max_pointwise_error: f64,
    pub grid_points: usize,
    /// Mass of the mollified form on transverse disks of the given radii.
    pub atom_radii: Vec<f64>,
    pub atom_masses: Vec<f64>,
    pub transverse_count: u32,
    pub pass: bool,
}

/// Mass of `i∂∂̄ F₀^ε` on the transverse disk `{(a + t, a) : |t| < rho}`,
/// where `F₀^ε` replaces `log χ` by `log(χ + ε)`.
pub fn transverse_atom_mass(a: C64, rho: f64, eps: f64) -> Result<f64> {
    // On the slice χ = |g|² with g(t) = t / (1 - |a|² - ā t), and
    // i∂∂̄F₀^ε = 2 ∂∂̄φ dx∧dy with
    // ∂∂̄φ = 2|g'|² (1/(1 - |g|²)² + ε/(|g|² + ε)²).
    let k = 1.0 - a.norm_sqr();
    let ddbar = |t: C64| {
        let den = C64::new(k, 0.0) - a.conj() * t;
        let g2 = (t / den).norm_sqr();
        let dg2 = (k / (den * den)).norm_sqr();
        2.0 * dg2 * (1.0 / (1.0 - g2).powi(2) + eps / (g2 + eps).powi(2))
    };
    let mut err = None;
    let v = integrate(
        |theta| {
            let u = C64::from_polar(1.0, theta);
            match integrate(|r| 2.0 * ddbar(u * r) * r, 0.0, rho, 1e-10, 1e-10) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        TAU,
        1e-8,
        1e-8,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Compares `i∂∂̄F₀` with `ω_std` at the given points off the diagonal and
/// measures the atom on transverse disks through the diagonal point `a`.
pub fn current_identity_check(
    points: &[(C64, C64)],
    a: C64,
    radii: &[f64],
) -> Result<CurrentIdentityReport> {
    let mut worst: f64 = 0.0;
    for &(z, w) in points {
        let form = numerical_levi_form(&f0_potential, z, w, 1e-3);
        let gz = 2.0 / (1.0 - z.norm_sqr()).powi(2);
        let gw = 2.0 / (1.0 - w.norm_sqr()).powi(2);
        let e = ((form.a - gz) / gz)
            .abs()
            .max(((form.d - gw) / gw).abs())
            .max(form.b.norm() / (gz * gw).sqrt());
        worst = worst.max(e);
    }
    let mut masses = Vec::new();
    for &rho in radii {
        masses.push(transverse_atom_mass(a, rho, 1e-4 * rho * rho)?);
    }
    let atom_ok = masses.iter().all(|m| (m / (4.0 * PI) - 1.0).abs() < 0.01);
    Ok(CurrentIdentityReport {
        max_pointwise_error: worst,
        grid_points: points.len(),
        atom_radii: radii.to_vec(),
        atom_masses: masses,
        transverse_count: 1,
        pass: worst <= 1e-6 && atom_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::profile::{conj_levi_form, radial_levi_form, ProfileKind, RadialProfile};

    fn close(x: &Herm2, y: &Herm2, tol: f64) -> bool {
        (x.a - y.a).abs() < tol && (x.b - y.b).norm() < tol && (x.d - y.d).abs() < tol
    }

    #[test]
    fn pointwise_identity_at_example() {
        let rep = current_identity_check(
            &[(C64::new(0.0, 0.0), C64::new(0.5, 0.0))],
            C64::new(0.0, 0.0),
            &[],
        )
        .unwrap();
        assert!(
            rep.max_pointwise_error < 1e-6,
            "{}",
            rep.max_pointwise_error
        );
    }

    #[test]
    fn pointwise_identity_off_center() {
        let pts = [
            (C64::new(0.3, -0.2), C64::new(-0.1, 0.4)),
            (C64::new(-0.5, 0.1), C64::new(0.2, 0.2)),
            (C64::new(0.1, 0.6), C64::new(0.4, -0.5)),
        ];
        let rep = current_identity_check(&pts, C64::new(0.0, 0.0), &[]).unwrap();
        assert!(
            rep.max_pointwise_error < 1e-6,
            "{}",
            rep.max_pointwise_error
        );
    }

    #[test]
    fn atom_mass_and_locality() {
        let a = C64::new(0.2, 0.1);
        let rep = current_identity_check(&[], a, &[0.05, 0.025]).unwrap();
        for m in &rep.atom_masses {
            assert!((m / (4.0 * PI) - 1.0).abs() < 0.01, "{m}");
        }
        assert!((rep.atom_masses[0] - rep.atom_masses[1]).abs() < 0.01 * 4.0 * PI);
        assert!(rep.pass);
    }

    #[test]
    fn radial_formula_matches_differences() {
        // f(s) = e^{2s}, i.e. F = χ².
        let w = C64::new(0.45, 0.0);
        let s = w.norm_sqr().ln();
        let want = radial_levi_form(2.0 * (2.0 * s).exp(), 4.0 * (2.0 * s).exp(), w.norm_sqr());
        let got = numerical_levi_form(&|z, w| chi(z, w).powi(2), C64::new(0.0, 0.0), w, 1e-3);
        assert!(close(&got, &want, 1e-8), "{got:?} {want:?}");
    }

    #[test]
    fn conj_formula_matches_differences() {
        // F = ψ³ with ψ(z, w) = χ(z, w̄).
        let w = C64::new(0.3, 0.4);
        let psi = w.norm_sqr();
        let want = conj_levi_form(3.0 * psi * psi, 6.0 * psi, w);
        let got = numerical_levi_form(
            &|z: C64, w: C64| chi(z, w.conj()).powi(3),
            C64::new(0.0, 0.0),
            w,
            1e-3,
        );
        assert!(close(&got, &want, 1e-8), "{got:?} {want:?}");
    }

    #[test]
    fn htd_profile_form_matches_differences() {
        // Inside the middle band the profile is smooth, so its Levi form can
        // be differentiated numerically from f itself.
        let p = RadialProfile::new(ProfileKind::Htd, 0.5, 2.0).unwrap();
        let (c, big_c) = p.junctions();
        let s0 = 0.5 * (c + big_c);
        // f = ∫ f' ds from s0.
        let f = |s: f64| integrate(|t| p.derivatives(t).0, s0, s, 1e-13, 1e-13).unwrap();
        let w = C64::new((0.5 * s0).exp(), 0.0);
        let got = numerical_levi_form(&|z, w| f(chi(z, w).ln()), C64::new(0.0, 0.0), w, 1e-3);
        let want = p.omega_at(w);
        assert!(close(&got, &want, 1e-6), "{got:?} {want:?}");
    }
}
