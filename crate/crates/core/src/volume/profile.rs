//! Radial potentials on `𝔻 × 𝔻` and the pointwise bounds on their forms.
//!
//! A potential `F(z, w) = f(s)` with `s = log tanh²(d(z, w)/2)` is invariant
//! under the diagonal action, so its Levi form is determined at `(0, w)` with
//! `|w|² = e^s`. The coefficient matrices below are in the basis
//! `i dz∧dz̄, i dz∧dw̄, i dw∧dz̄, i dw∧dw̄`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProfileKind {
    /// Potential for the ratio bound near the diagonal.
    Htd,
    /// Potential for the ratio bound near the conjugate diagonal.
    Htad,
}

/// Hermitian 2×2 matrix `[[a, b], [b̄, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Herm2 {
    pub a: f64,
    pub b: C64,
    pub d: f64,
}

impl Herm2 {
    pub fn min_eigenvalue(&self) -> f64 {
        let m = 0.5 * (self.a + self.d);
        let h = 0.5 * (self.a - self.d);
        m - (h * h + self.b.norm_sqr()).sqrt()
    }

    fn scale(&self, k: f64) -> Self {
        Self {
            a: k * self.a,
            b: self.b * k,
            d: k * self.d,
        }
    }

    fn sub(&self, o: &Self) -> Self {
        Self {
            a: self.a - o.a,
            b: self.b - o.b,
            d: self.d - o.d,
        }
    }

    /// The matrix expressed in an orthonormal frame for the diagonal metric
    /// `diag(g1, g2)`.
    fn normalized(&self, g1: f64, g2: f64) -> Self {
        Self {
            a: self.a / g1,
            b: self.b / (g1 * g2).sqrt(),
            d: self.d / g2,
        }
    }
}

/// `ω_std` at `(0, w)`.
pub fn omega_std_at(w: C64) -> Herm2 {
    let x = 1.0 - w.norm_sqr();
    Herm2 {
        a: 2.0,
        b: C64::new(0.0, 0.0),
        d: 2.0 / (x * x),
    }
}

/// Levi form at `(0, w)` of `f(log χ)`, given `f'` and `f''` there and
/// `ψ = |w|²`. A diagonal rotation fixes `(0, 0)` and multiplies `dz` and
/// `dw` by the same phase, so the argument of `w` does not enter.
pub fn radial_levi_form(f1: f64, f2: f64, psi: f64) -> Herm2 {
    let x = 1.0 - psi;
    Herm2 {
        a: f2 * x * x / psi,
        b: C64::new(f1 + f2 * (1.0 - 1.0 / psi), 0.0),
        d: f2 / psi,
    }
}

/// Levi form at `(0, w)` of `f(ψ)` with `ψ = |(w̄ - z)/(1 - z w)|²`, given
/// `f'(ψ)` and `f''(ψ)`.
pub fn conj_levi_form(f1: f64, f2: f64, w: C64) -> Herm2 {
    let psi = w.norm_sqr();
    let x = 1.0 - psi;
    let w2 = w * w;
    Herm2 {
        a: (f1 + f2 * psi) * x * x,
        b: w2 * (f1 - f2 * x),
        d: f1 + f2 * psi,
    }
}

/// The piecewise profile of one of the two ratio bounds, for `0 < r < R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
}

impl RadialProfile {
    pub fn new(kind: ProfileKind, r: f64, big_r: f64) -> Result<Self> {
        if !(r > 0.0 && r < big_r && big_r.is_finite()) {
            return Err(Error::Range(format!(
                "need 0 < r < R, got r = {r}, R = {big_r}"
            )));
        }
        Ok(Self { kind, r, big_r })
    }

    /// Coefficient of the `(1 - e^s)^{-1/2}` term.
    pub fn a(&self) -> f64 {
        let (cr, cbig) = ((0.5 * self.r).cosh(), (0.5 * self.big_r).cosh());
        -cr * cbig / (cbig - cr)
    }

    /// Coefficient of the `(1 - e^s)^{-1}` term, which is also the
    /// domination constant.
    pub fn b(&self) -> f64 {
        let (cr, cbig) = ((0.5 * self.r).cosh(), (0.5 * self.big_r).cosh());
        cbig / (cbig - cr)
    }

    /// Inner and outer junctions in the profile variable.
    pub fn junctions(&self) -> (f64, f64) {
        match self.kind {
            ProfileKind::Htd => (
                ((0.5 * self.r).tanh().powi(2)).ln(),
                ((0.5 * self.big_r).tanh().powi(2)).ln(),
            ),
            // s = -log(1 - ψ) with ψ = tanh²(d/2), so s = log cosh²(d/2).
            ProfileKind::Htad => (
                ((0.5 * self.r).cosh().powi(2)).ln(),
                ((0.5 * self.big_r).cosh().powi(2)).ln(),
            ),
        }
    }

    /// `1 - sqrt((e^c - 1)/(e^C - 1))`, the normalizer of the htad profile.
    fn htad_norm(&self) -> f64 {
        1.0 - (0.5 * self.r).sinh() / (0.5 * self.big_r).sinh()
    }

    /// The domination constant of the middle region.
    pub fn domination_constant(&self) -> f64 {
        match self.kind {
            ProfileKind::Htd => self.b(),
            ProfileKind::Htad => 1.0 / self.htad_norm(),
        }
    }

    /// `(f'(s), f''(s))` on the whole line.
    pub fn derivatives(&self, s: f64) -> (f64, f64) {
        let (c, big_c) = self.junctions();
        match self.kind {
            ProfileKind::Htd => {
                let x = -s.exp_m1();
                if s < c {
                    (0.0, 0.0)
                } else if s <= big_c {
                    let (a, b) = (self.a(), self.b());
                    let e = s.exp();
                    (
                        2.0 * a / x.sqrt() + 2.0 * b / x,
                        a * e / x.powf(1.5) + 2.0 * b * e / (x * x),
                    )
                } else {
                    // f0(s) = -2 log(e^{-s} - 1).
                    let e = s.exp();
                    (2.0 / x, 2.0 * e / (x * x))
                }
            }
            ProfileKind::Htad => {
                if s < c {
                    (0.0, 0.0)
                } else if s <= big_c {
                    let q = c.exp_m1().sqrt();
                    let u = s.exp_m1();
                    let n = self.htad_norm();
                    (
                        (1.0 - q / u.sqrt()) / n,
                        0.5 * q * s.exp() / (u.powf(1.5) * n),
                    )
                } else {
                    (1.0, 0.0)
                }
            }
        }
    }

    /// One-sided derivative jumps at the inner and outer junctions.
    pub fn junction_jumps(&self) -> (f64, f64) {
        let (c, big_c) = self.junctions();
        let inner = self.derivatives(c).0;
        let outer = match self.kind {
            ProfileKind::Htd => self.derivatives(big_c).0 - 2.0 / (-big_c.exp_m1()),
            ProfileKind::Htad => self.derivatives(big_c).0 - 1.0,
        };
        (inner.abs(), outer.abs())
    }

    /// Levi form of the potential at `(0, w)`.
    pub fn omega_at(&self, w: C64) -> Herm2 {
        let psi = w.norm_sqr();
        match self.kind {
            ProfileKind::Htd => {
                let (f1, f2) = self.derivatives(psi.ln());
                radial_levi_form(f1, f2, psi)
            }
            ProfileKind::Htad => {
                // f(ψ) = h(s(ψ)) with s = -log(1 - ψ).
                let s = -(-psi).ln_1p();
                let (h1, h2) = self.derivatives(s);
                let x = 1.0 - psi;
                conj_levi_form(h1 / x, (h2 + h1) / (x * x), w)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePositivityReport {
    pub profile: RadialProfile,
    pub a: f64,
    pub b: f64,
    pub domination_constant: f64,
    pub grid_points: usize,
    /// Smallest eigenvalue of `K·ω_std − ω_F`, in an `ω_std`-orthonormal frame.
    pub min_domination_eigenvalue: f64,
    /// Smallest eigenvalue of `ω_F` in the same frame.
    pub min_form_eigenvalue: f64,
    pub junction_jumps: (f64, f64),
    pub pass: bool,
}

/// Checks the middle region of the profile on `n` grid values of `s`, each
/// at `angles` arguments of `w`.
pub fn profile_positivity_check(
    profile: &RadialProfile,
    n: usize,
    angles: usize,
) -> ProfilePositivityReport {
    let (c, big_c) = profile.junctions();
    let k = profile.domination_constant();
    let mut min_dom = f64::INFINITY;
    let mut min_form = f64::INFINITY;
    let mut count = 0;
    for i in 0..n {
        let s = c + (big_c - c) * (i as f64 + 0.5) / n as f64;
        let psi = match profile.kind {
            ProfileKind::Htd => s.exp(),
            ProfileKind::Htad => -(-s).exp_m1(),
        };
        for j in 0..angles.max(1) {
            let w = C64::from_polar(
                psi.sqrt(),
                0.37 + std::f64::consts::TAU * j as f64 / angles.max(1) as f64,
            );
            let std = omega_std_at(w);
            let form = profile.omega_at(w);
            let bound = match profile.kind {
                ProfileKind::Htd => std.scale(k),
                ProfileKind::Htad => std.scale(0.5 * k),
            };
            let (g1, g2) = (std.a, std.d);
            min_dom = min_dom.min(bound.sub(&form).normalized(g1, g2).min_eigenvalue());
            min_form = min_form.min(form.normalized(g1, g2).min_eigenvalue());
            count += 1;
        }
    }
    let jumps = profile.junction_jumps();
    let signs = match profile.kind {
        ProfileKind::Htd => profile.a() < 0.0 && profile.b() > 1.0,
        ProfileKind::Htad => profile.domination_constant() > 1.0,
    };
    let positive = match profile.kind {
        ProfileKind::Htd => true,
        ProfileKind::Htad => min_form >= -1e-9,
    };
    let pass = signs && positive && min_dom >= -1e-9 && jumps.0 <= 1e-10 && jumps.1 <= 1e-10;
    ProfilePositivityReport {
        profile: *profile,
        a: profile.a(),
        b: profile.b(),
        domination_constant: k,
        grid_points: count,
        min_domination_eigenvalue: min_dom,
        min_form_eigenvalue: min_form,
        junction_jumps: jumps,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn htd_example_values() {
        let p = RadialProfile::new(ProfileKind::Htd, 0.5, 2.0).unwrap();
        let (cr, cbig) = (0.25f64.cosh(), 1f64.cosh());
        assert!((p.a() + cr * cbig / (cbig - cr)).abs() < 1e-15);
        assert!(p.a() < 0.0 && p.b() > 1.0);
        let rep = profile_positivity_check(&p, 10_000, 1);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.min_domination_eigenvalue > -1e-9);
    }

    #[test]
    fn htd_middle_form_matches_rank_one_split() {
        // ω_F = B ω_std + A [[x^{1/2}, x^{-1/2}], [x^{-1/2}, x^{-3/2}]].
        let p = RadialProfile::new(ProfileKind::Htd, 0.7, 2.5).unwrap();
        let (c, big_c) = p.junctions();
        for t in [0.1, 0.5, 0.9] {
            let s: f64 = c + t * (big_c - c);
            let w = C64::new((0.5 * s).exp(), 0.0);
            let x = 1.0 - w.norm_sqr();
            let f = p.omega_at(w);
            let std = omega_std_at(w);
            let a = p.a();
            assert!((f.a - (p.b() * std.a + a * x.sqrt())).abs() < 1e-10);
            assert!((f.b.re - a / x.sqrt()).abs() < 1e-10);
            assert!((f.d - (p.b() * std.d + a * x.powf(-1.5))).abs() < 1e-9 * f.d.abs().max(1.0));
        }
    }

    #[test]
    fn htd_outer_form_is_std() {
        let p = RadialProfile::new(ProfileKind::Htd, 0.5, 1.0).unwrap();
        let w = C64::new(0.6, 0.3);
        let f = p.omega_at(w);
        let std = omega_std_at(w);
        assert!((f.a - std.a).abs() < 1e-12 && f.b.norm() < 1e-12 && (f.d - std.d).abs() < 1e-12);
        assert_eq!(p.omega_at(C64::new(0.05, 0.0)).a, 0.0);
    }

    #[test]
    fn htad_profile() {
        let p = RadialProfile::new(ProfileKind::Htad, 0.5, 2.0).unwrap();
        let (c, big_c) = p.junctions();
        assert!((c.exp_m1() - (0.25f64).sinh().powi(2)).abs() < 1e-14);
        assert!((p.derivatives(big_c).0 - 1.0).abs() < 1e-12);
        assert!(p.derivatives(c).0.abs() < 1e-12);
        // h' + 2(1 - e^{-s}) h'' is constant on the middle interval.
        for t in [0.05, 0.3, 0.7, 0.99] {
            let s: f64 = c + t * (big_c - c);
            let (h1, h2) = p.derivatives(s);
            let v = h1 + 2.0 * (-(-s).exp_m1()) * h2;
            assert!((v - p.domination_constant()).abs() < 1e-10);
        }
        let rep = profile_positivity_check(&p, 2000, 8);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.min_form_eigenvalue >= -1e-9);
        // Above R the potential is S itself and ω_S = ω_std / 2.
        let w = C64::new(0.9, 0.2);
        let f = p.omega_at(w);
        let std = omega_std_at(w);
        assert!(
            (f.a - 0.5 * std.a).abs() < 1e-12
                && f.b.norm() < 1e-12
                && (f.d - 0.5 * std.d).abs() < 1e-9
        );
    }

    #[test]
    fn random_profiles_keep_signs_and_junctions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let r: f64 = rng.gen_range(0.05..3.0);
            let big_r = r + rng.gen_range(0.05..3.0);
            for kind in [ProfileKind::Htd, ProfileKind::Htad] {
                let p = RadialProfile::new(kind, r, big_r).unwrap();
                let (j0, j1) = p.junction_jumps();
                assert!(j0 < 1e-10 && j1 < 1e-10, "{kind:?} {r} {big_r}: {j0} {j1}");
                if kind == ProfileKind::Htd {
                    assert!(p.a() < 0.0 && p.b() > 1.0);
                }
            }
        }
        assert!(RadialProfile::new(ProfileKind::Htd, 1.0, 1.0).is_err());
    }
}
