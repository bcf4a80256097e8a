//! The conformal map `f_p` from the (2,3,∞) fundamental domain onto F.
//!
//! `f_p = M ∘ s ∘ J` where `J = j/1728` folds half of the modular domain
//! onto a half-plane, `s` is the Schwarz triangle function of the
//! hypergeometric equation with exponent differences 1/3, 1/2, 1/p at
//! 0, 1, ∞, and `M` is the Möbius map fixing the vertices. Solutions are
//! evaluated by local series at the three singular points, glued by
//! connection coefficients that are fitted numerically once per p, and by
//! Taylor continuation of the ODE in between.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyp::{Model, ModelPoint, C64, I};
use crate::tiling::geometry::TriangleGeometry;

/// A solution value and its derivative in `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Sol {
    w: C64,
    dw: C64,
}

impl Sol {
    fn combine(a: C64, x: Sol, b: C64, y: Sol) -> Sol {
        Sol {
            w: a * x.w + b * y.w,
            dw: a * x.dw + b * y.dw,
        }
    }

    fn conj(self) -> Sol {
        Sol {
            w: self.w.conj(),
            dw: self.dw.conj(),
        }
    }
}

const SERIES_MAX_TERMS: usize = 4000;

/// Gauss series `₂F₁(a, b; c; z)` for `|z| < 1`, with its derivative.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: C64) -> Result<(C64, C64)> {
    let f = hyp2f1_value(a, b, c, z)?;
    let df = hyp2f1_value(a + 1.0, b + 1.0, c + 1.0, z)? * (a * b / c);
    Ok((f, df))
}

fn hyp2f1_value(a: f64, b: f64, c: f64, z: C64) -> Result<C64> {
    if z.norm() >= 0.95 {
        return Err(Error::Precision(format!(
            "hypergeometric series used at |z| = {}",
            z.norm()
        )));
    }
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term *= z * ((a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)));
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() && n > 2 {
            return Ok(sum);
        }
    }
    Err(Error::Precision(
        "hypergeometric series did not converge".into(),
    ))
}

/// `z^e` with `arg z` taken in `[lo, lo + 2π)`.
fn cpow_branch(z: C64, e: f64, lo: f64) -> C64 {
    if z.norm() == 0.0 {
        return if e > 0.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(f64::INFINITY, 0.0)
        };
    }
    let mut arg = z.arg();
    while arg < lo {
        arg += 2.0 * PI;
    }
    while arg >= lo + 2.0 * PI {
        arg -= 2.0 * PI;
    }
    C64::from_polar(z.norm().powf(e), arg * e)
}

/// Upper half-plane branch: `arg z ∈ [0, π]` for `z` in the closed half-plane.
fn pow_upper(z: C64, e: f64) -> C64 {
    cpow_branch(z, e, -PI / 2.0)
}

/// Lower half-plane branch: `arg z ∈ [-π, 0]`.
fn pow_lower(z: C64, e: f64) -> C64 {
    cpow_branch(z, e, -3.0 * PI / 2.0)
}

#[derive(Debug, Clone, Copy)]
struct Exponents {
    a: f64,
    b: f64,
    c: f64,
}

impl Exponents {
    fn new(p: u64) -> Self {
        let q = 1.0 / p as f64;
        Self {
            a: (1.0 / 6.0 + q) / 2.0,
            b: (1.0 / 6.0 - q) / 2.0,
            c: 2.0 / 3.0,
        }
    }

    /// Kummer's pair at 0: `J^{1-c} F(a-c+1, b-c+1; 2-c; J)` and `F(a, b; c; J)`.
    fn at_zero(&self, j: C64) -> Result<[Sol; 2]> {
        let Exponents { a, b, c } = *self;
        let (f1, df1) = hyp2f1(a - c + 1.0, b - c + 1.0, 2.0 - c, j)?;
        let (f2, df2) = hyp2f1(a, b, c, j)?;
        let jp = pow_upper(j, 1.0 - c);
        let jm = pow_upper(j, -c);
        Ok([
            Sol {
                w: jp * f1,
                dw: jm * f1 * (1.0 - c) + jp * df1,
            },
            Sol { w: f2, dw: df2 },
        ])
    }

    /// The pair at 1, in the variable `x = 1 - J`, passed directly to keep
    /// its relative precision near the vertex.
    fn at_one(&self, x: C64) -> Result<[Sol; 2]> {
        let Exponents { a, b, c } = *self;
        let e = c - a - b;
        let (g1, dg1) = hyp2f1(a, b, a + b - c + 1.0, x)?;
        let (g2, dg2) = hyp2f1(c - a, c - b, e + 1.0, x)?;
        let xp = pow_lower(x, e);
        let xm = pow_lower(x, e - 1.0);
        Ok([
            Sol { w: g1, dw: -dg1 },
            Sol {
                w: xp * g2,
                dw: -(xm * g2 * e + xp * dg2),
            },
        ])
    }

    /// The pair at ∞: `J^{-a} F(a, a-c+1; a-b+1; 1/J)` and the same with a, b swapped.
    fn at_infinity(&self, j: C64) -> Result<[Sol; 2]> {
        let Exponents { a, b, c } = *self;
        let u = j.inv();
        let one = |s: f64, t: f64| -> Result<Sol> {
            let (g, dg) = hyp2f1(s, s - c + 1.0, s - t + 1.0, u)?;
            let js = pow_upper(j, -s);
            let js1 = pow_upper(j, -s - 1.0);
            Ok(Sol {
                w: js * g,
                dw: -(js1 * g * s) - js1 * u * dg,
            })
        };
        Ok([one(a, b)?, one(b, a)?])
    }

    /// Continues two solutions of the hypergeometric equation from `z0` to
    /// `z1` by Taylor steps of half the distance to the nearest singularity.
    fn continue_ode(&self, mut z: C64, mut sols: [Sol; 2], z1: C64) -> Result<[Sol; 2]> {
        let Exponents { a, b, c } = *self;
        for _ in 0..10_000 {
            let rem = z1 - z;
            if rem.norm() == 0.0 {
                return Ok(sols);
            }
            let dist = z.norm().min((z - 1.0).norm());
            let h = 0.5 * dist;
            let t = if rem.norm() <= h {
                rem
            } else {
                rem * (h / rem.norm())
            };
            let p0 = z * (C64::new(1.0, 0.0) - z);
            let p1 = C64::new(1.0, 0.0) - z * 2.0;
            let q0 = C64::new(c, 0.0) - z * (a + b + 1.0);
            let q1 = -(a + b + 1.0);
            let r = -a * b;
            for s in sols.iter_mut() {
                let (mut w0, mut w1) = (s.w, s.dw);
                let mut val = w0 + w1 * t;
                let mut der = w1;
                let mut tn = t; // t^{n+1} with n the index of w1
                let mut converged = false;
                for n in 0..2000usize {
                    let nf = n as f64;
                    let w2 = -((p1 * (nf * (nf + 1.0)) + q0 * (nf + 1.0)) * w1
                        + w0 * (-(nf * (nf - 1.0)) + q1 * nf + r))
                        / (p0 * ((nf + 2.0) * (nf + 1.0)));
                    der += w2 * tn * (nf + 2.0);
                    tn *= t;
                    let term = w2 * tn;
                    val += term;
                    w0 = w1;
                    w1 = w2;
                    if term.norm() <= 1e-18 * val.norm() && n > 4 {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    return Err(Error::Precision("ODE Taylor step did not converge".into()));
                }
                *s = Sol { w: val, dw: der };
            }
            z += t;
        }
        Err(Error::Precision(
            "ODE continuation exceeded its step budget".into(),
        ))
    }
}

const BASE: C64 = C64::new(0.0, 0.5);
const MATCH_ONE: C64 = C64::new(1.0, 0.5);
const MATCH_INF: C64 = C64::new(0.0, 2.5);

/// Solves `[x, y] = α [u1] + β [u2]` for two solutions given with derivatives.
fn connect(target: Sol, u: &[Sol; 2]) -> (C64, C64) {
    let det = u[0].w * u[1].dw - u[1].w * u[0].dw;
    let alpha = (target.w * u[1].dw - u[1].w * target.dw) / det;
    let beta = (u[0].w * target.dw - target.w * u[0].dw) / det;
    (alpha, beta)
}

/// `J = j/1728` and `dJ/dτ` from Eisenstein series and the product for Δ.
pub fn klein_j(tau: C64) -> Result<(C64, C64)> {
    let k = klein_j_full(tau)?;
    Ok((k.j, k.dj))
}

/// `J`, `1 − J = −E6²/(1728 Δ)` computed without cancellation, and `dJ/dτ`.
#[derive(Debug, Clone, Copy)]
pub struct KleinJ {
    pub j: C64,
    pub one_minus_j: C64,
    pub dj: C64,
}

pub fn klein_j_full(tau: C64) -> Result<KleinJ> {
    if !(tau.im > 0.0) {
        return Err(Error::Domain(format!(
            "{tau} is not in the upper half-plane"
        )));
    }
    let q = (I * 2.0 * PI * tau).exp();
    let mut e4 = C64::new(1.0, 0.0);
    let mut de4 = C64::new(0.0, 0.0);
    let mut e2 = C64::new(1.0, 0.0);
    let mut e6 = C64::new(1.0, 0.0);
    let mut log_prod = C64::new(0.0, 0.0);
    let mut qn = C64::new(1.0, 0.0);
    for n in 1..400u64 {
        qn *= q;
        if qn.norm() < 1e-40 {
            break;
        }
        let (mut s1, mut s3, mut s5) = (0.0f64, 0.0f64, 0.0f64);
        for d in 1..=n {
            if n % d == 0 {
                let df = d as f64;
                s1 += df;
                s3 += df.powi(3);
                s5 += df.powi(5);
            }
        }
        e6 -= qn * (504.0 * s5);
        e4 += qn * (240.0 * s3);
        de4 += qn * (240.0 * n as f64 * s3);
        e2 -= qn * (24.0 * s1);
        log_prod += (C64::new(1.0, 0.0) - qn).ln();
    }
    let delta = q * (log_prod * 24.0).exp();
    let j = e4 * e4 * e4 / (delta * 1728.0);
    let one_minus_j = -(e6 * e6) / (delta * 1728.0);
    let dj = j * (de4 * 3.0 / e4 - e2) * (I * 2.0 * PI);
    Ok(KleinJ { j, one_minus_j, dj })
}

/// Precomputed data for `f_p`.
#[derive(Debug, Clone, Serialize)]
pub struct SchwarzMap {
    pub p: u64,
    pub y_p: f64,
    pub theta_p: f64,
    #[serde(skip)]
    exps: Exponents,
    #[serde(skip)]
    conn_one: [(C64, C64); 2],
    #[serde(skip)]
    conn_inf: [(C64, C64); 2],
    /// True when the right half of the modular domain maps to Im J < 0.
    pub right_half_lower: bool,
    #[serde(skip)]
    mobius: [C64; 4],
}

impl SchwarzMap {
    pub fn new(geom: &TriangleGeometry) -> Result<Self> {
        let exps = Exponents::new(geom.p);
        let base = exps.at_zero(BASE)?;
        let at_m1 = exps.continue_ode(BASE, base, MATCH_ONE)?;
        let u = exps.at_one(C64::new(1.0, 0.0) - MATCH_ONE)?;
        let conn_one = [connect(at_m1[0], &u), connect(at_m1[1], &u)];
        let at_mi = exps.continue_ode(BASE, base, MATCH_INF)?;
        let v = exps.at_infinity(MATCH_INF)?;
        let conn_inf = [connect(at_mi[0], &v), connect(at_mi[1], &v)];
        let (jr, _) = klein_j(C64::new(0.25, 1.5))?;
        let right_half_lower = jr.im < 0.0;
        // Homogeneous images of J = 0, 1, ∞ on the half-plane in use.
        let fix = |z: C64| if right_half_lower { z.conj() } else { z };
        let s0 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let s1 = [fix(conn_one[0].0), fix(conn_one[1].0)];
        let sinf = [fix(conn_inf[0].1), fix(conn_inf[1].1)];
        let targets = [
            C64::from_polar(1.0, geom.theta_p),
            I,
            C64::new(0.0, geom.y_p),
        ];
        let mobius = mobius_from_points([s0, s1, sinf], targets);
        Ok(Self {
            p: geom.p,
            y_p: geom.y_p,
            theta_p: geom.theta_p,
            exps,
            conn_one,
            conn_inf,
            right_half_lower,
            mobius,
        })
    }

    /// The two basis solutions at `J` in the closed upper half-plane.
    fn basis_upper(&self, j: C64, x: C64) -> Result<[Sol; 2]> {
        let j = if j.im <= 0.0 { C64::new(j.re, 0.0) } else { j };
        let x = if x.im >= 0.0 { C64::new(x.re, -0.0) } else { x };
        if j.norm() <= 0.55 {
            return self.exps.at_zero(j);
        }
        if (j - 1.0).norm() <= 0.55 {
            let u = self.exps.at_one(x)?;
            let c = self.conn_one;
            return Ok([
                Sol::combine(c[0].0, u[0], c[0].1, u[1]),
                Sol::combine(c[1].0, u[0], c[1].1, u[1]),
            ]);
        }
        if j.norm() >= 2.2 {
            let v = self.exps.at_infinity(j)?;
            let c = self.conn_inf;
            return Ok([
                Sol::combine(c[0].0, v[0], c[0].1, v[1]),
                Sol::combine(c[1].0, v[0], c[1].1, v[1]),
            ]);
        }
        let base = self.exps.at_zero(BASE)?;
        self.exps.continue_ode(BASE, base, j)
    }

    fn basis(&self, j: C64, x: C64) -> Result<[Sol; 2]> {
        if self.right_half_lower {
            let s = self.basis_upper(j.conj(), x.conj())?;
            Ok([s[0].conj(), s[1].conj()])
        } else {
            self.basis_upper(j, x)
        }
    }

    /// `f_p(τ)` and `f_p'(τ)` for `τ` in the right half of the closed
    /// modular domain.
    fn eval_right(&self, tau: C64) -> Result<(C64, C64)> {
        let KleinJ { j, one_minus_j, dj } = klein_j_full(tau)?;
        let s = self.basis(j, one_minus_j)?;
        let [ma, mb, mc, md] = self.mobius;
        let num = ma * s[0].w + mb * s[1].w;
        let den = mc * s[0].w + md * s[1].w;
        let f = num / den;
        let wr = s[0].dw * s[1].w - s[0].w * s[1].dw;
        let df = (ma * md - mb * mc) * wr / (den * den) * dj;
        Ok((f, df))
    }

    /// `f_p(τ)` and its derivative, using `f(-τ̄) = -conj f(τ)` on the left half.
    pub fn eval(&self, tau: C64) -> Result<(C64, C64)> {
        check_modular_domain(tau)?;
        if tau.re >= 0.0 {
            self.eval_right(tau)
        } else {
            let (f, df) = self.eval_right(-tau.conj())?;
            Ok((-f.conj(), df.conj()))
        }
    }

    pub fn map_point(&self, tau: C64) -> Result<C64> {
        Ok(self.eval(tau)?.0)
    }
}

/// Rejects points outside the closed domain `|Re τ| ≤ 1/2, |τ| ≥ 1`.
pub fn check_modular_domain(tau: C64) -> Result<()> {
    let tol = 1e-9;
    if !(tau.im > 0.0) || tau.re.abs() > 0.5 + tol || tau.norm() < 1.0 - tol {
        return Err(Error::Domain(format!(
            "{tau} is outside the modular fundamental domain"
        )));
    }
    if tau.im > 100.0 {
        return Err(Error::Range(format!(
            "Im τ = {} is beyond double-precision range of J",
            tau.im
        )));
    }
    Ok(())
}

/// Möbius matrix sending homogeneous points `z_k` to affine points `w_k`.
fn mobius_from_points(z: [[C64; 2]; 3], w: [C64; 3]) -> [C64; 4] {
    // Sends the three points to 0, 1, ∞: X ↦ det(X,Z1)det(Z2,Z3) / (det(X,Z3)det(Z2,Z1)).
    let det = |x: [C64; 2], y: [C64; 2]| x[0] * y[1] - x[1] * y[0];
    let to_std = |z: [[C64; 2]; 3]| {
        let k1 = det(z[1], z[2]);
        let k2 = det(z[1], z[0]);
        [z[0][1] * k1, -z[0][0] * k1, z[2][1] * k2, -z[2][0] * k2]
    };
    let one = C64::new(1.0, 0.0);
    let a = to_std(z);
    let b = to_std([[w[0], one], [w[1], one], [w[2], one]]);
    // b^{-1} a with b^{-1} = adj(b).
    let bi = [b[3], -b[1], -b[2], b[0]];
    [
        bi[0] * a[0] + bi[1] * a[2],
        bi[0] * a[1] + bi[1] * a[3],
        bi[2] * a[0] + bi[3] * a[2],
        bi[2] * a[1] + bi[3] * a[3],
    ]
}

/// `f_p` on model points of the modular domain.
pub fn triangle_map(z: &ModelPoint, map: &SchwarzMap) -> Result<ModelPoint> {
    let tau = z.to_model(Model::HalfPlane).coord();
    ModelPoint::half_plane(map.map_point(tau)?).map(|w| w.to_model(z.model()))
}
