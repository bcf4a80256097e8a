//! Volume of a curve inside a region by ray casting in the parameter disk.
//!
//! From a center inside the parameter domain each ray is sampled, the
//! crossings of the region and domain boundaries are located by bisection,
//! and the density is integrated over the inside intervals. The angular
//! integral is adaptive Gauss–Kronrod, so the result is deterministic.

use std::f64::consts::TAU;

use super::patch::{density, Curve, CurvePatch, RegionSpec};
use crate::error::{Error, Result};
use crate::hyp::C64;
use crate::quad::integrate;

const RAY_SAMPLES: usize = 96;

/// Exit distance from `c` along `u` for the disk `|z - a| < rho`.
fn exit_distance(c: C64, u: C64, a: C64, rho: f64) -> f64 {
    // |c - a + t u|² = rho², with |u| = 1.
    let d = c - a;
    let b = (d.conj() * u).re;
    let disc = b * b - (d.norm_sqr() - rho * rho);
    if disc <= 0.0 {
        return 0.0;
    }
    (-b + disc.sqrt()).max(0.0)
}

struct Ray<'a> {
    curve: &'a Curve,
    region: &'a RegionSpec,
    buf: Vec<(C64, C64)>,
}

impl Ray<'_> {
    fn margin(&mut self, z: C64) -> f64 {
        let dm = self.curve.domain_margin(z);
        if dm <= 0.0 {
            return dm;
        }
        self.curve.eval(z, &mut self.buf);
        self.region.margin(&self.buf).min(dm)
    }

    fn density(&mut self, z: C64) -> f64 {
        self.curve.eval(z, &mut self.buf);
        density(&self.buf)
    }

    fn bisect(&mut self, c: C64, u: C64, mut lo: f64, mut hi: f64, inside_lo: bool) -> f64 {
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.margin(c + u * mid) > 0.0) == inside_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `∫ density · t dt` over the inside part of the ray at angle `theta`.
    fn integral(&mut self, c: C64, theta: f64, tmax: f64, tol: f64) -> Result<f64> {
        let u = C64::from_polar(1.0, theta);
        let ts: Vec<f64> = (0..=RAY_SAMPLES)
            .map(|k| tmax * k as f64 / RAY_SAMPLES as f64)
            .collect();
        let inside: Vec<bool> = ts.iter().map(|&t| self.margin(c + u * t) > 0.0).collect();
        let mut total = 0.0;
        let mut start = if inside[0] { Some(0.0) } else { None };
        for k in 1..ts.len() {
            if inside[k] != inside[k - 1] {
                let t = self.bisect(c, u, ts[k - 1], ts[k], inside[k - 1]);
                match start.take() {
                    Some(a) => total += self.piece(c, u, a, t, tol)?,
                    None => start = Some(t),
                }
            }
        }
        if let Some(a) = start {
            total += self.piece(c, u, a, tmax, tol)?;
        }
        Ok(total)
    }

    fn piece(&mut self, c: C64, u: C64, a: f64, b: f64, tol: f64) -> Result<f64> {
        integrate(
            |t| t * self.density(c + u * t),
            a,
            b,
            1e-3 * tol,
            1e-3 * tol,
        )
    }
}

/// Volume of `curve ∩ region` under the product of the Poincaré area forms.
pub fn curve_volume_of(curve: &Curve, region: &RegionSpec, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Range(format!("tolerance {tol} must be positive")));
    }
    region.check(curve)?;
    let c = curve.ray_center();
    if curve.domain_margin(c) <= 0.0 {
        return Err(Error::Domain(format!(
            "ray center {c} is outside the parameter domain"
        )));
    }
    let mut ray = Ray {
        curve,
        region,
        buf: Vec::with_capacity(curve.dim()),
    };
    let dom = curve.domain;
    let mut err = None;
    let v = integrate(
        |theta| {
            let u = C64::from_polar(1.0, theta);
            let tmax = exit_distance(c, u, dom.center, dom.radius).min(exit_distance(
                c,
                u,
                C64::new(0.0, 0.0),
                1.0,
            ));
            match ray.integral(c, theta, tmax * (1.0 - 1e-12), tol) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        TAU,
        0.1 * tol,
        0.1 * tol,
    );
    if let Some(e) = err {
        return Err(e);
    }
    v.map_err(|e| Error::Budget(format!("curve volume: {e}")))
}

/// Volume of a graph patch inside a region of `𝔻 × 𝔻`.
pub fn curve_volume(patch: &CurvePatch, region: &RegionSpec, tol: f64) -> Result<f64> {
    curve_volume_of(&patch.curve()?, region, tol)
}
