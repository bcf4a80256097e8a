//! Points of X(p), deck translates within a radius, and status bookkeeping.

use std::collections::{BTreeMap, BTreeSet};

use crate::arith::fp::ProjMatFp;
use crate::error::{Error, Result};
use crate::hyp::{dist_h, ModelPoint, C64};
use crate::modcurves::cusps::CuspId;
use crate::report::CheckStatus;
use crate::tiling::geometry::TriangleGeometry;
use crate::tiling::tiles::{tile_ball_with_budget, TileBall};
use crate::tiling::words::fp_homomorphism;

/// Worst of two statuses: FAIL over INCONCLUSIVE over PASS.
pub fn worst(a: CheckStatus, b: CheckStatus) -> CheckStatus {
    use CheckStatus::*;
    match (a, b) {
        (Fail, _) | (_, Fail) => Fail,
        (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
        _ => Pass,
    }
}

/// The reduced representative in F of a half-plane point and its label in
/// G(p), so that the point of X(p) is `label · [z0]`.
pub fn locate(geom: &TriangleGeometry, z: C64) -> Result<(C64, ProjMatFp)> {
    let (z0, word) = geom.reduce(z)?;
    Ok((z0, fp_homomorphism(geom.p, &word)))
}

pub(crate) fn ball(
    geom: &TriangleGeometry,
    center: C64,
    r: f64,
    budget: usize,
) -> Result<TileBall> {
    let b = tile_ball_with_budget(geom, ModelPoint::half_plane(center)?, r, budget)?;
    if !b.complete {
        return Err(Error::Budget(format!(
            "tile budget {budget} exhausted at radius {r:.3}"
        )));
    }
    Ok(b)
}

/// Deck elements `g` with `d([x], g [y]) < r` on X(p), with the distances.
pub fn deck_elements_within(
    geom: &TriangleGeometry,
    x: C64,
    y: C64,
    r: f64,
    budget: usize,
) -> Result<BTreeMap<ProjMatFp, f64>> {
    let (y0, ly) = locate(geom, y)?;
    let ly_inv = ly.inverse();
    let mut out: BTreeMap<ProjMatFp, f64> = BTreeMap::new();
    for t in &ball(geom, x, r, budget)?.tiles {
        let d = dist_h(x, t.isometry.act_h(y0));
        if d < r {
            let g = t.fp_image.mul(&ly_inv);
            let e = out.entry(g).or_insert(d);
            *e = e.min(d);
        }
    }
    Ok(out)
}

/// Distance from `[x]` to every cusp of X(p) closer than `r`.
pub fn cusps_within(
    geom: &TriangleGeometry,
    x: C64,
    r: f64,
    budget: usize,
) -> Result<BTreeMap<CuspId, f64>> {
    let mut out: BTreeMap<CuspId, f64> = BTreeMap::new();
    let c = geom.cusp();
    for t in &ball(geom, x, r, budget)?.tiles {
        let d = dist_h(x, t.isometry.act_h(c));
        if d <= r {
            let e = out.entry(CuspId::new(&t.fp_image)).or_insert(d);
            *e = e.min(d);
        }
    }
    Ok(out)
}

/// Distance from `([x], [y])` to the nearest singular bicusp under the max
/// metric, if one is closer than `r`.
pub fn bicusp_distance(
    geom: &TriangleGeometry,
    x: C64,
    y: C64,
    r: f64,
    budget: usize,
) -> Result<Option<f64>> {
    let cx = cusps_within(geom, x, r, budget)?;
    let cy = cusps_within(geom, y, r, budget)?;
    let nearest = |m: &BTreeMap<CuspId, f64>| {
        let mut by_line: BTreeMap<_, f64> = BTreeMap::new();
        for (c, d) in m {
            let e = by_line.entry(c.line()).or_insert(*d);
            *e = e.min(*d);
        }
        by_line
    };
    let (lx, ly) = (nearest(&cx), nearest(&cy));
    Ok(lx
        .iter()
        .filter_map(|(l, dx)| ly.get(l).map(|dy| dx.max(*dy)))
        .reduce(f64::min))
}

/// Radical inverse of `n` in base `b`.
fn radical_inverse(mut n: u64, b: u64) -> f64 {
    let (mut f, mut out) = (1.0, 0.0);
    while n > 0 {
        f /= b as f64;
        out += f * (n % b) as f64;
        n /= b;
    }
    out
}

/// Halton points in the hyperbolic disk of radius `r` about `center`
/// (half-plane coordinates), uniform in hyperbolic area.
pub fn halton_ball(center: C64, r: f64, n: usize, skip: u64) -> Vec<C64> {
    let c = crate::hyp::h_to_d(center);
    let cosh_r = r.cosh();
    (0..n as u64)
        .map(|k| {
            let (u, v) = (
                radical_inverse(k + 1 + skip, 2),
                radical_inverse(k + 1 + skip, 3),
            );
            // Area measure: cosh ρ is uniform on [1, cosh r].
            let rho = (1.0 + u * (cosh_r - 1.0)).acosh();
            let w = C64::from_polar((0.5 * rho).tanh(), std::f64::consts::TAU * v);
            crate::hyp::d_to_h((w + c) / (1.0 + c.conj() * w))
        })
        .collect()
}

/// Canonical key of the point `label · ι` over `i`, whose stabilizer lift
/// is σ2.
pub fn vertex_key(label: &ProjMatFp, s: &ProjMatFp) -> ProjMatFp {
    (*label).min(label.mul(s))
}

pub fn distinct_lines(cusps: &BTreeSet<CuspId>) -> usize {
    cusps
        .iter()
        .map(|c| c.line())
        .collect::<BTreeSet<_>>()
        .len()
}
