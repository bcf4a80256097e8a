//! Repulsion of singular bicusps.
//!
//! At a vertex-orbit point `(ι, g ι)` the cusps near `ι` are those of
//! `M̄ H̄` with `h(M)` small, and the cusps near `g ι` are their translates by
//! `g`. At sampled points of the tiled plane the nearby cusps are found
//! directly.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::common::{cusps_within, halton_ball, worst};
use super::job::RepulsionJob;
use crate::arith::fp::{psl2_elements, ProjMatFp};
use crate::arith::intmat::enumerate_bounded_height;
use crate::arith::p1::{double_coset_constraints, MapSpecification};
use crate::error::{Error, Result};
use crate::hyp::C64;
use crate::modcurves::cusps::{CuspId, SingularBicusp};
use crate::modcurves::hecke::{hecke_on_cusps, HeckeConvention, HeckeOp};
use crate::report::{CheckReport, CheckStatus};
use crate::tiling::geometry::TriangleGeometry;

/// Cusps `M̄ H̄` over `M` in SL2(Z) of height at most `h`.
pub fn cusps_of_height(p: u64, h: u64) -> BTreeSet<CuspId> {
    enumerate_bounded_height(h)
        .map(|m| CuspId::new(&ProjMatFp::new(m.reduce(p)).expect("invertible")))
        .collect()
}

/// Singular bicusps `(c, g c')` with `c, c'` near `ι`, together with the
/// representatives `(γ(c), γ(c'))` that constrain `g`.
pub fn bicusps_at_vertex(
    g: &ProjMatFp,
    near: &BTreeSet<CuspId>,
) -> (Vec<SingularBicusp>, Vec<(ProjMatFp, ProjMatFp)>) {
    let mut out = Vec::new();
    let mut pairs = Vec::new();
    for c1 in near {
        for c2 in near {
            let second = c2.act(g);
            if c1.line() == second.line() {
                out.push(SingularBicusp { first: *c1, second });
                pairs.push((c1.rep(), c2.rep()));
            }
        }
    }
    (out, pairs)
}

/// Least `m ≤ limit` prime to p with every bicusp on `T_m`.
pub fn common_hecke_index(bicusps: &[SingularBicusp], limit: u64) -> Result<Option<u64>> {
    let Some(first) = bicusps.first() else {
        return Ok(Some(1));
    };
    let p = first.first.p();
    'm: for m in (1..=limit).filter(|m| m % p != 0) {
        let op = HeckeOp::new(m, HeckeConvention::PaperSigma1)?;
        for b in bicusps {
            if !hecke_on_cusps(&b.first, &op)?.contains(&b.second) {
                continue 'm;
            }
        }
        return Ok(Some(m));
    }
    Ok(None)
}

/// Integral representative of `g` with least positive determinant prime to
/// p, over lifts within `p` of the centered lifts of its scalar multiples.
pub fn small_projective_lift(g: &ProjMatFp) -> ([i64; 4], u64) {
    let p = g.p();
    let pi = p as i64;
    let mut best: Option<([i64; 4], u64)> = None;
    for l in 1..p {
        let c = g.matrix().scale(l).centered();
        for shift in 0..81 {
            let mut e = c;
            let mut s = shift;
            for x in e.iter_mut() {
                *x += (s % 3 - 1) * pi;
                s /= 3;
            }
            let det = e[0] * e[3] - e[1] * e[2];
            let key = |e: &[i64; 4], d: u64| (d, e.iter().map(|x| x.abs()).max());
            if det > 0
                && det as u64 % p != 0
                && best.is_none_or(|(b, d)| key(&e, det as u64) < key(&b, d))
            {
                best = Some((e, det as u64));
            }
        }
    }
    best.expect("a shifted lift has positive determinant")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicuspCandidate {
    /// `g` for the point `(ι, g ι)`; absent at sampled points.
    pub g: Option<ProjMatFp>,
    pub point: Option<[f64; 4]>,
    pub bicusps: usize,
    /// Points of P¹ whose images the constraints pin.
    pub pinned: usize,
    /// The pinned element, when three points determine it.
    pub pinned_g: Option<ProjMatFp>,
    /// Determinant of the small integral lift of the pinned element.
    pub lift_det: Option<u64>,
    /// Least common Hecke index of the nearby bicusps.
    pub m: Option<u64>,
}

impl BicuspCandidate {
    /// The pinned element, if any, is the true one.
    pub fn pinning_consistent(&self) -> bool {
        match (&self.g, &self.pinned_g) {
            (Some(g), Some(h)) => g == h,
            _ => true,
        }
    }
}

/// Indices are searched up to the bound, capped at `4p²`.
fn search_limit(job: &RepulsionJob) -> u64 {
    (job.hecke_bound("K_bicusp").ceil() as u64).min(4 * job.p * job.p)
}

/// The bicusp data at `(ι, g ι)`, or `None` with fewer than three bicusps.
pub fn examine_vertex_point(
    job: &RepulsionJob,
    g: &ProjMatFp,
    near: &BTreeSet<CuspId>,
) -> Result<Option<BicuspCandidate>> {
    let (bicusps, pairs) = bicusps_at_vertex(g, near);
    if bicusps.len() < 3 {
        return Ok(None);
    }
    let spec = double_coset_constraints(&pairs);
    let pinned_g = match &spec {
        MapSpecification::Determined(h) => Some(*h),
        MapSpecification::Inconsistent => {
            return Err(Error::Structural(format!(
                "constraints at {g} are inconsistent"
            )));
        }
        MapSpecification::Partial(_) => None,
    };
    Ok(Some(BicuspCandidate {
        g: Some(*g),
        point: None,
        bicusps: bicusps.len(),
        pinned: spec.pinned_count(),
        pinned_g,
        lift_det: pinned_g.map(|h| small_projective_lift(&h).1),
        m: common_hecke_index(&bicusps, search_limit(job))?,
    }))
}

/// Singular bicusps within `r` of `(x, y)`, found from the tiling.
pub fn bicusps_near(
    geom: &TriangleGeometry,
    x: C64,
    y: C64,
    r: f64,
    budget: usize,
) -> Result<Vec<SingularBicusp>> {
    let cx = cusps_within(geom, x, r, budget)?;
    let cy = cusps_within(geom, y, r, budget)?;
    let mut by_line: BTreeMap<_, Vec<CuspId>> = BTreeMap::new();
    for c in cy.keys() {
        by_line.entry(c.line()).or_default().push(*c);
    }
    let mut out = Vec::new();
    for c in cx.keys() {
        for d in by_line.get(&c.line()).into_iter().flatten() {
            out.push(SingularBicusp {
                first: *c,
                second: *d,
            });
        }
    }
    Ok(out)
}

fn vertex_part(job: &RepulsionJob) -> Result<(Vec<BicuspCandidate>, usize)> {
    let near = cusps_of_height(job.p, job.height(2.0));
    let elements = psl2_elements(job.p);
    let work = elements.len() * near.len() * near.len();
    if work > job.budget.max_pairs {
        return Err(Error::Budget(format!(
            "{work} cusp pairs exceed the budget {}",
            job.budget.max_pairs
        )));
    }
    let mut out = Vec::new();
    for g in &elements {
        out.extend(examine_vertex_point(job, g, &near)?);
    }
    Ok((out, elements.len()))
}

fn grid_part(job: &RepulsionJob, geom: &TriangleGeometry) -> Result<(Vec<BicuspCandidate>, usize)> {
    let r = (1.0 + job.delta) * job.log_p();
    let reach = geom
        .domain_vertices()
        .iter()
        .map(|v| crate::hyp::dist_h(*v, geom.cusp()))
        .fold(0.0, f64::max);
    let n = job.budget.sample_points;
    let xs = halton_ball(geom.cusp(), reach, n, job.seed);
    let ys = halton_ball(geom.cusp(), reach, n, job.seed + n as u64);
    let mut out = Vec::new();
    for &x in &xs {
        for &y in &ys {
            let b = bicusps_near(geom, x, y, r, job.budget.max_tiles)?;
            if b.len() < 3 {
                continue;
            }
            out.push(BicuspCandidate {
                g: None,
                point: Some([x.re, x.im, y.re, y.im]),
                bicusps: b.len(),
                pinned: 0,
                pinned_g: None,
                lift_det: None,
                m: common_hecke_index(&b, search_limit(job))?,
            });
        }
    }
    Ok((out, xs.len() * ys.len()))
}

fn summarize(
    name: &str,
    job: &RepulsionJob,
    found: Result<(Vec<BicuspCandidate>, usize)>,
) -> Result<CheckReport> {
    let bound = job.hecke_bound("K_bicusp");
    let (cands, examined) = match found {
        Ok(x) => x,
        Err(Error::Budget(msg)) => {
            return Ok(
                CheckReport::new(name, CheckStatus::Inconclusive, f64::NAN, bound)
                    .with_witness(json!({ "budget": msg })),
            )
        }
        Err(e) => return Err(e),
    };
    // A point with no common index fails outright.
    let worst_m = cands
        .iter()
        .map(|c| c.m.map_or(f64::INFINITY, |m| m as f64))
        .fold(0.0, f64::max);
    let inconsistent = cands.iter().filter(|c| !c.pinning_consistent()).count();
    let mut rep = CheckReport::at_most(name, worst_m, bound, 0.0);
    if inconsistent > 0 {
        rep.status = CheckStatus::Fail;
    }
    let offender = cands
        .iter()
        .find(|c| !c.pinning_consistent() || c.m.is_none_or(|m| m as f64 > bound));
    let mut ms: Vec<Option<u64>> = cands.iter().map(|c| c.m).collect();
    ms.sort_unstable();
    ms.dedup();
    let witness = json!({
        "examined": examined,
        "candidates": cands.len(),
        "determined": cands.iter().filter(|c| c.pinned_g.is_some()).count(),
        "partial": cands.iter().filter(|c| c.g.is_some() && c.pinned_g.is_none()).count(),
        "inconsistent_pinning": inconsistent,
        "indices": ms,
        "fitted_constant": worst_m / (job.p as f64).powf(job.constant("K_bicusp") * job.delta),
        "offender": offender,
    });
    Ok(rep.with_witness(witness))
}

/// Points near at least three singular bicusps have all of them on one
/// `T_m` with `m ≤ C_hecke p^{K δ}`. Vertex-orbit points are exhaustive;
/// grid points are added when the triangle is hyperbolic.
pub fn check_bicusp_repulsion(job: &RepulsionJob) -> Result<CheckReport> {
    let vertex = summarize("bicusp_repulsion_vertex", job, vertex_part(job))?;
    let mut parts = vec![vertex];
    if job.p >= 7 {
        let geom = TriangleGeometry::new(job.p)?;
        parts.push(summarize(
            "bicusp_repulsion_grid",
            job,
            grid_part(job, &geom),
        )?);
    }
    let status = parts
        .iter()
        .fold(CheckStatus::Pass, |s, r| worst(s, r.status));
    let head = parts.iter().find(|r| !r.passed()).unwrap_or(&parts[0]);
    let witness = json!({
        "p": job.p,
        "delta": job.delta,
        "height": job.height(2.0),
        "parts": parts.iter().map(|r| json!({
            "check": r.check, "status": r.status, "lhs": r.lhs, "rhs": r.rhs, "witness": r.witness,
        })).collect::<Vec<_>>(),
    });
    Ok(CheckReport::new("bicusp_repulsion", status, head.lhs, head.rhs).with_witness(witness))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_point_is_on_t1() {
        let job = RepulsionJob::new(5, 0.1).unwrap();
        let near = cusps_of_height(5, job.height(2.0));
        let c = examine_vertex_point(&job, &ProjMatFp::identity(5), &near)
            .unwrap()
            .unwrap();
        assert_eq!(c.m, Some(1));
        assert!(c.bicusps >= 3);
        assert_eq!(c.pinned_g, Some(ProjMatFp::identity(5)));
        assert_eq!(c.lift_det, Some(1));
    }

    #[test]
    fn few_bicusps_are_skipped() {
        let job = RepulsionJob::new(7, 0.1).unwrap();
        let one = [CuspId::identity(7)].into_iter().collect();
        assert!(examine_vertex_point(&job, &ProjMatFp::identity(7), &one)
            .unwrap()
            .is_none());
        assert_eq!(common_hecke_index(&[], 10).unwrap(), Some(1));
    }

    #[test]
    fn small_lift_of_t0_combination() {
        let g = ProjMatFp::from_ints(7, [1, 1, -1, 1]).unwrap();
        assert_eq!(small_projective_lift(&g).1, 2);
    }

    #[test]
    fn exhaustive_p5() {
        let job = RepulsionJob::new(5, 0.1).unwrap();
        let rep = check_bicusp_repulsion(&job).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass, "{}", rep.witness);
    }
}
