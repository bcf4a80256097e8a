//! Repulsion of the diagonals `Δ_g` in `(X(p) × X(p))²`.
//!
//! A point is `ξ = ((x1, y1), (x2, y2))` given by lifts to the tiled plane,
//! and `ξ ∈ B(Δ_g, r)` when `d(x1, g x2) < r` and `d(y1, g y2) < r`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::bicusp::small_projective_lift;
use super::cm::act_int;
use super::common::{ball, bicusp_distance, deck_elements_within, halton_ball};
use super::job::RepulsionJob;
use crate::arith::fp::{MatFp, ProjMatFp};
use crate::arith::subspace::{centralizer, classify_subalgebra, FpSubspace, SubalgebraKind};
use crate::error::{Error, Result};
use crate::hyp::{dist_h, C64};
use crate::report::{CheckReport, CheckStatus};
use crate::tiling::geometry::TriangleGeometry;
use crate::tiling::words::fp_generator;

/// Deck elements `g` with `ξ ∈ B(Δ_g, r)`.
pub fn diagonal_elements(
    geom: &TriangleGeometry,
    xi: &[C64; 4],
    r: f64,
    budget: usize,
) -> Result<Vec<ProjMatFp>> {
    let a = deck_elements_within(geom, xi[0], xi[2], r, budget)?;
    let b = deck_elements_within(geom, xi[1], xi[3], r, budget)?;
    Ok(a.keys().filter(|g| b.contains_key(g)).copied().collect())
}

/// The nearest lift of a point over `ι` to `z`: its label and distance.
pub fn snap_to_iota(geom: &TriangleGeometry, z: C64, budget: usize) -> Result<(ProjMatFp, f64)> {
    let i = geom.vertex_i();
    let reach = geom
        .domain_vertices()
        .iter()
        .map(|v| dist_h(*v, i))
        .fold(0.0, f64::max)
        + 1e-6;
    let mut best: Option<(f64, ProjMatFp)> = None;
    for t in &ball(geom, z, reach, budget)?.tiles {
        let d = dist_h(z, t.isometry.act_h(i));
        let better = match &best {
            None => true,
            Some((bd, bl)) => d < bd - 1e-12 || ((d - bd).abs() <= 1e-12 && t.fp_image < *bl),
        };
        if better {
            best = Some((d, t.fp_image));
        }
    }
    let (d, label) = best.ok_or_else(|| Error::Structural(format!("no lift of ι near {z}")))?;
    Ok((label, d))
}

/// A lift of the point `h ι` to the tiled plane, searched in growing balls
/// around `i`.
pub fn iota_lift(geom: &TriangleGeometry, h: &ProjMatFp, budget: usize) -> Result<C64> {
    let s = fp_generator(geom.p, crate::tiling::words::Gen::S2);
    let i = geom.vertex_i();
    let mut r = 1.0;
    loop {
        let b = ball(geom, i, r, budget)?;
        let hit = b
            .tiles
            .iter()
            .filter(|t| t.fp_image == *h || t.fp_image == h.mul(&s))
            .map(|t| t.isometry.act_h(i))
            .min_by(|a, b| dist_h(i, *a).total_cmp(&dist_h(i, *b)));
        if let Some(z) = hit {
            return Ok(z);
        }
        r += 1.0;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseA {
    /// Distance to the nearest singular bicusp over the two projections.
    pub d: f64,
    pub bound: f64,
    /// `count · e^d / p^{1+δ/2}`.
    pub fitted_constant: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseB {
    pub m: u64,
    /// Integral `α` with `ᾱ⁻¹ = γ` projectively.
    pub alpha: [i64; 4],
    pub gamma: ProjMatFp,
    pub snap: f64,
    /// `r + snap + ½ d(i, α i)`, an upper bound for the distance to `τ_{g,m}`.
    pub distance: f64,
    pub distance_bound: f64,
    pub m_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubalgebraInfo {
    pub dim: usize,
    pub centralizer_dim: usize,
    pub kind: SubalgebraKind,
    /// A non-scalar centralizer forces a torus or `F_p[x]/(x²)`.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagEvaluation {
    pub point: [[f64; 2]; 4],
    pub count: usize,
    pub threshold: f64,
    pub case_a: Option<CaseA>,
    pub case_b: Option<CaseB>,
    pub subalgebra: Option<SubalgebraInfo>,
    pub status: CheckStatus,
}

/// Reductions of the integer matrices of height at most `h`.
fn small_matrices(p: u64, h: u64) -> BTreeSet<MatFp> {
    let h = h as i128;
    let range = || -h..=h;
    let mut out = BTreeSet::new();
    for a in range() {
        for b in range() {
            for c in range() {
                for d in range() {
                    out.insert(MatFp::from_ints(p, [a, b, c, d]));
                }
            }
        }
    }
    out
}

/// The span `T` of the small matrices whose `γ`-conjugates are small, and
/// its place in the trichotomy.
pub fn transporter_span(gamma: &ProjMatFp, small: &BTreeSet<MatFp>) -> SubalgebraInfo {
    let p = gamma.p();
    let g = gamma.matrix();
    let gi = gamma.inverse().matrix();
    let members: Vec<MatFp> = small
        .iter()
        .filter(|a| small.contains(&gi.mul(a).mul(&g)))
        .copied()
        .collect();
    let t = FpSubspace::span(p, &members);
    let cdim = centralizer(p, &t.basis()).dim();
    let (kind, _) = classify_subalgebra(&t);
    let consistent = cdim == 1
        || matches!(
            kind,
            SubalgebraKind::Scalars
                | SubalgebraKind::SplitTorus
                | SubalgebraKind::NonsplitTorus
                | SubalgebraKind::NilpotentExt
        );
    SubalgebraInfo {
        dim: t.dim(),
        centralizer_dim: cdim,
        kind,
        consistent,
    }
}

fn case_a(
    job: &RepulsionJob,
    geom: &TriangleGeometry,
    xi: &[C64; 4],
    count: usize,
) -> Result<Option<CaseA>> {
    let reach = (1.0 + job.delta) * job.log_p();
    let b = job.budget.max_tiles;
    let d1 = bicusp_distance(geom, xi[0], xi[1], reach, b)?;
    let d2 = bicusp_distance(geom, xi[2], xi[3], reach, b)?;
    let Some(d) = [d1, d2].into_iter().flatten().reduce(f64::min) else {
        return Ok(None);
    };
    let scale = (job.p as f64).powf(1.0 + job.delta / 2.0) * (-d).exp();
    let bound = job.constant("C_diag") * scale;
    Ok(Some(CaseA {
        d,
        bound,
        fitted_constant: count as f64 / scale,
        holds: count as f64 <= bound,
    }))
}

fn case_b(job: &RepulsionJob, geom: &TriangleGeometry, xi: &[C64; 4]) -> Result<CaseB> {
    let r = job.delta * job.log_p();
    let (h3, s3) = snap_to_iota(geom, xi[2], job.budget.max_tiles)?;
    let (h4, s4) = snap_to_iota(geom, xi[3], job.budget.max_tiles)?;
    let s = fp_generator(job.p, crate::tiling::words::Gen::S2);
    let i = C64::new(0.0, 1.0);
    let mut best: Option<(u64, f64, [i64; 4], ProjMatFp)> = None;
    // Either representative of each snapped point may be used.
    for a in [h3, h3.mul(&s)] {
        for b in [h4, h4.mul(&s)] {
            let gamma = a.inverse().mul(&b);
            let (alpha, m) = small_projective_lift(&gamma.inverse());
            let half = 0.5 * dist_h(i, act_int(alpha.map(i128::from), i));
            if best
                .as_ref()
                .is_none_or(|(bm, bh, _, _)| (m, half) < (*bm, *bh))
            {
                best = Some((m, half, alpha, gamma));
            }
        }
    }
    let (m, half, alpha, gamma) = best.expect("four candidates");
    let snap = s3.max(s4);
    let distance = r + snap + half;
    let distance_bound = job.constant("C_tau") * r;
    let m_bound = job.hecke_bound("K_diag");
    Ok(CaseB {
        m,
        alpha,
        gamma,
        snap,
        distance,
        distance_bound,
        m_bound,
        holds: distance <= distance_bound && m as f64 <= m_bound,
    })
}

/// Counts the diagonal neighborhoods through `ξ` and, above the threshold,
/// tests the two alternatives.
pub fn evaluate_diag_point(
    job: &RepulsionJob,
    geom: &TriangleGeometry,
    xi: &[C64; 4],
    small: &BTreeSet<MatFp>,
) -> Result<DiagEvaluation> {
    let r = job.delta * job.log_p();
    let count = diagonal_elements(geom, xi, r, job.budget.max_tiles)?.len();
    let threshold = job.constant("C_omega") * job.log_p();
    let point = xi.map(|z| [z.re, z.im]);
    if count as f64 <= threshold {
        return Ok(DiagEvaluation {
            point,
            count,
            threshold,
            case_a: None,
            case_b: None,
            subalgebra: None,
            status: CheckStatus::Pass,
        });
    }
    let a = case_a(job, geom, xi, count)?;
    let b = case_b(job, geom, xi)?;
    let sub = transporter_span(&b.gamma, small);
    let ok = (a.as_ref().is_some_and(|a| a.holds) || b.holds) && sub.consistent;
    let status = if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(DiagEvaluation {
        point,
        count,
        threshold,
        case_a: a,
        case_b: Some(b),
        subalgebra: Some(sub),
        status,
    })
}

/// Sample points: Halton points `x1, y1` over the fundamental domain with
/// `x2, y2` within `r/2` of them, plus a point at the cusp vertex.
pub fn diag_sample_points(job: &RepulsionJob, geom: &TriangleGeometry) -> Vec<[C64; 4]> {
    let r = job.delta * job.log_p();
    let n = job.budget.sample_points;
    let reach = geom
        .domain_vertices()
        .iter()
        .map(|v| dist_h(*v, geom.cusp()))
        .fold(0.0, f64::max);
    let xs = halton_ball(geom.cusp(), reach, n, job.seed);
    let ys = halton_ball(geom.cusp(), reach, n, job.seed + 7919);
    let mut out: Vec<[C64; 4]> = (0..n)
        .map(|k| {
            let x2 = halton_ball(xs[k], 0.5 * r, 1, job.seed + 2 * k as u64)[0];
            let y2 = halton_ball(ys[k], 0.5 * r, 1, job.seed + 2 * k as u64 + 1)[0];
            [xs[k], ys[k], x2, y2]
        })
        .collect();
    let c = geom.cusp() + C64::new(1e-3, 0.0);
    out.push([c, c, c, c]);
    out
}

/// Points in many diagonal neighborhoods are near singular bicusps or near
/// a small Hecke curve.
pub fn check_diag_repulsion(job: &RepulsionJob) -> Result<CheckReport> {
    let geom = TriangleGeometry::new(job.p)?;
    let small = small_matrices(job.p, job.height(6.0));
    let mut evals = Vec::new();
    for xi in diag_sample_points(job, &geom) {
        match evaluate_diag_point(job, &geom, &xi, &small) {
            Ok(e) => evals.push(e),
            Err(Error::Budget(msg)) => {
                return Ok(CheckReport::new(
                    "diag_repulsion",
                    CheckStatus::Inconclusive,
                    f64::NAN,
                    f64::NAN,
                )
                .with_witness(json!({ "budget": msg })))
            }
            Err(e) => return Err(e),
        }
    }
    let threshold = job.constant("C_omega") * job.log_p();
    let max_count = evals.iter().map(|e| e.count).max().unwrap_or(0);
    let over: Vec<&DiagEvaluation> = evals.iter().filter(|e| e.case_b.is_some()).collect();
    let failed: Vec<&DiagEvaluation> = evals
        .iter()
        .filter(|e| e.status == CheckStatus::Fail)
        .collect();
    let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
    for e in &over {
        if let Some(s) = &e.subalgebra {
            *kinds.entry(format!("{:?}", s.kind)).or_default() += 1;
        }
    }
    let status = if failed.is_empty() {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    let witness = json!({
        "p": job.p,
        "delta": job.delta,
        "samples": evals.len(),
        "max_count": max_count,
        "over_threshold": over.len(),
        "case_a": over.iter().filter(|e| e.case_a.as_ref().is_some_and(|a| a.holds)).count(),
        "case_b": over.iter().filter(|e| e.case_b.as_ref().is_some_and(|b| b.holds)).count(),
        "max_fitted_constant": over.iter().filter_map(|e| e.case_a.as_ref().map(|a| a.fitted_constant)).fold(0.0, f64::max),
        "subalgebras": kinds,
        "offender": failed.first(),
    });
    Ok(
        CheckReport::new("diag_repulsion", status, max_count as f64, threshold)
            .with_witness(witness),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::subspace::t0_combination;

    fn low_threshold(p: u64) -> RepulsionJob {
        RepulsionJob::new(p, 0.1)
            .unwrap()
            .with_constant("C_omega", 0.25)
            .unwrap()
    }

    #[test]
    fn near_cm_point_on_the_diagonal() {
        let job = RepulsionJob::new(7, 0.1).unwrap();
        let geom = TriangleGeometry::new(7).unwrap();
        let z = C64::new(1e-3, 1.0);
        let small = small_matrices(7, job.height(6.0));
        let e = evaluate_diag_point(&job, &geom, &[z, z, z, z], &small).unwrap();
        // Only the stabilizer of ι moves z by less than δ log p.
        assert_eq!(e.count, 2);
        assert!(e.case_b.is_none());
        assert_eq!(e.status, CheckStatus::Pass);
    }

    #[test]
    fn bicusp_point_satisfies_case_a() {
        let job = low_threshold(7);
        let geom = TriangleGeometry::new(7).unwrap();
        let c = geom.cusp() + C64::new(1e-3, 0.0);
        let small = small_matrices(7, job.height(6.0));
        let e = evaluate_diag_point(&job, &geom, &[c, c, c, c], &small).unwrap();
        // The whole cusp stabilizer acts by tiny rotations.
        assert_eq!(e.count, 7);
        let a = e.case_a.unwrap();
        assert!(a.holds && a.d < 1e-2, "{a:?}");
        assert!(a.fitted_constant < 1.0);
    }

    #[test]
    fn constructed_hecke_curve_point_gets_two() {
        let job = low_threshold(7);
        let geom = TriangleGeometry::new(7).unwrap();
        let gamma = ProjMatFp::new(t0_combination(7, 1, 1)).unwrap();
        let i = geom.vertex_i();
        let y = iota_lift(&geom, &gamma, 1_000_000).unwrap();
        let small = small_matrices(7, job.height(6.0));
        let e = evaluate_diag_point(&job, &geom, &[i, y, i, y], &small).unwrap();
        assert_eq!(e.count, 2);
        let b = e.case_b.unwrap();
        assert_eq!(b.m, 2);
        assert!(b.holds && b.snap < 1e-9, "{b:?}");
        assert!((b.distance - job.delta * job.log_p()).abs() < 1e-9);
        let sub = e.subalgebra.unwrap();
        assert!(sub.consistent);
    }

    #[test]
    fn trichotomy_on_tori() {
        let p = 7;
        let small = small_matrices(p, 1);
        let t = ProjMatFp::from_ints(p, [1, 1, 0, 1]).unwrap();
        let info = transporter_span(&t, &small);
        assert!(info.consistent);
        assert_eq!(transporter_span(&ProjMatFp::identity(p), &small).dim, 4);
    }

    #[test]
    fn desk_run_and_budget() {
        let job = RepulsionJob::new(7, 0.1).unwrap();
        let rep = check_diag_repulsion(&job).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass, "{}", rep.witness);
        // Counts never exceed the cusp stabilizer order at this size.
        assert!(rep.lhs <= 7.0);
        let low = low_threshold(7);
        assert_eq!(
            check_diag_repulsion(&low).unwrap().status,
            CheckStatus::Pass
        );
        let tiny = job.with_budget(super::super::job::Budget {
            max_tiles: 3,
            ..Default::default()
        });
        assert_eq!(
            check_diag_repulsion(&tiny).unwrap().status,
            CheckStatus::Inconclusive
        );
    }
}
