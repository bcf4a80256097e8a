//! Repulsion of cusps: unique nearby lifts, lens envelopes and local counts.

use std::collections::BTreeMap;

use serde_json::json;

use super::common::{ball, cusps_within, halton_ball, worst};
use super::job::RepulsionJob;
use crate::error::{Error, Result};
use crate::hyp::{ball_intersection_envelope, dist_h, ModelPoint, C64};
use crate::modcurves::cusps::CuspId;
use crate::report::{CheckReport, CheckStatus};
use crate::tiling::geometry::TriangleGeometry;

/// Lifts of each cusp class other than that of `i y_p` within `r` of
/// `i y_p`, sorted by distance.
pub fn cusp_lifts_near_base(
    geom: &TriangleGeometry,
    r: f64,
    budget: usize,
) -> Result<BTreeMap<CuspId, Vec<(C64, f64)>>> {
    let base = CuspId::identity(geom.p);
    let c = geom.cusp();
    let mut out: BTreeMap<CuspId, Vec<(C64, f64)>> = BTreeMap::new();
    for t in &ball(geom, c, r, budget)?.tiles {
        let z = t.isometry.act_h(c);
        let d = dist_h(c, z);
        let class = CuspId::new(&t.fp_image);
        if d > r || class == base {
            continue;
        }
        let lifts = out.entry(class).or_default();
        if !lifts.iter().any(|(w, _)| dist_h(*w, z) < 1e-6) {
            lifts.push((z, d));
        }
    }
    for v in out.values_mut() {
        v.sort_by(|a, b| a.1.total_cmp(&b.1));
    }
    Ok(out)
}

fn budget_report(check: &str, e: Error) -> Result<CheckReport> {
    match e {
        Error::Budget(msg) => {
            Ok(
                CheckReport::new(check, CheckStatus::Inconclusive, f64::NAN, f64::NAN)
                    .with_witness(json!({ "budget": msg })),
            )
        }
        e => Err(e),
    }
}

/// At most one lift of each other cusp within `(2+δ) log p` of `i y_p`.
pub fn cusp_repulsion_unique_lift(
    job: &RepulsionJob,
    geom: &TriangleGeometry,
) -> Result<CheckReport> {
    let r = (2.0 + job.delta) * job.log_p();
    let lifts = match cusp_lifts_near_base(geom, r, job.budget.max_tiles) {
        Ok(l) => l,
        Err(e) => return budget_report("cusp_repulsion_a", e),
    };
    let (worst_class, most) = lifts
        .iter()
        .map(|(c, v)| (*c, v.len()))
        .max_by_key(|x| x.1)
        .unwrap_or((CuspId::identity(geom.p), 0));
    let witness = json!({
        "radius": r,
        "classes": lifts.len(),
        "worst_class": worst_class.to_string(),
        "worst_lifts": lifts.get(&worst_class).map(|v| v.iter().map(|(z, d)| json!([z.re, z.im, d])).collect::<Vec<_>>()),
    });
    Ok(CheckReport::at_most("cusp_repulsion_a", most as f64, 1.0, 0.0).with_witness(witness))
}

/// Lenses `B(c0, (1+δ) log p) ∩ B(c, (1+δ) log p)` fit in balls of radius
/// `δ log p + C_radius`. The fitted constant is the largest envelope radius
/// minus `δ log p`.
pub fn cusp_repulsion_lens(job: &RepulsionJob, geom: &TriangleGeometry) -> Result<CheckReport> {
    let big = (1.0 + job.delta) * job.log_p();
    let lifts = match cusp_lifts_near_base(geom, 2.0 * big, job.budget.max_tiles) {
        Ok(l) => l,
        Err(e) => return budget_report("cusp_repulsion_b", e),
    };
    let c0 = geom.cusp_point();
    let mut fitted = f64::NEG_INFINITY;
    let mut worst_class = None;
    let mut lenses = 0usize;
    let mut multi = 0usize;
    for (class, v) in &lifts {
        let meeting: Vec<_> = v.iter().filter(|(_, d)| *d < 2.0 * big).collect();
        if meeting.len() > 1 {
            multi += 1;
        }
        for (z, d) in meeting {
            lenses += 1;
            let env = ball_intersection_envelope(
                c0,
                ModelPoint::half_plane(*z)?,
                0.5 * d,
                big - 0.5 * d,
            )?;
            let c = env.radius - job.delta * job.log_p();
            if c > fitted {
                fitted = c;
                worst_class = Some(class.to_string());
            }
        }
    }
    let witness = json!({
        "lenses": lenses,
        "classes_with_several_lenses": multi,
        "fitted_constant": fitted,
        "worst_class": worst_class,
    });
    let lhs = if lenses == 0 { 0.0 } else { fitted };
    Ok(
        CheckReport::at_most("cusp_repulsion_b", lhs, job.constant("C_radius"), 0.0)
            .with_witness(witness),
    )
}

/// Sample points for the local counts: Halton points of a ball covering F.
pub fn cusp_sample_points(job: &RepulsionJob, geom: &TriangleGeometry) -> Vec<C64> {
    let reach = geom
        .domain_vertices()
        .iter()
        .map(|v| dist_h(*v, geom.cusp()))
        .fold(0.0, f64::max);
    halton_ball(geom.cusp(), reach, job.budget.sample_points, job.seed)
}

/// At most `C_count · p^{12δ}` cusps within `(1+δ) log p` of each sample.
pub fn cusp_repulsion_count(
    job: &RepulsionJob,
    geom: &TriangleGeometry,
    points: &[C64],
) -> Result<CheckReport> {
    let r = (1.0 + job.delta) * job.log_p();
    let scale = (job.p as f64).powf(12.0 * job.delta);
    let mut most = 0usize;
    let mut at = None;
    for &x in points {
        let n = match cusps_within(geom, x, r, job.budget.max_tiles) {
            Ok(m) => m.len(),
            Err(e) => return budget_report("cusp_repulsion_c", e),
        };
        if n > most {
            most = n;
            at = Some([x.re, x.im]);
        }
    }
    let witness = json!({
        "radius": r,
        "points": points.len(),
        "max_count": most,
        "at": at,
        "fitted_constant": most as f64 / scale,
    });
    Ok(CheckReport::at_most(
        "cusp_repulsion_c",
        most as f64,
        job.constant("C_count") * scale,
        0.0,
    )
    .with_witness(witness))
}

/// The three parts together. The headline numbers are those of the first
/// part that does not pass, else of part (a).
pub fn check_cusp_repulsion(job: &RepulsionJob) -> Result<CheckReport> {
    let geom = TriangleGeometry::new(job.p)?;
    let parts = [
        cusp_repulsion_unique_lift(job, &geom)?,
        cusp_repulsion_lens(job, &geom)?,
        cusp_repulsion_count(job, &geom, &cusp_sample_points(job, &geom))?,
    ];
    let status = parts
        .iter()
        .fold(CheckStatus::Pass, |s, r| worst(s, r.status));
    let head = parts.iter().find(|r| !r.passed()).unwrap_or(&parts[0]);
    let witness = json!({
        "p": job.p,
        "delta": job.delta,
        "parts": parts.iter().map(|r| json!({
            "check": r.check, "status": r.status, "lhs": r.lhs, "rhs": r.rhs, "witness": r.witness,
        })).collect::<Vec<_>>(),
    });
    Ok(CheckReport::new("cusp_repulsion", status, head.lhs, head.rhs).with_witness(witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::CheckStatus;

    #[test]
    fn second_lifts_inside_the_radius() {
        // At p = 7 the ball of radius (2+δ) log p covers X(7) several times
        // over, so some class has many lifts in it.
        let job = RepulsionJob::new(7, 0.05).unwrap();
        let geom = TriangleGeometry::new(7).unwrap();
        let rep = cusp_repulsion_unique_lift(&job, &geom).unwrap();
        assert_eq!(rep.status, CheckStatus::Fail);
        assert_eq!(rep.lhs, 9.0);
        assert_eq!(rep.witness["classes"], 23);
        // At p = 13 a pair of lifts at equal distance is still closer than
        // 2 log p.
        let geom = TriangleGeometry::new(13).unwrap();
        let l = cusp_lifts_near_base(&geom, 2.2 * 13f64.ln(), 2_000_000).unwrap();
        let second = l
            .values()
            .filter(|v| v.len() > 1)
            .map(|v| v[1].1)
            .fold(f64::INFINITY, f64::min);
        assert!((second - 4.6572).abs() < 1e-3, "{second}");
        assert!(second < 2.0 * 13f64.ln());
    }

    #[test]
    fn exhaustive_lifts_match_cusp_count() {
        // Far enough out, every class appears and some several times.
        let geom = TriangleGeometry::new(7).unwrap();
        let l = cusp_lifts_near_base(&geom, 3.0 * 7f64.ln(), 2_000_000).unwrap();
        assert_eq!(l.len(), 23);
        assert!(l.values().any(|v| v.len() > 1));
        let nearest = l.values().map(|v| v[0].1).fold(f64::INFINITY, f64::min);
        assert!((nearest - 2.0 * geom.log_y).abs() < 1e-9);
    }

    #[test]
    fn lens_envelopes_fit() {
        for p in [7u64, 11] {
            let job = RepulsionJob::new(p, 0.1).unwrap();
            let geom = TriangleGeometry::new(p).unwrap();
            let rep = cusp_repulsion_lens(&job, &geom).unwrap();
            assert_eq!(rep.status, CheckStatus::Pass, "{rep:?}");
        }
        // The (2,3,5) triangle is spherical, so there is no hyperbolic model.
        let job = RepulsionJob::new(5, 0.1).unwrap();
        assert!(matches!(check_cusp_repulsion(&job), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_delta_edge_counts_a_cusp() {
        let geom = TriangleGeometry::new(7).unwrap();
        let x = C64::new(0.02, geom.y_p * 0.9);
        let n = cusps_within(&geom, x, 7f64.ln(), 1_000_000).unwrap();
        assert!(!n.is_empty());
    }

    #[test]
    fn combined_report_and_budget() {
        let job = RepulsionJob::new(7, 0.05).unwrap();
        let rep = check_cusp_repulsion(&job).unwrap();
        assert_eq!(rep.witness["parts"].as_array().unwrap().len(), 3);
        let tiny = job.clone().with_budget(super::super::job::Budget {
            max_tiles: 10,
            ..Default::default()
        });
        let r = check_cusp_repulsion(&tiny).unwrap();
        assert_eq!(r.status, CheckStatus::Inconclusive);
    }
}
