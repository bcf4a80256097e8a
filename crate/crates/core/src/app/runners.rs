//! The checks behind each subcommand. Work is split into independent tasks
//! that run on a bounded pool; results keep the task order.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::JobConfig;
use crate::arith::intmat::min_semisimple_trace;
use crate::error::{Error, Result};
use crate::hyp::{Isometry, Model, C64};
use crate::modcurves::cm::{elliptic_coset, enumerate_cm_points, CmFlavor};
use crate::modcurves::{
    enumerate_cusps, enumerate_singular_bicusps, genus_and_volume, hecke_on_cusps, HeckeConvention,
    HeckeOp,
};
use crate::report::{CheckReport, CheckStatus};
use crate::repulsion::diag::iota_lift;
use crate::repulsion::mult::{rotated_neg_family, PlacedPatch};
use crate::repulsion::{
    check_bicusp_repulsion, check_cm_repulsion, check_cusp_repulsion, check_diag_repulsion,
    mobius_ratio_asymptotic, mult_vs_volume_report, RepulsionJob, SpecialSet,
};
use crate::tiling::words::{fp_generator, fp_homomorphism, Gen};
use crate::tiling::{compute_vertex_params, verify_disksep};
use crate::volume::checks::{
    builtin_htad_family, builtin_htd_family, family_ratio_checks, measured_ratio,
};
use crate::volume::{
    curve_volume, profile_positivity_check, CurvePatch, ProfileKind, RadialProfile, RegionSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyTarget {
    Geometry,
    Repulsion,
    Volume,
    Multiplicity,
}

impl std::str::FromStr for VerifyTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometry" => Ok(Self::Geometry),
            "repulsion" => Ok(Self::Repulsion),
            "volume" => Ok(Self::Volume),
            "multiplicity" => Ok(Self::Multiplicity),
            _ => Err(Error::Domain(format!("unknown verify target {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ListTarget {
    Cusps,
    Cm,
    Bicusps,
    Hecke,
}

impl std::str::FromStr for ListTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cusps" => Ok(Self::Cusps),
            "cm" => Ok(Self::Cm),
            "bicusps" => Ok(Self::Bicusps),
            "hecke" => Ok(Self::Hecke),
            _ => Err(Error::Domain(format!("unknown list target {s:?}"))),
        }
    }
}

type Task<'a> = (
    String,
    Option<u64>,
    Box<dyn Fn() -> Result<Vec<CheckReport>> + Send + Sync + 'a>,
);

/// Errors become reports: a budget overrun is INCONCLUSIVE, anything else
/// FAIL, with the message as witness.
fn settle(name: &str, p: Option<u64>, r: Result<Vec<CheckReport>>) -> Vec<CheckReport> {
    match r {
        Ok(v) => v,
        Err(e) => {
            let status = if matches!(e, Error::Budget(_)) {
                CheckStatus::Inconclusive
            } else {
                CheckStatus::Fail
            };
            let mut w = json!({ "error": e.to_string() });
            if let Some(p) = p {
                w["p"] = json!(p);
            }
            vec![CheckReport::new(name, status, f64::NAN, f64::NAN).with_witness(w)]
        }
    }
}

fn run_tasks(cfg: &JobConfig, tasks: Vec<Task<'_>>) -> Result<Vec<CheckReport>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Structural(e.to_string()))?;
    let out: Vec<Vec<CheckReport>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(name, p, f)| {
                let t = Instant::now();
                let reps = settle(name, *p, f());
                let dt = t.elapsed().as_secs_f64() / reps.len().max(1) as f64;
                reps.into_iter().map(|r| r.with_runtime(dt)).collect()
            })
            .collect()
    });
    Ok(out.into_iter().flatten().collect())
}

fn with_p(mut r: CheckReport, p: u64) -> CheckReport {
    match &mut r.witness {
        Value::Object(m) => {
            m.entry("p").or_insert(json!(p));
        }
        Value::Null => r.witness = json!({ "p": p }),
        _ => {}
    }
    r
}

pub fn repulsion_job(cfg: &JobConfig, p: u64) -> Result<RepulsionJob> {
    let mut job = RepulsionJob::new(p, cfg.delta)?
        .with_seed(cfg.seed)
        .with_tol(cfg.tol)?;
    for (k, v) in &cfg.constants {
        job = job.with_constant(k, *v)?;
    }
    if let Some(h) = cfg.height_bound {
        job = job.with_height_bound(h);
    }
    Ok(job)
}

pub fn run_verify(target: VerifyTarget, cfg: &JobConfig) -> Result<Vec<CheckReport>> {
    cfg.validate()?;
    let tasks = match target {
        VerifyTarget::Geometry => geometry_tasks(cfg),
        VerifyTarget::Repulsion => repulsion_tasks(cfg),
        VerifyTarget::Volume => volume_tasks(cfg)?,
        VerifyTarget::Multiplicity => multiplicity_tasks(cfg),
    };
    run_tasks(cfg, tasks)
}

fn geometry_tasks(cfg: &JobConfig) -> Vec<Task<'_>> {
    let tol = cfg.tol;
    let mut tasks: Vec<Task<'_>> = Vec::new();
    for &p in &cfg.p {
        let pf = p as f64;
        tasks.push((
            "vertex_params".into(),
            Some(p),
            Box::new(move || {
                let g = compute_vertex_params(p)?;
                let dev = (g.log_y.cosh() * (PI / pf).sin() - 0.5).abs();
                Ok(vec![with_p(
                    CheckReport::at_most("vertex_params", dev, 0.0, tol)
                        .with_witness(json!({"y_p": g.y_p, "theta_p": g.theta_p})),
                    p,
                )])
            }),
        ));
        tasks.push((
            "triangle_angles_area".into(),
            Some(p),
            Box::new(move || {
                let g = compute_vertex_params(p)?;
                let want = [PI / 2.0, PI / pf, PI / 3.0];
                let got = g.triangle_angles();
                let dev = got
                    .iter()
                    .zip(want)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let area = g.triangle_area_by_quadrature()?;
                let exact = PI * (1.0 / 6.0 - 1.0 / pf);
                Ok(vec![
                    with_p(
                        CheckReport::at_most("triangle_angles", dev, 0.0, tol)
                            .with_witness(json!({"angles": got})),
                        p,
                    ),
                    with_p(
                        CheckReport::at_most("triangle_area", (area - exact).abs(), 0.0, tol)
                            .with_witness(json!({"quadrature": area, "exact": exact})),
                        p,
                    ),
                ])
            }),
        ));
        tasks.push((
            "generator_relations".into(),
            Some(p),
            Box::new(move || {
                let g = compute_vertex_params(p)?;
                let iso = |w: &[Gen]| {
                    w.iter().fold(Isometry::identity(Model::HalfPlane), |a, x| {
                        a.compose(&g.gen_isometry(*x))
                    })
                };
                let sp: Vec<Gen> = vec![Gen::Sp(1); p as usize];
                let words: [(&str, Vec<Gen>); 4] = [
                    ("s2^2", vec![Gen::S2, Gen::S2]),
                    ("s3^3", vec![Gen::S3, Gen::S3, Gen::S3]),
                    ("sp^p", sp),
                    ("s2 s3 sp", vec![Gen::S2, Gen::S3, Gen::Sp(1)]),
                ];
                let broken: Vec<&str> = words
                    .iter()
                    .filter(|(_, w)| {
                        !iso(w).is_identity(tol.max(1e-12)) || !fp_homomorphism(p, w).is_identity()
                    })
                    .map(|(n, _)| *n)
                    .collect();
                let orders_ok = fp_generator(p, Gen::S2).order() == 2
                    && fp_generator(p, Gen::S3).order() == 3
                    && fp_generator(p, Gen::Sp(1)).order() == p;
                let bad = broken.len() + usize::from(!orders_ok);
                Ok(vec![with_p(
                    CheckReport::at_most("generator_relations", bad as f64, 0.0, 0.0)
                        .with_witness(json!({"broken": broken, "fp_orders": orders_ok})),
                    p,
                )])
            }),
        ));
        tasks.push((
            "genus_volume".into(),
            Some(p),
            Box::new(move || {
                let gv = genus_and_volume(p)?;
                let gauss_bonnet = 2.0 * PI * (2.0 * gv.genus as f64 - 2.0);
                let dev = (gv.volume - gauss_bonnet).abs();
                Ok(vec![with_p(
                    CheckReport::at_most(
                        "genus_volume",
                        dev,
                        0.0,
                        tol * gauss_bonnet.abs().max(1.0),
                    )
                    .with_witness(json!(gv)),
                    p,
                )])
            }),
        ));
        tasks.push((
            "injectivity_trace".into(),
            Some(p),
            Box::new(move || {
                let (trace, m) = min_semisimple_trace(p, p * p + p)?;
                let want = (p * p - 2) as u128;
                let len = 2.0 * ((trace as f64) / 2.0).acosh();
                let lp = pf.ln();
                let in_window = len >= 4.0 * lp - 2.0 && len <= 4.0 * lp + 1.0;
                let status = if trace == want
                    && (m.trace() - 2).rem_euclid((p * p) as i128) == 0
                    && in_window
                {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                };
                Ok(vec![with_p(
                    CheckReport::new("injectivity_trace", status, trace as f64, want as f64)
                        .with_witness(json!({"witness": m.to_string(), "geodesic_length": len})),
                    p,
                )])
            }),
        ));
        tasks.push((
            "disksep".into(),
            Some(p),
            Box::new(move || {
                let g = compute_vertex_params(p)?;
                let rep = verify_disksep(&g)?;
                let status = if rep.pass() {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                };
                Ok(vec![CheckReport::new(
                    "disksep",
                    status,
                    rep.min_cusp_separation,
                    rep.separation_bound,
                )
                .with_witness(json!(rep))])
            }),
        ));
    }
    tasks
}

fn repulsion_tasks(cfg: &JobConfig) -> Vec<Task<'_>> {
    let mut tasks: Vec<Task<'_>> = Vec::new();
    type Check = fn(&RepulsionJob) -> Result<CheckReport>;
    let checks: [(&str, Check); 4] = [
        ("cusp_repulsion", check_cusp_repulsion),
        ("cm_repulsion", check_cm_repulsion),
        ("bicusp_repulsion", check_bicusp_repulsion),
        ("diag_repulsion", check_diag_repulsion),
    ];
    for &p in &cfg.p {
        for (name, f) in checks {
            tasks.push((
                name.into(),
                Some(p),
                Box::new(move || Ok(vec![with_p(f(&repulsion_job(cfg, p)?)?, p)])),
            ));
        }
    }
    tasks.push((
        "mobius_ratio".into(),
        None,
        Box::new(|| {
            let m = mobius_ratio_asymptotic(1.0 - 1e-4, 0.1)?;
            Ok(vec![CheckReport::at_most(
                "mobius_ratio",
                m.relative_error,
                0.01,
                0.0,
            )
            .with_witness(json!(m))])
        }),
    ));
    tasks
}

fn radius_pairs(cfg: &JobConfig) -> Result<Vec<(f64, f64)>> {
    match (cfg.option_f64("r")?, cfg.option_f64("R")?) {
        (Some(r), Some(big_r)) => Ok(vec![(r, big_r)]),
        (None, None) => Ok([0.25, 0.5, 1.0]
            .iter()
            .flat_map(|&r| [1.5, 2.0, 3.0].map(move |big| (r, big)))
            .collect()),
        _ => Err(Error::Domain("give both r and R, or neither".into())),
    }
}

/// Length of the closed geodesic carried by the collar curve.
const COLLAR_PERIOD: f64 = 1.0;

fn volume_tasks(cfg: &JobConfig) -> Result<Vec<Task<'_>>> {
    let tol = cfg.tol;
    let which = cfg.option("check").unwrap_or("all").to_string();
    let known = ["all", "ht", "htd", "htad", "profile"];
    if !known.contains(&which.as_str()) {
        return Err(Error::Domain(format!("unknown volume check {which:?}")));
    }
    let pairs = radius_pairs(cfg)?;
    let radii: Vec<f64> = match cfg.option_f64("r")? {
        Some(r) => vec![r],
        None => vec![0.5, 1.0, 2.0],
    };
    let on = |k: &str| which == "all" || which == k;
    let mut tasks: Vec<Task<'_>> = Vec::new();
    if on("ht") {
        for r in radii {
            tasks.push((
                "ht_extremal".into(),
                None,
                Box::new(move || {
                    let w0 = C64::new(0.3, 0.0);
                    let zero = C64::new(0.0, 0.0);
                    let line = CurvePatch::constant(w0).with_multiplicity(zero, 1);
                    let v = curve_volume(&line, &RegionSpec::point_ball(vec![zero, w0], r), tol)?;
                    let a = 4.0 * PI * (0.5 * r).sinh().powi(2);
                    let d = curve_volume(&CurvePatch::neg(), &RegionSpec::diag_tube(r), tol)?;
                    let b = 8.0 * PI * (0.25 * r).sinh().powi(2);
                    Ok(vec![
                        CheckReport::at_most("ht_point_extremal", ((v - a) / a).abs(), 0.0, tol)
                            .with_witness(json!({"r": r, "volume": v, "bound": a})),
                        CheckReport::at_most("ht_diag_extremal", ((d - b) / b).abs(), 0.0, tol)
                            .with_witness(json!({"r": r, "volume": d, "bound": b})),
                    ])
                }),
            ));
        }
    }
    for (key, conj) in [("htd", false), ("htad", true)] {
        if !on(key) {
            continue;
        }
        let pairs = pairs.clone();
        let family = if conj {
            builtin_htad_family(COLLAR_PERIOD)
        } else {
            builtin_htd_family()
        };
        for (name, curve) in family {
            let pairs = pairs.clone();
            tasks.push((
                format!("{key}_ratio"),
                None,
                Box::new(move || {
                    let fam = vec![(name.clone(), curve.clone())];
                    let reps = family_ratio_checks(&fam, &pairs, conj, tol)?;
                    let mut out = Vec::new();
                    for (n, mut r) in reps {
                        r.witness["patch"] = json!(n);
                        if conj && n == "collar" {
                            // The collar is the extremal case: the ratio is an equality.
                            let (rr, big) = (
                                r.witness["r"].as_f64().unwrap_or(0.0),
                                r.witness["R"].as_f64().unwrap_or(0.0),
                            );
                            let want = (0.5 * big).sinh() / (0.5 * rr).sinh();
                            let got = measured_ratio(&r).unwrap_or(f64::NAN);
                            let tight = CheckReport::at_most(
                                "htad_collar_tightness",
                                ((got - want) / want).abs(),
                                0.0,
                                1e-4,
                            )
                            .with_witness(
                                json!({"r": rr, "R": big, "ratio": got, "expected": want}),
                            );
                            out.push(r);
                            out.push(tight);
                        } else {
                            out.push(r);
                        }
                    }
                    Ok(out)
                }),
            ));
        }
    }
    if on("profile") {
        for (r, big_r) in pairs {
            tasks.push((
                "profile_positivity".into(),
                None,
                Box::new(move || {
                    let mut out = Vec::new();
                    for kind in [ProfileKind::Htd, ProfileKind::Htad] {
                        let prof = RadialProfile::new(kind, r, big_r)?;
                        let rep = profile_positivity_check(&prof, 64, 8);
                        let status = if rep.pass {
                            CheckStatus::Pass
                        } else {
                            CheckStatus::Fail
                        };
                        out.push(
                            CheckReport::new(
                                "profile_positivity",
                                status,
                                rep.min_domination_eigenvalue,
                                0.0,
                            )
                            .with_witness(json!(rep)),
                        );
                    }
                    Ok(out)
                }),
            ));
        }
    }
    Ok(tasks)
}

/// Three rotated graphs of `-z` through a chosen point of each special set.
pub fn multiplicity_patches(p: u64, set: SpecialSet) -> Result<Vec<PlacedPatch>> {
    let geom = compute_vertex_params(p)?;
    let angles = [0.5, 1.0, 2.0];
    let i = geom.vertex_i();
    let center = match set {
        SpecialSet::CmPlus | SpecialSet::Diagonals => [i, i],
        SpecialSet::Sbc => [geom.cusp(), geom.cusp()],
        SpecialSet::CmMinus => {
            let base = elliptic_coset(&crate::arith::fp::ProjMatFp::identity(p), 2)?;
            let class = enumerate_cm_points(p, 2)?
                .into_iter()
                .find(|c| c.flavor == CmFlavor::AntiHeegner && c.g_x == base)
                .ok_or_else(|| {
                    Error::Structural(format!("no anti-Heegner partner of ι at p = {p}"))
                })?;
            [
                i,
                iota_lift(&geom, &class.g_y, crate::tiling::tiles::DEFAULT_TILE_BUDGET)?,
            ]
        }
    };
    Ok(rotated_neg_family(center, &angles))
}

fn multiplicity_tasks(cfg: &JobConfig) -> Vec<Task<'_>> {
    let sets: Vec<SpecialSet> = match cfg.option("set").map(str::parse::<SpecialSet>) {
        Some(Ok(s)) => vec![s],
        Some(Err(_)) | None => vec![
            SpecialSet::CmPlus,
            SpecialSet::CmMinus,
            SpecialSet::Sbc,
            SpecialSet::Diagonals,
        ],
    };
    let mut tasks: Vec<Task<'_>> = Vec::new();
    for &p in &cfg.p {
        for &set in &sets {
            tasks.push((
                "mult_vs_volume".into(),
                Some(p),
                Box::new(move || {
                    let job = repulsion_job(cfg, p)?;
                    Ok(vec![with_p(
                        mult_vs_volume_report(&multiplicity_patches(p, set)?, set, &job)?,
                        p,
                    )])
                }),
            ));
        }
    }
    tasks
}

/// Items of a `list` subcommand, keyed by prime.
pub fn run_list(target: ListTarget, cfg: &JobConfig) -> Result<BTreeMap<u64, Vec<Value>>> {
    cfg.validate()?;
    let mut out = BTreeMap::new();
    for &p in &cfg.p {
        let items: Vec<Value> = match target {
            ListTarget::Cusps => enumerate_cusps(p)?
                .iter()
                .map(|c| json!(c.to_string()))
                .collect(),
            ListTarget::Bicusps => enumerate_singular_bicusps(p)?
                .iter()
                .map(|b| json!([b.first.to_string(), b.second.to_string()]))
                .collect(),
            ListTarget::Cm => {
                let mut v = Vec::new();
                for order in [2u8, 3] {
                    for c in enumerate_cm_points(p, order)? {
                        v.push(json!({
                            "order": c.order,
                            "x": c.g_x.to_string(),
                            "y": c.g_y.to_string(),
                            "flavor": c.flavor,
                        }));
                    }
                }
                v
            }
            ListTarget::Hecke => {
                let n: u64 = cfg
                    .option("n")
                    .map(|s| s.parse())
                    .transpose()
                    .map_err(|_| Error::Domain("bad n".into()))?
                    .unwrap_or(2);
                let conv: HeckeConvention = cfg
                    .option("convention")
                    .map(str::parse)
                    .transpose()?
                    .unwrap_or_default();
                let op = HeckeOp::new(n, conv)?;
                let mut v = Vec::new();
                for c in enumerate_cusps(p)? {
                    let images: Vec<String> = hecke_on_cusps(&c, &op)?
                        .iter()
                        .map(|d| d.to_string())
                        .collect();
                    v.push(json!({ "cusp": c.to_string(), "n": n, "convention": conv.to_string(), "images": images }));
                }
                v
            }
        };
        out.insert(p, items);
    }
    Ok(out)
}

pub fn run_genus(cfg: &JobConfig) -> Result<BTreeMap<u64, Vec<Value>>> {
    cfg.validate()?;
    cfg.p
        .iter()
        .map(|&p| Ok((p, vec![json!(genus_and_volume(p)?)])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: &[u64]) -> JobConfig {
        JobConfig {
            p: p.to_vec(),
            ..Default::default()
        }
    }

    #[test]
    fn geometry_at_seven() {
        let reps = run_verify(VerifyTarget::Geometry, &cfg(&[7])).unwrap();
        let status = |n: &str| reps.iter().find(|r| r.check == n).unwrap().status;
        for n in [
            "vertex_params",
            "triangle_angles",
            "triangle_area",
            "generator_relations",
            "genus_volume",
            "injectivity_trace",
        ] {
            assert_eq!(status(n), CheckStatus::Pass, "{n}");
        }
        // The disk and separation statements do not hold at this size.
        assert_eq!(status("disksep"), CheckStatus::Fail);
    }

    #[test]
    fn spherical_prime_is_reported_not_raised() {
        let reps = run_verify(VerifyTarget::Geometry, &cfg(&[5])).unwrap();
        let v = reps.iter().find(|r| r.check == "vertex_params").unwrap();
        assert_eq!(v.status, CheckStatus::Fail);
        assert!(v.witness["error"].as_str().unwrap().contains("spherical"));
        assert!(reps
            .iter()
            .find(|r| r.check == "genus_volume")
            .unwrap()
            .passed());
    }

    #[test]
    fn volume_options() {
        let mut c = cfg(&[7]);
        c.options.insert("check".into(), "htd".into());
        c.options.insert("r".into(), "0.5".into());
        c.options.insert("R".into(), "2".into());
        let reps = run_verify(VerifyTarget::Volume, &c).unwrap();
        assert_eq!(reps.len(), builtin_htd_family().len());
        assert!(reps.iter().all(|r| r.passed()));
        c.options.insert("check".into(), "nope".into());
        assert!(run_verify(VerifyTarget::Volume, &c).is_err());
        c.options.remove("R");
        c.options.insert("check".into(), "htd".into());
        assert!(run_verify(VerifyTarget::Volume, &c).is_err());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut c = cfg(&[7, 11]);
        let a = run_verify(VerifyTarget::Multiplicity, &c).unwrap();
        c.jobs = 4;
        let b = run_verify(VerifyTarget::Multiplicity, &c).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.len(), 8);
    }

    #[test]
    fn lists() {
        let c = cfg(&[5]);
        assert_eq!(run_list(ListTarget::Cusps, &c).unwrap()[&5].len(), 12);
        assert!(run_list(ListTarget::Bicusps, &c).unwrap()[&5].len() >= 12);
        assert_eq!(run_list(ListTarget::Hecke, &c).unwrap()[&5].len(), 12);
        assert!(!run_list(ListTarget::Cm, &c).unwrap()[&5].is_empty());
        assert_eq!(run_genus(&cfg(&[7, 13])).unwrap()[&13][0]["genus"], 50);
    }
}
