//! Volume lower bounds near points and diagonals, and the ratio bounds.

use std::f64::consts::PI;

use serde_json::json;

use super::integrate::curve_volume_of;
use super::patch::{Coord, Curve, CurvePatch, HoloMap, RegionSpec};
use crate::error::{Error, Result};
use crate::hyp::{EuclideanDisk, C64};
use crate::report::{CheckReport, CheckStatus};

fn sinh2(x: f64) -> f64 {
    x.sinh().powi(2)
}

/// `vol(C ∩ B(ξ, r)) ≥ 4π sinh²(r/2) · mult_ξ C` for a union of patches.
/// The multiplicity is the sum of the declared multiplicities at parameters
/// mapping to `ξ`.
pub fn ht_point_check(
    patches: &[CurvePatch],
    xi: [C64; 2],
    r: f64,
    tol: f64,
) -> Result<CheckReport> {
    let region = RegionSpec::point_ball(xi.to_vec(), r);
    let mut volume = 0.0;
    let mut mult = 0;
    let mut buf = Vec::new();
    for p in patches {
        p.validate()?;
        let curve = p.curve()?;
        volume += curve_volume_of(&curve, &region, tol)?;
        for m in &p.multiplicities {
            curve.eval(m.point, &mut buf);
            if buf.iter().zip(&xi).all(|((w, _), x)| (w - x).norm() < 1e-9) {
                mult += m.order;
            }
        }
    }
    let bound = 4.0 * PI * sinh2(0.5 * r) * mult as f64;
    Ok(
        CheckReport::at_least("ht_point", volume, bound, tol).with_witness(json!({
            "r": r,
            "multiplicity": mult,
            "margin": volume - bound,
        })),
    )
}

/// `vol(C ∩ B(Δ₂, r)) ≥ 8π sinh²(r/4) Σ mult` for a curve in `(𝔻 × 𝔻)²`.
/// `diag_points` are the parameters where the curve meets `Δ₂`.
pub fn ht_diag2_check(curve: &Curve, diag_points: &[C64], r: f64, tol: f64) -> Result<CheckReport> {
    if curve.dim() != 4 {
        return Err(Error::Domain(format!(
            "Δ₂ lives in four factors, the curve has {}",
            curve.dim()
        )));
    }
    let mut buf = Vec::new();
    let mut mult = 0;
    for &z in diag_points {
        curve.eval(z, &mut buf);
        if (buf[0].0 - buf[2].0).norm() > 1e-9 || (buf[1].0 - buf[3].0).norm() > 1e-9 {
            return Err(Error::Domain(format!("parameter {z} does not map to Δ₂")));
        }
        mult += curve.multiplicity_at(z);
    }
    let volume = curve_volume_of(curve, &RegionSpec::diag2_tube(r), tol)?;
    let bound = 8.0 * PI * sinh2(0.25 * r) * mult as f64;
    Ok(
        CheckReport::at_least("ht_diag2", volume, bound, tol).with_witness(json!({
            "r": r,
            "multiplicity": mult,
            "margin": volume - bound,
        })),
    )
}

fn ratio_check(
    name: &str,
    curve: &Curve,
    region: RegionSpec,
    big_r: f64,
    factor: f64,
    tol: f64,
) -> Result<CheckReport> {
    let r = region.radius;
    if !(r > 0.0 && r < big_r) {
        return Err(Error::Range(format!(
            "need 0 < r < R, got r = {r}, R = {big_r}"
        )));
    }
    let small = curve_volume_of(curve, &region, tol)?;
    let large = curve_volume_of(curve, &region.with_radius(big_r), tol)?;
    let rhs = factor * small;
    let ratio = if small > 0.0 {
        large / small
    } else {
        f64::INFINITY
    };
    // Both volumes carry a relative error of about tol.
    let slack = tol * (large + rhs).max(1.0);
    Ok(
        CheckReport::at_least(name, large, rhs, slack).with_witness(json!({
            "r": r,
            "R": big_r,
            "volume_r": small,
            "volume_R": large,
            "ratio": if ratio.is_finite() { json!(ratio) } else { json!(null) },
            "bound": factor,
        })),
    )
}

/// `vol(C ∩ B(Δ, R)) ≥ cosh(R/2)/cosh(r/2) · vol(C ∩ B(Δ, r))`.
pub fn htd_ratio_check(curve: &Curve, r: f64, big_r: f64, tol: f64) -> Result<CheckReport> {
    let factor = (0.5 * big_r).cosh() / (0.5 * r).cosh();
    ratio_check(
        "htd_ratio",
        curve,
        RegionSpec::diag_tube(r),
        big_r,
        factor,
        tol,
    )
}

/// `vol(C ∩ B(Δ̄, R)) ≥ sinh(R/2)/sinh(r/2) · vol(C ∩ B(Δ̄, r))`.
pub fn htad_ratio_check(curve: &Curve, r: f64, big_r: f64, tol: f64) -> Result<CheckReport> {
    let factor = (0.5 * big_r).sinh() / (0.5 * r).sinh();
    ratio_check(
        "htad_ratio",
        curve,
        RegionSpec::conj_diag_tube(r),
        big_r,
        factor,
        tol,
    )
}

/// Measured ratio of a ratio-check report.
pub fn measured_ratio(rep: &CheckReport) -> Option<f64> {
    rep.witness.get("ratio").and_then(|v| v.as_f64())
}

/// The collar oracle: area of the curve `w = z` of `𝔻 × 𝔻̄` within `d(z, z̄) < r`
/// on a fundamental segment of length `period`.
pub fn collar_volume(period: f64, r: f64) -> f64 {
    2.0 * 2.0 * period * (0.5 * r).sinh()
}

fn c(x: f64, y: f64) -> C64 {
    C64::new(x, y)
}

/// Curves in `𝔻 × 𝔻` whose tubes around the diagonal are compact, so the
/// ratio bound applies to them as it does on a compact quotient.
pub fn builtin_htd_family() -> Vec<(String, Curve)> {
    let mut out = vec![
        ("graph(-z)".to_string(), CurvePatch::neg()),
        (
            "const(0.3+0.2i)".to_string(),
            CurvePatch::constant(c(0.3, 0.2)),
        ),
        (
            "rotation(0, pi/2)".to_string(),
            CurvePatch::rotation(c(0.0, 0.0), 0.5 * PI),
        ),
        (
            "rotation(0.2-0.1i, 2.5)".to_string(),
            CurvePatch::rotation(c(0.2, -0.1), 2.5),
        ),
        (
            "poly(0.5z^2)".to_string(),
            CurvePatch::poly(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]),
        ),
        (
            "poly(0.1-0.4z+0.3iz^3)".to_string(),
            CurvePatch::poly(vec![c(0.1, 0.0), c(-0.4, 0.0), c(0.0, 0.0), c(0.0, 0.3)]),
        ),
    ];
    out.drain(..)
        .map(|(n, p)| (n, p.curve().expect("built-in patch")))
        .collect()
}

/// Curves in `𝔻 × 𝔻̄` for the conjugate ratio bound: the collar curve and
/// compact cases, including the transplanted diagonal family.
pub fn builtin_htad_family(period: f64) -> Vec<(String, Curve)> {
    let mut out = vec![(
        "collar".to_string(),
        CurvePatch::collar(period).curve().expect("collar"),
    )];
    for (name, curve) in builtin_htd_family() {
        let mut t = curve.clone();
        t.coords[1].conj = true;
        out.push((format!("transplanted {name}"), t));
    }
    out.push((
        "const(-0.4i)".to_string(),
        Curve::new(
            vec![
                Coord::plain(HoloMap::Identity),
                Coord::plain(HoloMap::Const(c(0.0, -0.4))),
            ],
            EuclideanDisk::unit(),
        ),
    ));
    out
}

/// Runs a family through one of the ratio checks over a grid of radii.
pub fn family_ratio_checks(
    family: &[(String, Curve)],
    radii: &[(f64, f64)],
    conj: bool,
    tol: f64,
) -> Result<Vec<(String, CheckReport)>> {
    let mut out = Vec::new();
    for (name, curve) in family {
        for &(r, big_r) in radii {
            let rep = if conj {
                htad_ratio_check(curve, r, big_r, tol)?
            } else {
                htd_ratio_check(curve, r, big_r, tol)?
            };
            out.push((name.clone(), rep));
        }
    }
    Ok(out)
}

/// Status of a whole batch.
pub fn all_pass(reports: &[(String, CheckReport)]) -> CheckStatus {
    if reports.iter().all(|(_, r)| r.passed()) {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}
