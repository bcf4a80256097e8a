//! CM points of X(p) × X(p) over the elliptic points and their flavor.
//!
//! A point of X(p) over `i` (order 2) or over the order-three vertex is a
//! coset `g ⟨σ⟩`; its stabilizer is `g σ g⁻¹`. Two such points sharing a
//! stabilizer `h` form a CM point. The automorphism realizing `h` at `x` acts on
//! the tangent space of the elliptic curve by `e^{i ẽ π / k}`, where
//! `g̃ σ̃^ẽ g̃⁻¹ = h̃` in SL2(F_p) and `σ̃` is the order `2k` lift. The pair is
//! Heegner when both coordinates see the same eigenvalue.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith::fp::{psl2_elements, MatFp, ProjMatFp};
use crate::error::{Error, Result};
use crate::tiling::words::{fp_generator, Gen};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CmFlavor {
    Heegner,
    AntiHeegner,
}

impl CmFlavor {
    pub fn flipped(self) -> Self {
        match self {
            CmFlavor::Heegner => CmFlavor::AntiHeegner,
            CmFlavor::AntiHeegner => CmFlavor::Heegner,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CMPointClass {
    pub order: u8,
    pub g_x: ProjMatFp,
    pub g_y: ProjMatFp,
    /// True when the second coordinate is on the conjugate curve.
    pub conj_y: bool,
    pub flavor: CmFlavor,
    pub stabilizer: ProjMatFp,
    /// Arguments of the tangent eigenvalues at the two coordinates.
    pub angle_x: f64,
    pub angle_y: f64,
}

/// The elliptic generator of the given order and its SL2 lift of order `2k`.
fn elliptic_generator(p: u64, order: u8) -> Result<(ProjMatFp, MatFp)> {
    let g = match order {
        2 => fp_generator(p, Gen::S2),
        3 => fp_generator(p, Gen::S3),
        _ => {
            return Err(Error::Domain(format!(
                "CM order must be 2 or 3, got {order}"
            )))
        }
    };
    let lift = match order {
        2 => MatFp::from_ints(p, [0, -1, 1, 0]),
        _ => MatFp::from_ints(p, [0, 1, -1, 1]),
    };
    Ok((g, lift))
}

fn sl_of(g: &ProjMatFp) -> Result<MatFp> {
    g.sl_lift()
        .ok_or_else(|| Error::Domain(format!("{g:?} is not in PSL2")))
}

/// The exponent `ẽ ∈ Z/2k` with `g̃ σ̃^ẽ g̃⁻¹ = h̃`, if any.
fn lifted_exponent(
    g: &ProjMatFp,
    h_lift: &MatFp,
    sigma_lift: &MatFp,
    order: u8,
) -> Result<Option<u64>> {
    let gl = sl_of(g)?;
    let gi = gl.inverse().expect("invertible");
    let mut pw = MatFp::identity(g.p());
    for e in 0..2 * order as u64 {
        if gl.mul(&pw).mul(&gi) == *h_lift {
            return Ok(Some(e));
        }
        pw = pw.mul(sigma_lift);
    }
    Ok(None)
}

/// Classifies the pair of points `g_x ⟨σ⟩`, `g_y ⟨σ⟩` sharing the
/// stabilizer `stab`. With `conj_y` the second coordinate is read on the
/// conjugate curve, which reverses its tangent orientation.
pub fn classify_cm_pair(
    stab: &ProjMatFp,
    g_x: &ProjMatFp,
    g_y: &ProjMatFp,
    conj_y: bool,
) -> Result<CMPointClass> {
    let order = stab.order();
    if order != 2 && order != 3 {
        return Err(Error::Domain(format!(
            "stabilizer has order {order}, not 2 or 3"
        )));
    }
    let order = order as u8;
    let (_, sigma_lift) = elliptic_generator(stab.p(), order)?;
    let h = sl_of(stab)?;
    let ex = lifted_exponent(g_x, &h, &sigma_lift, order)?;
    // The other lift of the stabilizer is -h.
    let ex = match ex {
        Some(e) => Some(e),
        None => lifted_exponent(g_x, &h.scale(stab.p() - 1), &sigma_lift, order)?,
    };
    let ex =
        ex.ok_or_else(|| Error::Domain("first coordinate is not fixed by the stabilizer".into()))?;
    // Fix the lift h̃ seen at x so the second coordinate is compared to it.
    let h = sl_of(g_x)?
        .mul(&pow_mat(&sigma_lift, ex))
        .mul(&sl_of(g_x)?.inverse().expect("invertible"));
    let ey = lifted_exponent(g_y, &h, &sigma_lift, order)?
        .ok_or_else(|| Error::Domain("second coordinate is not fixed by the stabilizer".into()))?;
    let k = order as f64;
    let angle_x = wrap(ex as f64 * PI / k);
    let mut angle_y = wrap(ey as f64 * PI / k);
    if conj_y {
        angle_y = wrap(-angle_y);
    }
    let same = (wrap(angle_x - angle_y)).abs() < 1e-9;
    let opposite = (wrap(angle_x + angle_y)).abs() < 1e-9;
    let flavor = if same {
        CmFlavor::Heegner
    } else if opposite {
        CmFlavor::AntiHeegner
    } else {
        return Err(Error::Structural(format!(
            "eigenvalue angles {angle_x} and {angle_y} are unrelated"
        )));
    };
    Ok(CMPointClass {
        order,
        g_x: *g_x,
        g_y: *g_y,
        conj_y,
        flavor,
        stabilizer: *stab,
        angle_x,
        angle_y,
    })
}

fn pow_mat(m: &MatFp, e: u64) -> MatFp {
    (0..e).fold(MatFp::identity(m.p()), |acc, _| acc.mul(m))
}

/// Reduces an angle to `(-π, π]`.
fn wrap(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Canonical representative of the coset `g ⟨σ⟩`.
pub fn elliptic_coset(g: &ProjMatFp, order: u8) -> Result<ProjMatFp> {
    let (s, _) = elliptic_generator(g.p(), order)?;
    let mut best = *g;
    let mut cur = *g;
    for _ in 1..order {
        cur = cur.mul(&s);
        best = best.min(cur);
    }
    Ok(best)
}

/// Points of X(p) over the elliptic point of the given order.
pub fn elliptic_points(p: u64, order: u8) -> Result<Vec<ProjMatFp>> {
    let mut set = BTreeSet::new();
    for g in psl2_elements(p) {
        set.insert(elliptic_coset(&g, order)?);
    }
    Ok(set.into_iter().collect())
}

/// All CM points of the given order on X(p) × X(p), classified.
pub fn enumerate_cm_points(p: u64, order: u8) -> Result<Vec<CMPointClass>> {
    let (s, _) = elliptic_generator(p, order)?;
    let pts = elliptic_points(p, order)?;
    let stab = |g: &ProjMatFp| {
        let h = g.mul(&s).mul(&g.inverse());
        // The generated subgroup, as a canonical key.
        (1..order as u64)
            .map(|e| h.pow(e))
            .min()
            .expect("order > 1")
    };
    let mut by_stab: std::collections::BTreeMap<ProjMatFp, Vec<ProjMatFp>> = Default::default();
    for g in &pts {
        by_stab.entry(stab(g)).or_default().push(*g);
    }
    let mut out = Vec::new();
    for (h, group) in &by_stab {
        for gx in group {
            for gy in group {
                out.push(classify_cm_pair(h, gx, gy, false)?);
            }
        }
    }
    Ok(out)
}
