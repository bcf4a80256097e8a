//! Repulsion of Heegner CM points over `(i, i)`.
//!
//! Points of X(p) over `i` are written in the modular model as `(i, h)`,
//! where `(z, h) ~ (γz, h γ̄⁻¹)` for `γ` in SL2(Z) and the deck group acts by
//! `g (z, h) = (z, g h)`. The stabilizer of `i` is generated by `S`, so
//! `(i, h) = (i, h S̄)`. `T_m` sends `(z, h)` to the points `(α z, h ᾱ⁻¹)`
//! over the upper triangular `α` of determinant `m`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::job::RepulsionJob;
use crate::arith::fp::{MatFp, ProjMatFp};
use crate::arith::intmat::{enumerate_bounded_height, ext_gcd, gcd, IntMat, S, T0};
use crate::arith::subspace::{minimal_integral_lift, solve_commutator_system, FpSubspace};
use crate::error::{Error, Result};
use crate::hyp::{dist_h, C64};
use crate::modcurves::hecke::{HeckeConvention, HeckeOp};
use crate::modcurves::metric::reduce_modular;
use crate::report::{CheckReport, CheckStatus};

fn proj(p: u64, m: &IntMat) -> ProjMatFp {
    ProjMatFp::new(m.reduce(p)).expect("SL2(Z) reduces to an invertible class")
}

/// Möbius action of an integer matrix of positive determinant.
pub fn act_int(m: [i128; 4], z: C64) -> C64 {
    let f = |x: i128| x as f64;
    (z * f(m[0]) + f(m[1])) / (z * f(m[2]) + f(m[3]))
}

fn mul_int(x: [i128; 4], y: [i128; 4]) -> [i128; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

/// `U, V` in SL2(Z) with `U A V = diag(1, m)` for a primitive integer matrix
/// `A` of determinant `m > 0`.
pub fn smith_unimodular(a: [i128; 4]) -> Result<(IntMat, IntMat)> {
    let m = a[0] * a[3] - a[1] * a[2];
    if m <= 0 || gcd(gcd(a[0], a[1]), gcd(a[2], a[3])) != 1 {
        return Err(Error::Domain(format!(
            "{a:?} is not primitive of positive determinant"
        )));
    }
    // Clear the lower left entry with a row operation.
    let (g, x, y) = ext_gcd(a[0], a[2]);
    let u1 = IntMat::new(x, y, -a[2] / g, a[0] / g)?;
    let b = mul_int(u1.entries(), a);
    let (g, bp, e) = (b[0], b[1], b[3]);
    // Make the top row primitive by adding a multiple of the second row.
    let k = (0..=g.abs() * e.abs() + 1)
        .find(|k| gcd(g, bp + k * e) == 1)
        .ok_or_else(|| Error::Structural("no primitive top row".into()))?;
    let u2 = IntMat::new(1, k, 0, 1)?;
    let bp = bp + k * e;
    let (_, x, y) = ext_gcd(g, bp);
    let v = IntMat::new(x, -bp, y, g)?;
    // Now U2 U1 A V = [[1, 0], [e y, e g]].
    let u3 = IntMat::new(1, 0, -e * y, 1)?;
    let u = u3.mul(&u2)?.mul(&u1)?;
    let d = mul_int(mul_int(u.entries(), a), v.entries());
    if d != [1, 0, 0, m] {
        return Err(Error::Structural(format!("Smith reduction produced {d:?}")));
    }
    Ok((u, v))
}

/// The incidence `(z*, α z*) ~ (i√m, J_m i√m)` with `J_m = [[0, m], [-1, 0]]`
/// and `J_m i√m = i√m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqrtIncidence {
    pub m: u64,
    /// `U'` with `α = U'⁻¹ J_m V⁻¹`.
    pub u: IntMat,
    pub v: IntMat,
    /// `|α (V i√m) - U'⁻¹ (i√m)|`.
    pub residual: f64,
    /// `|J_m i√m - i√m|`.
    pub fixed_residual: f64,
    /// `|d(i, i√m) - ½ log m|`.
    pub distance_residual: f64,
}

impl SqrtIncidence {
    pub fn holds(&self, tol: f64) -> bool {
        self.residual < tol && self.fixed_residual < tol && self.distance_residual < tol
    }
}

pub fn sqrt_incidence(alpha: [i128; 4]) -> Result<SqrtIncidence> {
    let (u, v) = smith_unimodular(alpha)?;
    let m = alpha[0] * alpha[3] - alpha[1] * alpha[2];
    let jm = [0, m, -1, 0];
    // diag(1, m) = t0⁻¹ J_m, so α = (t0 U)⁻¹ J_m V⁻¹.
    let u1 = T0.mul(&u)?;
    if mul_int(mul_int(u1.inverse().entries(), jm), v.inverse().entries()) != alpha {
        return Err(Error::Structural(
            "Smith factorization does not reproduce the matrix".into(),
        ));
    }
    let w = C64::new(0.0, (m as f64).sqrt());
    let zs = act_int(v.entries(), w);
    let residual = (act_int(alpha, zs) - act_int(u1.inverse().entries(), w)).norm();
    let fixed_residual = (act_int(jm, w) - w).norm();
    let distance_residual = (dist_h(C64::new(0.0, 1.0), w) - 0.5 * (m as f64).ln()).abs();
    Ok(SqrtIncidence {
        m: m as u64,
        u: u1,
        v,
        residual,
        fixed_residual,
        distance_residual,
    })
}

/// A matrix of determinant `m` carrying `(i, hx)` to `(i, hy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeckeWitness {
    pub m: u64,
    /// The coset representative `(a, b, d)`.
    pub upper: (u64, u64, u64),
    /// `M⁻¹ α`, which fixes `i`.
    pub fixing: [i128; 4],
}

/// Whether `((i, hx), (i, hy))` lies on `T_m`, by reducing each `α_j i` to
/// the modular domain.
pub fn on_hecke_over_i(hx: &ProjMatFp, hy: &ProjMatFp, m: u64) -> Result<Option<HeckeWitness>> {
    let p = hx.p();
    let op = HeckeOp::new(m, HeckeConvention::PaperSigma1)?;
    op.check_level(p)?;
    let i = C64::new(0.0, 1.0);
    let s = proj(p, &S);
    for &(a, b, d) in &op.matrices {
        let z = (i * a as f64 + b as f64) / d as f64;
        let (w0, big_m) = reduce_modular(z)?;
        if (w0 - i).norm() > 1e-9 {
            continue;
        }
        let alpha = ProjMatFp::from_ints(p, [a as i128, b as i128, 0, d as i128])?;
        let cand = hx.mul(&alpha.inverse()).mul(&proj(p, &big_m));
        if cand == *hy || cand == hy.mul(&s) {
            let fixing = mul_int(
                big_m.inverse().entries(),
                [a as i128, b as i128, 0, d as i128],
            );
            return Ok(Some(HeckeWitness {
                m,
                upper: (a, b, d),
                fixing,
            }));
        }
    }
    Ok(None)
}

/// Least `m ≤ limit` prime to p with the pair on `T_m`.
pub fn minimal_hecke_over_i(
    hx: &ProjMatFp,
    hy: &ProjMatFp,
    limit: u64,
) -> Result<Option<HeckeWitness>> {
    for m in (1..=limit).filter(|m| m % hx.p() != 0) {
        if let Some(w) = on_hecke_over_i(hx, hy, m)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Both computations of the Hecke index of one point over `(i, i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmAssignment {
    /// `hx⁻¹ hy`, which commutes with `t0`.
    pub relation: ProjMatFp,
    /// `(a, b, a² + b²)` from the least lift of the relation.
    pub algebraic: (i64, i64, i64),
    pub geometric: Option<HeckeWitness>,
    pub incidence: Option<SqrtIncidence>,
}

impl CmAssignment {
    pub fn m(&self) -> u64 {
        self.algebraic.2 as u64
    }

    pub fn agrees(&self) -> bool {
        match (&self.geometric, &self.incidence) {
            (Some(g), Some(inc)) => g.m == self.m() && inc.m == g.m && inc.holds(1e-9),
            _ => false,
        }
    }
}

fn commutes_with_t0(c: &ProjMatFp) -> bool {
    c.matrix().bracket(&T0.reduce(c.p())) == MatFp::zero(c.p())
}

/// Hecke index of the Heegner point `((i, hx), (i, hy))`.
pub fn assign_cm_point(hx: &ProjMatFp, hy: &ProjMatFp, limit: u64) -> Result<CmAssignment> {
    let p = hx.p();
    let c = hx.inverse().mul(hy);
    if !commutes_with_t0(&c) {
        return Err(Error::Domain(format!(
            "({hx}, {hy}) is not a Heegner point over (i, i)"
        )));
    }
    let algebraic = minimal_integral_lift(&FpSubspace::span(p, &[c.matrix()]))?;
    let search = limit.max(algebraic.2 as u64);
    let geometric = minimal_hecke_over_i(hx, hy, search)?;
    let incidence = match &geometric {
        Some(w) => Some(sqrt_incidence(w.fixing)?),
        None => None,
    };
    Ok(CmAssignment {
        relation: c,
        algebraic,
        geometric,
        incidence,
    })
}

/// A pair of distinct Heegner points `ξ = ((i, 1), (i, g⁻¹))` and
/// `ξ' = ((i, M̄x), (i, g⁻¹ M̄y))` with lifts `(i, i)` and `(Mx i, My i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmPair {
    pub g: ProjMatFp,
    pub mx: IntMat,
    pub my: IntMat,
    pub solution_dim: usize,
    pub first: CmAssignment,
    pub second: CmAssignment,
}

impl CmPair {
    pub fn agrees(&self) -> bool {
        self.first.agrees() && self.second.agrees()
    }

    pub fn max_m(&self) -> u64 {
        self.first.m().max(self.second.m())
    }
}

fn distinct(p: u64, mx: &IntMat, my: &IntMat) -> bool {
    let s = proj(p, &S);
    let stab = |m: &IntMat| {
        let h = proj(p, m);
        h.is_identity() || h == s
    };
    !(stab(mx) && stab(my))
}

fn search_limit(job: &RepulsionJob) -> u64 {
    (job.hecke_bound("K_cm").ceil() as u64).max(2 * job.p)
}

/// Assigns Hecke indices to the pair built from `g`, `Mx`, `My`.
pub fn assign_cm_pair(
    job: &RepulsionJob,
    g: &ProjMatFp,
    mx: &IntMat,
    my: &IntMat,
) -> Result<CmPair> {
    let p = job.p;
    if !distinct(p, mx, my) {
        return Err(Error::Domain("the two CM points coincide".into()));
    }
    let t0 = T0.reduce(p);
    let sol = solve_commutator_system(&t0, mx, my)?;
    if !sol.contains(&g.matrix()) {
        return Err(Error::Domain(format!(
            "{g} does not solve the commutator system"
        )));
    }
    let one = ProjMatFp::identity(p);
    let gi = g.inverse();
    let limit = search_limit(job);
    let first = assign_cm_point(&one, &gi, limit)?;
    let second = assign_cm_point(&proj(p, mx), &gi.mul(&proj(p, my)), limit)?;
    Ok(CmPair {
        g: *g,
        mx: *mx,
        my: *my,
        solution_dim: sol.dim(),
        first,
        second,
    })
}

/// The invertible determinant-square classes in a solution space.
fn psl_solutions(sol: &FpSubspace) -> Vec<ProjMatFp> {
    let p = sol.p();
    let basis = sol.basis();
    let mut out = std::collections::BTreeSet::new();
    let mut coeffs = vec![0u64; basis.len()];
    loop {
        let m = basis
            .iter()
            .zip(&coeffs)
            .fold(MatFp::zero(p), |acc, (b, c)| acc.add(&b.scale(*c)));
        if let Ok(g) = ProjMatFp::new(m) {
            if g.in_psl() {
                out.insert(g);
            }
        }
        let mut k = 0;
        loop {
            if k == coeffs.len() {
                return out.into_iter().collect();
            }
            coeffs[k] += 1;
            if coeffs[k] < p {
                break;
            }
            coeffs[k] = 0;
            k += 1;
        }
    }
}

/// Every distinct Heegner pair with `h(Mx), h(My) ≤ job.height(4)`.
pub fn flag_cm_pairs(job: &RepulsionJob) -> Result<Vec<CmPair>> {
    let p = job.p;
    let h = job.height(4.0);
    let mats: Vec<IntMat> = enumerate_bounded_height(h).collect();
    let total = mats.len() * mats.len();
    if total > job.budget.max_pairs {
        return Err(Error::Budget(format!(
            "{total} matrix pairs exceed the budget {}",
            job.budget.max_pairs
        )));
    }
    let t0 = T0.reduce(p);
    let mut out = Vec::new();
    for mx in &mats {
        for my in &mats {
            if !distinct(p, mx, my) {
                continue;
            }
            let sol = solve_commutator_system(&t0, mx, my)?;
            for g in psl_solutions(&sol) {
                out.push(assign_cm_pair(job, &g, mx, my)?);
            }
        }
    }
    Ok(out)
}

/// Every flagged pair lies on `T_m` with `m ≤ C_hecke p^{K δ}` at both
/// points, and the two computations of `m` agree.
pub fn check_cm_repulsion(job: &RepulsionJob) -> Result<CheckReport> {
    let bound = job.hecke_bound("K_cm");
    let pairs = match flag_cm_pairs(job) {
        Ok(v) => v,
        Err(Error::Budget(msg)) => {
            return Ok(
                CheckReport::new("cm_repulsion", CheckStatus::Inconclusive, f64::NAN, bound)
                    .with_witness(json!({ "budget": msg })),
            )
        }
        Err(e) => return Err(e),
    };
    let worst_m = pairs.iter().map(CmPair::max_m).max().unwrap_or(0);
    let disagree: Vec<&CmPair> = pairs.iter().filter(|c| !c.agrees()).collect();
    let mut ms: Vec<u64> = pairs
        .iter()
        .flat_map(|c| [c.first.m(), c.second.m()])
        .collect();
    ms.sort_unstable();
    ms.dedup();
    let redundant = pairs.iter().filter(|c| c.solution_dim == 2).count();
    let mut rep = CheckReport::at_most("cm_repulsion", worst_m as f64, bound, 0.0);
    if !disagree.is_empty() {
        rep.status = CheckStatus::Fail;
    }
    let offender = disagree
        .first()
        .copied()
        .or_else(|| pairs.iter().find(|c| c.max_m() as f64 > bound));
    let witness = json!({
        "p": job.p,
        "delta": job.delta,
        "height": job.height(4.0),
        "pairs": pairs.len(),
        "redundant_pairs": redundant,
        "indices": ms,
        "disagreements": disagree.len(),
        "fitted_constant": worst_m as f64 / (job.p as f64).powf(job.constant("K_cm") * job.delta),
        "offender": offender,
    });
    Ok(rep.with_witness(witness))
}
