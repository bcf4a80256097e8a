//! Cusps of X(p) as cosets of the cusp stabilizer, and singular bicusps.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::fp::{check_prime, inv_mod, psl2_elements, MatFp, ProjMatFp};
use crate::error::Result;

/// A coset `g H̄`, where `H̄` is the image of ⟨σp⟩, i.e. the upper unipotent
/// matrices. The representative is canonical: `b = 0` when `a ≠ 0`, else
/// `d = 0`, then scaled so the first nonzero entry is one. Classes with
/// non-square determinant lie on the other component of X(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CuspId {
    rep: ProjMatFp,
}

impl CuspId {
    pub fn new(g: &ProjMatFp) -> Self {
        let p = g.p();
        let [a, b, c, d] = g.matrix().entries();
        // g T^k = [[a, ka + b], [c, kc + d]].
        let k = if a != 0 {
            (p - b) * inv_mod(a, p) % p
        } else {
            (p - d) * inv_mod(c, p) % p
        };
        let m = MatFp::new(p, [a, (k * a + b) % p, c, (k * c + d) % p]);
        Self {
            rep: ProjMatFp::new(m).expect("invertible"),
        }
    }

    /// The main-component cusp whose representative has first column `±(x, y)`.
    pub fn from_column(p: u64, x: u64, y: u64) -> Self {
        let (x, y) = (x % p, y % p);
        let m = if x != 0 {
            MatFp::new(p, [x, 0, y, inv_mod(x, p)])
        } else {
            MatFp::new(p, [0, p - inv_mod(y, p), y, 0])
        };
        Self::new(&ProjMatFp::new(m).expect("nonzero column"))
    }

    pub fn identity(p: u64) -> Self {
        Self::new(&ProjMatFp::identity(p))
    }

    pub fn rep(&self) -> ProjMatFp {
        self.rep
    }

    pub fn p(&self) -> u64 {
        self.rep.p()
    }

    /// True on the component containing the identity coset.
    pub fn on_main_component(&self) -> bool {
        self.rep.in_psl()
    }

    /// Left action of the deck group.
    pub fn act(&self, h: &ProjMatFp) -> CuspId {
        CuspId::new(&h.mul(&self.rep))
    }

    /// The line of F_p^2 spanned by `g e_1`; two cusps share a stabilizer
    /// exactly when these lines agree.
    pub fn line(&self) -> crate::arith::p1::P1Point {
        let p = self.p();
        let [a, _, c, _] = self.rep.matrix().entries();
        crate::arith::p1::P1Point::from_vector(a, c, p)
    }

    /// The stabilizer `g H̄ g⁻¹`, generated by the conjugate of T.
    pub fn stabilizer_generator(&self) -> ProjMatFp {
        let t = ProjMatFp::from_ints(self.p(), [1, 1, 0, 1]).expect("invertible");
        self.rep.mul(&t).mul(&self.rep.inverse())
    }
}

impl fmt::Display for CuspId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.rep.matrix().entries();
        write!(f, "[{a} {b}; {c} {d}]H")
    }
}

/// All cusps on the main component, sorted.
pub fn enumerate_cusps(p: u64) -> Result<Vec<CuspId>> {
    check_prime(p)?;
    let set: BTreeSet<CuspId> = psl2_elements(p).iter().map(CuspId::new).collect();
    Ok(set.into_iter().collect())
}

/// An ordered pair of cusps sharing a stabilizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SingularBicusp {
    pub first: CuspId,
    pub second: CuspId,
}

/// All ordered pairs of main-component cusps with equal stabilizers.
pub fn enumerate_singular_bicusps(p: u64) -> Result<Vec<SingularBicusp>> {
    let cusps = enumerate_cusps(p)?;
    let mut out = Vec::new();
    for x in &cusps {
        for y in &cusps {
            if x.line() == y.line() {
                out.push(SingularBicusp {
                    first: *x,
                    second: *y,
                });
            }
        }
    }
    Ok(out)
}
