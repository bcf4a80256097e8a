//! 2x2 matrices over the prime field and their projective classes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Accepts primes `p > 3` small enough that products fit in `u64`.
pub fn check_prime(p: u64) -> Result<()> {
    if p > 3 && p < (1 << 31) && is_prime(p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{p} is not a prime in (3, 2^31)")))
    }
}

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Inverse of a nonzero residue.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// Euler's criterion; zero counts as a square.
pub fn is_square(a: u64, p: u64) -> bool {
    let a = a % p;
    a == 0 || pow_mod(a, (p - 1) / 2, p) == 1
}

/// Representative in `(-p/2, p/2]`.
pub fn centered(a: u64, p: u64) -> i64 {
    let a = (a % p) as i64;
    let p = p as i64;
    if 2 * a > p {
        a - p
    } else {
        a
    }
}

pub fn reduce_int(x: i128, p: u64) -> u64 {
    x.rem_euclid(p as i128) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatFp {
    p: u64,
    m: [u64; 4],
}

impl MatFp {
    pub fn new(p: u64, m: [u64; 4]) -> Self {
        Self {
            p,
            m: m.map(|x| x % p),
        }
    }

    pub fn from_ints(p: u64, m: [i128; 4]) -> Self {
        Self {
            p,
            m: m.map(|x| reduce_int(x, p)),
        }
    }

    pub fn identity(p: u64) -> Self {
        Self::scalar(p, 1)
    }

    pub fn scalar(p: u64, s: u64) -> Self {
        Self::new(p, [s, 0, 0, s])
    }

    pub fn zero(p: u64) -> Self {
        Self::scalar(p, 0)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn entries(&self) -> [u64; 4] {
        self.m
    }

    /// Entries as centered integers.
    pub fn centered(&self) -> [i64; 4] {
        self.m.map(|x| centered(x, self.p))
    }

    pub fn mul(&self, o: &MatFp) -> MatFp {
        let p = self.p;
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = o.m;
        Self {
            p,
            m: [
                (a * e + b * g) % p,
                (a * f + b * h) % p,
                (c * e + d * g) % p,
                (c * f + d * h) % p,
            ],
        }
    }

    pub fn add(&self, o: &MatFp) -> MatFp {
        let p = self.p;
        Self {
            p,
            m: [0, 1, 2, 3].map(|i| (self.m[i] + o.m[i]) % p),
        }
    }

    pub fn sub(&self, o: &MatFp) -> MatFp {
        let p = self.p;
        Self {
            p,
            m: [0, 1, 2, 3].map(|i| (self.m[i] + p - o.m[i]) % p),
        }
    }

    pub fn scale(&self, s: u64) -> MatFp {
        let p = self.p;
        Self {
            p,
            m: self.m.map(|x| x * (s % p) % p),
        }
    }

    pub fn det(&self) -> u64 {
        let p = self.p;
        let [a, b, c, d] = self.m;
        (a * d % p + p - b * c % p) % p
    }

    pub fn trace(&self) -> u64 {
        (self.m[0] + self.m[3]) % self.p
    }

    pub fn is_scalar(&self) -> bool {
        self.m[1] == 0 && self.m[2] == 0 && self.m[0] == self.m[3]
    }

    /// Adjugate; the inverse when the determinant is one.
    pub fn adjugate(&self) -> MatFp {
        let p = self.p;
        let [a, b, c, d] = self.m;
        Self {
            p,
            m: [d, (p - b) % p, (p - c) % p, a],
        }
    }

    pub fn inverse(&self) -> Option<MatFp> {
        let det = self.det();
        (det != 0).then(|| self.adjugate().scale(inv_mod(det, self.p)))
    }

    /// `xy - yx`.
    pub fn bracket(&self, o: &MatFp) -> MatFp {
        self.mul(o).sub(&o.mul(self))
    }
}

impl fmt::Display for MatFp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.m;
        write!(f, "[[{a}, {b}], [{c}, {d}]] mod {}", self.p)
    }
}

/// An invertible matrix modulo scalars, stored with its first nonzero entry
/// equal to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjMatFp(MatFp);

impl ProjMatFp {
    pub fn new(m: MatFp) -> Result<Self> {
        if m.det() == 0 {
            return Err(Error::Domain(format!("{m} is singular")));
        }
        let lead = m.m.iter().copied().find(|x| *x != 0).unwrap_or(1);
        Ok(Self(m.scale(inv_mod(lead, m.p))))
    }

    pub fn from_ints(p: u64, m: [i128; 4]) -> Result<Self> {
        Self::new(MatFp::from_ints(p, m))
    }

    pub fn identity(p: u64) -> Self {
        Self(MatFp::identity(p))
    }

    pub fn matrix(&self) -> MatFp {
        self.0
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn mul(&self, o: &ProjMatFp) -> ProjMatFp {
        Self::new(self.0.mul(&o.0)).expect("product of invertible matrices")
    }

    pub fn inverse(&self) -> ProjMatFp {
        Self::new(self.0.adjugate()).expect("adjugate of an invertible matrix")
    }

    pub fn is_identity(&self) -> bool {
        self.0 == MatFp::identity(self.0.p)
    }

    /// True when the class lies in PSL2, i.e. the determinant is a square.
    pub fn in_psl(&self) -> bool {
        is_square(self.0.det(), self.0.p)
    }

    /// A determinant one representative, when one exists.
    pub fn sl_lift(&self) -> Option<MatFp> {
        let p = self.0.p;
        let det = self.0.det();
        let r = sqrt_mod(det, p)?;
        Some(self.0.scale(inv_mod(r, p)))
    }

    pub fn pow(&self, n: u64) -> ProjMatFp {
        let mut acc = Self::identity(self.p());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn order(&self) -> u64 {
        let mut acc = *self;
        let mut n = 1;
        while !acc.is_identity() {
            acc = acc.mul(self);
            n += 1;
        }
        n
    }
}

impl fmt::Display for ProjMatFp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Square root by exhaustive search; fields here are small.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    (0..p).find(|x| x * x % p == a)
}

/// All elements of PSL2(F_p) in canonical form, sorted.
pub fn psl2_elements(p: u64) -> Vec<ProjMatFp> {
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    let m = [a, b, c, d];
                    let lead = m.iter().copied().find(|x| *x != 0);
                    if lead != Some(1) {
                        continue;
                    }
                    let mm = MatFp::new(p, m);
                    let det = mm.det();
                    if det != 0 && is_square(det, p) {
                        out.push(ProjMatFp(mm));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psl2_orders() {
        for p in [5u64, 7, 11, 13] {
            assert_eq!(psl2_elements(p).len() as u64, p * (p * p - 1) / 2);
        }
    }

    #[test]
    fn projective_group_laws() {
        let p = 7;
        let els = psl2_elements(p);
        for g in els.iter().step_by(5) {
            assert!(g.mul(&g.inverse()).is_identity());
            assert!(g.in_psl());
            let l = g.sl_lift().unwrap();
            assert_eq!(l.det(), 1);
            assert_eq!(ProjMatFp::new(l).unwrap(), *g);
        }
        let g = ProjMatFp::from_ints(7, [3, 1, 2, 5]).unwrap();
        assert_eq!(g.matrix().entries()[0], 1);
        assert_eq!(ProjMatFp::from_ints(7, [6, 2, 4, 3]).unwrap(), g);
        assert!(ProjMatFp::from_ints(7, [1, 2, 2, 4]).is_err());
    }

    #[test]
    fn residues() {
        assert_eq!(centered(6, 11), -5);
        assert_eq!(centered(5, 11), 5);
        assert_eq!(centered(3, 6), 3);
        assert_eq!(inv_mod(3, 7), 5);
        assert!(!is_square(6, 7));
        assert!(is_square(2, 7));
        assert!(check_prime(3).is_err() && check_prime(9).is_err() && check_prime(5).is_ok());
    }

    #[test]
    fn element_orders() {
        let s = ProjMatFp::from_ints(7, [0, -1, 1, 0]).unwrap();
        let t = ProjMatFp::from_ints(7, [1, 1, 0, 1]).unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(t.order(), 7);
        assert_eq!(s.mul(&t).order(), 3);
    }
}
