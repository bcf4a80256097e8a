//! Exact 2x2 integer matrices of determinant one.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::fp::MatFp;
use crate::error::{Error, Result};

/// An element of SL2(Z). Entries are `i128` and every product is checked,
/// so overflow surfaces as a range error instead of wrapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntMat {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

pub const IDENTITY: IntMat = IntMat {
    a: 1,
    b: 0,
    c: 0,
    d: 1,
};
/// `[[1, 1], [0, 1]]`.
pub const T: IntMat = IntMat {
    a: 1,
    b: 1,
    c: 0,
    d: 1,
};
/// `[[0, -1], [1, 0]]`.
pub const S: IntMat = IntMat {
    a: 0,
    b: -1,
    c: 1,
    d: 0,
};
/// `[[0, 1], [-1, 0]]`, the rotation by a quarter turn about `i`.
pub const T0: IntMat = IntMat {
    a: 0,
    b: 1,
    c: -1,
    d: 0,
};

impl IntMat {
    pub fn new(a: i128, b: i128, c: i128, d: i128) -> Result<Self> {
        let det = a
            .checked_mul(d)
            .zip(b.checked_mul(c))
            .and_then(|(x, y)| x.checked_sub(y))
            .ok_or_else(|| Error::Range("determinant overflows".into()))?;
        if det != 1 {
            return Err(Error::Structural(format!(
                "determinant of [[{a},{b}],[{c},{d}]] is {det}, not 1"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn entries(&self) -> [i128; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn height(&self) -> u128 {
        self.entries()
            .iter()
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn trace(&self) -> i128 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    pub fn mul(&self, o: &IntMat) -> Result<Self> {
        let dot = |x: i128, y: i128, z: i128, w: i128| -> Option<i128> {
            x.checked_mul(y)?.checked_add(z.checked_mul(w)?)
        };
        let r = (|| {
            Some(Self {
                a: dot(self.a, o.a, self.b, o.c)?,
                b: dot(self.a, o.b, self.b, o.d)?,
                c: dot(self.c, o.a, self.d, o.c)?,
                d: dot(self.c, o.b, self.d, o.d)?,
            })
        })();
        r.ok_or_else(|| Error::Range("matrix product overflows i128".into()))
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        let mut acc = IDENTITY;
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn reduce(&self, p: u64) -> MatFp {
        MatFp::from_ints(p, self.entries())
    }

    pub fn is_unipotent(&self) -> bool {
        self.trace() == 2 && *self != IDENTITY
    }

    /// Primitive integral vector fixed by a unipotent matrix, normalized so
    /// the first nonzero coordinate is positive.
    pub fn fixed_vector(&self) -> Option<(i128, i128)> {
        if !self.is_unipotent() {
            return None;
        }
        let (mut x, mut y) = (self.b, 1 - self.a);
        if x == 0 && y == 0 {
            x = self.d - 1;
            y = -self.c;
        }
        let g = gcd(x, y);
        let (mut x, mut y) = (x / g, y / g);
        if x < 0 || (x == 0 && y < 0) {
            x = -x;
            y = -y;
        }
        Some((x, y))
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Returns `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Every matrix in SL2(Z) of height at most `h`, in lexicographic order of
/// `(a, b, c, d)`.
pub fn enumerate_bounded_height(h: u64) -> impl Iterator<Item = IntMat> {
    let h = h as i128;
    (-h..=h).flat_map(move |a| {
        (-h..=h).flat_map(move |b| {
            (-h..=h).flat_map(move |c| {
                let ds: Vec<i128> = if a == 0 {
                    if -b * c == 1 {
                        (-h..=h).collect()
                    } else {
                        Vec::new()
                    }
                } else if (1 + b * c) % a == 0 && ((1 + b * c) / a).abs() <= h {
                    vec![(1 + b * c) / a]
                } else {
                    Vec::new()
                };
                ds.into_iter().map(move |d| IntMat { a, b, c, d })
            })
        })
    })
}

/// An integral matrix of determinant one reducing to `m` mod p.
pub fn lift_to_sl2z(m: &MatFp) -> Result<IntMat> {
    let p = m.p() as i128;
    if m.det() != 1 {
        return Err(Error::Domain(
            "only determinant-one classes lift to SL2(Z)".into(),
        ));
    }
    let [a0, b0, c0, d0] = m.centered().map(|x| x as i128);
    let c = if c0 == 0 { p } else { c0 };
    let mut d = d0;
    while gcd(c, d) != 1 {
        d += p;
    }
    let (_, x, y) = ext_gcd(d, c);
    let (mut a, mut b) = (x, -y);
    let s = if c0 != 0 {
        (a - a0).rem_euclid(p) * crate::arith::fp::inv_mod(c.rem_euclid(p) as u64, p as u64) as i128
            % p
    } else {
        (b - b0).rem_euclid(p) * crate::arith::fp::inv_mod(d.rem_euclid(p) as u64, p as u64) as i128
            % p
    };
    a -= s * c;
    b -= s * d;
    IntMat::new(a, b, c, d)
}

pub fn is_in_gamma_p(m: &IntMat, p: u64) -> bool {
    let p = p as i128;
    (m.a - 1).rem_euclid(p) == 0
        && m.b.rem_euclid(p) == 0
        && m.c.rem_euclid(p) == 0
        && (m.d - 1).rem_euclid(p) == 0
}

/// Minimum of `|tr|` over hyperbolic and elliptic elements of Γ(p) with
/// height at most `h`, with the first witness in `(a, c, b)` loop order.
pub fn min_semisimple_trace(p: u64, h: u64) -> Result<(u128, IntMat)> {
    super::fp::check_prime(p)?;
    if h < p * p {
        return Err(Error::Range(format!(
            "height bound {h} is below p^2 = {}",
            p * p
        )));
    }
    let (pi, hi) = (p as i128, h as i128);
    let first = |lo: i128, r: i128| lo + (r - lo).rem_euclid(pi);
    let mut best: Option<(u128, IntMat)> = None;
    let mut a = first(-hi, 1);
    while a <= hi {
        let mut c = first(-hi, 0);
        while c <= hi {
            let mut b = first(-hi, 0);
            while b <= hi {
                let num = 1 + b * c;
                if num % a == 0 {
                    let d = num / a;
                    let m = IntMat { a, b, c, d };
                    let t = m.trace().unsigned_abs();
                    if d.abs() <= hi
                        && (d - 1).rem_euclid(pi) == 0
                        && t != 2
                        && best.map_or(true, |(bt, _)| t < bt)
                    {
                        best = Some((t, m));
                    }
                }
                b += pi;
            }
            c += pi;
        }
        a += pi;
    }
    best.ok_or_else(|| Error::Range(format!("no semisimple element of height <= {h}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifts_reduce_correctly() {
        for p in [5u64, 7, 13] {
            for g in crate::arith::fp::psl2_elements(p).iter().step_by(3) {
                let m = g.sl_lift().unwrap();
                let l = lift_to_sl2z(&m).unwrap();
                assert_eq!(l.reduce(p), m);
            }
        }
        assert!(lift_to_sl2z(&MatFp::from_ints(7, [2, 0, 0, 1])).is_err());
    }

    #[test]
    fn height_examples() {
        assert_eq!(IDENTITY.height(), 1);
        assert_eq!(T.height(), 1);
        let p = 5;
        assert_eq!(IntMat::new(1 - p * p, p, -p, 1).unwrap().height(), 24);
        assert!(IntMat::new(1 - p * p, p, 1, -p).is_err());
    }

    #[test]
    fn gamma_p_membership() {
        assert!(is_in_gamma_p(&IDENTITY, 7));
        assert!(is_in_gamma_p(&IntMat::new(1, 7, 0, 1).unwrap(), 7));
        assert!(!is_in_gamma_p(&T, 5));
        assert!(is_in_gamma_p(&IntMat::new(-24, 5, -5, 1).unwrap(), 5));
    }

    fn brute_force(h: i128) -> Vec<IntMat> {
        let mut out = Vec::new();
        for a in -h..=h {
            for b in -h..=h {
                for c in -h..=h {
                    for d in -h..=h {
                        if a * d - b * c == 1 {
                            out.push(IntMat { a, b, c, d });
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for h in 1..=3 {
            let got: Vec<_> = enumerate_bounded_height(h as u64).collect();
            assert_eq!(got, brute_force(h), "height {h}");
        }
        let one: Vec<_> = enumerate_bounded_height(1).collect();
        assert_eq!(one.len(), 20);
        for m in [IDENTITY, S, T] {
            assert!(one.contains(&m));
        }
    }

    #[test]
    fn min_trace_examples() {
        let (t, w) = min_semisimple_trace(5, 30).unwrap();
        assert_eq!(t, 23);
        assert_eq!(w, IntMat::new(-24, 5, -5, 1).unwrap());
        assert_eq!(min_semisimple_trace(7, 50).unwrap().0, 47);
        for p in [5u64, 7, 11] {
            let (t, w) = min_semisimple_trace(p, p * p + p).unwrap();
            assert_eq!(t, (p * p - 2) as u128);
            assert!(is_in_gamma_p(&w, p));
            assert_eq!((w.trace() - 2).rem_euclid((p * p) as i128), 0);
        }
        assert!(min_semisimple_trace(5, 24).is_err());
    }

    #[test]
    fn fixed_vectors() {
        assert_eq!(T.fixed_vector(), Some((1, 0)));
        assert_eq!(
            IntMat::new(1, 0, 1, 1).unwrap().fixed_vector(),
            Some((0, 1))
        );
        // Conjugate of T by [[2,1],[1,1]] fixes (2,1).
        let g = IntMat::new(2, 1, 1, 1).unwrap();
        let m = g.mul(&T).unwrap().mul(&g.inverse()).unwrap();
        assert_eq!(m.fixed_vector(), Some((2, 1)));
        assert_eq!(IDENTITY.fixed_vector(), None);
    }

    #[test]
    fn overflow_is_reported() {
        let big = IntMat::new(1, i128::MAX / 2 + 1, 0, 1).unwrap();
        assert!(big.mul(&big).is_err());
        assert!(T0.pow(4).unwrap() == IDENTITY);
    }

    #[test]
    fn ext_gcd_identity() {
        for (a, b) in [(12, 18), (-7, 3), (0, 5), (5, 0), (13, -21)] {
            let (g, x, y) = ext_gcd(a, b);
            assert_eq!(a * x + b * y, g);
            assert_eq!(g, gcd(a, b));
        }
    }
}
