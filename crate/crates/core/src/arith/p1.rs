//! The projective line over F_p and the action of PGL2 on it.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::fp::{inv_mod, MatFp, ProjMatFp};

/// A point of P^1(F_p); the value `p` encodes infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct P1Point(pub u64);

impl P1Point {
    pub fn infinity(p: u64) -> Self {
        Self(p)
    }

    pub fn is_infinity(&self, p: u64) -> bool {
        self.0 == p
    }

    /// The point `(x : y)`.
    pub fn from_vector(x: u64, y: u64, p: u64) -> Self {
        let (x, y) = (x % p, y % p);
        if y == 0 {
            debug_assert!(x != 0);
            Self(p)
        } else {
            Self(x * inv_mod(y, p) % p)
        }
    }

    /// A homogeneous vector representing the point.
    pub fn vector(&self, p: u64) -> (u64, u64) {
        if self.0 == p {
            (1, 0)
        } else {
            (self.0, 1)
        }
    }
}

impl fmt::Display for P1Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn p1_points(p: u64) -> Vec<P1Point> {
    (0..=p).map(P1Point).collect()
}

pub fn p1_action(g: &ProjMatFp, x: P1Point) -> P1Point {
    let p = g.p();
    let [a, b, c, d] = g.matrix().entries();
    let (u, v) = x.vector(p);
    P1Point::from_vector((a * u + b * v) % p, (c * u + d * v) % p, p)
}

/// Points pinned by a family of constraints `g (gamma_2 oo) = gamma_1 oo`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapSpecification {
    /// Two constraints disagree, so no `g` exists.
    Inconsistent,
    /// At most two source points are pinned; `g` is not determined.
    Partial(Vec<(P1Point, P1Point)>),
    /// Three or more points are pinned and `g` is the unique solution.
    Determined(ProjMatFp),
}

impl MapSpecification {
    pub fn pinned_count(&self) -> usize {
        match self {
            Self::Inconsistent => 0,
            Self::Partial(v) => v.len(),
            Self::Determined(_) => 3,
        }
    }
}

/// Matrix sending `oo, 0, 1` to three distinct points.
fn frame(p: u64, inf: P1Point, zero: P1Point, one: P1Point) -> MatFp {
    let (ix, iy) = inf.vector(p);
    let (zx, zy) = zero.vector(p);
    let (ox, oy) = one.vector(p);
    // Solve (ox, oy) = l (ix, iy) + m (zx, zy).
    let det = (ix * zy % p + p - zx * iy % p) % p;
    let di = inv_mod(det, p);
    let l = (ox * zy % p + p - zx * oy % p) % p * di % p;
    let m = (ix * oy % p + p - ox * iy % p) % p * di % p;
    MatFp::new(p, [l * ix % p, m * zx % p, l * iy % p, m * zy % p])
}

/// The unique element of PGL2(F_p) with `g x_k = y_k` for three distinct
/// source and target points.
pub fn solve_three_points(p: u64, src: [P1Point; 3], dst: [P1Point; 3]) -> Option<ProjMatFp> {
    let distinct = |v: &[P1Point; 3]| v[0] != v[1] && v[1] != v[2] && v[0] != v[2];
    if !distinct(&src) || !distinct(&dst) {
        return None;
    }
    let hs = frame(p, src[0], src[1], src[2]);
    let ht = frame(p, dst[0], dst[1], dst[2]);
    ProjMatFp::new(ht.mul(&hs.inverse()?)).ok()
}

/// Intersects the constraints `g (gamma_2 oo) = gamma_1 oo` over pairs
/// `(gamma_1, gamma_2)`.
pub fn double_coset_constraints(pairs: &[(ProjMatFp, ProjMatFp)]) -> MapSpecification {
    let Some(first) = pairs.first() else {
        return MapSpecification::Partial(Vec::new());
    };
    let p = first.0.p();
    let inf = P1Point::infinity(p);
    let mut fwd: BTreeMap<P1Point, P1Point> = BTreeMap::new();
    let mut back: BTreeMap<P1Point, P1Point> = BTreeMap::new();
    for (g1, g2) in pairs {
        let (s, t) = (p1_action(g2, inf), p1_action(g1, inf));
        if fwd.get(&s).is_some_and(|x| *x != t) || back.get(&t).is_some_and(|x| *x != s) {
            return MapSpecification::Inconsistent;
        }
        fwd.insert(s, t);
        back.insert(t, s);
    }
    let pinned: Vec<(P1Point, P1Point)> = fwd.into_iter().collect();
    if pinned.len() < 3 {
        return MapSpecification::Partial(pinned);
    }
    let src = [pinned[0].0, pinned[1].0, pinned[2].0];
    let dst = [pinned[0].1, pinned[1].1, pinned[2].1];
    match solve_three_points(p, src, dst) {
        Some(g) if pinned.iter().all(|(s, t)| p1_action(&g, *s) == *t) => {
            MapSpecification::Determined(g)
        }
        _ => MapSpecification::Inconsistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::fp::psl2_elements;

    #[test]
    fn identity_and_unipotent() {
        let p = 5;
        assert_eq!(p1_points(p).len(), 6);
        let id = ProjMatFp::identity(p);
        assert!(p1_points(p).into_iter().all(|x| p1_action(&id, x) == x));
        let t = ProjMatFp::from_ints(p, [1, 1, 0, 1]).unwrap();
        let fixed: Vec<_> = p1_points(p)
            .into_iter()
            .filter(|x| p1_action(&t, *x) == *x)
            .collect();
        assert_eq!(fixed, vec![P1Point::infinity(p)]);
    }

    #[test]
    fn action_is_a_group_action() {
        let p = 7;
        let els = psl2_elements(p);
        for g in els.iter().step_by(13) {
            for h in els.iter().step_by(17) {
                for x in p1_points(p) {
                    assert_eq!(p1_action(&g.mul(h), x), p1_action(g, p1_action(h, x)));
                }
            }
        }
    }

    #[test]
    fn three_points_match_brute_force() {
        let p = 7;
        let els = psl2_elements(p);
        let src = [P1Point::infinity(p), P1Point(0), P1Point(1)];
        for g in els.iter().step_by(11) {
            let dst = src.map(|x| p1_action(g, x));
            let solved = solve_three_points(p, src, dst).unwrap();
            let brute: Vec<_> = els
                .iter()
                .filter(|h| src.iter().zip(&dst).all(|(s, t)| p1_action(h, *s) == *t))
                .collect();
            assert_eq!(brute, vec![&solved]);
        }
    }

    #[test]
    fn constraint_counting() {
        let p = 7;
        let els = psl2_elements(p);
        let g = els[40];
        // Pairs (g h, h) impose g (h oo) = g h oo.
        let pairs: Vec<_> = [3usize, 50, 100, 150]
            .iter()
            .map(|&k| (g.mul(&els[k]), els[k]))
            .collect();
        let distinct = {
            let mut v: Vec<_> = pairs
                .iter()
                .map(|(_, h)| p1_action(h, P1Point::infinity(p)))
                .collect();
            v.sort();
            v.dedup();
            v.len()
        };
        match double_coset_constraints(&pairs) {
            MapSpecification::Determined(h) => {
                assert!(distinct >= 3);
                assert!(pairs.iter().all(|(_, k)| p1_action(
                    &h,
                    p1_action(k, P1Point::infinity(p))
                ) == p1_action(
                    &g,
                    p1_action(k, P1Point::infinity(p))
                )));
            }
            MapSpecification::Partial(v) => assert_eq!(v.len(), distinct),
            MapSpecification::Inconsistent => panic!("consistent by construction"),
        }
        let t = ProjMatFp::from_ints(p, [1, 1, 0, 1]).unwrap();
        let s = ProjMatFp::from_ints(p, [0, -1, 1, 0]).unwrap();
        let two = double_coset_constraints(&[(t, t), (s, s)]);
        assert_eq!(two.pinned_count(), 2);
        let bad = double_coset_constraints(&[(ProjMatFp::identity(p), t), (s, t)]);
        assert_eq!(bad, MapSpecification::Inconsistent);
    }
}
