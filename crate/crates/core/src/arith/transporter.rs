//! Small integral matrices moving one unipotent subgroup onto another.

use super::fp::{MatFp, ProjMatFp};
use super::intmat::{ext_gcd, IntMat};
use crate::error::Result;

/// A matrix in SL2(Z) whose first column is the primitive vector `(x, y)`,
/// with the second column reduced against the first.
fn complete_to_sl2(x: i128, y: i128) -> IntMat {
    // x s + y t = 1, so [[x, -t], [y, s]] has determinant one.
    let (_, s, t) = ext_gcd(x, y);
    let (mut u, mut v) = (-t, s);
    let n = x * x + y * y;
    if n > 0 {
        // Subtract the rounded projection onto (x, y).
        let k = ((u * x + v * y) as f64 / n as f64).round() as i128;
        u -= k * x;
        v -= k * y;
    }
    IntMat {
        a: x,
        b: u,
        c: y,
        d: v,
    }
}

/// `B` in SL2(Z) with `B u = v`, where `u` and `v` are the fixed vectors of
/// `m1` and `m2`. Requires that `A` maps the fixed line of `m1` mod p onto
/// that of `m2`; then `A B^-1` normalizes the group generated by `m2` mod p.
pub fn unipotent_transporter(m1: &IntMat, m2: &IntMat, a: &ProjMatFp) -> Result<Option<IntMat>> {
    let (Some(u), Some(v)) = (m1.fixed_vector(), m2.fixed_vector()) else {
        return Ok(None);
    };
    let p = a.p();
    // A u must be a multiple of v mod p.
    let au = a
        .matrix()
        .mul(&MatFp::from_ints(p, [u.0, 0, u.1, 0]))
        .entries();
    let (vx, vy) = (
        v.0.rem_euclid(p as i128) as u64,
        v.1.rem_euclid(p as i128) as u64,
    );
    if (au[0] * vy + p * p - au[2] * vx % p) % p != 0 {
        return Ok(None);
    }
    let uu = complete_to_sl2(u.0, u.1);
    let vv = complete_to_sl2(v.0, v.1);
    let b = vv.mul(&uu.inverse())?;
    debug_assert!(normalizes(
        &a.mul(&ProjMatFp::new(b.inverse().reduce(p))?),
        m2
    ));
    Ok(Some(b))
}

/// Whether `g` normalizes the unipotent group generated by `m` mod p.
pub fn normalizes(g: &ProjMatFp, m: &IntMat) -> bool {
    let p = g.p();
    let gm = g.matrix();
    let gi = g.inverse().matrix();
    let conj = gm.mul(&m.reduce(p)).mul(&gi);
    // Up to scalars, conj must be a power of m mod p.
    let base = ProjMatFp::new(m.reduce(p)).expect("invertible");
    let target = ProjMatFp::new(conj).expect("invertible");
    let mut acc = base;
    for _ in 1..p {
        if acc == target {
            return true;
        }
        acc = acc.mul(&base);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::intmat::{IDENTITY, T, T0};
    use rand::{Rng, SeedableRng};

    #[test]
    fn trivial_case() {
        let b = unipotent_transporter(&T, &T, &ProjMatFp::identity(7))
            .unwrap()
            .unwrap();
        assert_eq!(b, IDENTITY);
    }

    #[test]
    fn lower_to_upper() {
        let m1 = IntMat::new(1, 0, 1, 1).unwrap();
        let a = ProjMatFp::new(T0.reduce(7)).unwrap();
        let b = unipotent_transporter(&m1, &T, &a).unwrap().unwrap();
        assert_eq!(b, T0);
        assert!(unipotent_transporter(&m1, &T, &ProjMatFp::identity(7))
            .unwrap()
            .is_none());
        assert!(unipotent_transporter(&IDENTITY, &T, &a).unwrap().is_none());
    }

    #[test]
    fn random_conjugates_mod_11() {
        let p = 11;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let small: Vec<IntMat> = crate::arith::intmat::enumerate_bounded_height(4).collect();
        let mut found = 0;
        for _ in 0..200 {
            let g1 = small[rng.gen_range(0..small.len())];
            let g2 = small[rng.gen_range(0..small.len())];
            let m1 = g1.mul(&T).unwrap().mul(&g1.inverse()).unwrap();
            let m2 = g2.mul(&T).unwrap().mul(&g2.inverse()).unwrap();
            // Force the hypothesis by correcting A with an element of the Borel of m2.
            let a = ProjMatFp::new(g2.reduce(p))
                .unwrap()
                .mul(&ProjMatFp::new(MatFp::from_ints(p, [1, rng.gen_range(0..11), 0, 1])).unwrap())
                .mul(&ProjMatFp::new(g1.inverse().reduce(p)).unwrap());
            let b = unipotent_transporter(&m1, &m2, &a).unwrap().unwrap();
            let u = m1.fixed_vector().unwrap();
            let v = m2.fixed_vector().unwrap();
            assert_eq!((b.a * u.0 + b.b * u.1, b.c * u.0 + b.d * u.1), v);
            let ab = a.mul(&ProjMatFp::new(b.inverse().reduce(p)).unwrap());
            assert!(normalizes(&ab, &m2));
            assert!(b.height() <= 4 * (g1.height() * g2.height()).pow(2) + 4);
            found += 1;
        }
        assert_eq!(found, 200);
    }
}
