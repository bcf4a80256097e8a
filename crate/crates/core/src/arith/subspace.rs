//! Linear algebra in the 4-dimensional space M2(F_p).

use serde::{Deserialize, Serialize};

use super::fp::{centered, inv_mod, is_square, MatFp};
use super::intmat::IntMat;
use crate::error::{Error, Result};

type Vec4 = [u64; 4];

/// A subspace of M2(F_p) with a reduced row-echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpSubspace {
    p: u64,
    basis: Vec<Vec4>,
}

impl FpSubspace {
    pub fn span(p: u64, gens: &[MatFp]) -> Self {
        let rows: Vec<Vec4> = gens.iter().map(|g| g.entries()).collect();
        Self {
            p,
            basis: rref(p, rows),
        }
    }

    pub fn full(p: u64) -> Self {
        let e = |i: usize| {
            let mut v = [0; 4];
            v[i] = 1;
            MatFp::new(p, v)
        };
        Self::span(p, &[e(0), e(1), e(2), e(3)])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> Vec<MatFp> {
        self.basis.iter().map(|v| MatFp::new(self.p, *v)).collect()
    }

    pub fn contains(&self, m: &MatFp) -> bool {
        let mut rows = self.basis.clone();
        rows.push(m.entries());
        rref(self.p, rows).len() == self.dim()
    }

    pub fn contains_space(&self, o: &FpSubspace) -> bool {
        o.basis().iter().all(|m| self.contains(m))
    }

    /// Solutions `g` of `L_k(g) = 0` for a family of linear maps on M2(F_p).
    pub fn kernel_of<F>(p: u64, maps: &[F]) -> Self
    where
        F: Fn(&MatFp) -> MatFp,
    {
        // Each map contributes four scalar equations; column j is the image of e_j.
        let mut eqs: Vec<Vec4> = Vec::new();
        for f in maps {
            let cols: Vec<Vec4> = (0..4)
                .map(|j| {
                    let mut e = [0; 4];
                    e[j] = 1;
                    f(&MatFp::new(p, e)).entries()
                })
                .collect();
            for i in 0..4 {
                eqs.push([cols[0][i], cols[1][i], cols[2][i], cols[3][i]]);
            }
        }
        Self {
            p,
            basis: nullspace(p, eqs),
        }
    }
}

fn rref(p: u64, mut rows: Vec<Vec4>) -> Vec<Vec4> {
    let mut r = 0;
    for col in 0..4 {
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][col] % p != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = inv_mod(rows[r][col], p);
        rows[r] = rows[r].map(|x| x * inv % p);
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let f = rows[i][col];
                let pr = rows[r];
                for k in 0..4 {
                    rows[i][k] = (rows[i][k] + p - f * pr[k] % p) % p;
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

fn nullspace(p: u64, eqs: Vec<Vec4>) -> Vec<Vec4> {
    let red = rref(p, eqs);
    let pivots: Vec<usize> = red
        .iter()
        .map(|row| row.iter().position(|x| *x != 0).unwrap())
        .collect();
    let mut out = Vec::new();
    for free in (0..4).filter(|c| !pivots.contains(c)) {
        let mut v = [0u64; 4];
        v[free] = 1;
        for (row, &pc) in red.iter().zip(&pivots) {
            v[pc] = (p - row[free]) % p;
        }
        out.push(v);
    }
    rref(p, out)
}

/// Matrices commuting with every element of `s`.
pub fn centralizer(p: u64, s: &[MatFp]) -> FpSubspace {
    let maps: Vec<_> = s.iter().map(|x| move |g: &MatFp| x.bracket(g)).collect();
    if maps.is_empty() {
        return FpSubspace::full(p);
    }
    FpSubspace::kernel_of(p, &maps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SubalgebraKind {
    Scalars,
    SplitTorus,
    NonsplitTorus,
    NilpotentExt,
    Other,
}

/// Classifies a unital subalgebra of dimension at most two.
pub fn classify_subalgebra(t: &FpSubspace) -> (SubalgebraKind, String) {
    let p = t.p();
    let one = MatFp::identity(p);
    if !t.contains(&one) {
        return (
            SubalgebraKind::Other,
            "does not contain the identity".into(),
        );
    }
    match t.dim() {
        1 => (SubalgebraKind::Scalars, String::new()),
        2 => {
            let x = t
                .basis()
                .into_iter()
                .find(|m| !m.is_scalar())
                .expect("dimension 2 has a non-scalar");
            if !t.contains(&x.mul(&x)) {
                return (
                    SubalgebraKind::Other,
                    format!("{x} squared leaves the span"),
                );
            }
            let tr = x.trace();
            let disc = (tr * tr % p + p - 4 * x.det() % p) % p;
            if disc == 0 {
                (SubalgebraKind::NilpotentExt, String::new())
            } else if is_square(disc, p) {
                (SubalgebraKind::SplitTorus, String::new())
            } else {
                (SubalgebraKind::NonsplitTorus, String::new())
            }
        }
        d => (SubalgebraKind::Other, format!("dimension {d}")),
    }
}

/// Solutions `g` of `tg = gt` and `t (My^-1 g Mx) = (My^-1 g Mx) t`.
pub fn solve_commutator_system(t: &MatFp, mx: &IntMat, my: &IntMat) -> Result<FpSubspace> {
    if t.is_scalar() {
        return Err(Error::Domain(format!("{t} is scalar")));
    }
    let p = t.p();
    let (x, yi) = (mx.reduce(p), my.inverse().reduce(p));
    let t1 = *t;
    let f1 = move |g: &MatFp| t1.bracket(g);
    let f2 = move |g: &MatFp| t1.bracket(&yi.mul(g).mul(&x));
    let maps: [&dyn Fn(&MatFp) -> MatFp; 2] = [&f1, &f2];
    Ok(FpSubspace::kernel_of(p, &maps))
}

/// Whether `My^-1 Mx` and `My^-1 t Mx` lie in the span of `1` and `t`,
/// tested by vanishing of the 3x3 minors of their coordinate vectors.
/// The minors are formed over Z from the centered lift of `t`.
pub fn redundancy_test(t: &MatFp, mx: &IntMat, my: &IntMat) -> Result<bool> {
    if t.is_scalar() {
        return Err(Error::Domain(format!("{t} is scalar")));
    }
    let p = t.p();
    let tl = t.centered().map(|x| x as i128);
    let tt = IntMat {
        a: tl[0],
        b: tl[1],
        c: tl[2],
        d: tl[3],
    };
    let yi = my.inverse();
    let v1 = yi.mul(mx)?;
    let v2 = mul_loose(&mul_loose(&yi, &tt)?, mx)?;
    let one = [1i128, 0, 0, 1];
    for v in [v1.entries(), v2.entries()] {
        for minor in minors3(&[one, tl, v])? {
            if minor.rem_euclid(p as i128) != 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn mul_loose(x: &IntMat, y: &IntMat) -> Result<IntMat> {
    let dot = |a: i128, b: i128, c: i128, d: i128| a.checked_mul(b)?.checked_add(c.checked_mul(d)?);
    (|| {
        Some(IntMat {
            a: dot(x.a, y.a, x.b, y.c)?,
            b: dot(x.a, y.b, x.b, y.d)?,
            c: dot(x.c, y.a, x.d, y.c)?,
            d: dot(x.c, y.b, x.d, y.d)?,
        })
    })()
    .ok_or_else(|| Error::Range("product overflows i128".into()))
}

/// The four 3x3 minors of the 4x3 matrix with the given columns.
fn minors3(cols: &[[i128; 4]; 3]) -> Result<[i128; 4]> {
    let mut out = [0i128; 4];
    for (k, skip) in (0..4).enumerate() {
        let rows: Vec<usize> = (0..4).filter(|r| *r != skip).collect();
        let e = |i: usize, j: usize| cols[j][rows[i]];
        let term = |a: i128, b: i128, c: i128| a.checked_mul(b)?.checked_mul(c);
        let det = (|| {
            let pos = term(e(0, 0), e(1, 1), e(2, 2))?
                .checked_add(term(e(0, 1), e(1, 2), e(2, 0))?)?
                .checked_add(term(e(0, 2), e(1, 0), e(2, 1))?)?;
            let neg = term(e(0, 2), e(1, 1), e(2, 0))?
                .checked_add(term(e(0, 0), e(1, 2), e(2, 1))?)?
                .checked_add(term(e(0, 1), e(1, 0), e(2, 2))?)?;
            pos.checked_sub(neg)
        })()
        .ok_or_else(|| Error::Range("minor overflows i128".into()))?;
        out[k] = det;
    }
    Ok(out)
}

/// The element `a + b t0`, with `t0 = [[0,1],[-1,0]]`.
pub fn t0_combination(p: u64, a: i64, b: i64) -> MatFp {
    MatFp::from_ints(p, [a as i128, b as i128, -(b as i128), a as i128])
}

/// Centered coefficients of `g = a + b t0` and `m = a^2 + b^2`.
pub fn small_integral_lift(g: &MatFp) -> Result<(i64, i64, i64)> {
    let p = g.p();
    let [x0, x1, x2, x3] = g.entries();
    if x0 != x3 || (x1 + x2) % p != 0 {
        return Err(Error::Structural(format!(
            "{g} is not in the span of 1 and t0"
        )));
    }
    let (a, b) = (centered(x0, p), centered(x1, p));
    Ok((a, b, a * a + b * b))
}

/// Lift of the generator of a line in span{1, t0}, as stored in echelon form.
pub fn small_integral_lift_line(sol: &FpSubspace) -> Result<(i64, i64, i64)> {
    if sol.dim() != 1 {
        return Err(Error::Structural(format!(
            "solution space has dimension {}",
            sol.dim()
        )));
    }
    small_integral_lift(&sol.basis()[0])
}

/// Over all nonzero multiples of the generator, the lift with least `m`.
pub fn minimal_integral_lift(sol: &FpSubspace) -> Result<(i64, i64, i64)> {
    if sol.dim() != 1 {
        return Err(Error::Structural(format!(
            "solution space has dimension {}",
            sol.dim()
        )));
    }
    let g = sol.basis()[0];
    let mut best = small_integral_lift(&g)?;
    for l in 2..sol.p() {
        let c = small_integral_lift(&g.scale(l))?;
        if (c.2, c.0.abs(), c.1.abs()) < (best.2, best.0.abs(), best.1.abs()) {
            best = c;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::intmat::{enumerate_bounded_height, T, T0};

    fn all_mats(p: u64) -> impl Iterator<Item = MatFp> {
        (0..p.pow(4))
            .map(move |n| MatFp::new(p, [n % p, n / p % p, n / (p * p) % p, n / (p * p * p)]))
    }

    #[test]
    fn centralizer_examples() {
        let p = 7;
        assert_eq!(centralizer(p, &[MatFp::identity(p)]).dim(), 4);
        let t0 = T0.reduce(p);
        let c = centralizer(p, &[t0]);
        assert_eq!(c, FpSubspace::span(p, &[MatFp::identity(p), t0]));
        let c2 = centralizer(p, &[t0, T.reduce(p)]);
        assert_eq!(c2.dim(), 1);
        let brute: Vec<MatFp> = all_mats(p)
            .filter(|g| {
                g.bracket(&t0).entries() == [0; 4] && g.bracket(&T.reduce(p)) == MatFp::zero(p)
            })
            .collect();
        assert_eq!(brute.len() as u64, p);
        assert!(brute.iter().all(|g| c2.contains(g)));
    }

    #[test]
    fn centralizer_dimension_two_for_non_scalars() {
        let p = 5;
        for g in all_mats(p).filter(|g| !g.is_scalar()).step_by(7) {
            assert_eq!(centralizer(p, &[g]).dim(), 2, "{g}");
        }
    }

    #[test]
    fn classification_examples() {
        let p = 7;
        let one = MatFp::identity(p);
        assert_eq!(
            classify_subalgebra(&FpSubspace::span(p, &[one])).0,
            SubalgebraKind::Scalars
        );
        let n = MatFp::new(p, [0, 1, 0, 0]);
        assert_eq!(
            classify_subalgebra(&FpSubspace::span(p, &[one, n])).0,
            SubalgebraKind::NilpotentExt
        );
        let t0 = T0.reduce(p);
        assert_eq!(
            classify_subalgebra(&FpSubspace::span(p, &[one, t0])).0,
            SubalgebraKind::NonsplitTorus
        );
        let t0_5 = T0.reduce(5);
        let k = classify_subalgebra(&FpSubspace::span(5, &[MatFp::identity(5), t0_5])).0;
        assert_eq!(k, SubalgebraKind::SplitTorus);
        assert_eq!(
            classify_subalgebra(&FpSubspace::span(p, &[n])).0,
            SubalgebraKind::Other
        );
    }

    #[test]
    fn commutator_system_examples() {
        let p = 7;
        let t0 = T0.reduce(p);
        let id = crate::arith::intmat::IDENTITY;
        let s = solve_commutator_system(&t0, &id, &id).unwrap();
        assert_eq!(s, FpSubspace::span(p, &[MatFp::identity(p), t0]));
        assert!(redundancy_test(&t0, &id, &id).unwrap());
        let s = solve_commutator_system(&t0, &T, &id).unwrap();
        let brute: Vec<MatFp> = all_mats(p)
            .filter(|g| {
                t0.bracket(g) == MatFp::zero(p)
                    && t0.bracket(&g.mul(&T.reduce(p))) == MatFp::zero(p)
            })
            .collect();
        assert_eq!(brute.len() as u64, p.pow(s.dim() as u32));
        assert!(brute.iter().all(|g| s.contains(g)));
        assert_eq!(redundancy_test(&t0, &T, &id).unwrap(), s.dim() == 2);
        assert!(solve_commutator_system(&MatFp::identity(p), &id, &id).is_err());
    }

    #[test]
    fn redundancy_for_integral_centralizer() {
        let p = 11;
        let t0 = T0.reduce(p);
        // [[a,b],[-b,a]] with det 1 over Z: only +-1, +-t0.
        for (mx, my) in [(T0, crate::arith::intmat::IDENTITY), (T0, T0.neg())] {
            assert!(redundancy_test(&t0, &mx, &my).unwrap());
            assert_eq!(solve_commutator_system(&t0, &mx, &my).unwrap().dim(), 2);
        }
    }

    #[test]
    fn redundancy_matches_dimension_on_height_three() {
        let p = 11;
        let mats: Vec<IntMat> = enumerate_bounded_height(3).step_by(11).collect();
        let ts = [
            T0.reduce(p),
            MatFp::new(p, [2, 5, 1, 9]),
            MatFp::new(p, [1, 1, 0, 1]),
        ];
        for t in &ts {
            for mx in &mats {
                for my in mats.iter().step_by(5) {
                    let d = solve_commutator_system(t, mx, my).unwrap().dim();
                    assert!(d <= 2);
                    assert_eq!(redundancy_test(t, mx, my).unwrap(), d == 2);
                }
            }
        }
    }

    #[test]
    fn lift_examples() {
        let p = 11;
        let one = FpSubspace::span(p, &[MatFp::identity(p)]);
        assert_eq!(small_integral_lift_line(&one).unwrap(), (1, 0, 1));
        let t0 = FpSubspace::span(p, &[T0.reduce(p)]);
        assert_eq!(small_integral_lift_line(&t0).unwrap(), (0, 1, 1));
        let g = t0_combination(p, 2, 3);
        assert_eq!(small_integral_lift(&g).unwrap(), (2, 3, 13));
        let line = FpSubspace::span(p, &[g]);
        let (a, b, m) = minimal_integral_lift(&line).unwrap();
        assert_eq!(m, 10);
        assert_eq!(a * a + b * b, m);
        assert!(line.contains(&t0_combination(p, a, b)));
        assert!(small_integral_lift(&MatFp::new(p, [1, 1, 0, 1])).is_err());
    }

    #[test]
    fn lift_reduces_to_input() {
        let p = 13;
        for a in 0..p {
            for b in 0..p {
                let g = t0_combination(p, a as i64, b as i64);
                let (x, y, m) = small_integral_lift(&g).unwrap();
                assert_eq!(t0_combination(p, x, y), g);
                let gi = IntMat {
                    a: x as i128,
                    b: y as i128,
                    c: -(y as i128),
                    d: x as i128,
                };
                assert_eq!(gi.a * gi.d - gi.b * gi.c, m as i128);
                assert!(2 * x.abs() <= p as i64 && 2 * y.abs() <= p as i64);
            }
        }
    }
}
