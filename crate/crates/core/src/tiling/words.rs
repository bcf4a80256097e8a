//! Words in the triangle group generators and their images mod p.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::geometry::TriangleGeometry;
use crate::arith::fp::{MatFp, ProjMatFp};
use crate::arith::intmat::IntMat;
use crate::hyp::{Isometry, Model};

/// Generators of the (2,3,p) triangle group: σ2, σ3, σ3⁻¹ and σp^k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gen {
    S2,
    S3,
    S3Inv,
    Sp(u64),
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::S2 => write!(f, "s2"),
            Gen::S3 => write!(f, "s3"),
            Gen::S3Inv => write!(f, "s3'"),
            Gen::Sp(k) => write!(f, "sp^{k}"),
        }
    }
}

/// Images of the generators in PSL2(F_p): σ2 ↦ S, σp ↦ T and σ3 ↦ S⁻¹T⁻¹,
/// the class forced by σ2σ3σp = 1.
pub fn fp_generator(p: u64, g: Gen) -> ProjMatFp {
    let m = |e: [i128; 4]| ProjMatFp::from_ints(p, e).expect("invertible generator");
    match g {
        Gen::S2 => m([0, -1, 1, 0]),
        Gen::S3 => m([0, 1, -1, 1]),
        Gen::S3Inv => m([1, -1, 1, 0]),
        Gen::Sp(k) => m([1, k as i128, 0, 1]),
    }
}

/// The homomorphism on words.
pub fn fp_homomorphism(p: u64, word: &[Gen]) -> ProjMatFp {
    word.iter().fold(ProjMatFp::identity(p), |acc, g| {
        acc.mul(&fp_generator(p, *g))
    })
}

/// Integral lifts of the generator images, used for SL2(Z) bookkeeping.
pub fn int_generator(g: Gen) -> IntMat {
    match g {
        Gen::S2 => IntMat {
            a: 0,
            b: -1,
            c: 1,
            d: 0,
        },
        Gen::S3 => IntMat {
            a: 0,
            b: 1,
            c: -1,
            d: 1,
        },
        Gen::S3Inv => IntMat {
            a: 1,
            b: -1,
            c: 1,
            d: 0,
        },
        Gen::Sp(k) => IntMat {
            a: 1,
            b: k as i128,
            c: 0,
            d: 1,
        },
    }
}

/// A tile `g F` named by a word, with the isometry and mod-p image cached.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TileWord {
    pub word: Vec<Gen>,
    pub isometry: Isometry,
    pub fp_image: ProjMatFp,
}

impl TileWord {
    pub fn identity(p: u64) -> Self {
        Self {
            word: Vec::new(),
            isometry: Isometry::identity(Model::HalfPlane),
            fp_image: ProjMatFp::identity(p),
        }
    }

    pub fn from_word(geom: &TriangleGeometry, word: &[Gen]) -> Self {
        let mut t = Self::identity(geom.p);
        for g in word {
            t = t.push(geom, *g);
        }
        t
    }

    /// The word followed by one more generator.
    pub fn push(&self, geom: &TriangleGeometry, g: Gen) -> Self {
        let mut word = self.word.clone();
        word.push(g);
        Self {
            word,
            isometry: self.isometry.compose(&geom.gen_isometry(g)),
            fp_image: self.fp_image.mul(&fp_generator(geom.p, g)),
        }
    }

    pub fn word_string(&self) -> String {
        if self.word.is_empty() {
            return "1".into();
        }
        self.word
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Writes `±M = T^{k_1} S T^{k_2} S ... T^{k_n}` by the Euclidean algorithm
/// and returns the corresponding word in S = σ2 and T = σp.
pub fn psl2z_word(m: &IntMat) -> Vec<IntWordLetter> {
    let (mut a, mut b, mut c, mut d) = (m.a, m.b, m.c, m.d);
    let mut out = Vec::new();
    while c != 0 {
        let q = a.div_euclid(c);
        // T^{-q} M, then S^{-1} (T^{-q} M): M = T^q S M'.
        let (a1, b1) = (a - q * c, b - q * d);
        if q != 0 {
            out.push(IntWordLetter::T(q));
        }
        out.push(IntWordLetter::S);
        (a, b, c, d) = (c, d, -a1, -b1);
    }
    // Now M' = ±[[1, b], [0, 1]] up to the sign of a.
    let k = if a > 0 { b } else { -b };
    let _ = d;
    if k != 0 {
        out.push(IntWordLetter::T(k));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntWordLetter {
    S,
    T(i128),
}

/// γ_p of an integral matrix: its S/T word with T ↦ σp and S ↦ σ2.
pub fn gamma_p_of_intmat(m: &IntMat, geom: &TriangleGeometry) -> TileWord {
    let p = geom.p as i128;
    let word: Vec<Gen> = psl2z_word(m)
        .into_iter()
        .filter_map(|l| match l {
            IntWordLetter::S => Some(Gen::S2),
            IntWordLetter::T(k) => {
                let k = k.rem_euclid(p) as u64;
                (k != 0).then_some(Gen::Sp(k))
            }
        })
        .collect();
    TileWord::from_word(geom, &word)
}

/// Mod-p image of an integral matrix through its word, computed without
/// the triangle geometry.
pub fn fp_image_of_intmat(m: &IntMat, p: u64) -> ProjMatFp {
    psl2z_word(m)
        .into_iter()
        .fold(ProjMatFp::identity(p), |acc, l| {
            let g = match l {
                IntWordLetter::S => fp_generator(p, Gen::S2),
                IntWordLetter::T(k) => fp_generator(p, Gen::Sp(k.rem_euclid(p as i128) as u64)),
            };
            acc.mul(&g)
        })
}

/// Reduction of an integral matrix as a projective class.
pub fn reduce_projective(m: &IntMat, p: u64) -> ProjMatFp {
    ProjMatFp::new(MatFp::from_ints(p, m.entries())).expect("determinant one")
}
