//! Hecke correspondences on the upper half-plane and on cusps.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::cusps::CuspId;
use crate::arith::fp::{MatFp, ProjMatFp};
use crate::arith::intmat::gcd;
use crate::error::{Error, Result};
use crate::hyp::{ModelPoint, C64};

/// Which coset list defines `T_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HeckeConvention {
    /// Cyclic isogenies only: `gcd(a, b, d) = 1`, degree ψ(n).
    #[default]
    Cyclic,
    /// Every upper triangular coset, degree σ₁(n).
    PaperSigma1,
}

impl fmt::Display for HeckeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeckeConvention::Cyclic => write!(f, "CYCLIC"),
            HeckeConvention::PaperSigma1 => write!(f, "PAPER_SIGMA1"),
        }
    }
}

impl std::str::FromStr for HeckeConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CYCLIC" => Ok(Self::Cyclic),
            "PAPER_SIGMA1" | "SIGMA1" => Ok(Self::PaperSigma1),
            _ => Err(Error::Domain(format!("unknown Hecke convention {s:?}"))),
        }
    }
}

/// Integer triple `(a, b, d)` standing for the matrix `[[a, b], [0, d]]`.
pub type UpperTriangular = (u64, u64, u64);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeOp {
    pub n: u64,
    pub convention: HeckeConvention,
    pub matrices: Vec<UpperTriangular>,
}

impl HeckeOp {
    pub fn new(n: u64, convention: HeckeConvention) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("Hecke index must be positive".into()));
        }
        let mut matrices = Vec::new();
        for a in 1..=n {
            if n % a != 0 {
                continue;
            }
            let d = n / a;
            for b in 0..d {
                let cyclic = gcd(gcd(a as i128, b as i128), d as i128) == 1;
                if convention == HeckeConvention::PaperSigma1 || cyclic {
                    matrices.push((a, b, d));
                }
            }
        }
        Ok(Self {
            n,
            convention,
            matrices,
        })
    }

    pub fn degree(&self) -> usize {
        self.matrices.len()
    }

    /// Rejects indices sharing a factor with the level.
    pub fn check_level(&self, p: u64) -> Result<()> {
        if gcd(self.n as i128, p as i128) != 1 {
            return Err(Error::Domain(format!(
                "Hecke index {} is not prime to {p}",
                self.n
            )));
        }
        Ok(())
    }
}

/// σ₁(n), the sum of divisors.
pub fn sigma1(n: u64) -> u64 {
    (1..=n).filter(|d| n % d == 0).sum()
}

/// ψ(n) = n ∏_{q | n} (1 + 1/q).
pub fn psi(n: u64) -> u64 {
    let mut m = n;
    let mut out = n;
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            out = out / q * (q + 1);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        out = out / m * (m + 1);
    }
    out
}

/// The multiset `{(a z + b) / d}` in the half-plane model.
pub fn hecke_neighbors(z: &ModelPoint, t: &HeckeOp) -> Vec<ModelPoint> {
    let model = z.model();
    let h = z.to_model(crate::hyp::Model::HalfPlane).coord();
    t.matrices
        .iter()
        .map(|&(a, b, d)| {
            let w = (C64::new(a as f64, 0.0) * h + b as f64) / d as f64;
            ModelPoint::half_plane(w)
                .expect("upper half-plane is preserved")
                .to_model(model)
        })
        .collect()
}

/// `g H̄ ↦ {g α_j H̄}` with each `α_j` reduced mod p. When `n` is not a
/// square mod p the images lie on the other component.
pub fn hecke_on_cusps(c: &CuspId, t: &HeckeOp) -> Result<Vec<CuspId>> {
    let p = c.p();
    t.check_level(p)?;
    Ok(t.matrices
        .iter()
        .map(|&(a, b, d)| {
            let alpha = ProjMatFp::new(MatFp::from_ints(p, [a as i128, b as i128, 0, d as i128]))
                .expect("determinant prime to p");
            CuspId::new(&c.rep().mul(&alpha))
        })
        .collect())
}
