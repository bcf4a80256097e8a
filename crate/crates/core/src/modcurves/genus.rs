//! Genus and hyperbolic volume of X(p).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith::fp::check_prime;
use crate::arith::intmat::gcd;
use crate::error::{Error, Result};

/// An exact fraction with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Self {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn int(n: i128) -> Self {
        Self { num: n, den: 1 }
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }

    pub fn mul(self, o: Self) -> Self {
        Self::new(self.num * o.num, self.den * o.den)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenusVolume {
    pub p: u64,
    pub genus: i64,
    pub volume: f64,
    pub group_order: u64,
    pub cusps: u64,
}

/// |PSL2(F_p)| = p(p² − 1)/2.
pub fn psl2_order(p: u64) -> u64 {
    p * (p * p - 1) / 2
}

/// Riemann–Hurwitz for X(p) → X(1) with ramification p, 2, 3 over the
/// cusp, i and ρ, checked against the orbifold Euler characteristic.
pub fn genus_and_volume(p: u64) -> Result<GenusVolume> {
    check_prime(p)?;
    let n = psl2_order(p) as i128;
    let pi = p as i128;
    // 2g − 2 = −2n + (n − n/p) + (n − n/2) + (n − n/3).
    let two_g_minus_two = Ratio::int(-2 * n)
        .add(Ratio::new(n * (pi - 1), pi))
        .add(Ratio::new(n, 2))
        .add(Ratio::new(2 * n, 3));
    if two_g_minus_two.den != 1 || two_g_minus_two.num % 2 != 0 {
        return Err(Error::Structural(format!("non-integral genus at p = {p}")));
    }
    let genus = two_g_minus_two.num / 2 + 1;
    let closed = 1 + (pi * pi - 1) * (pi - 6) / 24;
    // χ = n (1/2 + 1/3 + 1/p − 1) and 2 − 2g = −n(p − 6)/(6p).
    let euler = Ratio::int(n).mul(
        Ratio::new(1, 2)
            .add(Ratio::new(1, 3))
            .add(Ratio::new(1, pi))
            .add(Ratio::int(-1)),
    );
    let expected = Ratio::new(-n * (pi - 6), 6 * pi);
    if genus != closed || euler != expected || euler != Ratio::int(2 - 2 * genus) {
        return Err(Error::Structural(format!(
            "genus cross-checks disagree at p = {p}"
        )));
    }
    let volume = n as f64 * 2.0 * PI * (1.0 / 6.0 - 1.0 / p as f64);
    Ok(GenusVolume {
        p,
        genus: genus as i64,
        volume,
        group_order: n as u64,
        cusps: (p * p - 1) / 2,
    })
}
