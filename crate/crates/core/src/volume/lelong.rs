//! Lelong numbers of potentials with logarithmic poles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp::C64;

/// A potential on a neighborhood of a point of the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Potential {
    /// `log |f|` for the polynomial with the given coefficients.
    LogAbsPoly(Vec<C64>),
    /// `m log |z - center|`.
    ScaledLog {
        m: f64,
        center: C64,
    },
    /// `Re Σ a_k z^k`, a bounded smooth term.
    RealPoly(Vec<C64>),
    /// `-|z - center|^{-alpha}`, which is not logarithmic.
    Power {
        alpha: f64,
        center: C64,
    },
    Sum(Vec<Potential>),
}

fn horner(c: &[C64], z: C64) -> C64 {
    c.iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, a| acc * z + a)
}

impl Potential {
    pub fn eval(&self, z: C64) -> f64 {
        match self {
            Potential::LogAbsPoly(c) => horner(c, z).norm().ln(),
            Potential::ScaledLog { m, center } => m * (z - center).norm().ln(),
            Potential::RealPoly(c) => horner(c, z).re,
            Potential::Power { alpha, center } => -(z - center).norm().powf(-alpha),
            Potential::Sum(v) => v.iter().map(|p| p.eval(z)).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LelongEstimate {
    pub value: f64,
    pub error: f64,
}

/// Neville extrapolation to `u = 0` of the points `(u_i, q_i)`.
fn extrapolate_to_zero(u: &[f64], q: &[f64]) -> f64 {
    let mut p = q.to_vec();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            p[i] = (u[i + level] * p[i] - u[i] * p[i + 1]) / (u[i + level] - u[i]);
        }
    }
    p[0]
}

/// `liminf φ(z) / log|z - x|` from the ratios at radii `10^{-k}`,
/// `k = 2..6`, extrapolated in `1/k`.
pub fn lelong_estimate_fn<F: Fn(C64) -> f64>(phi: F, x: C64) -> Result<LelongEstimate> {
    let ks: Vec<f64> = (2..=6).map(f64::from).collect();
    let mut q = Vec::new();
    for &k in &ks {
        let rho = 10f64.powf(-k);
        let mut worst = f64::INFINITY;
        for j in 0..16 {
            let z = x + C64::from_polar(rho, 0.3 + j as f64 * std::f64::consts::TAU / 16.0);
            let v = phi(z);
            if !v.is_finite() {
                return Err(Error::Structural(format!(
                    "potential is not finite near {x}"
                )));
            }
            worst = worst.min(v / rho.ln());
        }
        q.push(worst);
    }
    let u: Vec<f64> = ks.iter().map(|k| 1.0 / k).collect();
    let all = extrapolate_to_zero(&u, &q);
    let tail = extrapolate_to_zero(&u[1..], &q[1..]);
    let error = (all - tail).abs();
    // A logarithmic pole keeps the raw ratios bounded and the extrapolation stable.
    let growth = q[4].abs() > 4.0 * q[0].abs().max(1.0);
    if growth || error > 0.1 * all.abs().max(1.0) {
        return Err(Error::Structural(format!(
            "singularity at {x} is not logarithmic (ratios {:.3e} .. {:.3e})",
            q[0], q[4]
        )));
    }
    Ok(LelongEstimate { value: all, error })
}

pub fn lelong_estimate(potential: &Potential, x: C64) -> Result<LelongEstimate> {
    lelong_estimate_fn(|z| potential.eval(z), x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn simple_zero_and_scaled_log() {
        // f(z) = (z - 0.2)(z + 0.5)
        let f = Potential::LogAbsPoly(vec![c(-0.1, 0.0), c(0.3, 0.0), c(1.0, 0.0)]);
        let e = lelong_estimate(&f, c(0.2, 0.0)).unwrap();
        assert!((e.value - 1.0).abs() < 1e-3, "{e:?}");
        let g = Potential::ScaledLog {
            m: 3.0,
            center: c(0.1, 0.1),
        };
        assert!((lelong_estimate(&g, c(0.1, 0.1)).unwrap().value - 3.0).abs() < 1e-9);
        // A double zero.
        let h = Potential::LogAbsPoly(vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        assert!((lelong_estimate(&h, c(0.0, 0.0)).unwrap().value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn log_plus_bounded() {
        let p = Potential::Sum(vec![
            Potential::ScaledLog {
                m: 1.0,
                center: c(0.0, 0.0),
            },
            Potential::RealPoly(vec![c(5.0, 0.0), c(1.0, 2.0), c(-3.0, 0.5)]),
        ]);
        let e = lelong_estimate(&p, c(0.0, 0.0)).unwrap();
        assert!((e.value - 1.0).abs() < 1e-3, "{e:?}");
        // The raw ratio at 10^{-6} is still off by 5 / log(10^6).
        assert!((p.eval(c(1e-6, 0.0)) / 1e-6f64.ln() - 1.0).abs() > 0.3);
    }

    #[test]
    fn smooth_point_has_zero() {
        let p = Potential::RealPoly(vec![c(0.5, 0.0), c(1.0, 0.0)]);
        assert!(lelong_estimate(&p, c(0.2, 0.0)).unwrap().value.abs() < 1e-3);
    }

    #[test]
    fn power_singularity_is_rejected() {
        let p = Potential::Power {
            alpha: 0.5,
            center: c(0.0, 0.0),
        };
        assert!(matches!(
            lelong_estimate(&p, c(0.0, 0.0)),
            Err(Error::Structural(_))
        ));
    }
}
