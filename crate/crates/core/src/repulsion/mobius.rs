//! The modulus of `(R - R e^{iθ}) / (1 - R² e^{iθ})` near the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusRatio {
    pub value: f64,
    /// `1 - 2ε²/θ²`.
    pub predicted: f64,
    /// `|(1 - value) / (2ε²/θ²) - 1|`; zero at `ε = 0`.
    pub relative_error: f64,
}

/// Evaluates the ratio at `R = 1 - ε` and compares it with the asymptotic
/// `1 - 2ε²/θ²`. Requires `ε ∈ [0, θ/10)` and `0 < θ < 0.3`.
pub fn mobius_ratio_asymptotic(r: f64, theta: f64) -> Result<MobiusRatio> {
    let eps = 1.0 - r;
    if !(theta > 0.0 && theta < 0.3) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, 0.3)")));
    }
    if !(eps >= 0.0 && eps < theta / 10.0) {
        return Err(Error::Domain(format!(
            "epsilon = {eps} outside [0, theta/10)"
        )));
    }
    let e = C64::from_polar(1.0, theta);
    let value = ((r - r * e) / (1.0 - r * r * e)).norm();
    let correction = 2.0 * eps * eps / (theta * theta);
    let predicted = 1.0 - correction;
    // 1 - value loses digits when ε is tiny. With F = 4R² sin²(θ/2) and
    // G = |1 - R² e^{iθ}|² = (1 - R²)² + F, one has 1 - |.|² = (1 - R²)² / G.
    let g = (1.0 - r * r * e).norm_sqr();
    let one_minus_sq = (1.0 - r * r).powi(2) / g;
    let one_minus = one_minus_sq / (1.0 + value);
    let relative_error = if correction == 0.0 {
        0.0
    } else {
        (one_minus / correction - 1.0).abs()
    };
    Ok(MobiusRatio {
        value,
        predicted,
        relative_error,
    })
}
