//! Adaptive Gauss–Kronrod quadrature on intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive bisection until the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)`. Panels are processed in a fixed order, so
/// the result is deterministic.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    panels.push((a, b, v, e));
    for _ in 0..20_000 {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Precision("non-finite integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        // Split the panel with the largest error; ties go to the leftmost.
        let (idx, _) =
            panels.iter().enumerate().fold(
                (0, -1.0),
                |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best },
            );
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
        panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    }
    Err(Error::Budget(format!(
        "quadrature on [{a}, {b}] did not converge"
    )))
}

/// Fixed composite Gauss–Kronrod rule with `n` equal panels.
pub fn composite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n)
        .map(|k| gk15(&mut f, a + k as f64 * h, a + (k + 1) as f64 * h).0)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_transcendental() {
        let v = integrate(|x| x.powi(5), 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - 64.0 / 6.0).abs() < 1e-12);
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-13, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-9, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let a = integrate(f64::exp, 0.0, 1.0, 1e-13, 1e-13).unwrap();
        let b = integrate(f64::exp, 1.0, 0.0, 1e-13, 1e-13).unwrap();
        assert!((a + b).abs() < 1e-12);
        assert!((composite(f64::exp, 0.0, 1.0, 4) - (1f64.exp() - 1.0)).abs() < 1e-14);
    }
}
