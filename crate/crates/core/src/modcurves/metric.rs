//! Distance to the cusp, the imaginary-part height, and the checks that
//! compare the metrics of Y(1) and X(1)_p.

use rand::{Rng, SeedableRng};

use crate::arith::intmat::{IntMat, IDENTITY, T0};
use crate::error::{Error, Result};
use crate::hyp::C64;
use crate::tiling::geometry::TriangleGeometry;

/// Writes `τ = γ τ0` with `τ0` in the closed modular domain and `γ` in SL2(Z).
pub fn reduce_modular(tau: C64) -> Result<(C64, IntMat)> {
    if !(tau.im > 0.0) || !tau.re.is_finite() {
        return Err(Error::Domain(format!(
            "{tau} is not in the upper half-plane"
        )));
    }
    let mut z = tau;
    let mut g = IDENTITY;
    for _ in 0..10_000 {
        let n = z.re.round();
        if n != 0.0 {
            z -= n;
            g = g.mul(&IntMat {
                a: 1,
                b: n as i128,
                c: 0,
                d: 1,
            })?;
        }
        if z.norm_sqr() < 1.0 - 1e-15 {
            z = -z.inv();
            // τ = S^{-1} (S τ).
            g = g.mul(&T0)?;
        } else {
            return Ok((z, g));
        }
    }
    Err(Error::Budget(format!(
        "modular reduction of {tau} did not terminate"
    )))
}

/// Distance on X(p) from `z` (half-plane, triangle-group side) to the
/// nearest cusp.
pub fn d_cusp(z: C64, geom: &TriangleGeometry) -> Result<f64> {
    let (z0, _) = geom.reduce(z)?;
    Ok(geom.d_cusp_reduced(z0))
}

/// Deterministic samples of the modular domain with `Im τ ∈ [im_lo, im_hi]`.
pub fn sample_modular_domain(n: usize, im_lo: f64, im_hi: f64, seed: u64) -> Vec<C64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = C64::new(rng.gen_range(-0.5..=0.5), rng.gen_range(im_lo..=im_hi));
        if z.norm() >= 1.0 + 1e-3 {
            out.push(z);
        }
    }
    out
}

#[cfg(feature = "schwarz")]
pub use with_map::*;

#[cfg(feature = "schwarz")]
mod with_map {
    use std::collections::HashMap;
    use std::f64::consts::PI;

    use serde::Serialize;

    use super::*;
    use crate::arith::fp::{inv_mod, sqrt_mod, MatFp};
    use crate::arith::intmat::{lift_to_sl2z, T};
    use crate::hyp::{dist_h, ModelPoint};
    use crate::modcurves::cusps::CuspId;
    use crate::modcurves::hecke::{hecke_on_cusps, HeckeConvention, HeckeOp};
    use crate::modcurves::schwarz::SchwarzMap;
    use crate::tiling::tiles::tile_ball;
    use crate::tiling::words::Gen;

    /// `(d_cusp, d_im)` for a point of Y(1): reduce to the modular domain,
    /// take the imaginary part, and measure the image under `f_p` against
    /// the cusp vertex.
    pub fn d_cusp_and_d_im(z: &ModelPoint, map: &SchwarzMap) -> Result<(f64, f64)> {
        let tau = z.to_model(crate::hyp::Model::HalfPlane).coord();
        let (t0, _) = reduce_modular(tau)?;
        let w = map.map_point(t0)?;
        Ok((dist_h(w, C64::new(0.0, map.y_p)), t0.im))
    }

    #[derive(Debug, Clone, Serialize)]
    pub struct MetricComparisonReport {
        pub p: u64,
        pub samples: usize,
        pub skipped: usize,
        /// Smallest `ratio - tanh²(d_cusp/2)`.
        pub worst_lower_margin: f64,
        pub max_ratio: f64,
        pub min_ratio: f64,
        pub tol: f64,
        pub pass: bool,
    }

    /// Density of `f_p^* h` relative to `h` at `τ`.
    pub fn metric_ratio(map: &SchwarzMap, tau: C64) -> Result<(f64, f64)> {
        let (w, dw) = map.eval(tau)?;
        let ratio = dw.norm_sqr() * tau.im * tau.im / (w.im * w.im);
        Ok((ratio, dist_h(w, C64::new(0.0, map.y_p))))
    }

    /// Checks `tanh²(d_cusp/2) ≤ ratio ≤ 1` within `tol` at every sample.
    pub fn metric_comparison_check(
        samples: &[C64],
        map: &SchwarzMap,
        tol: f64,
    ) -> MetricComparisonReport {
        let mut skipped = 0;
        let mut worst = f64::INFINITY;
        let (mut max_ratio, mut min_ratio) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut count = 0;
        for &tau in samples {
            match metric_ratio(map, tau) {
                Ok((r, d)) if r.is_finite() => {
                    count += 1;
                    worst = worst.min(r - (0.5 * d).tanh().powi(2));
                    max_ratio = max_ratio.max(r);
                    min_ratio = min_ratio.min(r);
                }
                _ => skipped += 1,
            }
        }
        let pass = count > 0 && worst >= -tol && max_ratio <= 1.0 + tol;
        MetricComparisonReport {
            p: map.p,
            samples: count,
            skipped,
            worst_lower_margin: worst,
            max_ratio,
            min_ratio,
            tol,
            pass,
        }
    }

    #[derive(Debug, Clone, Serialize)]
    pub struct LemmaImReport {
        pub p: u64,
        pub samples: usize,
        /// `max p·|−2π d_im/p − log tanh(d_cusp/2)|`.
        pub fitted_c: f64,
        pub mean_residual_times_p: f64,
    }

    /// Fits the constant in `−2π d_im/p = log tanh(d_cusp/2) + O(1/p)`.
    pub fn lemma_im_fit(samples: &[C64], map: &SchwarzMap) -> Result<LemmaImReport> {
        let p = map.p as f64;
        let mut worst = 0.0f64;
        let mut sum = 0.0;
        for &tau in samples {
            let (dc, di) = d_cusp_and_d_im(&ModelPoint::half_plane(tau)?, map)?;
            let r = -2.0 * PI * di / p - (0.5 * dc).tanh().ln();
            worst = worst.max(r.abs() * p);
            sum += r * p;
        }
        Ok(LemmaImReport {
            p: map.p,
            samples: samples.len(),
            fitted_c: worst,
            mean_residual_times_p: sum / samples.len().max(1) as f64,
        })
    }

    #[derive(Debug, Clone, Serialize)]
    pub struct HeckePullbackReport {
        pub p: u64,
        pub cusp: String,
        pub radius: f64,
        pub m: u64,
        pub constant: f64,
        pub sampled_points: usize,
        pub images: usize,
        /// Image cusps `{c_i}` in main-component labels.
        pub image_cusps: Vec<String>,
        /// Largest distance from an image point to its nearest `c_i`, minus R.
        pub worst_excess: f64,
        /// `R + log m + C` minus the largest image distance.
        pub worst_margin: f64,
        /// Largest distance from an image point to any cusp, minus R.
        pub worst_excess_any_cusp: f64,
        pub pass: bool,
    }

    /// Integral matrix whose S/T word matches a tile word.
    fn word_matrix(word: &[Gen], p: u64) -> Result<IntMat> {
        let mut m = IDENTITY;
        for g in word {
            let step = match g {
                Gen::S2 => vec![crate::arith::intmat::S],
                Gen::Sp(k) => vec![T.pow(*k as u32)?],
                // σ2σ3σp = 1 gives σ3 = σ2 σp^{-1} and σ3⁻¹ = σp σ2.
                Gen::S3 => vec![crate::arith::intmat::S, T.pow(p as u32 - 1)?],
                Gen::S3Inv => vec![T, crate::arith::intmat::S],
            };
            for s in step {
                m = m.mul(&s)?;
            }
        }
        Ok(m)
    }

    /// Lifts of every cusp near F, grouped by label.
    struct CuspLifts {
        by_label: HashMap<CuspId, Vec<C64>>,
        reliable: f64,
    }

    impl CuspLifts {
        fn new(geom: &TriangleGeometry, radius: f64) -> Result<Self> {
            let center = geom.interior_point();
            let ball = tile_ball(geom, ModelPoint::half_plane(center)?, radius)?;
            if !ball.complete {
                return Err(Error::Budget(
                    "tile budget exhausted while listing cusp lifts".into(),
                ));
            }
            let mut by_label: HashMap<CuspId, Vec<C64>> = HashMap::new();
            for t in &ball.tiles {
                let v = t.isometry.act_h(geom.cusp());
                let bucket = by_label.entry(CuspId::new(&t.fp_image)).or_default();
                if !bucket.iter().any(|u| dist_h(*u, v) < 1e-7) {
                    bucket.push(v);
                }
            }
            let spread = geom
                .domain_vertices()
                .iter()
                .map(|v| dist_h(*v, center))
                .fold(0.0, f64::max);
            Ok(Self {
                by_label,
                reliable: radius - spread,
            })
        }

        /// Distance from `w ∈ F` to the cusp `label`, when within the reliable radius.
        fn dist(&self, w: C64, label: &CuspId) -> Option<f64> {
            let d = self
                .by_label
                .get(label)
                .map(|v| {
                    v.iter()
                        .map(|u| dist_h(w, *u))
                        .fold(f64::INFINITY, f64::min)
                })
                .unwrap_or(f64::INFINITY);
            (d <= self.reliable).then_some(d)
        }
    }

    /// The label on X(p) of an image cusp of `T_m`, for the normalization in
    /// which the correspondence acts by `δ ≡ diag(1, m)` mod p.
    fn image_label(h: &CuspId, m: u64) -> Result<CuspId> {
        let p = h.p();
        let rep = h.rep().matrix();
        let scale = sqrt_mod(m % p * inv_mod(rep.det(), p) % p, p)
            .ok_or_else(|| Error::Structural("image cusp on an unexpected component".into()))?;
        let [a, _, c, _] = rep.scale(scale).entries();
        Ok(CuspId::from_column(p, a * inv_mod(m % p, p) % p, c))
    }

    /// Samples `B_{X(p)}(c, R)`, pushes each point through `T_m`, and checks
    /// that every image lies within `R + log m + C` of one of the image
    /// cusps `c_i`. The correspondence is realized by `δ_j = γ_j α_j` with
    /// `γ_j ∈ SL2(Z)` and `δ_j ≡ diag(1, m)` mod p, which is well defined on
    /// the level-p quotient of the upper half-plane.
    #[allow(clippy::too_many_arguments)]
    pub fn heckepullback_ball_check(
        c: &CuspId,
        r: f64,
        m: u64,
        map: &SchwarzMap,
        geom: &TriangleGeometry,
        constant: f64,
        per_tile: usize,
        seed: u64,
    ) -> Result<HeckePullbackReport> {
        let p = geom.p;
        if r >= 2.0 * (p as f64).ln() {
            return Err(Error::Domain(format!("radius {r} is not below 2 log p")));
        }
        let gc = c
            .rep()
            .sl_lift()
            .ok_or_else(|| Error::Domain("the cusp must lie on the main component".into()))?;
        let gc = lift_to_sl2z(&gc)?;
        let op = HeckeOp::new(m, HeckeConvention::Cyclic)?;
        op.check_level(p)?;
        let targets: Vec<CuspId> = {
            let mut t: Vec<CuspId> = hecke_on_cusps(c, &op)?
                .iter()
                .map(|h| image_label(h, m))
                .collect::<Result<_>>()?;
            t.sort();
            t.dedup();
            t
        };
        let eps = MatFp::from_ints(p, [1, 0, 0, m as i128]);
        let deltas: Vec<((u64, u64, u64), IntMat)> = op
            .matrices
            .iter()
            .map(|&(a, b, d)| {
                let adj = MatFp::from_ints(p, [d as i128, -(b as i128), 0, a as i128]);
                let g = eps.mul(&adj).scale(inv_mod(m % p, p));
                Ok(((a, b, d), lift_to_sl2z(&g)?))
            })
            .collect::<Result<_>>()?;
        let lifts = CuspLifts::new(geom, 3.0 * (p as f64).ln())?;
        let ball = tile_ball(geom, geom.cusp_point(), r)?;
        let base = sample_modular_domain(per_tile, 0.9, 6.0, seed);
        let base_images: Vec<(C64, C64)> = base
            .iter()
            .map(|&t| Ok((t, map.map_point(t)?)))
            .collect::<Result<_>>()?;
        let mut sampled = 0;
        let mut images = 0;
        let mut worst = f64::NEG_INFINITY;
        let mut worst_any = f64::NEG_INFINITY;
        for tile in &ball.tiles {
            let mat = gc.mul(&word_matrix(&tile.word, p)?)?;
            for &(t0, w0) in &base_images {
                if dist_h(tile.isometry.act_h(w0), geom.cusp()) >= r {
                    continue;
                }
                sampled += 1;
                let tau = act_int(&mat, t0);
                for ((a, b, d), gamma) in &deltas {
                    let img = act_int(gamma, (tau * *a as f64 + *b as f64) / *d as f64);
                    let (t1, m1) = reduce_modular(img)?;
                    let w1 = map.map_point(t1)?;
                    let back = crate::tiling::words::reduce_projective(&m1, p).inverse();
                    let dist = targets
                        .iter()
                        .filter_map(|k| lifts.dist(w1, &k.act(&back)))
                        .fold(f64::INFINITY, f64::min);
                    worst = worst.max(dist);
                    worst_any = worst_any.max(dist_h(w1, geom.cusp()));
                    images += 1;
                }
            }
        }
        let bound = r + (m as f64).ln() + constant;
        Ok(HeckePullbackReport {
            p,
            cusp: c.to_string(),
            radius: r,
            m,
            constant,
            sampled_points: sampled,
            images,
            image_cusps: targets.iter().map(|k| k.to_string()).collect(),
            worst_excess: worst - r,
            worst_margin: bound - worst,
            worst_excess_any_cusp: worst_any - r,
            pass: sampled > 0 && worst <= bound + 1e-12,
        })
    }

    fn act_int(m: &IntMat, z: C64) -> C64 {
        (z * m.a as f64 + m.b as f64) / (z * m.c as f64 + m.d as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::geometry::compute_vertex_params;

    #[test]
    fn modular_reduction() {
        for tau in [C64::new(3.3, 0.01), C64::new(-0.7, 0.2), C64::new(0.1, 2.0)] {
            let (t0, g) = reduce_modular(tau).unwrap();
            assert!(t0.re.abs() <= 0.5 + 1e-12 && t0.norm() >= 1.0 - 1e-12);
            let back = (t0 * g.a as f64 + g.b as f64) / (t0 * g.c as f64 + g.d as f64);
            assert!((back - tau).norm() < 1e-9, "{tau} {back}");
        }
    }

    #[test]
    fn d_cusp_on_the_triangle_side() {
        let g = compute_vertex_params(7).unwrap();
        assert!(d_cusp(g.cusp(), &g).unwrap() < 1e-12);
        assert!((d_cusp(C64::new(0.0, 1.0), &g).unwrap() - g.log_y).abs() < 1e-12);
        // σ2 moves i y_p to i / y_p, another cusp.
        assert!(d_cusp(C64::new(0.0, 1.0 / g.y_p), &g).unwrap() < 1e-9);
    }

    #[cfg(feature = "schwarz")]
    mod map {
        use super::super::*;
        use crate::hyp::ModelPoint;
        use crate::modcurves::schwarz::SchwarzMap;
        use crate::tiling::geometry::compute_vertex_params;

        #[test]
        fn d_cusp_at_i() {
            let g = compute_vertex_params(13).unwrap();
            let m = SchwarzMap::new(&g).unwrap();
            let (dc, di) = d_cusp_and_d_im(&ModelPoint::i(), &m).unwrap();
            assert!((dc - g.log_y).abs() < 1e-9);
            assert!((di - 1.0).abs() < 1e-15);
        }

        #[test]
        fn metric_comparison() {
            let g = compute_vertex_params(7).unwrap();
            let m = SchwarzMap::new(&g).unwrap();
            let s = sample_modular_domain(200, 0.87, 8.0, 1);
            let rep = metric_comparison_check(&s, &m, 1e-6);
            assert!(rep.pass, "{rep:?}");
            assert!(rep.max_ratio <= 1.0 + 1e-6);
        }

        #[test]
        fn lemma_im_constant() {
            for p in [7u64, 13] {
                let g = compute_vertex_params(p).unwrap();
                let m = SchwarzMap::new(&g).unwrap();
                let s = sample_modular_domain(60, 2.0, 10.0, 5);
                let rep = lemma_im_fit(&s, &m).unwrap();
                assert!(rep.fitted_c <= 10.0, "{rep:?}");
            }
        }

        #[test]
        fn heckepullback_trivial_and_p7() {
            let g = compute_vertex_params(7).unwrap();
            let m = SchwarzMap::new(&g).unwrap();
            let c = crate::modcurves::enumerate_cusps(7).unwrap()[5];
            let r = 7f64.ln();
            let one = heckepullback_ball_check(&c, r, 1, &m, &g, 0.0, 6, 2).unwrap();
            assert!(one.pass && one.sampled_points > 0, "{one:?}");
            assert_eq!(one.image_cusps, vec![c.to_string()]);
            let mut excess = Vec::new();
            for k in [2u64, 3, 5] {
                let rep = heckepullback_ball_check(&c, r, k, &m, &g, 4.0, 6, 2).unwrap();
                assert!(rep.pass, "{rep:?}");
                excess.push(rep.worst_excess);
            }
            assert!(excess.windows(2).all(|w| w[0] < w[1]), "{excess:?}");
            assert!(heckepullback_ball_check(&c, 2.0 * r, 2, &m, &g, 4.0, 6, 2).is_err());
        }
    }
}
