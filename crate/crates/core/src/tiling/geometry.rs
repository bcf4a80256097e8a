//! The (2,3,p) triangle, its fundamental domain and generators.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::words::Gen;
use crate::arith::fp::check_prime;
use crate::error::{Error, Result};
use crate::hyp::{
    dist_h, h_to_d, segment_distance_d, segment_frame_d, Isometry, ModelPoint, C64, I,
};

/// Parameters of the triangle with vertices `i`, `i y_p` and `e^{i θ_p}`,
/// with angles π/2, π/p and π/3.
///
/// The fundamental domain `F` of the triangle group used throughout is the
/// union of the triangle with its mirror image in the imaginary axis: the
/// geodesic triangle `i y_p`, `e^{i(π-θ_p)}`, `e^{iθ_p}` with angles 2π/p,
/// π/3, π/3.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriangleGeometry {
    pub p: u64,
    pub y_p: f64,
    pub log_y: f64,
    pub theta_p: f64,
    pub sigma2: Isometry,
    pub sigma3: Isometry,
    pub sigmap: Isometry,
    /// Real center and radius of the circle carrying the right side of F.
    pub right_center: f64,
    pub right_radius: f64,
}

impl TriangleGeometry {
    pub fn new(p: u64) -> Result<Self> {
        compute_vertex_params(p)
    }

    pub fn vertex_i(&self) -> C64 {
        I
    }

    pub fn cusp(&self) -> C64 {
        C64::new(0.0, self.y_p)
    }

    pub fn cusp_point(&self) -> ModelPoint {
        ModelPoint::half_plane(self.cusp()).expect("y_p > 0")
    }

    /// The order-three vertex `e^{i θ_p}`.
    pub fn vertex3(&self) -> C64 {
        C64::from_polar(1.0, self.theta_p)
    }

    pub fn vertex3_left(&self) -> C64 {
        C64::from_polar(1.0, PI - self.theta_p)
    }

    /// Vertices of F in counterclockwise order.
    pub fn domain_vertices(&self) -> [C64; 3] {
        [self.cusp(), self.vertex3_left(), self.vertex3()]
    }

    /// A fixed interior point of F used to tell tiles apart.
    pub fn interior_point(&self) -> C64 {
        C64::new(0.1 * self.vertex3().re, self.y_p.sqrt())
    }

    pub fn triangle_area(&self) -> f64 {
        PI * (1.0 / 6.0 - 1.0 / self.p as f64)
    }

    pub fn domain_area(&self) -> f64 {
        2.0 * self.triangle_area()
    }

    pub fn gen_isometry(&self, g: Gen) -> Isometry {
        match g {
            Gen::S2 => self.sigma2,
            Gen::S3 => self.sigma3,
            Gen::S3Inv => self.sigma3.inverse(),
            Gen::Sp(k) => {
                let angle = 2.0 * PI * k as f64 / self.p as f64;
                Isometry::rotation_about(self.cusp_point(), angle)
            }
        }
    }

    /// Interior angles at `(i, i y_p, e^{iθ_p})`, measured from geodesic
    /// tangent directions.
    pub fn triangle_angles(&self) -> [f64; 3] {
        let v = [I, self.cusp(), self.vertex3()];
        let angle_at = |k: usize| {
            let c = h_to_d(v[k]);
            let chart = |z: C64| {
                let w = h_to_d(z);
                (w - c) / (1.0 - c.conj() * w)
            };
            let a = chart(v[(k + 1) % 3]).arg();
            let b = chart(v[(k + 2) % 3]).arg();
            let mut d = (a - b).abs();
            if d > PI {
                d = 2.0 * PI - d;
            }
            d
        };
        [angle_at(0), angle_at(1), angle_at(2)]
    }

    /// Area of the triangle by quadrature of `dx dy / y^2` between the unit
    /// circle and the right side of F.
    pub fn triangle_area_by_quadrature(&self) -> Result<f64> {
        let (c, r) = (self.right_center, self.right_radius);
        let x1 = self.vertex3().re;
        crate::quad::integrate(
            |x| 1.0 / (1.0 - x * x).sqrt() - 1.0 / (r * r - (x - c) * (x - c)).sqrt(),
            0.0,
            x1,
            1e-14,
            1e-14,
        )
    }

    /// Hyperbolic distance from a half-plane point to F (zero inside).
    pub fn dist_to_domain(&self, z: C64) -> f64 {
        let w = h_to_d(z);
        let v = self.domain_vertices().map(h_to_d);
        let mut inside = true;
        let mut best = f64::INFINITY;
        for k in 0..3 {
            let (a, b) = (v[k], v[(k + 1) % 3]);
            if segment_frame_d(w, a, b).signed_dist < 0.0 {
                inside = false;
            }
            best = best.min(segment_distance_d(w, a, b));
        }
        if inside {
            0.0
        } else {
            best
        }
    }

    /// Counterclockwise angle of `z` seen from `i y_p`, measured from the
    /// downward direction, in `(-π, π]`.
    pub fn angle_at_cusp(&self, z: C64) -> f64 {
        let y = self.y_p;
        let w = (z - C64::new(0.0, y)) / (z + C64::new(0.0, y));
        let mut a = w.arg() - PI;
        if a <= -PI {
            a += 2.0 * PI;
        }
        a
    }

    /// Writes `z = h z0` with `z0` in F and `h` a word in σ2 and powers of
    /// σp. Each σ2 step strictly decreases the distance to `i y_p`.
    pub fn reduce(&self, z: C64) -> Result<(C64, Vec<Gen>)> {
        if !(z.im > 0.0) || !z.re.is_finite() {
            return Err(Error::Domain(format!("{z} is not in the upper half-plane")));
        }
        let p = self.p as f64;
        let mut cur = z;
        let mut word = Vec::new();
        for _ in 0..10_000 {
            let k = (self.angle_at_cusp(cur) / (2.0 * PI / p)).round() as i64;
            let k = k.rem_euclid(self.p as i64) as u64;
            if k != 0 {
                cur = self.gen_isometry(Gen::Sp(self.p - k)).act_h(cur);
                word.push(Gen::Sp(k));
            }
            if cur.norm_sqr() < 1.0 - 1e-15 {
                cur = self.sigma2.act_h(cur);
                word.push(Gen::S2);
            } else {
                return Ok((cur, word));
            }
        }
        Err(Error::Precision(format!(
            "reduction of {z} did not terminate"
        )))
    }

    /// Distance from a point of F to the cusp vertex, which is the distance
    /// to the nearest cusp on X(p).
    pub fn d_cusp_reduced(&self, z0: C64) -> f64 {
        dist_h(z0, self.cusp())
    }
}

/// Solves the two hyperbolic laws of cosines for the triangle.
pub fn compute_vertex_params(p: u64) -> Result<TriangleGeometry> {
    check_prime(p)?;
    let pf = p as f64;
    let ch = 0.5 / (PI / pf).sin();
    if ch <= 1.0 {
        return Err(Error::Domain(format!(
            "the (2,3,{p}) triangle is spherical: cosh(log y_p) = {ch:.6} < 1"
        )));
    }
    let log_y = ch.acosh();
    let y_p = log_y.exp();
    // Side from i to e^{iθ}: cosh b = cos(π/p) / sin(π/3), and sin θ = 1 / cosh b.
    let b = ((PI / pf).cos() / (PI / 3.0).sin()).acosh();
    let theta_p = 2.0 * (-b).exp().atan();
    let v3 = C64::from_polar(1.0, theta_p);
    let right_center = (1.0 - y_p * y_p) / (2.0 * theta_p.cos());
    let right_radius = (right_center * right_center + y_p * y_p).sqrt();
    let hp = |z: C64| ModelPoint::half_plane(z).expect("interior vertex");
    Ok(TriangleGeometry {
        p,
        y_p,
        log_y,
        theta_p,
        sigma2: Isometry::rotation_about(hp(I), PI),
        sigma3: Isometry::rotation_about(hp(v3), 2.0 * PI / 3.0),
        sigmap: Isometry::rotation_about(hp(C64::new(0.0, y_p)), 2.0 * PI / pf),
        right_center,
        right_radius,
    })
}
