//! Hyperbolic plane in the upper half-plane and Poincaré disk models.
//!
//! The Cayley map `z -> (z - i)/(z + i)` identifies the two models and sends
//! `i -> 0`, `0 -> -1` and `oo -> 1`. Every other module relies on this
//! normalization.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Model {
    HalfPlane,
    Disk,
}

/// A point of the hyperbolic plane tagged with the model it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    model: Model,
    coord: C64,
}

impl ModelPoint {
    pub fn new(model: Model, coord: C64) -> Result<Self> {
        if !(coord.re.is_finite() && coord.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {coord}")));
        }
        let ok = match model {
            Model::HalfPlane => coord.im > 0.0,
            Model::Disk => coord.norm_sqr() < 1.0,
        };
        if ok {
            Ok(Self { model, coord })
        } else {
            Err(Error::Domain(format!(
                "{coord} is not an interior point of the {model:?} model"
            )))
        }
    }

    pub fn half_plane(coord: C64) -> Result<Self> {
        Self::new(Model::HalfPlane, coord)
    }

    pub fn disk(coord: C64) -> Result<Self> {
        Self::new(Model::Disk, coord)
    }

    /// The point `i` of the half-plane.
    pub fn i() -> Self {
        Self {
            model: Model::HalfPlane,
            coord: I,
        }
    }

    /// The center of the disk.
    pub fn origin() -> Self {
        Self {
            model: Model::Disk,
            coord: C64::new(0.0, 0.0),
        }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn coord(&self) -> C64 {
        self.coord
    }

    pub fn to_model(&self, model: Model) -> Self {
        if self.model == model {
            *self
        } else {
            cayley(*self)
        }
    }
}

/// Half-plane to disk.
pub fn h_to_d(z: C64) -> C64 {
    (z - I) / (z + I)
}

/// Disk to half-plane.
pub fn d_to_h(w: C64) -> C64 {
    I * (1.0 + w) / (1.0 - w)
}

/// Switch models through the Cayley transform.
pub fn cayley(a: ModelPoint) -> ModelPoint {
    match a.model {
        Model::HalfPlane => {
            let w = h_to_d(a.coord);
            // |w| < 1 holds analytically; clamp the rare rounding overshoot.
            let w = if w.norm_sqr() >= 1.0 {
                w / (w.norm() * (1.0 + 1e-16))
            } else {
                w
            };
            ModelPoint {
                model: Model::Disk,
                coord: w,
            }
        }
        Model::Disk => {
            let z = d_to_h(a.coord);
            let z = if z.im <= 0.0 {
                C64::new(z.re, f64::MIN_POSITIVE)
            } else {
                z
            };
            ModelPoint {
                model: Model::HalfPlane,
                coord: z,
            }
        }
    }
}

/// Distance between two half-plane coordinates.
pub fn dist_h(z: C64, w: C64) -> f64 {
    2.0 * ((z - w).norm() / (2.0 * (z.im * w.im).sqrt())).asinh()
}

/// Distance between two disk coordinates.
pub fn dist_d(z: C64, w: C64) -> f64 {
    let a = (1.0 - z.norm()) * (1.0 + z.norm());
    let b = (1.0 - w.norm()) * (1.0 + w.norm());
    2.0 * ((w - z).norm() / (a * b).sqrt()).asinh()
}

/// Hyperbolic distance; mixed models are compared after a Cayley transform.
pub fn dist(a: ModelPoint, b: ModelPoint) -> f64 {
    let b = b.to_model(a.model);
    match a.model {
        Model::HalfPlane => dist_h(a.coord, b.coord),
        Model::Disk => dist_d(a.coord, b.coord),
    }
}

/// Max-metric distance on a finite product of hyperbolic planes.
pub fn product_dist(xi: &[ModelPoint], eta: &[ModelPoint]) -> Result<f64> {
    if xi.len() != eta.len() {
        return Err(Error::Domain(format!(
            "product points have {} and {} coordinates",
            xi.len(),
            eta.len()
        )));
    }
    Ok(xi
        .iter()
        .zip(eta)
        .map(|(a, b)| dist(*a, *b))
        .fold(0.0, f64::max))
}

/// Area of a hyperbolic disk of radius `r`.
pub fn ball_area(r: f64) -> f64 {
    let s = (0.5 * r).sinh();
    4.0 * PI * s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IsometryKind {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// An orientation-preserving isometry, stored as a determinant one real
/// matrix acting by Möbius transformations on the half-plane. In the disk
/// model the action is conjugated by the Cayley transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    m: [f64; 4],
    model: Model,
}

impl Isometry {
    /// Normalizes `[[a, b], [c, d]]` to determinant one with the first
    /// nonzero entry positive.
    pub fn new(a: f64, b: f64, c: f64, d: f64, model: Model) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::Domain(format!(
                "matrix determinant {det} is not positive"
            )));
        }
        let s = det.sqrt();
        Ok(Self::canonical([a / s, b / s, c / s, d / s], model))
    }

    fn canonical(mut m: [f64; 4], model: Model) -> Self {
        let lead = m.iter().copied().find(|x| *x != 0.0).unwrap_or(1.0);
        if lead < 0.0 {
            m.iter_mut().for_each(|x| *x = -*x);
        }
        Self { m, model }
    }

    pub fn identity(model: Model) -> Self {
        Self {
            m: [1.0, 0.0, 0.0, 1.0],
            model,
        }
    }

    /// Counterclockwise rotation by `angle` about `center`, in the model of
    /// the center.
    pub fn rotation_about(center: ModelPoint, angle: f64) -> Self {
        let z = center.to_model(Model::HalfPlane).coord;
        let (x, y) = (z.re, z.im);
        let sy = y.sqrt();
        let (s, c) = (0.5 * angle).sin_cos();
        // A k(angle/2) A^-1 with A = [[sqrt y, x/sqrt y], [0, 1/sqrt y]].
        let a = [sy, x / sy, 0.0, 1.0 / sy];
        let k = [c, s, -s, c];
        let ai = [1.0 / sy, -x / sy, 0.0, sy];
        let m = mul(mul(a, k), ai);
        Self::canonical(m, center.model)
    }

    /// Hyperbolic translation of length `len` along the geodesic through
    /// `i` in the direction of the positive imaginary axis (half-plane).
    pub fn vertical_translation(len: f64, model: Model) -> Self {
        let e = (0.5 * len).exp();
        Self {
            m: [e, 0.0, 0.0, 1.0 / e],
            model,
        }
    }

    pub fn matrix(&self) -> [f64; 4] {
        self.m
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn with_model(&self, model: Model) -> Self {
        Self { m: self.m, model }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Self::canonical(mul(self.m, other.m), self.model)
    }

    pub fn inverse(&self) -> Isometry {
        let [a, b, c, d] = self.m;
        Self::canonical([d, -b, -c, a], self.model)
    }

    pub fn trace(&self) -> f64 {
        (self.m[0] + self.m[3]).abs()
    }

    /// Möbius action on a raw half-plane coordinate.
    pub fn act_h(&self, z: C64) -> C64 {
        let [a, b, c, d] = self.m;
        (z * a + b) / (z * c + d)
    }

    /// Möbius action on a raw disk coordinate.
    pub fn act_d(&self, w: C64) -> C64 {
        let k = self.disk_matrix();
        (k[0] * w + k[1]) / (k[2] * w + k[3])
    }

    /// Complex matrix of the action in the disk model.
    pub fn disk_matrix(&self) -> [C64; 4] {
        let [a, b, c, d] = self.m;
        // C M C^-1 with C = [[1, -i], [1, i]].
        let (a, b, c, d) = (C64::from(a), C64::from(b), C64::from(c), C64::from(d));
        let p = a + d;
        let q = b + c;
        let r = a - d;
        let s = b - c;
        [
            (p + I * s) * 0.5,
            (r - I * q) * 0.5,
            (r + I * q) * 0.5,
            (p - I * s) * 0.5,
        ]
    }

    pub fn apply(&self, a: ModelPoint) -> Result<ModelPoint> {
        if a.model != self.model {
            return Err(Error::Domain(format!(
                "isometry in {:?} model applied to a {:?} point",
                self.model, a.model
            )));
        }
        let out = match self.model {
            Model::HalfPlane => self.act_h(a.coord),
            Model::Disk => self.act_d(a.coord),
        };
        ModelPoint::new(self.model, out)
            .map_err(|_| Error::Precision(format!("image {out} left the model interior")))
    }

    /// Derivative of the action at a half-plane coordinate.
    pub fn derivative_h(&self, z: C64) -> C64 {
        let den = z * self.m[2] + self.m[3];
        1.0 / (den * den)
    }

    pub fn approx_eq(&self, other: &Isometry, tol: f64) -> bool {
        self.m
            .iter()
            .zip(other.m.iter())
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Isometry::identity(self.model), tol)
    }
}

fn mul(x: [f64; 4], y: [f64; 4]) -> [f64; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

/// Translation length `2 arcosh(|tr|/2)`, zero for non-hyperbolic elements.
pub fn translation_length(g: &Isometry) -> (f64, IsometryKind) {
    const EPS: f64 = 1e-9;
    let t = g.trace();
    if g.is_identity(1e-12) {
        (0.0, IsometryKind::Identity)
    } else if t < 2.0 - EPS {
        (0.0, IsometryKind::Elliptic)
    } else if t <= 2.0 + EPS {
        (0.0, IsometryKind::Parabolic)
    } else {
        (2.0 * (0.5 * t).acosh(), IsometryKind::Hyperbolic)
    }
}

/// A euclidean disk inside the disk model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclideanDisk {
    pub center: C64,
    pub radius: f64,
}

impl EuclideanDisk {
    pub fn new(center: C64, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::Range(format!("negative radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn unit() -> Self {
        Self {
            center: C64::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// The euclidean disk occupied by the hyperbolic ball `B(center, r)`.
pub fn hyperbolic_ball_as_euclidean(center: ModelPoint, r: f64) -> Result<EuclideanDisk> {
    if !(r >= 0.0) {
        return Err(Error::Range(format!("negative radius {r}")));
    }
    let c = center.to_model(Model::Disk).coord;
    let t = (0.5 * r).tanh();
    let c2 = c.norm_sqr();
    let den = 1.0 - c2 * t * t;
    EuclideanDisk::new(c * ((1.0 - t * t) / den), t * (1.0 - c2) / den)
}

/// Hyperbolic ball guaranteed to contain a lens `B(z, D+R) ∩ B(z', D+R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub center: ModelPoint,
    pub radius: f64,
    pub disk: EuclideanDisk,
}

/// Envelope of radius `2 artanh(sqrt(tanh(R/2)))` about the midpoint of
/// `z` and `z'`, which must lie at distance `2D`.
pub fn ball_intersection_envelope(
    z: ModelPoint,
    z2: ModelPoint,
    half: f64,
    r: f64,
) -> Result<Envelope> {
    if !(r >= 0.0) || !(half >= 0.0) {
        return Err(Error::Range(format!(
            "envelope needs D, R >= 0, got D={half}, R={r}"
        )));
    }
    let d = dist(z, z2);
    if (d - 2.0 * half).abs() > 1e-9 * (1.0 + d) {
        return Err(Error::Tolerance(format!(
            "dist(z, z') = {d} but 2D = {}",
            2.0 * half
        )));
    }
    let center = ModelPoint {
        model: Model::Disk,
        coord: midpoint_d(
            z.to_model(Model::Disk).coord,
            z2.to_model(Model::Disk).coord,
        ),
    };
    let radius = if r == 0.0 {
        0.0
    } else {
        let s = (0.5 * r).tanh();
        let rs = s.sqrt();
        ((1.0 + rs) * (1.0 + rs) * (r.exp() + 1.0) * 0.5).ln()
    };
    let disk = hyperbolic_ball_as_euclidean(center, radius)?;
    Ok(Envelope {
        center,
        radius,
        disk,
    })
}

/// Geodesic midpoint of two disk coordinates.
pub fn midpoint_d(z: C64, w: C64) -> C64 {
    let u = (w - z) / (1.0 - z.conj() * w);
    let n = u.norm();
    if n == 0.0 {
        return z;
    }
    let half = 0.5 * dist_d(C64::new(0.0, 0.0), C64::new(n, 0.0));
    let m = u / n * (0.5 * half).tanh();
    (m + z) / (1.0 + z.conj() * m)
}

/// Geometry of a point relative to the oriented geodesic segment `u -> v`
/// (disk coordinates).
#[derive(Debug, Clone, Copy)]
pub struct SegmentFrame {
    pub signed_dist: f64,
    pub along: f64,
    pub length: f64,
}

/// Signed distance from `z` to the geodesic through `u -> v` (positive on
/// the left) and the position of its foot point measured from `u`.
pub fn segment_frame_d(z: C64, u: C64, v: C64) -> SegmentFrame {
    let phi = |w: C64| (w - u) / (1.0 - u.conj() * w);
    let v1 = phi(v);
    let rot = v1.conj() / v1.norm();
    let z1 = rot * phi(z);
    let signed_dist = (2.0 * z1.im / ((1.0 - z1.norm()) * (1.0 + z1.norm()))).asinh();
    let zh = d_to_h(z1);
    SegmentFrame {
        signed_dist,
        along: zh.norm().ln(),
        length: dist_d(u, v),
    }
}

/// Distance from `z` to the geodesic segment `[u, v]` (disk coordinates).
pub fn segment_distance_d(z: C64, u: C64, v: C64) -> f64 {
    let f = segment_frame_d(z, u, v);
    if f.along >= 0.0 && f.along <= f.length {
        f.signed_dist.abs()
    } else {
        dist_d(z, u).min(dist_d(z, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hp(x: f64, y: f64) -> ModelPoint {
        ModelPoint::half_plane(C64::new(x, y)).unwrap()
    }

    fn dk(x: f64, y: f64) -> ModelPoint {
        ModelPoint::disk(C64::new(x, y)).unwrap()
    }

    #[test]
    fn rejects_boundary_points() {
        assert!(ModelPoint::half_plane(C64::new(1.0, 0.0)).is_err());
        assert!(ModelPoint::disk(C64::new(1.0, 0.0)).is_err());
        assert!(ModelPoint::disk(C64::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dist(ModelPoint::i(), ModelPoint::i()), 0.0);
        assert!((dist(hp(0.0, 1.0), hp(0.0, 2.0)) - 2f64.ln()).abs() < 1e-14);
        // Two points symmetric about the origin: twice the radial distance.
        let expected = 4.0 * 0.3f64.atanh();
        let d = dist(dk(0.3, 0.0), dk(-0.3, 0.0));
        assert!((d - expected).abs() < 1e-12);
        assert!((d - 1.2380784168124466).abs() < 1e-12);
    }

    #[test]
    fn cayley_normalization() {
        let w = cayley(ModelPoint::i());
        assert_eq!(w.model(), Model::Disk);
        assert!(w.coord().norm() < 1e-15);
        let z = cayley(ModelPoint::origin());
        assert!((z.coord() - I).norm() < 1e-15);
        assert!((h_to_d(C64::new(0.0, 1e-300)) + 1.0).norm() < 1e-12);
        let w2 = cayley(hp(0.0, 2.0));
        assert!((dist(w2, ModelPoint::origin()) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn apply_examples() {
        let t = Isometry::new(1.0, 1.0, 0.0, 1.0, Model::HalfPlane).unwrap();
        assert!((t.apply(ModelPoint::i()).unwrap().coord() - C64::new(1.0, 1.0)).norm() < 1e-15);
        let s = Isometry::new(0.0, -1.0, 1.0, 0.0, Model::HalfPlane).unwrap();
        assert!((s.apply(hp(0.0, 2.0)).unwrap().coord() - C64::new(0.0, 0.5)).norm() < 1e-15);
        let id = Isometry::identity(Model::Disk);
        assert_eq!(id.apply(dk(0.2, 0.1)).unwrap(), dk(0.2, 0.1));
        assert!(id.apply(hp(0.0, 1.0)).is_err());
    }

    #[test]
    fn sign_canonicalization() {
        let g = Isometry::new(-2.0, 0.0, 0.0, -0.5, Model::HalfPlane).unwrap();
        assert_eq!(g.matrix(), [2.0, 0.0, 0.0, 0.5]);
        let h = Isometry::new(0.0, -1.0, 1.0, 0.0, Model::HalfPlane).unwrap();
        assert_eq!(h.matrix(), [0.0, 1.0, -1.0, 0.0]);
        assert!(Isometry::new(1.0, 2.0, 3.0, 4.0, Model::HalfPlane).is_err());
    }

    #[test]
    fn translation_length_examples() {
        let par = Isometry::new(1.0, 1.0, 0.0, 1.0, Model::HalfPlane).unwrap();
        assert_eq!(translation_length(&par), (0.0, IsometryKind::Parabolic));
        let a = 3.0f64;
        let dil = Isometry::new(a, 0.0, 0.0, 1.0 / a, Model::HalfPlane).unwrap();
        let (len, kind) = translation_length(&dil);
        assert_eq!(kind, IsometryKind::Hyperbolic);
        assert!((len - 2.0 * a.ln()).abs() < 1e-12);
        let tr3 = Isometry::new(2.0, 1.0, 1.0, 1.0, Model::HalfPlane).unwrap();
        let (len, _) = translation_length(&tr3);
        // Grid minimum of dist(z, gz): the displacement of the axis.
        let mut best = f64::INFINITY;
        for i in 1..400 {
            for j in -200..200 {
                let z = C64::new(j as f64 * 0.01, i as f64 * 0.01);
                best = best.min(dist_h(z, tr3.act_h(z)));
            }
        }
        assert!((len - 1.9248473002384139).abs() < 1e-12);
        assert!((best - len).abs() < 1e-3 && best >= len - 1e-12);
        let rot = Isometry::rotation_about(ModelPoint::i(), 1.0);
        assert_eq!(translation_length(&rot).1, IsometryKind::Elliptic);
    }

    #[test]
    fn rotation_about_is_ccw() {
        let c = hp(0.3, 1.7);
        let g = Isometry::rotation_about(c, 0.7);
        assert!((g.act_h(c.coord()) - c.coord()).norm() < 1e-12);
        let der = g.derivative_h(c.coord());
        assert!((der.arg() - 0.7).abs() < 1e-12);
        assert!((der.norm() - 1.0).abs() < 1e-12);
        let dg = Isometry::rotation_about(c.to_model(Model::Disk), 0.7);
        let w = c.to_model(Model::Disk).coord();
        assert!((dg.act_d(w) - w).norm() < 1e-12);
    }

    #[test]
    fn ball_as_euclidean_examples() {
        let e = hyperbolic_ball_as_euclidean(ModelPoint::origin(), 1.3).unwrap();
        assert!(e.center.norm() < 1e-15 && (e.radius - 0.65f64.tanh()).abs() < 1e-15);
        let z = hyperbolic_ball_as_euclidean(ModelPoint::origin(), 0.0).unwrap();
        assert_eq!(z.radius, 0.0);
        let c = C64::new(0.5, 0.0);
        let e = hyperbolic_ball_as_euclidean(dk(0.5, 0.0), 1.0).unwrap();
        for k in 0..64 {
            let t = 2.0 * PI * k as f64 / 64.0;
            let b = e.center + C64::from_polar(e.radius, t);
            assert!((dist_d(c, b) - 1.0).abs() < 1e-9);
        }
        assert!(hyperbolic_ball_as_euclidean(ModelPoint::origin(), -1.0).is_err());
    }

    #[test]
    fn envelope_symmetric_case() {
        let r0 = 0.4f64;
        let half = dist_d(C64::new(0.0, 0.0), C64::new(r0, 0.0));
        for big_r in [0.5, 1.0, 3.0] {
            let env = ball_intersection_envelope(dk(r0, 0.0), dk(-r0, 0.0), half, big_r).unwrap();
            assert!(env.center.coord().norm() < 1e-12);
            let expect = 2.0 * (0.5 * big_r).tanh().sqrt().atanh();
            assert!((env.radius - expect).abs() < 1e-10);
        }
        let env = ball_intersection_envelope(dk(r0, 0.0), dk(-r0, 0.0), half, 0.0).unwrap();
        assert_eq!(env.radius, 0.0);
        assert!(ball_intersection_envelope(dk(r0, 0.0), dk(-r0, 0.0), half + 0.1, 1.0).is_err());
    }

    #[test]
    fn envelope_contains_lens_monte_carlo() {
        use rand::{Rng, SeedableRng};
        let (half, big_r) = (3.0f64, 1.0);
        let z = dk(-(0.5 * half).tanh(), 0.0);
        let z2 = dk((0.5 * half).tanh(), 0.0);
        // Rotate/translate the configuration so the midpoint is off-center.
        let g = Isometry::new(1.3, 0.4, -0.2, 0.7, Model::Disk).unwrap();
        let (z, z2) = (g.apply(z).unwrap(), g.apply(z2).unwrap());
        let env = ball_intersection_envelope(z, z2, half, big_r).unwrap();
        let outer = hyperbolic_ball_as_euclidean(env.center, half + big_r + 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut hits = 0;
        while hits < 100_000 {
            let p = outer.center
                + C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * outer.radius;
            if p.norm() >= 1.0 {
                continue;
            }
            let rad = half + big_r;
            if dist_d(p, z.coord()) < rad && dist_d(p, z2.coord()) < rad {
                hits += 1;
                assert!(dist_d(p, env.center.coord()) <= env.radius + 1e-9);
            }
        }
    }

    #[test]
    fn product_distance_examples() {
        let a = [dk(0.0, 0.0), dk(0.1, 0.0)];
        assert_eq!(product_dist(&a, &a).unwrap(), 0.0);
        let o = ModelPoint::origin();
        let at = |d: f64| dk((0.5 * d).tanh(), 0.0);
        assert!((product_dist(&[o, o], &[at(1.0), at(2.0)]).unwrap() - 2.0).abs() < 1e-12);
        let four = product_dist(&[o; 4], &[at(1.0), at(3.0), at(0.5), at(2.0)]).unwrap();
        assert!((four - 3.0).abs() < 1e-12);
        assert!(product_dist(&[o], &[o, o]).is_err());
    }

    #[test]
    fn ball_area_by_quadrature() {
        let r = 1.7f64;
        let t = (0.5 * r).tanh();
        // Midpoint rule in the radial variable for 2*pi * int 4 rho/(1-rho^2)^2.
        let n = 200_000;
        let h = t / n as f64;
        let s: f64 = (0..n)
            .map(|k| {
                let rho = (k as f64 + 0.5) * h;
                4.0 * rho / ((1.0 - rho * rho) * (1.0 - rho * rho))
            })
            .sum::<f64>()
            * h
            * 2.0
            * PI;
        assert!((s - ball_area(r)).abs() < 1e-8);
    }

    #[test]
    fn segment_distance_matches_brute_force() {
        let u = C64::new(-0.3, 0.2);
        let v = C64::new(0.4, 0.1);
        for z in [
            C64::new(0.0, 0.6),
            C64::new(0.7, -0.5),
            C64::new(-0.8, 0.0),
            C64::new(0.05, 0.15),
        ] {
            let n = 20_000;
            let mut best = f64::INFINITY;
            let phi = |w: C64| (w - u) / (1.0 - u.conj() * w);
            let phi_inv = |w: C64| (w + u) / (1.0 + u.conj() * w);
            let v1 = phi(v);
            for k in 0..=n {
                let t = k as f64 / n as f64;
                let len = dist_d(C64::new(0.0, 0.0), v1);
                let p = phi_inv(v1 / v1.norm() * (0.5 * t * len).tanh());
                best = best.min(dist_d(z, p));
            }
            assert!((segment_distance_d(z, u, v) - best).abs() < 1e-6, "{z}");
        }
        let f = segment_frame_d(C64::new(0.0, 0.5), C64::new(-0.5, 0.0), C64::new(0.5, 0.0));
        assert!(f.signed_dist > 0.0);
    }

    fn point_strategy() -> impl Strategy<Value = C64> {
        (0.0..0.95f64, 0.0..(2.0 * PI)).prop_map(|(r, t)| C64::from_polar(r, t))
    }

    fn isometry_strategy() -> impl Strategy<Value = Isometry> {
        (point_strategy(), 0.0..(2.0 * PI)).prop_map(|(a, t)| {
            // w -> e^{it} (w - a)/(1 - conj(a) w) expressed through the half-plane matrix.
            let za = d_to_h(a);
            let to_i = Isometry::new(1.0, -za.re, 0.0, za.im, Model::HalfPlane).unwrap();
            Isometry::rotation_about(ModelPoint::i(), t)
                .compose(&to_i)
                .with_model(Model::Disk)
        })
    }

    proptest! {
        #[test]
        fn metric_axioms(a in point_strategy(), b in point_strategy(), c in point_strategy()) {
            let (dab, dba) = (dist_d(a, b), dist_d(b, a));
            prop_assert!((dab - dba).abs() < 1e-9);
            prop_assert!(dab >= 0.0);
            prop_assert!(dist_d(a, c) <= dab + dist_d(b, c) + 1e-9);
        }

        #[test]
        fn isometry_invariance(g in isometry_strategy(), a in point_strategy(), b in point_strategy()) {
            let (ga, gb) = (g.act_d(a), g.act_d(b));
            prop_assume!(ga.norm() < 0.999 && gb.norm() < 0.999);
            prop_assert!((dist_d(ga, gb) - dist_d(a, b)).abs() < 1e-9 * (1.0 + dist_d(a, b)));
        }

        #[test]
        fn tanh_formula_matches_arcosh_form(a in point_strategy(), b in point_strategy()) {
            let rho = ((b - a) / (1.0 - a.conj() * b)).norm();
            let d = dist_h(d_to_h(a), d_to_h(b));
            prop_assert!(((0.5 * d).tanh().powi(2) - rho * rho).abs() < 1e-12);
        }

        #[test]
        fn cayley_round_trip(z in point_strategy()) {
            let p = ModelPoint::disk(z).unwrap();
            let back = cayley(cayley(p));
            prop_assert!((back.coord() - z).norm() < 1e-12);
        }

        #[test]
        fn composition_is_associative(f in isometry_strategy(), g in isometry_strategy(), h in isometry_strategy()) {
            let l = f.compose(&g).compose(&h);
            let r = f.compose(&g.compose(&h));
            prop_assert!(l.approx_eq(&r, 1e-9 * (1.0 + l.matrix().iter().fold(0.0f64, |m, x| m.max(x.abs())))));
            let [a, b, c, d] = l.matrix();
            prop_assert!((a * d - b * c - 1.0).abs() < 1e-9);
        }
    }
}
