//! Holomorphic curves in products of disks and the regions they are cut by.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp::{d_to_h, dist_d, EuclideanDisk, C64};

/// A holomorphic map from the parameter disk to the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HoloMap {
    Identity,
    Neg,
    Const(C64),
    /// `(a z + b) / (c z + d)`.
    Mobius([C64; 4]),
    /// Coefficients in increasing degree.
    Poly(Vec<C64>),
    /// The inner map followed by a Möbius map.
    Then(Box<HoloMap>, [C64; 4]),
}

fn mobius(m: &[C64; 4], z: C64) -> (C64, C64) {
    let [a, b, c, d] = *m;
    let den = c * z + d;
    ((a * z + b) / den, (a * d - b * c) / (den * den))
}

impl HoloMap {
    /// Value and derivative.
    pub fn eval(&self, z: C64) -> (C64, C64) {
        match self {
            HoloMap::Identity => (z, C64::new(1.0, 0.0)),
            HoloMap::Neg => (-z, C64::new(-1.0, 0.0)),
            HoloMap::Const(w) => (*w, C64::new(0.0, 0.0)),
            HoloMap::Mobius(m) => mobius(m, z),
            HoloMap::Poly(c) => {
                let mut v = C64::new(0.0, 0.0);
                let mut dv = C64::new(0.0, 0.0);
                for a in c.iter().rev() {
                    dv = dv * z + v;
                    v = v * z + a;
                }
                (v, dv)
            }
            HoloMap::Then(inner, m) => {
                let (u, du) = inner.eval(z);
                let (w, dw) = mobius(m, u);
                (w, dw * du)
            }
        }
    }

    /// Order of vanishing of `self(z) - self(z0)` at `z0`, or `None` when the
    /// map is constant.
    pub fn vanishing_order(&self, z0: C64) -> Option<u32> {
        match self {
            HoloMap::Identity | HoloMap::Neg => Some(1),
            HoloMap::Const(_) => None,
            HoloMap::Mobius(m) => {
                let [a, b, c, d] = *m;
                if (a * d - b * c).norm() == 0.0 {
                    None
                } else {
                    Some(1)
                }
            }
            HoloMap::Poly(c) => {
                // Taylor coefficients at z0 by repeated synthetic division.
                let mut coeffs = c.clone();
                let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1.0);
                let n = coeffs.len();
                for k in 0..n {
                    for j in (k..n.saturating_sub(1)).rev() {
                        let t = coeffs[j + 1] * z0;
                        coeffs[j] += t;
                    }
                }
                // coeffs[k] now holds the k-th Taylor coefficient at z0.
                (1..coeffs.len())
                    .find(|&k| coeffs[k].norm() > 1e-12 * scale)
                    .map(|k| k as u32)
            }
            HoloMap::Then(inner, m) => {
                let [a, b, c, d] = *m;
                if (a * d - b * c).norm() == 0.0 {
                    None
                } else {
                    inner.vanishing_order(z0)
                }
            }
        }
    }
}

/// One coordinate of a curve. With `conj` set the coordinate is read on the
/// conjugate disk, so the point is the complex conjugate of the map value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coord {
    pub map: HoloMap,
    #[serde(default)]
    pub conj: bool,
}

impl Coord {
    pub fn plain(map: HoloMap) -> Self {
        Self { map, conj: false }
    }

    fn eval(&self, z: C64) -> (C64, C64) {
        let (w, dw) = self.map.eval(z);
        if self.conj {
            (w.conj(), dw.conj())
        } else {
            (w, dw)
        }
    }
}

/// A parametrized holomorphic curve in a product of disks.
///
/// The parameter runs over `domain`. With `period = Some(L)` it is further
/// restricted to a fundamental segment for the hyperbolic translation of
/// length `L` along the real diameter, so the curve lives on the quotient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub coords: Vec<Coord>,
    pub domain: EuclideanDisk,
    #[serde(default)]
    pub period: Option<f64>,
}

impl Curve {
    pub fn new(coords: Vec<Coord>, domain: EuclideanDisk) -> Self {
        Self {
            coords,
            domain,
            period: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Points and derivatives of every coordinate.
    pub fn eval(&self, z: C64, out: &mut Vec<(C64, C64)>) {
        out.clear();
        out.extend(self.coords.iter().map(|c| c.eval(z)));
    }

    /// Multiplicity of the curve at the parameter `z0`.
    pub fn multiplicity_at(&self, z0: C64) -> u32 {
        self.coords
            .iter()
            .filter_map(|c| c.map.vanishing_order(z0))
            .min()
            .unwrap_or(0)
    }

    /// Positive inside the parameter domain.
    pub(crate) fn domain_margin(&self, z: C64) -> f64 {
        let mut m = self.domain.radius - (z - self.domain.center).norm();
        m = m.min(1.0 - z.norm());
        if let Some(l) = self.period {
            let t = d_to_h(z).norm().ln();
            m = m.min(t).min(l - t);
        }
        m
    }

    /// A point inside the parameter domain used as the origin of rays.
    pub(crate) fn ray_center(&self) -> C64 {
        match self.period {
            Some(l) => C64::new((0.25 * l).tanh(), 0.0),
            None => self.domain.center,
        }
    }

    /// The same curve moved by a Möbius map applied to every coordinate.
    pub fn moved_by(&self, m: [C64; 4]) -> Self {
        let coords = self
            .coords
            .iter()
            .map(|c| Coord {
                map: HoloMap::Then(Box::new(c.map.clone()), m),
                conj: c.conj,
            })
            .collect();
        Self {
            coords,
            domain: self.domain,
            period: self.period,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PatchKind {
    /// `w = (a z + b) / (c z + d)`, parameters `[a, b, c, d]`.
    GraphMobius,
    /// `w = -z`.
    GraphNeg,
    /// `w = w0`, parameter `[w0]`.
    GraphConst,
    /// `w = Σ a_k z^k`, parameters `[a_0, a_1, ...]`.
    GraphPoly,
    /// A curve in `X × X̄` written in model coordinates. Parameters
    /// `[a, b, c, d]` give the Möbius map `φ`, and the curve is `(z, φ(z))`
    /// with the second disk carrying the conjugate structure.
    GraphConjModel,
}

/// A declared point of the curve with its multiplicity there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multiplicity {
    pub point: C64,
    pub order: u32,
}

/// A graph `{(z, w(z))}` in `𝔻 × 𝔻` over a parameter disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePatch {
    pub kind: PatchKind,
    #[serde(default)]
    pub params: Vec<C64>,
    pub domain: EuclideanDisk,
    #[serde(default)]
    pub period: Option<f64>,
    #[serde(default)]
    pub multiplicities: Vec<Multiplicity>,
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

impl CurvePatch {
    pub fn new(kind: PatchKind, params: Vec<C64>, domain: EuclideanDisk) -> Result<Self> {
        let patch = Self {
            kind,
            params,
            domain,
            period: None,
            multiplicities: Vec::new(),
        };
        patch.second()?;
        Ok(patch)
    }

    pub fn neg() -> Self {
        Self::new(PatchKind::GraphNeg, vec![], EuclideanDisk::unit()).expect("valid")
    }

    pub fn constant(w0: C64) -> Self {
        Self::new(PatchKind::GraphConst, vec![w0], EuclideanDisk::unit()).expect("valid")
    }

    pub fn poly(coeffs: Vec<C64>) -> Self {
        Self::new(PatchKind::GraphPoly, coeffs, EuclideanDisk::unit()).expect("valid")
    }

    pub fn mobius(m: [C64; 4]) -> Self {
        Self::new(PatchKind::GraphMobius, m.to_vec(), EuclideanDisk::unit()).expect("valid")
    }

    /// Rotation by `angle` about the disk point `a`.
    pub fn rotation(a: C64, angle: f64) -> Self {
        // T_a⁻¹ ∘ (e^{iθ}·) ∘ T_a with T_a(z) = (z - a)/(1 - ā z).
        let e = C64::from_polar(1.0, angle);
        let t = [re(1.0), -a, -a.conj(), re(1.0)];
        let ti = [re(1.0), a, a.conj(), re(1.0)];
        let rot = [e, re(0.0), re(0.0), re(1.0)];
        Self::mobius(mat_mul(&ti, &mat_mul(&rot, &t)))
    }

    /// The real-structure curve `(z, z̄)` of `X × X̄` on a fundamental
    /// segment of length `period`. In model coordinates it is `w = z`.
    pub fn collar(period: f64) -> Self {
        let mut p = Self::new(
            PatchKind::GraphConjModel,
            vec![re(1.0), re(0.0), re(0.0), re(1.0)],
            EuclideanDisk::unit(),
        )
        .expect("valid");
        p.period = Some(period);
        p
    }

    pub fn with_domain(mut self, domain: EuclideanDisk) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_multiplicity(mut self, point: C64, order: u32) -> Self {
        self.multiplicities.push(Multiplicity { point, order });
        self
    }

    fn second(&self) -> Result<HoloMap> {
        let want = |n: usize| -> Result<()> {
            if self.params.len() != n {
                return Err(Error::Domain(format!(
                    "{:?} takes {n} parameters, got {}",
                    self.kind,
                    self.params.len()
                )));
            }
            Ok(())
        };
        match self.kind {
            PatchKind::GraphMobius | PatchKind::GraphConjModel => {
                want(4)?;
                let m = [
                    self.params[0],
                    self.params[1],
                    self.params[2],
                    self.params[3],
                ];
                if (m[0] * m[3] - m[1] * m[2]).norm() == 0.0 {
                    return Err(Error::Domain("degenerate Möbius map".into()));
                }
                Ok(HoloMap::Mobius(m))
            }
            PatchKind::GraphNeg => {
                want(0)?;
                Ok(HoloMap::Neg)
            }
            PatchKind::GraphConst => {
                want(1)?;
                if self.params[0].norm() >= 1.0 {
                    return Err(Error::Domain("constant lies outside the disk".into()));
                }
                Ok(HoloMap::Const(self.params[0]))
            }
            PatchKind::GraphPoly => {
                if self.params.is_empty() {
                    return Err(Error::Domain("empty polynomial".into()));
                }
                Ok(HoloMap::Poly(self.params.clone()))
            }
        }
    }

    pub fn curve(&self) -> Result<Curve> {
        Ok(Curve {
            coords: vec![
                Coord::plain(HoloMap::Identity),
                Coord::plain(self.second()?),
            ],
            domain: self.domain,
            period: self.period,
        })
    }

    /// The patch moved to `X × X̄` by conjugating its second coordinate. Tubes
    /// around the conjugate diagonal of the result correspond to tubes around
    /// the diagonal of the original.
    pub fn transplanted(&self) -> Result<Curve> {
        let mut c = self.curve()?;
        c.coords[1].conj = true;
        Ok(c)
    }

    /// Checks each declared multiplicity against the local series of the
    /// patch and that the second coordinate stays in the disk on a sample of
    /// the domain.
    pub fn validate(&self) -> Result<()> {
        let curve = self.curve()?;
        for m in &self.multiplicities {
            if !self.domain.contains(m.point) {
                return Err(Error::Domain(format!(
                    "declared point {} is outside the domain",
                    m.point
                )));
            }
            let got = curve.multiplicity_at(m.point);
            if got != m.order {
                return Err(Error::Structural(format!(
                    "declared multiplicity {} at {} but the local series gives {got}",
                    m.order, m.point
                )));
            }
        }
        let mut buf = Vec::new();
        for k in 0..64 {
            for j in 1..8 {
                let z = self.domain.center
                    + C64::from_polar(
                        self.domain.radius * j as f64 / 8.0,
                        k as f64 * std::f64::consts::TAU / 64.0,
                    );
                if z.norm() >= 1.0 {
                    continue;
                }
                curve.eval(z, &mut buf);
                if buf.iter().any(|(w, _)| !(w.norm() < 1.0)) {
                    return Err(Error::Domain(format!("the patch leaves the disk near {z}")));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn mat_mul(x: &[C64; 4], y: &[C64; 4]) -> [C64; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegionKind {
    /// Max-metric ball around `anchor`.
    PointBall,
    /// `d(x, y) < r` on `𝔻 × 𝔻`.
    DiagTube,
    /// `d(x, ȳ) < r` on `𝔻 × 𝔻̄`.
    ConjDiagTube,
    /// `d(x₁, x₂) < r` and `d(y₁, y₂) < r` on `(𝔻 × 𝔻)²`.
    Diag2Tube,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub radius: f64,
    #[serde(default)]
    pub anchor: Vec<C64>,
}

impl RegionSpec {
    pub fn point_ball(anchor: Vec<C64>, radius: f64) -> Self {
        Self {
            kind: RegionKind::PointBall,
            radius,
            anchor,
        }
    }

    pub fn diag_tube(radius: f64) -> Self {
        Self {
            kind: RegionKind::DiagTube,
            radius,
            anchor: vec![],
        }
    }

    pub fn conj_diag_tube(radius: f64) -> Self {
        Self {
            kind: RegionKind::ConjDiagTube,
            radius,
            anchor: vec![],
        }
    }

    pub fn diag2_tube(radius: f64) -> Self {
        Self {
            kind: RegionKind::Diag2Tube,
            radius,
            anchor: vec![],
        }
    }

    pub fn with_radius(&self, radius: f64) -> Self {
        Self {
            radius,
            ..self.clone()
        }
    }

    /// Number of disk factors the region lives in.
    pub fn dim(&self) -> usize {
        match self.kind {
            RegionKind::PointBall => self.anchor.len(),
            RegionKind::DiagTube | RegionKind::ConjDiagTube => 2,
            RegionKind::Diag2Tube => 4,
        }
    }

    pub fn check(&self, curve: &Curve) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Range(format!(
                "region radius {} must be positive",
                self.radius
            )));
        }
        if self.dim() != curve.dim() {
            return Err(Error::Domain(format!(
                "region lives in {} factors but the curve has {} coordinates",
                self.dim(),
                curve.dim()
            )));
        }
        if self.anchor.iter().any(|a| a.norm() >= 1.0) {
            return Err(Error::Domain("anchor outside the disk".into()));
        }
        Ok(())
    }

    /// `r` minus the region's distance function at the point `x`.
    pub fn margin(&self, x: &[(C64, C64)]) -> f64 {
        let d = match self.kind {
            RegionKind::PointBall => x
                .iter()
                .zip(&self.anchor)
                .map(|((w, _), a)| dist_d(*w, *a))
                .fold(0.0, f64::max),
            RegionKind::DiagTube => dist_d(x[0].0, x[1].0),
            RegionKind::ConjDiagTube => dist_d(x[0].0, x[1].0.conj()),
            RegionKind::Diag2Tube => dist_d(x[0].0, x[2].0).max(dist_d(x[1].0, x[3].0)),
        };
        self.radius - d
    }
}

/// Pullback density of `ω_std` along the curve, per unit of euclidean area.
pub fn density(x: &[(C64, C64)]) -> f64 {
    x.iter()
        .map(|(w, dw)| {
            let a = (1.0 - w.norm()) * (1.0 + w.norm());
            4.0 * dw.norm_sqr() / (a * a)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_differences() {
        let maps = [
            HoloMap::Poly(vec![
                re(0.1),
                C64::new(0.2, 0.1),
                re(-0.3),
                C64::new(0.05, 0.02),
            ]),
            HoloMap::Mobius([re(1.0), C64::new(0.2, 0.1), C64::new(0.2, -0.1), re(1.0)]),
            HoloMap::Then(Box::new(HoloMap::Neg), [re(1.0), re(0.3), re(0.3), re(1.0)]),
        ];
        let z = C64::new(0.2, -0.3);
        let h = 1e-6;
        for m in maps {
            let (_, d) = m.eval(z);
            let fd = (m.eval(z + h).0 - m.eval(z - h).0) / (2.0 * h);
            assert!((d - fd).norm() < 1e-8, "{m:?}");
        }
    }

    #[test]
    fn vanishing_orders() {
        let p = HoloMap::Poly(vec![re(0.0), re(0.0), re(0.5)]);
        assert_eq!(p.vanishing_order(re(0.0)), Some(2));
        assert_eq!(p.vanishing_order(re(0.4)), Some(1));
        // (z - 0.3)^3 expanded.
        let q = HoloMap::Poly(vec![re(-0.027), re(0.27), re(-0.9), re(1.0)]);
        assert_eq!(q.vanishing_order(re(0.3)), Some(3));
        assert_eq!(HoloMap::Const(re(0.2)).vanishing_order(re(0.0)), None);
        let c = CurvePatch::poly(vec![re(0.0), re(0.0), re(0.5)])
            .curve()
            .unwrap();
        assert_eq!(c.multiplicity_at(re(0.0)), 1);
    }

    #[test]
    fn rotation_fixes_center() {
        let a = C64::new(0.3, -0.2);
        let c = CurvePatch::rotation(a, 1.1).curve().unwrap();
        let mut buf = Vec::new();
        c.eval(a, &mut buf);
        assert!((buf[1].0 - a).norm() < 1e-14);
        assert!((buf[1].1 - C64::from_polar(1.0, 1.1)).norm() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(CurvePatch::neg()
            .with_multiplicity(re(0.0), 1)
            .validate()
            .is_ok());
        assert!(CurvePatch::neg()
            .with_multiplicity(re(0.0), 2)
            .validate()
            .is_err());
        assert!(CurvePatch::poly(vec![re(0.0), re(0.0), re(2.0)])
            .validate()
            .is_err());
        assert!(
            CurvePatch::new(PatchKind::GraphConst, vec![re(1.5)], EuclideanDisk::unit()).is_err()
        );
        assert!(
            CurvePatch::new(PatchKind::GraphMobius, vec![re(1.0)], EuclideanDisk::unit()).is_err()
        );
    }

    #[test]
    fn patch_roundtrips_through_json() {
        let p = CurvePatch::collar(1.5);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("GRAPH_CONJ_MODEL"));
        let back: CurvePatch = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let r = RegionSpec::point_ball(vec![re(0.0), re(0.1)], 1.0);
        let back: RegionSpec = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
