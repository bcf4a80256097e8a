//! Enumeration of the tiles meeting a ball, and quotient distances on X(p).

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::geometry::TriangleGeometry;
use super::words::{Gen, TileWord};
use crate::arith::fp::ProjMatFp;
use crate::error::{Error, Result};
use crate::hyp::{dist_h, ModelPoint, C64};

/// Default cap on the number of tiles a single search may visit.
pub const DEFAULT_TILE_BUDGET: usize = 4_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TileBall {
    pub tiles: Vec<TileWord>,
    /// False when the budget ran out before the search closed.
    pub complete: bool,
}

/// Tiles `g F` are identified by their mod-p image together with the image
/// of a fixed interior point.
#[derive(Default)]
struct TileIndex {
    by_fp: HashMap<ProjMatFp, Vec<C64>>,
}

impl TileIndex {
    fn insert(&mut self, fp: ProjMatFp, marker: C64) -> bool {
        let bucket = self.by_fp.entry(fp).or_default();
        if bucket.iter().any(|m| dist_h(*m, marker) < 1e-6) {
            return false;
        }
        bucket.push(marker);
        true
    }
}

/// Every tile meeting the closed ball `B(center, r)`, by breadth-first search
/// over edge neighbors `g σ2 F`, `g σp F`, `g σp⁻¹ F`, pruned by the
/// distance from the tile to the center.
pub fn tile_ball(geom: &TriangleGeometry, center: ModelPoint, r: f64) -> Result<TileBall> {
    tile_ball_with_budget(geom, center, r, DEFAULT_TILE_BUDGET)
}

pub fn tile_ball_with_budget(
    geom: &TriangleGeometry,
    center: ModelPoint,
    r: f64,
    budget: usize,
) -> Result<TileBall> {
    let cap = 3.0 * (geom.p as f64).ln();
    if !(r >= 0.0) || r > cap + 1e-12 {
        return Err(Error::Range(format!(
            "radius {r} outside [0, 3 log p = {cap:.4}]"
        )));
    }
    let c = center.to_model(crate::hyp::Model::HalfPlane).coord();
    let marker0 = geom.interior_point();
    // Start from the tile containing the center.
    let (_, word) = geom.reduce(c)?;
    let start = TileWord::from_word(geom, &word);
    let mut index = TileIndex::default();
    let mut queue = VecDeque::new();
    let mut tiles = Vec::new();
    index.insert(start.fp_image, start.isometry.act_h(marker0));
    queue.push_back(start);
    let moves = [Gen::S2, Gen::Sp(1), Gen::Sp(geom.p - 1)];
    let mut visited = 1usize;
    while let Some(t) = queue.pop_front() {
        let local = t.isometry.inverse().act_h(c);
        if geom.dist_to_domain(local) > r {
            continue;
        }
        for g in moves {
            let n = t.push(geom, g);
            if index.insert(n.fp_image, n.isometry.act_h(marker0)) {
                visited += 1;
                if visited > budget {
                    tiles.push(t);
                    return Ok(TileBall {
                        tiles,
                        complete: false,
                    });
                }
                queue.push_back(n);
            }
        }
        tiles.push(t);
    }
    Ok(TileBall {
        tiles,
        complete: true,
    })
}

/// Whether the tile has `i y_p` as a vertex.
pub fn has_cusp_vertex(geom: &TriangleGeometry, t: &TileWord) -> bool {
    geom.domain_vertices()
        .iter()
        .any(|v| dist_h(t.isometry.act_h(*v), geom.cusp()) < 1e-9)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DisksepReport {
    pub p: u64,
    pub radius: f64,
    pub tiles_in_ball: usize,
    pub offending_tiles: Vec<String>,
    pub disk_pass: bool,
    /// Largest radius for which the disk meets only tiles at the cusp.
    pub critical_radius: f64,
    pub min_cusp_separation: f64,
    pub separation_bound: f64,
    pub separation_pass: bool,
    /// A pair of distinct cusp lifts realizing the separation.
    pub separation_witness: String,
}

impl DisksepReport {
    pub fn pass(&self) -> bool {
        self.disk_pass && self.separation_pass
    }
}

/// Checks that the disk of radius `log p - 1` about the cusp `i y_p` meets
/// only tiles having the cusp as a vertex, and that distinct cusps are more
/// than `2 log p - 2` apart.
pub fn verify_disksep(geom: &TriangleGeometry) -> Result<DisksepReport> {
    let p = geom.p as f64;
    let radius = p.ln() - 1.0;
    let cusp = geom.cusp_point();
    let ball = tile_ball(geom, cusp, radius.max(0.0))?;
    let offending: Vec<String> = ball
        .tiles
        .iter()
        .filter(|t| !has_cusp_vertex(geom, t))
        .map(|t| t.word_string())
        .collect();
    // Tiles away from the cusp start at the sides opposite to it, which are
    // images of the unit circle at distance log y_p.
    let critical_radius = geom.log_y;
    let search = (2.0 * p.ln()).min(3.0 * p.ln());
    let wide = tile_ball(geom, cusp, search)?;
    let mut best = f64::INFINITY;
    let mut witness = String::new();
    for t in &wide.tiles {
        if is_cusp_stabilizer_coset(&t.fp_image) {
            continue;
        }
        let d = dist_h(t.isometry.act_h(geom.cusp()), geom.cusp());
        if d < best {
            best = d;
            witness = t.word_string();
        }
    }
    let bound = 2.0 * p.ln() - 2.0;
    Ok(DisksepReport {
        p: geom.p,
        radius,
        tiles_in_ball: ball.tiles.len(),
        disk_pass: offending.is_empty(),
        offending_tiles: offending,
        critical_radius,
        min_cusp_separation: best,
        separation_bound: bound,
        separation_pass: best > bound,
        separation_witness: witness,
    })
}

/// Whether `g` fixes the cusp `∞` of P¹(F_p), i.e. lies in the image of the
/// stabilizer ⟨σp⟩ times Ξ(p).
pub fn is_cusp_stabilizer_coset(g: &ProjMatFp) -> bool {
    // Canonical forms of upper unipotent classes are [[1, b], [0, 1]].
    let [a, _, c, d] = g.matrix().entries();
    c == 0 && a == d
}

/// Distance on X(p) between the images of `a` and `b`, when it is below
/// `r_max`; `None` means it exceeds `r_max`.
pub fn dist_on_xp(
    geom: &TriangleGeometry,
    a: ModelPoint,
    b: ModelPoint,
    r_max: f64,
) -> Result<Option<f64>> {
    let za = a.to_model(crate::hyp::Model::HalfPlane).coord();
    let zb = b.to_model(crate::hyp::Model::HalfPlane).coord();
    let (b0, wb) = geom.reduce(zb)?;
    let target = super::words::fp_homomorphism(geom.p, &wb);
    let ball = tile_ball(geom, ModelPoint::half_plane(za)?, r_max)?;
    if !ball.complete {
        return Err(Error::Budget("tile budget exhausted".into()));
    }
    let best = ball
        .tiles
        .iter()
        .filter(|t| t.fp_image == target)
        .map(|t| dist_h(za, t.isometry.act_h(b0)))
        .fold(f64::INFINITY, f64::min);
    Ok((best <= r_max).then_some(best))
}

/// Shortest displacement `d(a, ξ a)` over `1 ≠ ξ ∈ Ξ(p)`, i.e. the length of
/// the shortest geodesic loop at the image of `a` in X(p), if below `r_max`.
pub fn shortest_displacement(
    geom: &TriangleGeometry,
    a: ModelPoint,
    r_max: f64,
) -> Result<Option<f64>> {
    let za = a.to_model(crate::hyp::Model::HalfPlane).coord();
    let (a0, wa) = geom.reduce(za)?;
    let target = super::words::fp_homomorphism(geom.p, &wa);
    let ball = tile_ball(geom, ModelPoint::half_plane(za)?, r_max)?;
    if !ball.complete {
        return Err(Error::Budget("tile budget exhausted".into()));
    }
    let best = ball
        .tiles
        .iter()
        .filter(|t| t.fp_image == target)
        .map(|t| dist_h(za, t.isometry.act_h(a0)))
        .filter(|d| *d > 1e-6)
        .fold(f64::INFINITY, f64::min);
    Ok((best <= r_max).then_some(best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::geometry::compute_vertex_params;
    use std::collections::BTreeSet;

    fn hp(z: C64) -> ModelPoint {
        ModelPoint::half_plane(z).unwrap()
    }

    #[test]
    fn zero_radius_is_base_tile() {
        let g = compute_vertex_params(7).unwrap();
        let b = tile_ball(&g, hp(g.interior_point()), 0.0).unwrap();
        assert_eq!(b.tiles.len(), 1);
        assert!(b.tiles[0].word.is_empty());
        assert!(tile_ball(&g, hp(g.interior_point()), 3.0 * 7f64.ln() + 0.1).is_err());
    }

    #[test]
    fn cusp_valence() {
        for p in [7u64, 11, 13] {
            let g = compute_vertex_params(p).unwrap();
            let b = tile_ball(&g, g.cusp_point(), 0.9 * g.log_y).unwrap();
            assert_eq!(b.tiles.len() as u64, p);
            assert!(b.tiles.iter().all(|t| has_cusp_vertex(&g, t)));
            let b = tile_ball(&g, g.cusp_point(), 1.05 * g.log_y).unwrap();
            assert!(b.tiles.len() as u64 > p);
        }
    }

    #[test]
    fn monotone_in_radius() {
        let g = compute_vertex_params(7).unwrap();
        let c = hp(C64::new(0.2, 1.4));
        let key = |b: &TileBall| -> BTreeSet<(ProjMatFp, i64, i64)> {
            b.tiles
                .iter()
                .map(|t| {
                    let m = t.isometry.act_h(g.interior_point());
                    (
                        t.fp_image,
                        (m.re * 1e6).round() as i64,
                        (m.im * 1e6).round() as i64,
                    )
                })
                .collect()
        };
        let mut prev = BTreeSet::new();
        for r in [0.3, 0.8, 1.5, 2.5, 3.5] {
            let cur = key(&tile_ball(&g, c, r).unwrap());
            assert!(prev.is_subset(&cur));
            prev = cur;
        }
    }

    #[test]
    fn grid_point_location_oracle() {
        // Every grid point of the ball lies in a listed tile, and every
        // listed tile is within r of the center.
        let g = compute_vertex_params(7).unwrap();
        let c = C64::new(0.1, 1.2);
        let r = 7f64.ln();
        let ball = tile_ball(&g, hp(c), r).unwrap();
        let listed: Vec<(ProjMatFp, C64)> = ball
            .tiles
            .iter()
            .map(|t| (t.fp_image, t.isometry.act_h(g.interior_point())))
            .collect();
        let mut located = BTreeSet::new();
        let n = 120;
        let disk = crate::hyp::hyperbolic_ball_as_euclidean(hp(c), r).unwrap();
        for i in 0..n {
            for j in 0..n {
                let w = disk.center
                    + C64::new(
                        2.0 * i as f64 / n as f64 - 1.0,
                        2.0 * j as f64 / n as f64 - 1.0,
                    ) * disk.radius;
                if w.norm() >= 1.0 || crate::hyp::dist_d(w, crate::hyp::h_to_d(c)) >= r {
                    continue;
                }
                let z = crate::hyp::d_to_h(w);
                let (_, word) = g.reduce(z).unwrap();
                let t = TileWord::from_word(&g, &word);
                let m = t.isometry.act_h(g.interior_point());
                let k = listed
                    .iter()
                    .position(|(f, q)| *f == t.fp_image && dist_h(*q, m) < 1e-6);
                assert!(k.is_some(), "grid point {z} in an unlisted tile");
                located.insert(k.unwrap());
            }
        }
        for t in &ball.tiles {
            assert!(g.dist_to_domain(t.isometry.inverse().act_h(c)) <= r);
        }
        // Tiles missed by the grid are thin slivers at the rim.
        assert!(
            located.len() * 10 >= ball.tiles.len() * 8,
            "{} of {}",
            located.len(),
            ball.tiles.len()
        );
    }

    #[test]
    fn disksep_measurements() {
        for p in [7u64, 11] {
            let g = compute_vertex_params(p).unwrap();
            let rep = verify_disksep(&g).unwrap();
            assert!(
                (rep.min_cusp_separation - 2.0 * g.log_y).abs() < 1e-9,
                "{rep:?}"
            );
            // The literal radius log p - 1 exceeds log y_p.
            assert!(rep.radius > rep.critical_radius);
            assert!(!rep.disk_pass);
        }
    }

    #[test]
    fn quotient_distance_basics() {
        let g = compute_vertex_params(7).unwrap();
        let a = hp(C64::new(0.05, 1.3));
        assert_eq!(dist_on_xp(&g, a, a, 1.0).unwrap(), Some(0.0));
        let b = hp(C64::new(-0.05, 1.5));
        let d = dist_on_xp(&g, a, b, 2.0).unwrap().unwrap();
        assert!((d - dist_h(a.coord(), b.coord())).abs() < 1e-12);
    }

    #[test]
    fn displacement_near_two_log_p() {
        let g = compute_vertex_params(7).unwrap();
        let a = hp(C64::new(0.05, 1.3));
        let d = shortest_displacement(&g, a, 3.0 * 7f64.ln())
            .unwrap()
            .unwrap();
        assert!((d - 2.0 * 7f64.ln()).abs() < 4.0, "{d}");
    }
}
