//! The (2,3,p) triangle group, its tiling and the homomorphism to PSL2(F_p).

pub mod geometry;
pub mod tiles;
pub mod words;

pub use geometry::{compute_vertex_params, TriangleGeometry};
pub use tiles::{
    dist_on_xp, shortest_displacement, tile_ball, verify_disksep, DisksepReport, TileBall,
};
pub use words::{fp_generator, fp_homomorphism, gamma_p_of_intmat, Gen, TileWord};
