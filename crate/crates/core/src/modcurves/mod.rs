//! Models of X(p): cusps, CM points, Hecke correspondences, genus, and the
//! comparison between the (2,3,∞) and (2,3,p) uniformizations.

pub mod cm;
pub mod cusps;
pub mod genus;
pub mod hecke;
pub mod metric;
#[cfg(feature = "schwarz")]
pub mod schwarz;

pub use cm::{classify_cm_pair, enumerate_cm_points, CMPointClass, CmFlavor};
pub use cusps::{enumerate_cusps, enumerate_singular_bicusps, CuspId, SingularBicusp};
pub use genus::{genus_and_volume, GenusVolume};
pub use hecke::{hecke_neighbors, hecke_on_cusps, HeckeConvention, HeckeOp};
pub use metric::{d_cusp, reduce_modular};
#[cfg(feature = "schwarz")]
pub use schwarz::{triangle_map, SchwarzMap};
