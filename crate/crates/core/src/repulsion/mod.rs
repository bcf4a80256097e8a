//! Desk-scale checks of the repulsion statements for cusps, CM points,
//! singular bicusps and diagonals, and multiplicity against volume.

pub mod bicusp;
pub mod cm;
pub mod common;
pub mod cusp;
pub mod diag;
pub mod job;
pub mod mobius;
pub mod mult;

pub use bicusp::check_bicusp_repulsion;
pub use cm::{assign_cm_pair, check_cm_repulsion, CmPair};
pub use cusp::check_cusp_repulsion;
pub use diag::check_diag_repulsion;
pub use job::{Budget, RepulsionJob};
pub use mobius::{mobius_ratio_asymptotic, MobiusRatio};
pub use mult::{mult_vs_volume_report, PlacedPatch, SpecialSet};
