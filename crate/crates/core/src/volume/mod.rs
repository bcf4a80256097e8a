//! Volumes of holomorphic curves in Kobayashi tubes of products of disks.

pub mod checks;
pub mod current;
pub mod integrate;
pub mod lelong;
pub mod patch;
pub mod profile;

pub use checks::{
    builtin_htad_family, builtin_htd_family, collar_volume, ht_diag2_check, ht_point_check,
    htad_ratio_check, htd_ratio_check, measured_ratio,
};
pub use current::{current_identity_check, CurrentIdentityReport};
pub use integrate::{curve_volume, curve_volume_of};
pub use lelong::{lelong_estimate, lelong_estimate_fn, LelongEstimate, Potential};
pub use patch::{
    Coord, Curve, CurvePatch, HoloMap, Multiplicity, PatchKind, RegionKind, RegionSpec,
};
pub use profile::{profile_positivity_check, ProfileKind, ProfilePositivityReport, RadialProfile};
