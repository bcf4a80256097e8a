pub mod app;
pub mod arith;
pub mod error;
pub mod hyp;
pub mod modcurves;
pub mod quad;
pub mod report;
pub mod repulsion;
pub mod tiling;
pub mod volume;
