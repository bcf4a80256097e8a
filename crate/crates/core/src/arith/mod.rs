//! Exact arithmetic in SL2(Z), Γ(p) and PSL2(F_p).

pub mod fp;
pub mod intmat;
pub mod p1;
pub mod subspace;
pub mod transporter;

pub use fp::{psl2_elements, MatFp, ProjMatFp};
pub use intmat::{enumerate_bounded_height, is_in_gamma_p, min_semisimple_trace, IntMat};
pub use p1::{double_coset_constraints, p1_action, MapSpecification, P1Point};
pub use subspace::{
    centralizer, classify_subalgebra, minimal_integral_lift, redundancy_test, small_integral_lift,
    small_integral_lift_line, solve_commutator_system, FpSubspace, SubalgebraKind,
};
pub use transporter::unipotent_transporter;
