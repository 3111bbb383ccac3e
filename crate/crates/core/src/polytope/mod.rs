//! The local polytope: deterministic vertices, LP membership, and the KL
//! distance from a behavior to the local set.

mod kl;
mod membership;
mod optimize;
mod vertices;

pub use kl::{
    kl_divergence, kl_to_local, kl_to_local_with, separation_certificate, Divergence, KlOptions, KlResult, KlSolver,
    Separation, SettingWeights,
};
pub use membership::{lp_membership, Membership};
pub use optimize::{
    convention_sweep, kl_with_convention, optimize_kl, optimize_kl_global, ConventionRow, KlOptimum, KlSearch,
    SettingConvention,
};
pub use vertices::{enumerate_vertices, vertex_count, LocalPolytope, Strategy, VERTEX_LIMIT};
