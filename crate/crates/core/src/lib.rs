//! Bell non-locality measures for bipartite pure states: CHSH and CGLMP
//! violations, critical detection efficiency, KL distance to the local
//! polytope, Hardy's paradox and the PR box.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the common `f64` and `f32` instantiations.

pub mod cglmp;
pub mod chsh;
pub mod detection;
pub mod error;
pub mod hardy;
pub mod linalg;
pub mod nlb;
pub mod optim;
pub mod polytope;
pub mod quantum;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type State = quantum::BipartitePureState<f64>;
pub type Behavior = quantum::BehaviorTable<f64>;
pub type Measurement = quantum::GeneralMeasurement<f64>;
pub type Bloch = quantum::BlochMeasurement<f64>;
pub type Polytope = polytope::LocalPolytope<f64>;
pub type Settings = chsh::ChshSettings<f64>;

pub type StateF32 = quantum::BipartitePureState<f32>;
pub type BehaviorF32 = quantum::BehaviorTable<f32>;
pub type MeasurementF32 = quantum::GeneralMeasurement<f32>;
pub type BlochF32 = quantum::BlochMeasurement<f32>;
pub type PolytopeF32 = polytope::LocalPolytope<f32>;
pub type SettingsF32 = chsh::ChshSettings<f32>;
