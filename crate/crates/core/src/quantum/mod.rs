//! States, measurements, Born-rule behaviors and the entanglement measure.

mod behavior;
mod entropy;
mod measurement;
mod state;

pub use behavior::{behavior, correlator, theta_correlator, BehaviorRecord, BehaviorTable, Scenario};
pub use entropy::{entanglement_entropy, entropy_b, reduced_spectrum_a, reduced_spectrum_b, shannon_entropy};
pub use measurement::{cglmp_projectors, BlochMeasurement, GeneralMeasurement, Party, PhaseSetting};
pub use state::BipartitePureState;
