//! Derivative-free optimizers and the common result record.

mod golden;
mod nelder_mead;

use serde::Serialize;

pub use golden::golden_section_max;
pub use nelder_mead::{Minimum, NelderMead};

use crate::scalar::Real;

/// Outcome of one of the crate's searches: the objective value reached,
/// the parameters that reached it, and solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult<T> {
    pub value: T,
    pub params: Vec<T>,
    pub iterations: usize,
    pub evaluations: usize,
    /// Optimality gap where the solver provides one.
    pub gap: Option<T>,
    pub seed: Option<u64>,
    /// Index of the winning start in a multi-start run.
    pub best_start: usize,
    pub starts: usize,
}

/// Picks the best of a set of multi-start outcomes: largest `key` wins,
/// exact ties go to the lowest start index.
pub(crate) fn best_of<T: Real, R>(runs: Vec<R>, key: impl Fn(&R) -> T) -> (usize, R) {
    let mut best: Option<(usize, R)> = None;
    for (i, r) in runs.into_iter().enumerate() {
        match &best {
            Some((_, b)) if !(key(&r) > key(b)) => {}
            _ => best = Some((i, r)),
        }
    }
    best.expect("at least one start")
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    let mut y = x % two_pi;
    if y <= -T::PI() {
        y += two_pi;
    } else if y > T::PI() {
        y -= two_pi;
    }
    y
}
