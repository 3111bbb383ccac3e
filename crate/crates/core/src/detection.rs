//! Clauser-Horne inequality with inefficient detectors, and the critical
//! efficiency above which a Schmidt-form qubit state violates it.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chsh::{theta_chsh, ChshSettings};
use crate::error::{Error, Result};
use crate::optim::{best_of, NelderMead, OptimizationResult};
use crate::quantum::{theta_correlator, BehaviorTable, Scenario};
use crate::scalar::Real;

/// Efficiency below which the maximally entangled qubit pair admits a
/// local model regardless of the inequality used.
pub const LOCAL_MODEL_THRESHOLD: f64 = 0.75;

/// CHSH values at or below `2 + NO_VIOLATION_MARGIN` count as no violation.
pub const NO_VIOLATION_MARGIN: f64 = 1e-9;

/// Measurement of `cos(t)|00> + sin(t)|11>` with detectors that fire with
/// probability `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionModel<T> {
    pub eta: T,
    pub theta: T,
    pub settings: ChshSettings<T>,
}

impl<T: Real> DetectionModel<T> {
    pub fn new(eta: T, theta: T, settings: ChshSettings<T>) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::OutOfRange {
                what: "eta",
                value: eta.as_f64(),
                range: "[0, 1]",
            });
        }
        Ok(Self { eta, theta, settings })
    }
}

/// Probabilities of `+` clicks: singles `Pr_Ai[+]`, `Pr_Bj[+]` and
/// coincidences `Pr_AiBj[++]` (index 0 is setting 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionProbabilities<T> {
    pub a_plus: [T; 2],
    pub b_plus: [T; 2],
    pub joint_plus: [[T; 2]; 2],
}

impl<T: Real> DetectionProbabilities<T> {
    fn entries(&self) -> impl Iterator<Item = T> + '_ {
        self.a_plus
            .iter()
            .chain(&self.b_plus)
            .chain(self.joint_plus.iter().flatten())
            .copied()
    }

    /// Reads the `+` (index 0) events off a binary-outcome behavior.
    pub fn from_behavior(b: &BehaviorTable<T>) -> Result<Self> {
        b.scenario().require(Scenario::CHSH)?;
        Ok(Self {
            a_plus: [b.marginal_a(0, 0, 0), b.marginal_a(1, 0, 0)],
            b_plus: [b.marginal_b(0, 0, 0), b.marginal_b(0, 1, 0)],
            joint_plus: [
                [b.prob(0, 0, 0, 0), b.prob(0, 1, 0, 0)],
                [b.prob(1, 0, 0, 0), b.prob(1, 1, 0, 0)],
            ],
        })
    }
}

/// Left-hand side of the Clauser-Horne inequality
/// `P11 + P12 + P21 - P22 - P_A1 - P_B1 <= 0`.
pub fn ch_value<T: Real>(p: &DetectionProbabilities<T>) -> Result<T> {
    if let Some(bad) = p.entries().find(|v| !(*v >= T::zero() && *v <= T::one())) {
        return Err(Error::InvalidProbability { value: bad.as_f64() });
    }
    let j = &p.joint_plus;
    Ok(j[0][0] + j[0][1] + j[1][0] - j[1][1] - p.a_plus[0] - p.b_plus[0])
}

/// Click probabilities: singles scale with `eta`, coincidences with `eta^2`.
pub fn detection_probabilities<T: Real>(m: &DetectionModel<T>) -> DetectionProbabilities<T> {
    let c = (T::lit(2.0) * m.theta).cos();
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let s = &m.settings;
    let az = [s.a1.direction()[2], s.a2.direction()[2]];
    let bz = [s.b1.direction()[2], s.b2.direction()[2]];
    let a = [s.a1, s.a2];
    let b = [s.b1, s.b2];
    let mut joint = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let e = theta_correlator(m.theta, &a[i], &b[j]);
            joint[i][j] = m.eta * m.eta * quarter * (T::one() + c * (az[i] + bz[j]) + e);
        }
    }
    DetectionProbabilities {
        a_plus: [m.eta * half * (T::one() + c * az[0]), m.eta * half * (T::one() + c * az[1])],
        b_plus: [m.eta * half * (T::one() + c * bz[0]), m.eta * half * (T::one() + c * bz[1])],
        joint_plus: joint,
    }
}

/// `[4 + 2c(a1z + b1z)] / [2 + 2c(a1z + b1z) + CHSH]` with `c = cos(2 theta)`.
///
/// Fails with [`Error::NoViolation`] when the settings do not violate CHSH.
pub fn critical_efficiency_at<T: Real>(theta: T, settings: &ChshSettings<T>) -> Result<T> {
    let chsh = theta_chsh(theta, settings);
    if chsh <= T::lit(2.0) + T::lit(NO_VIOLATION_MARGIN) {
        return Err(Error::NoViolation { chsh: chsh.as_f64() });
    }
    Ok(efficiency_ratio(theta, settings, chsh))
}

fn efficiency_ratio<T: Real>(theta: T, settings: &ChshSettings<T>, chsh: T) -> T {
    let c = (T::lit(2.0) * theta).cos();
    let s = settings.a1.direction()[2] + settings.b1.direction()[2];
    let two = T::lit(2.0);
    (T::lit(4.0) + two * c * s) / (two + two * c * s + chsh)
}

/// Critical efficiency of the CHSH-maximizing settings at `theta`.
pub fn chsh_optimal_critical_efficiency<T: Real>(theta: T) -> Result<T> {
    critical_efficiency_at(theta, &ChshSettings::optimal_for(theta))
}

/// `true` when the efficiency lies in the window where the maximally
/// entangled state is simulable by a local model but `eta_c` is still met.
pub fn in_anomaly_regime<T: Real>(eta_c: T) -> bool {
    eta_c <= T::lit(LOCAL_MODEL_THRESHOLD)
}

/// Continuous surrogate: `eta_c` where CHSH is violated, and `1 + deficit`
/// where it is not (the ratio tends to 1 as CHSH tends to 2).
fn efficiency_objective<T: Real>(theta: T, p: &[T]) -> T {
    let s = ChshSettings::from_angles(p);
    let chsh = theta_chsh(theta, &s);
    if chsh <= T::lit(2.0) + T::lit(NO_VIOLATION_MARGIN) {
        return T::one() + (T::lit(2.0) - chsh).max(T::zero());
    }
    efficiency_ratio(theta, &s, chsh)
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyOptimum<T> {
    pub eta_c: T,
    pub settings: ChshSettings<T>,
    /// CHSH value of the minimizing settings.
    pub chsh: T,
    pub result: OptimizationResult<T>,
}

/// Number of multi-start points used by [`optimize_critical_efficiency`].
pub const EFFICIENCY_STARTS: usize = 32;

fn efficiency_starts<T: Real>(theta: T, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = std::f64::consts::PI;
    let mut starts = vec![ChshSettings::optimal_for(theta).to_angles()];
    // near +-z: small theta favors settings hugging the Schmidt axis
    for k in 0..15 {
        let p: Vec<T> = (0..4)
            .flat_map(|i| {
                let flip = (k >> i) & 1 == 1;
                let polar: f64 = rng.random_range(0.05..0.6);
                let polar = if flip { pi - polar } else { polar };
                let az: f64 = rng.random_range(-pi..pi);
                [T::lit(polar), T::lit(az)]
            })
            .collect();
        starts.push(p);
    }
    while starts.len() < EFFICIENCY_STARTS {
        let p: Vec<T> = (0..4)
            .flat_map(|_| {
                let polar: f64 = rng.random_range(0.0..pi);
                let az: f64 = rng.random_range(-pi..pi);
                [T::lit(polar), T::lit(az)]
            })
            .collect();
        starts.push(p);
    }
    starts
}

/// Minimizes the critical efficiency over all four Bloch directions.
pub fn optimize_critical_efficiency<T: Real>(theta: T, seed: u64) -> Result<EfficiencyOptimum<T>> {
    if !(theta > T::zero() && theta <= T::FRAC_PI_4() + T::tol(1e-15)) {
        return Err(Error::OutOfRange {
            what: "theta",
            value: theta.as_f64(),
            range: "(0, pi/4]",
        });
    }
    let nm = NelderMead::default().with_step(T::lit(0.2));
    let starts = efficiency_starts(theta, seed);
    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| nm.minimize_restarted(|p| efficiency_objective(theta, p), x0, 8, T::lit(1e-14)))
        .collect();
    let iterations = runs.iter().map(|r| r.iterations).sum();
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let (best_start, best) = best_of(runs, |r| -r.value);
    let settings = ChshSettings::from_angles(&best.x);
    let eta_c = critical_efficiency_at(theta, &settings)?;
    Ok(EfficiencyOptimum {
        eta_c,
        chsh: theta_chsh(theta, &settings),
        settings,
        result: OptimizationResult {
            value: eta_c,
            params: best.x,
            iterations,
            evaluations,
            gap: None,
            seed: Some(seed),
            best_start,
            starts: starts.len(),
        },
    })
}

/// All CH-type expressions obtained by relabeling settings and outcomes of
/// a binary two-setting behavior; returns the largest value.
pub fn max_ch_over_relabelings<T: Real>(b: &BehaviorTable<T>) -> Result<T> {
    b.scenario().require(Scenario::CHSH)?;
    let mut best = T::neg_infinity();
    for swap_x in 0..2 {
        for swap_y in 0..2 {
            for flips in 0..16u32 {
                // flips bit (party*2 + setting) flips that setting's outcome
                let fa = |x: usize| ((flips >> x) & 1) as usize;
                let fb = |y: usize| ((flips >> (2 + y)) & 1) as usize;
                let xs = [swap_x, 1 - swap_x];
                let ys = [swap_y, 1 - swap_y];
                let plus = |i: usize, j: usize| b.prob(xs[i], ys[j], fa(xs[i]), fb(ys[j]));
                let a1 = b.marginal_a(xs[0], 0, fa(xs[0]));
                let b1 = b.marginal_b(0, ys[0], fb(ys[0]));
                let v = plus(0, 0) + plus(0, 1) + plus(1, 0) - plus(1, 1) - a1 - b1;
                best = best.max(v);
            }
        }
    }
    Ok(best)
}
