//! CHSH expression, its local bound, and the search for optimal qubit
//! settings on `cos(t)|00> + sin(t)|11>`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::{best_of, NelderMead, OptimizationResult};
use crate::quantum::{behavior, theta_correlator, BipartitePureState, BlochMeasurement};
use crate::scalar::Real;

/// Measurement directions `a1, a2` for party A and `b1, b2` for party B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSettings<T> {
    pub a1: BlochMeasurement<T>,
    pub a2: BlochMeasurement<T>,
    pub b1: BlochMeasurement<T>,
    pub b2: BlochMeasurement<T>,
}

impl<T: Real> ChshSettings<T> {
    /// The CHSH-maximizing settings for the Schmidt angle `theta`:
    /// `a1 = z`, `a2 = x`, `b1,2 = cos(mu) z +- sin(mu) x` with
    /// `tan(mu) = sin(2 theta)`.
    pub fn optimal_for(theta: T) -> Self {
        let mu = (T::lit(2.0) * theta).sin().atan();
        Self {
            a1: BlochMeasurement::z(),
            a2: BlochMeasurement::x(),
            b1: BlochMeasurement::from_angles(mu, T::zero()),
            b2: BlochMeasurement::from_angles(mu, T::PI()),
        }
    }

    /// Eight spherical angles `(polar, azimuth)` for `a1, a2, b1, b2`.
    pub fn from_angles(p: &[T]) -> Self {
        assert_eq!(p.len(), 8, "four directions need eight angles");
        Self {
            a1: BlochMeasurement::from_angles(p[0], p[1]),
            a2: BlochMeasurement::from_angles(p[2], p[3]),
            b1: BlochMeasurement::from_angles(p[4], p[5]),
            b2: BlochMeasurement::from_angles(p[6], p[7]),
        }
    }

    pub fn to_angles(&self) -> Vec<T> {
        [self.a1, self.a2, self.b1, self.b2]
            .iter()
            .flat_map(|m| {
                let (p, a) = m.angles();
                [p, a]
            })
            .collect()
    }

    pub fn directions(&self) -> [[T; 3]; 4] {
        [
            self.a1.direction(),
            self.a2.direction(),
            self.b1.direction(),
            self.b2.direction(),
        ]
    }

    /// Largest componentwise difference between two setting quadruples.
    pub fn max_component_difference(&self, other: &Self) -> T {
        self.directions()
            .iter()
            .zip(other.directions().iter())
            .flat_map(|(u, v)| u.iter().zip(v.iter()).map(|(a, b)| (*a - *b).abs()))
            .fold(T::zero(), T::max)
    }
}

/// `E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2)` at Schmidt angle `theta`.
pub fn theta_chsh<T: Real>(theta: T, s: &ChshSettings<T>) -> T {
    theta_correlator(theta, &s.a1, &s.b1) + theta_correlator(theta, &s.a1, &s.b2)
        + theta_correlator(theta, &s.a2, &s.b1)
        - theta_correlator(theta, &s.a2, &s.b2)
}

/// CHSH value of a two-qubit state. Schmidt-form states use the closed
/// correlator; any other two-qubit state goes through the Born rule.
pub fn chsh_value<T: Real>(state: &BipartitePureState<T>, s: &ChshSettings<T>) -> Result<T> {
    if state.dim_a() != 2 || state.dim_b() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: state.dim_a() * state.dim_b(),
        });
    }
    match state.theta_parameter() {
        Ok(theta) => Ok(theta_chsh(theta, s)),
        Err(Error::NotThetaState) => {
            let table = behavior(
                state,
                &[s.a1.measurement(), s.a2.measurement()],
                &[s.b1.measurement(), s.b2.measurement()],
            )?;
            Ok(table.correlator(0, 0)? + table.correlator(0, 1)? + table.correlator(1, 0)?
                - table.correlator(1, 1)?)
        }
        Err(e) => Err(e),
    }
}

/// `a1 b1 + a1 b2 + a2 b1 - a2 b2` for outcomes in `{-1, +1}`.
pub fn deterministic_chsh(a1: i8, a2: i8, b1: i8, b2: i8) -> i8 {
    a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2
}

/// The 16 deterministic assignments `(a1, a2, b1, b2)` with their CHSH value.
pub fn deterministic_assignments() -> Vec<([i8; 4], i8)> {
    (0..16u8)
        .map(|m| {
            let s = |bit: u8| if m >> bit & 1 == 0 { 1i8 } else { -1 };
            let v = [s(3), s(2), s(1), s(0)];
            (v, deterministic_chsh(v[0], v[1], v[2], v[3]))
        })
        .collect()
}

/// Local bound of CHSH, certified by evaluating all 16 assignments.
pub fn chsh_local_bound() -> i8 {
    deterministic_assignments()
        .into_iter()
        .map(|(_, v)| v)
        .max()
        .expect("16 assignments")
}

/// `2 sqrt(1 + sin^2(2 theta))`, the proven optimum over all settings.
pub fn analytic_max_chsh<T: Real>(theta: T) -> T {
    let s = (T::lit(2.0) * theta).sin();
    T::lit(2.0) * (T::one() + s * s).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshOptimum<T> {
    pub settings: ChshSettings<T>,
    pub result: OptimizationResult<T>,
}

/// Start points: 16 near-deterministic corners (each direction close to
/// `+z` or `-z`), then the known planar optimum.
fn chsh_starts<T: Real>(theta: T) -> Vec<Vec<T>> {
    let mut starts: Vec<Vec<T>> = (0..16u32)
        .map(|mask| {
            (0..4)
                .flat_map(|i| {
                    let polar = if mask >> i & 1 == 0 { 0.4 } else { std::f64::consts::PI - 0.4 };
                    let azimuth = 0.3 + 0.7 * i as f64 + 0.1 * mask as f64;
                    [T::lit(polar), T::lit(azimuth)]
                })
                .collect()
        })
        .collect();
    starts.push(ChshSettings::optimal_for(theta).to_angles());
    starts
}

/// Maximizes CHSH over all four Bloch directions for the Schmidt angle
/// `theta`, with general 8-parameter multi-start Nelder-Mead.
pub fn optimize_chsh<T: Real>(theta: T) -> Result<ChshOptimum<T>> {
    if !(theta >= T::zero() && theta <= T::FRAC_PI_4() + T::tol(1e-15)) {
        return Err(Error::OutOfRange {
            what: "theta",
            value: theta.as_f64(),
            range: "[0, pi/4]",
        });
    }
    let nm = NelderMead::default().with_step(T::lit(0.3));
    let starts = chsh_starts(theta);
    let n_starts = starts.len();
    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| {
            nm.minimize_restarted(
                |p| -theta_chsh(theta, &ChshSettings::from_angles(p)),
                x0,
                4,
                T::lit(1e-13),
            )
        })
        .collect();
    let iterations = runs.iter().map(|r| r.iterations).sum();
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let (best_start, best) = best_of(runs, |r| -r.value);
    let settings = ChshSettings::from_angles(&best.x);
    Ok(ChshOptimum {
        result: OptimizationResult {
            value: theta_chsh(theta, &settings),
            params: best.x,
            iterations,
            evaluations,
            gap: None,
            seed: None,
            best_start,
            starts: n_starts,
        },
        settings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, SQRT_2};

    #[test]
    fn standard_settings_reach_tsirelson() {
        let s = BipartitePureState::<f64>::theta(FRAC_PI_4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let settings = ChshSettings {
            a1: BlochMeasurement::z(),
            a2: BlochMeasurement::x(),
            b1: BlochMeasurement::new([h, 0.0, h]).unwrap(),
            b2: BlochMeasurement::new([-h, 0.0, h]).unwrap(),
        };
        assert!((chsh_value(&s, &settings).unwrap() - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn product_state_is_z_only() {
        let s = BipartitePureState::<f64>::theta(0.0).unwrap();
        let settings = ChshSettings::from_angles(&[0.3, 1.0, 2.0, 0.1, 1.1, 0.5, 2.9, 4.0]);
        let z = |m: BlochMeasurement<f64>| m.direction()[2];
        let expected = z(settings.a1) * z(settings.b1) + z(settings.a1) * z(settings.b2)
            + z(settings.a2) * z(settings.b1)
            - z(settings.a2) * z(settings.b2);
        let v = chsh_value(&s, &settings).unwrap();
        assert!((v - expected).abs() < 1e-14);
        assert!(v.abs() <= 2.0);
    }

    #[test]
    fn optimal_family_at_pi_8() {
        let s = BipartitePureState::<f64>::theta(FRAC_PI_8).unwrap();
        let v = chsh_value(&s, &ChshSettings::optimal_for(FRAC_PI_8)).unwrap();
        let expected = 2.0 * (1.0 + (FRAC_PI_4).sin().powi(2)).sqrt();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 2.4495).abs() < 1e-4);
    }

    #[test]
    fn local_bound_by_enumeration() {
        let all = deterministic_assignments();
        assert_eq!(all.len(), 16);
        assert_eq!(chsh_local_bound(), 2);
        assert_eq!(all.iter().map(|(_, v)| *v).min(), Some(-2));
        assert_eq!(deterministic_chsh(1, 1, 1, 1), 2);
    }

    #[test]
    fn optimizer_matches_closed_form() {
        for theta in [0.0, 0.3, FRAC_PI_4] {
            let opt = optimize_chsh(theta).unwrap();
            let analytic = analytic_max_chsh(theta);
            assert!((opt.result.value - analytic).abs() < 1e-6, "theta {theta}");
            assert!(opt.result.value <= analytic + 1e-9);
            let s = BipartitePureState::theta(theta).unwrap();
            assert!((chsh_value(&s, &opt.settings).unwrap() - opt.result.value).abs() < 1e-12);
        }
        assert!((analytic_max_chsh(0.3f64) - 2.296799).abs() < 1e-5);
    }

    #[test]
    fn non_schmidt_state_uses_born_rule() {
        let h = BipartitePureState::<f64>::hardy();
        let v = chsh_value(&h, &ChshSettings::optimal_for(0.5)).unwrap();
        assert!(v.abs() <= 2.0 * SQRT_2 + 1e-12);
        let q = BipartitePureState::<f64>::maximally_entangled(3).unwrap();
        assert!(chsh_value(&q, &ChshSettings::optimal_for(0.5)).is_err());
    }
}
