use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::quantum::{BipartitePureState, BlochMeasurement, GeneralMeasurement};
use crate::scalar::Real;

/// Numbers of settings and outcomes per party of a bipartite Bell scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub settings_a: usize,
    pub settings_b: usize,
    pub outcomes_a: usize,
    pub outcomes_b: usize,
}

impl Scenario {
    pub const fn new(settings_a: usize, settings_b: usize, outcomes_a: usize, outcomes_b: usize) -> Self {
        Self {
            settings_a,
            settings_b,
            outcomes_a,
            outcomes_b,
        }
    }

    /// Two binary settings per party.
    pub const CHSH: Self = Self::new(2, 2, 2, 2);
    /// Two ternary settings per party.
    pub const CGLMP: Self = Self::new(2, 2, 3, 3);

    pub fn cells(&self) -> usize {
        self.settings_a * self.settings_b * self.outcomes_a * self.outcomes_b
    }

    pub fn setting_pairs(&self) -> usize {
        self.settings_a * self.settings_b
    }

    pub fn outcome_pairs(&self) -> usize {
        self.outcomes_a * self.outcomes_b
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.settings_b + y) * self.outcomes_a + a) * self.outcomes_b + b
    }

    pub(crate) fn require(&self, expected: Scenario) -> Result<()> {
        if *self != expected {
            return Err(Error::ShapeMismatch {
                expected: expected.to_string(),
                found: self.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.settings_a, self.settings_b, self.outcomes_a, self.outcomes_b
        )
    }
}

/// Conditional distribution `P(a, b | x, y)`.
///
/// Entries are stored flat in `(x, y, a, b)` order (see [`Scenario::index`]).
/// Every table is nonnegative and normalized per setting pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorTable<T> {
    scenario: Scenario,
    probs: Vec<T>,
}

impl<T: Real> BehaviorTable<T> {
    /// Validates and stores a table. Entries down to `-1e-12` are clamped to
    /// zero; each `(x, y)` block must sum to one within `1e-10`.
    pub fn new(scenario: Scenario, mut probs: Vec<T>) -> Result<Self> {
        if probs.len() != scenario.cells() {
            return Err(Error::DimensionMismatch {
                expected: scenario.cells(),
                found: probs.len(),
            });
        }
        let neg = -T::tol(1e-12);
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < neg {
                return Err(Error::InvalidBehavior(format!("entry {p} is negative or not finite")));
            }
            if *p < T::zero() {
                *p = T::zero();
            }
            if *p > T::one() + T::tol(1e-10) {
                return Err(Error::InvalidBehavior(format!("entry {p} exceeds 1")));
            }
        }
        let block = scenario.outcome_pairs();
        for (i, chunk) in probs.chunks(block).enumerate() {
            let s: T = chunk.iter().copied().sum();
            if (s - T::one()).abs() > T::tol(1e-10) {
                return Err(Error::InvalidBehavior(format!(
                    "setting pair {i} sums to {s}, not 1"
                )));
            }
        }
        Ok(Self { scenario, probs })
    }

    /// The uniform table `P = 1 / (o_A o_B)`.
    pub fn uniform(scenario: Scenario) -> Self {
        let p = T::one() / T::from_usize(scenario.outcome_pairs()).unwrap();
        Self {
            scenario,
            probs: vec![p; scenario.cells()],
        }
    }

    /// The deterministic table in which party A answers `strategy_a[x]` and
    /// party B answers `strategy_b[y]`.
    pub fn deterministic(scenario: Scenario, strategy_a: &[usize], strategy_b: &[usize]) -> Result<Self> {
        if strategy_a.len() != scenario.settings_a || strategy_b.len() != scenario.settings_b {
            return Err(Error::ShapeMismatch {
                expected: scenario.to_string(),
                found: format!("strategy lengths ({}, {})", strategy_a.len(), strategy_b.len()),
            });
        }
        if strategy_a.iter().any(|&a| a >= scenario.outcomes_a)
            || strategy_b.iter().any(|&b| b >= scenario.outcomes_b)
        {
            return Err(Error::InvalidBehavior("strategy outcome out of range".into()));
        }
        let mut probs = vec![T::zero(); scenario.cells()];
        for (x, &a) in strategy_a.iter().enumerate() {
            for (y, &b) in strategy_b.iter().enumerate() {
                probs[scenario.index(x, y, a, b)] = T::one();
            }
        }
        Ok(Self { scenario, probs })
    }

    /// Convex combination `sum_i w_i T_i`. Weights are renormalized.
    pub fn mixture(tables: &[(T, &BehaviorTable<T>)]) -> Result<Self> {
        let first = tables
            .first()
            .ok_or_else(|| Error::InvalidBehavior("empty mixture".into()))?;
        let scenario = first.1.scenario;
        let total: T = tables.iter().map(|(w, _)| *w).sum();
        if !(total > T::zero()) || tables.iter().any(|(w, _)| *w < T::zero()) {
            return Err(Error::InvalidBehavior("mixture weights must be nonnegative".into()));
        }
        let mut probs = vec![T::zero(); scenario.cells()];
        for (w, t) in tables {
            t.scenario.require(scenario)?;
            for (p, q) in probs.iter_mut().zip(&t.probs) {
                *p += *w / total * *q;
            }
        }
        Self::new(scenario, probs)
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize, a: usize, b: usize) -> T {
        self.probs[self.scenario.index(x, y, a, b)]
    }

    /// `P_A(a | x)` computed with B measuring `y`.
    pub fn marginal_a(&self, x: usize, y: usize, a: usize) -> T {
        (0..self.scenario.outcomes_b).map(|b| self.prob(x, y, a, b)).sum()
    }

    /// `P_B(b | y)` computed with A measuring `x`.
    pub fn marginal_b(&self, x: usize, y: usize, b: usize) -> T {
        (0..self.scenario.outcomes_a).map(|a| self.prob(x, y, a, b)).sum()
    }

    /// Largest change of a marginal when the remote setting changes.
    pub fn signaling_defect(&self) -> T {
        let s = self.scenario;
        let mut worst = T::zero();
        for x in 0..s.settings_a {
            for a in 0..s.outcomes_a {
                let m0 = self.marginal_a(x, 0, a);
                for y in 1..s.settings_b {
                    worst = worst.max((self.marginal_a(x, y, a) - m0).abs());
                }
            }
        }
        for y in 0..s.settings_b {
            for b in 0..s.outcomes_b {
                let m0 = self.marginal_b(0, y, b);
                for x in 1..s.settings_a {
                    worst = worst.max((self.marginal_b(x, y, b) - m0).abs());
                }
            }
        }
        worst
    }

    pub fn is_nonsignaling(&self, tol: T) -> bool {
        self.signaling_defect() <= tol
    }

    /// `E(x, y) = sum_ab (-1)^(a+b) P(a, b | x, y)` for binary outcomes,
    /// with index 0 standing for `+1`.
    pub fn correlator(&self, x: usize, y: usize) -> Result<T> {
        if self.scenario.outcomes_a != 2 || self.scenario.outcomes_b != 2 {
            return Err(Error::ShapeMismatch {
                expected: "binary outcomes".into(),
                found: self.scenario.to_string(),
            });
        }
        Ok(self.prob(x, y, 0, 0) + self.prob(x, y, 1, 1) - self.prob(x, y, 0, 1) - self.prob(x, y, 1, 0))
    }

    /// Nested `[x][y][a][b]` copy of the table.
    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<T>>>> {
        let s = self.scenario;
        (0..s.settings_a)
            .map(|x| {
                (0..s.settings_b)
                    .map(|y| {
                        (0..s.outcomes_a)
                            .map(|a| (0..s.outcomes_b).map(|b| self.prob(x, y, a, b)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Serialized form of a [`BehaviorTable`]: the scenario and the nested
/// `probs[x][y][a][b]` array.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviorRecord<T> {
    pub scenario: Scenario,
    pub probs: Vec<Vec<Vec<Vec<T>>>>,
}

impl<T: Real> From<&BehaviorTable<T>> for BehaviorRecord<T> {
    fn from(t: &BehaviorTable<T>) -> Self {
        Self {
            scenario: t.scenario,
            probs: t.to_nested(),
        }
    }
}

impl<T: Real> TryFrom<BehaviorRecord<T>> for BehaviorTable<T> {
    type Error = Error;

    fn try_from(r: BehaviorRecord<T>) -> Result<Self> {
        let flat: Vec<T> = r.probs.into_iter().flatten().flatten().flatten().collect();
        BehaviorTable::new(r.scenario, flat)
    }
}

impl<T: Real + Serialize> Serialize for BehaviorTable<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        BehaviorRecord::from(self).serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for BehaviorTable<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let record = BehaviorRecord::<T>::deserialize(deserializer)?;
        BehaviorTable::try_from(record).map_err(serde::de::Error::custom)
    }
}

/// Born-rule behavior `P(a, b | x, y) = |(<v_a^x| (x) <w_b^y|) |psi>|^2`.
pub fn behavior<T: Real>(
    state: &BipartitePureState<T>,
    settings_a: &[GeneralMeasurement<T>],
    settings_b: &[GeneralMeasurement<T>],
) -> Result<BehaviorTable<T>> {
    let (da, db) = (state.dim_a(), state.dim_b());
    for m in settings_a {
        check_measurement(m, da)?;
    }
    for m in settings_b {
        check_measurement(m, db)?;
    }
    let scenario = Scenario::new(settings_a.len(), settings_b.len(), da, db);
    let mut probs = vec![T::zero(); scenario.cells()];
    // <v|(x)<w|psi> = sum_jk conj(v_j) conj(w_k) c_jk; contract B first
    let mut partial = vec![Complex::new(T::zero(), T::zero()); da];
    for (y, mb) in settings_b.iter().enumerate() {
        for b in 0..db {
            let w = mb.vector(b);
            for (j, slot) in partial.iter_mut().enumerate() {
                *slot = (0..db)
                    .map(|k| w[k].conj() * state.amplitude(j, k))
                    .fold(Complex::new(T::zero(), T::zero()), |s, z| s + z);
            }
            for (x, ma) in settings_a.iter().enumerate() {
                for a in 0..da {
                    let amp = linalg::inner(ma.vector(a), &partial);
                    probs[scenario.index(x, y, a, b)] = amp.norm_sqr();
                }
            }
        }
    }
    BehaviorTable::new(scenario, probs)
}

fn check_measurement<T: Real>(m: &GeneralMeasurement<T>, dim: usize) -> Result<()> {
    if m.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.dim(),
        });
    }
    let defect = linalg::orthonormality_defect(m.vectors());
    if defect > T::tol(1e-12) {
        return Err(Error::NotOrthonormal {
            deviation: defect.as_f64(),
        });
    }
    Ok(())
}

/// `E(a, b) = <psi| (a . sigma) (x) (b . sigma) |psi>` for a state of the
/// form `cos(t)|00> + sin(t)|11>`, via `a_z b_z + sin(2t)(a_x b_x - a_y b_y)`.
pub fn correlator<T: Real>(
    state: &BipartitePureState<T>,
    a: &BlochMeasurement<T>,
    b: &BlochMeasurement<T>,
) -> Result<T> {
    let theta = state.theta_parameter()?;
    Ok(theta_correlator(theta, a, b))
}

/// The closed-form correlator at a given Schmidt angle.
pub fn theta_correlator<T: Real>(theta: T, a: &BlochMeasurement<T>, b: &BlochMeasurement<T>) -> T {
    let [ax, ay, az] = a.direction();
    let [bx, by, bz] = b.direction();
    az * bz + (T::lit(2.0) * theta).sin() * (ax * bx - ay * by)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_in_computational_basis() {
        let s = BipartitePureState::<f64>::basis(2, 2, 0, 0).unwrap();
        let z = vec![GeneralMeasurement::computational(2), GeneralMeasurement::computational(2)];
        let t = behavior(&s, &z, &z).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(t.prob(x, y, 0, 0), 1.0);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let s = BipartitePureState::<f64>::theta(0.2).unwrap();
        let q = vec![GeneralMeasurement::computational(3)];
        assert!(matches!(
            behavior(&s, &q, &q),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn table_validation() {
        let s = Scenario::new(1, 1, 2, 2);
        assert!(BehaviorTable::<f64>::new(s, vec![0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(BehaviorTable::<f64>::new(s, vec![0.5, 0.5, -0.1, 0.1]).is_err());
        let t = BehaviorTable::<f64>::new(s, vec![0.5, 0.5 + 1e-13, -1e-13, 0.0]).unwrap();
        assert_eq!(t.prob(0, 0, 1, 0), 0.0);
    }

    #[test]
    fn correlator_requires_theta_form() {
        let h = BipartitePureState::<f64>::hardy();
        let z = BlochMeasurement::z();
        assert_eq!(correlator(&h, &z, &z), Err(Error::NotThetaState));
    }

    #[test]
    fn json_round_trip_validates() {
        let t = BehaviorTable::<f64>::uniform(Scenario::CHSH);
        let json = serde_json::to_string(&t).unwrap();
        let back: BehaviorTable<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        let bad = json.replace("0.25", "0.5");
        assert!(serde_json::from_str::<BehaviorTable<f64>>(&bad).is_err());
    }
}
