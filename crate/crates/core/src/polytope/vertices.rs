use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{BehaviorTable, Scenario};
use crate::scalar::Real;

/// Largest vertex count [`enumerate_vertices`] will build.
pub const VERTEX_LIMIT: u128 = 1_000_000;

/// A deterministic local strategy: the answer of each party to each of its
/// settings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Strategy {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

/// The local polytope of a scenario, given by its deterministic vertices in
/// lexicographic order of the strategy tuple `(a_0, .., b_0, ..)`.
#[derive(Debug, Clone)]
pub struct LocalPolytope<T> {
    scenario: Scenario,
    strategies: Vec<Strategy>,
    vertices: Vec<BehaviorTable<T>>,
}

pub fn vertex_count(scenario: Scenario) -> u128 {
    (scenario.outcomes_a as u128).pow(scenario.settings_a as u32)
        * (scenario.outcomes_b as u128).pow(scenario.settings_b as u32)
}

pub fn enumerate_vertices<T: Real>(scenario: Scenario) -> Result<LocalPolytope<T>> {
    let s = scenario;
    if s.settings_a == 0 || s.settings_b == 0 || s.outcomes_a == 0 || s.outcomes_b == 0 {
        return Err(Error::OutOfRange {
            what: "scenario size",
            value: 0.0,
            range: ">= 1",
        });
    }
    let count = vertex_count(s);
    if count > VERTEX_LIMIT {
        return Err(Error::SizeGuard {
            count,
            limit: VERTEX_LIMIT,
        });
    }
    let len = s.settings_a + s.settings_b;
    let radix: Vec<usize> = (0..len)
        .map(|i| if i < s.settings_a { s.outcomes_a } else { s.outcomes_b })
        .collect();
    let mut digits = vec![0usize; len];
    let mut strategies = Vec::with_capacity(count as usize);
    let mut vertices = Vec::with_capacity(count as usize);
    loop {
        let strategy = Strategy {
            a: digits[..s.settings_a].to_vec(),
            b: digits[s.settings_a..].to_vec(),
        };
        vertices.push(BehaviorTable::deterministic(s, &strategy.a, &strategy.b)?);
        strategies.push(strategy);
        // odometer increment, last digit fastest
        let mut i = len;
        loop {
            if i == 0 {
                return Ok(LocalPolytope {
                    scenario,
                    strategies,
                    vertices,
                });
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}

impl<T: Real> LocalPolytope<T> {
    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[BehaviorTable<T>] {
        &self.vertices
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    /// Flat cell indices where vertex `v` puts probability one, one per
    /// setting pair in `(x, y)` order.
    pub fn support(&self, v: usize) -> Vec<usize> {
        let st = &self.strategies[v];
        let s = self.scenario;
        let mut cells = Vec::with_capacity(s.setting_pairs());
        for x in 0..s.settings_a {
            for y in 0..s.settings_b {
                cells.push(s.index(x, y, st.a[x], st.b[y]));
            }
        }
        cells
    }

    /// `sum_v w_v V_v`; weights must be nonnegative.
    pub fn mixture(&self, weights: &[T]) -> Result<BehaviorTable<T>> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: weights.len(),
            });
        }
        let pairs: Vec<(T, &BehaviorTable<T>)> = weights.iter().copied().zip(&self.vertices).collect();
        BehaviorTable::mixture(&pairs)
    }
}
