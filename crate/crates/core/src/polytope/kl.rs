//! Kullback-Leibler divergence between behaviors and its minimization over
//! the local polytope.
//!
//! With setting weights `w(x, y)`, a behavior becomes the joint distribution
//! `p(z) = w(x, y) P(a, b | x, y)` over `z = (x, y, a, b)`. The distance to the
//! local set is `min_mu KL(p || q(mu))` with `q = w * sum_v mu_v V_v` a mixture
//! of deterministic vertices. Writing `G_v = sum_z w p(z) V_v(z) / q(z)`, the
//! gradient is `-G` and `sum_v mu_v G_v = 1`, so `max_v G_v - 1` is the
//! Frank-Wolfe gap and bounds the suboptimality (in nats).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polytope::{enumerate_vertices, LocalPolytope};
use crate::quantum::{BehaviorTable, Scenario};
use crate::scalar::Real;

/// Probability of each setting pair `(x, y)`, in `x * settings_b + y` order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingWeights<T>(Vec<T>);

impl<T: Real> SettingWeights<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= T::zero())) {
            return Err(Error::InvalidProbability {
                value: weights.iter().fold(T::zero(), |a, w| a.min(*w)).as_f64(),
            });
        }
        let s: T = weights.iter().copied().sum();
        if (s - T::one()).abs() > T::tol(1e-10) {
            return Err(Error::InvalidBehavior(format!("setting weights sum to {s}")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let n = scenario.setting_pairs();
        Self(vec![T::one() / T::from_usize(n).unwrap(); n])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    fn check(&self, scenario: Scenario) -> Result<()> {
        if self.0.len() != scenario.setting_pairs() {
            return Err(Error::DimensionMismatch {
                expected: scenario.setting_pairs(),
                found: self.0.len(),
            });
        }
        Ok(())
    }

    /// Weight of the setting pair owning flat cell `z`.
    fn of_cell(&self, scenario: Scenario, z: usize) -> T {
        self.0[z / scenario.outcome_pairs()]
    }
}

/// A divergence value that may be infinite when the first argument puts
/// mass where the second has none.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Divergence<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Divergence<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Divergence::Finite(v) => Some(v),
            Divergence::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Divergence::Infinite)
    }
}

/// `sum_xy w(x,y) sum_ab P log2(P / Q)` with `0 log 0 = 0`.
pub fn kl_divergence<T: Real>(
    p: &BehaviorTable<T>,
    q: &BehaviorTable<T>,
    weights: &SettingWeights<T>,
) -> Result<Divergence<T>> {
    let s = p.scenario();
    q.scenario().require(s)?;
    weights.check(s)?;
    let mut total = T::zero();
    for (z, (&pz, &qz)) in p.probs().iter().zip(q.probs()).enumerate() {
        if pz <= T::zero() {
            continue;
        }
        if qz <= T::zero() {
            return Ok(Divergence::Infinite);
        }
        total += weights.of_cell(s, z) * pz * (pz / qz).log2();
    }
    Ok(Divergence::Finite(total))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KlSolver {
    /// Pairwise conditional gradient with exact line search.
    ConditionalGradient,
    /// Multiplicative-weights (expectation-maximization) updates.
    MultiplicativeWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlOptions<T> {
    pub solver: KlSolver,
    /// Stop when the Frank-Wolfe gap, in bits, falls below this.
    pub gap_tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for KlOptions<T> {
    fn default() -> Self {
        Self {
            solver: KlSolver::ConditionalGradient,
            gap_tol: T::lit(1e-9),
            max_iter: 100_000,
        }
    }
}

impl<T: Real> KlOptions<T> {
    pub fn with_solver(mut self, solver: KlSolver) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_gap(mut self, gap_tol: T) -> Self {
        self.gap_tol = gap_tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

/// Minimum KL divergence to the local polytope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlResult<T> {
    /// Distance in bits.
    pub distance: T,
    /// Mixture weights over the polytope vertices.
    pub weights: Vec<T>,
    /// Frank-Wolfe gap at the returned point, in bits.
    pub gap: T,
    pub iterations: usize,
    /// False when the iteration cap was hit first; the other fields then
    /// hold the best point reached.
    pub converged: bool,
    pub solver: KlSolver,
}

impl<T: Real> KlResult<T> {
    pub fn closest_local(&self, polytope: &LocalPolytope<T>) -> Result<BehaviorTable<T>> {
        polytope.mixture(&self.weights)
    }
}

/// Flattened problem data shared by both solvers.
struct Problem<T> {
    /// `w(x,y) P(a,b|x,y)` per cell.
    p: Vec<T>,
    /// `w(x,y)` per cell.
    w: Vec<T>,
    supports: Vec<Vec<usize>>,
}

impl<T: Real> Problem<T> {
    fn new(table: &BehaviorTable<T>, polytope: &LocalPolytope<T>, weights: &SettingWeights<T>) -> Result<Self> {
        let s = table.scenario();
        polytope.scenario().require(s)?;
        weights.check(s)?;
        let w: Vec<T> = (0..s.cells()).map(|z| weights.of_cell(s, z)).collect();
        // roundoff-level entries of a Born-rule table are exact zeros
        let floor = T::epsilon() * T::lit(16.0);
        let p = table
            .probs()
            .iter()
            .zip(&w)
            .map(|(a, b)| if *a > floor { *a * *b } else { T::zero() })
            .collect();
        let supports = (0..polytope.len()).map(|v| polytope.support(v)).collect();
        Ok(Self { p, w, supports })
    }

    fn mixture(&self, mu: &[T]) -> Vec<T> {
        let mut q = vec![T::zero(); self.p.len()];
        for (m, cells) in mu.iter().zip(&self.supports) {
            if *m > T::zero() {
                for &z in cells {
                    q[z] += *m * self.w[z];
                }
            }
        }
        q
    }

    /// `(G, objective in nats)`; `G_v` is `+inf` when some supported cell
    /// has `q = 0`.
    fn gradient(&self, q: &[T]) -> (Vec<T>, T) {
        let mut ratio = vec![T::zero(); q.len()];
        let mut f = T::zero();
        for z in 0..q.len() {
            if self.p[z] > T::zero() {
                ratio[z] = self.p[z] / q[z];
                f += self.p[z] * ratio[z].ln();
            }
        }
        let g = self
            .supports
            .iter()
            .map(|cells| cells.iter().map(|&z| self.w[z] * ratio[z]).sum())
            .collect();
        (g, f)
    }
}

fn argmax<T: Real>(g: &[T], filter: impl Fn(usize) -> bool) -> usize {
    let mut best = usize::MAX;
    for i in 0..g.len() {
        if filter(i) && (best == usize::MAX || g[i] > g[best]) {
            best = i;
        }
    }
    best
}

/// Root of the convex 1-D line-search derivative
/// `phi'(t) = -sum_z p_z d_z / (q_z + t d_z)` on `[0, t_max]`.
fn line_search<T: Real>(p: &[T], q: &[T], cells: &[(usize, T)], t_max: T) -> T {
    let dphi = |t: T| -> (T, T) {
        let mut d1 = T::zero();
        let mut d2 = T::zero();
        for &(z, d) in cells {
            if p[z] > T::zero() {
                let den = q[z] + t * d;
                // a denominator at cancellation level is a true zero
                if den <= q[z] * T::epsilon() * T::lit(8.0) {
                    return (T::infinity(), T::infinity());
                }
                d1 -= p[z] * d / den;
                d2 += p[z] * d * d / (den * den);
            }
        }
        (d1, d2)
    };
    if dphi(t_max).0 <= T::zero() {
        return t_max;
    }
    let (mut lo, mut hi) = (T::zero(), t_max);
    let mut t = T::zero();
    for _ in 0..200 {
        let (g, h) = dphi(t);
        if g.abs() <= T::epsilon() * T::lit(16.0) {
            break;
        }
        if g < T::zero() {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - g / h;
        t = if h.is_finite() && h > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / T::lit(2.0)
        };
        if hi - lo <= T::epsilon() * t_max {
            break;
        }
    }
    t
}

fn solve<T: Real>(problem: &Problem<T>, options: &KlOptions<T>) -> KlResult<T> {
    let n = problem.supports.len();
    let ln2 = T::LN_2();
    let mut mu = vec![T::one() / T::from_usize(n).unwrap(); n];
    let mut q = problem.mixture(&mu);
    let mut iterations = 0;
    let mut converged = false;
    let mut gap;
    let mut objective;
    loop {
        let (g, f) = problem.gradient(&q);
        objective = f;
        let s = argmax(&g, |_| true);
        gap = (g[s] - T::one()) / ln2;
        if gap < options.gap_tol {
            converged = true;
            break;
        }
        if iterations >= options.max_iter {
            break;
        }
        iterations += 1;
        match options.solver {
            KlSolver::MultiplicativeWeights => {
                let total: T = mu.iter().zip(&g).map(|(m, gv)| *m * *gv).sum();
                for (m, gv) in mu.iter_mut().zip(&g) {
                    *m = *m * *gv / total;
                }
                q = problem.mixture(&mu);
            }
            KlSolver::ConditionalGradient => {
                let neg: Vec<T> = g.iter().map(|v| -*v).collect();
                let a = argmax(&neg, |i| mu[i] > T::zero());
                if a == s {
                    break;
                }
                let mut cells: Vec<(usize, T)> = Vec::new();
                for &z in &problem.supports[s] {
                    cells.push((z, problem.w[z]));
                }
                for &z in &problem.supports[a] {
                    match cells.iter_mut().find(|c| c.0 == z) {
                        Some(c) => c.1 -= problem.w[z],
                        None => cells.push((z, -problem.w[z])),
                    }
                }
                cells.retain(|c| c.1 != T::zero());
                let t = line_search(&problem.p, &q, &cells, mu[a]);
                mu[s] += t;
                let drop = t >= mu[a];
                if drop {
                    mu[a] = T::zero();
                } else {
                    mu[a] -= t;
                }
                for &(z, d) in &cells {
                    q[z] += t * d;
                }
                // incremental updates drift; a drop step can leave
                // roundoff-level residue on cells that should be empty
                let stale = cells.iter().any(|&(z, _)| problem.p[z] > T::zero() && !(q[z] > T::zero()));
                if drop || stale || iterations % 64 == 0 {
                    q = problem.mixture(&mu);
                }
            }
        }
    }
    let total: T = mu.iter().copied().sum();
    for m in mu.iter_mut() {
        *m /= total;
    }
    KlResult {
        distance: (objective / ln2).max(T::zero()),
        weights: mu,
        gap: gap.max(T::zero()),
        iterations,
        converged,
        solver: options.solver,
    }
}

/// KL distance to the local polytope with uniform setting weights and the
/// default conditional-gradient solver.
pub fn kl_to_local<T: Real>(p: &BehaviorTable<T>) -> Result<KlResult<T>> {
    let polytope = enumerate_vertices(p.scenario())?;
    kl_to_local_with(p, &polytope, &SettingWeights::uniform(p.scenario()), &KlOptions::default())
}

pub fn kl_to_local_with<T: Real>(
    p: &BehaviorTable<T>,
    polytope: &LocalPolytope<T>,
    weights: &SettingWeights<T>,
    options: &KlOptions<T>,
) -> Result<KlResult<T>> {
    let problem = Problem::new(p, polytope, weights)?;
    Ok(solve(&problem, options))
}

/// A linear functional `L(T) = sum_z coefficients[z] T(z)` separating a
/// behavior from the local polytope when `value_at_behavior > vertex_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Separation<T> {
    pub coefficients: Vec<T>,
    pub vertex_max: T,
    pub value_at_behavior: T,
}

impl<T: Real> Separation<T> {
    pub fn separates(&self) -> bool {
        self.value_at_behavior > self.vertex_max
    }

    pub fn margin(&self) -> T {
        self.value_at_behavior - self.vertex_max
    }
}

/// Separating hyperplane read off the KL optimum: coefficients
/// `w(x,y) P / Q` evaluated on every vertex of the polytope.
pub fn separation_certificate<T: Real>(
    p: &BehaviorTable<T>,
    result: &KlResult<T>,
    polytope: &LocalPolytope<T>,
    weights: &SettingWeights<T>,
) -> Result<Separation<T>> {
    let closest = result.closest_local(polytope)?;
    let s = p.scenario();
    weights.check(s)?;
    let coefficients: Vec<T> = p
        .probs()
        .iter()
        .zip(closest.probs())
        .enumerate()
        .map(|(z, (&pz, &qz))| {
            if pz > T::zero() && qz > T::zero() {
                weights.of_cell(s, z) * pz / qz
            } else {
                T::zero()
            }
        })
        .collect();
    let eval = |t: &BehaviorTable<T>| -> T { t.probs().iter().zip(&coefficients).map(|(a, c)| *a * *c).sum() };
    let vertex_max = polytope.vertices().iter().map(eval).fold(T::neg_infinity(), T::max);
    Ok(Separation {
        value_at_behavior: eval(p),
        vertex_max,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_of_identical_tables_is_zero() {
        let t = BehaviorTable::<f64>::uniform(Scenario::CGLMP);
        let w = SettingWeights::uniform(Scenario::CGLMP);
        assert_eq!(kl_divergence(&t, &t, &w).unwrap(), Divergence::Finite(0.0));
    }

    #[test]
    fn point_against_uniform() {
        let s = Scenario::CGLMP;
        let p = BehaviorTable::<f64>::deterministic(s, &[0, 1], &[2, 0]).unwrap();
        let q = BehaviorTable::uniform(s);
        let w = SettingWeights::uniform(s);
        let d = kl_divergence(&p, &q, &w).unwrap().finite().unwrap();
        // each setting pair contributes log2(9), averaged over pairs
        assert!((d - 9f64.log2()).abs() < 1e-12);
        assert!((d - 3.1699).abs() < 1e-4);
    }

    #[test]
    fn disjoint_support_is_infinite() {
        let s = Scenario::CHSH;
        let p = BehaviorTable::<f64>::deterministic(s, &[0, 0], &[0, 0]).unwrap();
        let q = BehaviorTable::<f64>::deterministic(s, &[1, 0], &[0, 0]).unwrap();
        let d = kl_divergence(&p, &q, &SettingWeights::uniform(s)).unwrap();
        assert!(d.is_infinite());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let p = BehaviorTable::<f64>::uniform(Scenario::CHSH);
        let q = BehaviorTable::<f64>::uniform(Scenario::CGLMP);
        assert!(kl_divergence(&p, &q, &SettingWeights::uniform(Scenario::CHSH)).is_err());
        assert!(SettingWeights::<f64>::new(vec![0.5, 0.2]).is_err());
    }

    #[test]
    fn local_points_have_zero_distance() {
        for table in [
            BehaviorTable::<f64>::deterministic(Scenario::CGLMP, &[2, 1], &[0, 2]).unwrap(),
            BehaviorTable::<f64>::uniform(Scenario::CGLMP),
        ] {
            for solver in [KlSolver::ConditionalGradient, KlSolver::MultiplicativeWeights] {
                let polytope = enumerate_vertices(Scenario::CGLMP).unwrap();
                let r = kl_to_local_with(
                    &table,
                    &polytope,
                    &SettingWeights::uniform(Scenario::CGLMP),
                    &KlOptions::default().with_solver(solver),
                )
                .unwrap();
                assert!(r.converged, "{solver:?}");
                assert!(r.distance < 1e-9, "{solver:?} {}", r.distance);
            }
        }
    }

    #[test]
    fn uniform_is_the_equal_vertex_mixture() {
        let polytope = enumerate_vertices::<f64>(Scenario::CGLMP).unwrap();
        let equal = polytope.mixture(&vec![1.0; 81]).unwrap();
        let uniform = BehaviorTable::<f64>::uniform(Scenario::CGLMP);
        for (a, b) in equal.probs().iter().zip(uniform.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
