//! The two-setting qutrit CGLMP inequality: its value on a behavior, the
//! closed-form probabilities for Schmidt-diagonal states measured in the
//! phase-then-Fourier family, and optimization over phases and states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{golden_section_max, wrap_angle, NelderMead, OptimizationResult};
use crate::quantum::{
    behavior, entanglement_entropy, BehaviorTable, BipartitePureState, GeneralMeasurement, Party,
    PhaseSetting, Scenario,
};
use crate::scalar::Real;

/// `(x, y, delta, sign)`: `sign * Pr[a_x = b_y + delta mod 3]`.
pub const CGLMP_TERMS: [(usize, usize, usize, i8); 8] = [
    (0, 0, 0, 1),
    (0, 1, 0, 1),
    (1, 0, 0, 1),
    (1, 1, 2, 1),
    (0, 0, 1, -1),
    (0, 1, 2, -1),
    (1, 0, 2, -1),
    (1, 1, 0, -1),
];

/// Two phases per party plus the Schmidt coefficients of
/// `c0|00> + c1|11> + c2|22>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CglmpScenario<T> {
    pub alphas: [T; 2],
    pub betas: [T; 2],
    pub schmidt: [T; 3],
}

impl<T: Real> CglmpScenario<T> {
    pub fn new(alphas: [T; 2], betas: [T; 2], schmidt: [T; 3]) -> Result<Self> {
        if let Some(c) = schmidt.iter().find(|c| **c < T::zero()) {
            return Err(Error::OutOfRange {
                what: "schmidt coefficient",
                value: c.as_f64(),
                range: ">= 0",
            });
        }
        let n: T = schmidt.iter().map(|c| *c * *c).sum();
        if (n - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::NotNormalized { norm_sqr: n.as_f64() });
        }
        Ok(Self { alphas, betas, schmidt })
    }

    /// `alpha = (0, pi/3)`, `beta = (-pi/6, pi/6)`.
    pub fn standard_phases() -> ([T; 2], [T; 2]) {
        let pi = T::PI();
        (
            [T::zero(), pi / T::lit(3.0)],
            [-pi / T::lit(6.0), pi / T::lit(6.0)],
        )
    }

    pub fn phases(&self) -> [T; 4] {
        [self.alphas[0], self.alphas[1], self.betas[0], self.betas[1]]
    }

    pub fn state(&self) -> Result<BipartitePureState<T>> {
        BipartitePureState::schmidt_diagonal(&self.schmidt)
    }

    pub fn measurements(&self) -> (Vec<GeneralMeasurement<T>>, Vec<GeneralMeasurement<T>>) {
        (
            self.alphas
                .iter()
                .map(|a| PhaseSetting::new(Party::A, *a).measurement())
                .collect(),
            self.betas
                .iter()
                .map(|b| PhaseSetting::new(Party::B, *b).measurement())
                .collect(),
        )
    }

    /// Born-rule behavior built from the projector vectors.
    pub fn behavior(&self) -> Result<BehaviorTable<T>> {
        let (ma, mb) = self.measurements();
        behavior(&self.state()?, &ma, &mb)
    }
}

/// Normalized Schmidt coefficients of the gamma family `(1, gamma, 1)`.
pub fn gamma_schmidt<T: Real>(gamma: T) -> [T; 3] {
    let n = (T::lit(2.0) + gamma * gamma).sqrt();
    [T::one() / n, gamma / n, T::one() / n]
}

/// `Pr[a_x = b_y + delta (mod 3)]` read off a behavior table.
pub fn congruence_probability<T: Real>(b: &BehaviorTable<T>, x: usize, y: usize, delta: usize) -> T {
    (0..3).map(|bb| b.prob(x, y, (bb + delta) % 3, bb)).sum()
}

pub fn cglmp_value<T: Real>(b: &BehaviorTable<T>) -> Result<T> {
    b.scenario().require(Scenario::CGLMP)?;
    Ok(CGLMP_TERMS
        .iter()
        .map(|&(x, y, d, sign)| T::lit(sign as f64) * congruence_probability(b, x, y, d))
        .sum())
}

/// `(1/9) sum_{n,m} c_n c_m cos[(n - m)(alpha_j + beta_k + 2 pi delta / 3)]`:
/// the probability of one particular outcome pair `(a, b)` with
/// `a - b = delta (mod 3)`. All three such pairs are equally likely.
pub fn joint_cell_probability<T: Real>(s: &CglmpScenario<T>, j: usize, k: usize, delta: usize) -> T {
    let phi = s.alphas[j] + s.betas[k] + T::lit(2.0) * T::PI() * T::from_usize(delta).unwrap() / T::lit(3.0);
    cell_probability(&s.schmidt, phi)
}

#[inline]
fn cell_probability<T: Real>(c: &[T; 3], phi: T) -> T {
    // cos is even, so pairs (n, m) and (m, n) combine
    let diag = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
    let one = T::lit(2.0) * (c[0] * c[1] + c[1] * c[2]) * phi.cos();
    let two = T::lit(2.0) * c[0] * c[2] * (T::lit(2.0) * phi).cos();
    (diag + one + two) / T::lit(9.0)
}

/// `Pr[a_j = b_k + delta (mod 3)]` in closed form: three times
/// [`joint_cell_probability`].
pub fn analytic_probability<T: Real>(s: &CglmpScenario<T>, j: usize, k: usize, delta: usize) -> T {
    T::lit(3.0) * joint_cell_probability(s, j, k, delta)
}

/// CGLMP value from the closed-form probabilities.
pub fn analytic_cglmp<T: Real>(s: &CglmpScenario<T>) -> T {
    analytic_cglmp_raw(&s.schmidt, &s.phases())
}

fn analytic_cglmp_raw<T: Real>(c: &[T; 3], phases: &[T; 4]) -> T {
    let third = T::lit(2.0) * T::PI() / T::lit(3.0);
    CGLMP_TERMS
        .iter()
        .map(|&(x, y, d, sign)| {
            let phi = phases[x] + phases[2 + y] + third * T::from_usize(d).unwrap();
            T::lit(3.0 * sign as f64) * cell_probability(c, phi)
        })
        .sum()
}

/// CGLMP value of the deterministic strategy `(a1, a2, b1, b2)`.
pub fn deterministic_cglmp(strategy: [usize; 4]) -> i32 {
    let [a1, a2, b1, b2] = strategy;
    let a = [a1, a2];
    let b = [b1, b2];
    CGLMP_TERMS
        .iter()
        .map(|&(x, y, d, sign)| if a[x] % 3 == (b[y] + d) % 3 { sign as i32 } else { 0 })
        .sum()
}

/// Local bound of CGLMP from all 81 deterministic strategies.
pub fn cglmp_local_bound() -> i32 {
    (0..81)
        .map(|m| deterministic_cglmp([m / 27, (m / 9) % 3, (m / 3) % 3, m % 3]))
        .max()
        .expect("81 strategies")
}

/// Resolution of the phase search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseSearch {
    /// Grid points per phase axis over `[0, 2 pi)`.
    pub grid_points: usize,
    /// Grid maxima handed to the Nelder-Mead polish.
    pub polish: usize,
}

impl Default for PhaseSearch {
    fn default() -> Self {
        Self {
            grid_points: 24,
            polish: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CglmpOptimum<T> {
    pub value: T,
    pub gamma: Option<T>,
    pub schmidt: [T; 3],
    /// `(alpha1, alpha2, beta1, beta2)` with `alpha1 = 0`.
    pub phases: [T; 4],
    /// All distinct maximizers found, in the same gauge.
    pub distinct_optima: Vec<[T; 4]>,
    pub entropy_bits: T,
    pub result: OptimizationResult<T>,
}

/// Fixes the gauge `alpha1 = 0`: the value depends on `alpha_j + beta_k` only.
fn canonical<T: Real>(p: &[T; 4]) -> [T; 4] {
    let t = p[0];
    [T::zero(), wrap_angle(p[1] - t), wrap_angle(p[2] + t), wrap_angle(p[3] + t)]
}

struct PhaseRun<T> {
    value: T,
    phases: [T; 4],
    distinct: Vec<[T; 4]>,
    iterations: usize,
    evaluations: usize,
}

fn polish_phases<T: Real>(c: &[T; 3], start: [T; 3]) -> (T, [T; 3], usize, usize) {
    let nm = NelderMead::default().with_step(T::lit(0.05)).with_tolerance(T::lit(1e-10));
    let m = nm.minimize_restarted(
        |p| -analytic_cglmp_raw(c, &[T::zero(), p[0], p[1], p[2]]),
        &start,
        3,
        T::lit(1e-14),
    );
    (-m.value, [m.x[0], m.x[1], m.x[2]], m.iterations, m.evaluations)
}

fn search_phases<T: Real>(c: &[T; 3], search: &PhaseSearch, extra_starts: &[[T; 3]]) -> PhaseRun<T> {
    let n = search.grid_points.max(2);
    let step = T::lit(2.0) * T::PI() / T::from_usize(n).unwrap();
    let mut grid: Vec<(T, [T; 3])> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut local = Vec::with_capacity(n * n);
            for j in 0..n {
                for k in 0..n {
                    let p = [
                        step * T::from_usize(i).unwrap(),
                        step * T::from_usize(j).unwrap(),
                        step * T::from_usize(k).unwrap(),
                    ];
                    local.push((analytic_cglmp_raw(c, &[T::zero(), p[0], p[1], p[2]]), p));
                }
            }
            local
        })
        .collect();
    grid.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut starts: Vec<[T; 3]> = grid.iter().take(search.polish.max(1)).map(|g| g.1).collect();
    starts.extend_from_slice(extra_starts);
    let polished: Vec<_> = starts.par_iter().map(|s| polish_phases(c, *s)).collect();
    let iterations = polished.iter().map(|p| p.2).sum();
    let evaluations = polished.iter().map(|p| p.3).sum::<usize>() + grid.len();
    let mut best = polished[0].clone();
    for p in &polished[1..] {
        if p.0 > best.0 {
            best = p.clone();
        }
    }
    let mut distinct: Vec<[T; 4]> = Vec::new();
    for p in &polished {
        if best.0 - p.0 > T::lit(1e-9) {
            continue;
        }
        let q = canonical(&[T::zero(), p.1[0], p.1[1], p.1[2]]);
        let seen = distinct.iter().any(|d| {
            d.iter()
                .zip(&q)
                .all(|(u, v)| wrap_angle(*u - *v).abs() < T::lit(1e-4))
        });
        if !seen {
            distinct.push(q);
        }
    }
    PhaseRun {
        value: best.0,
        phases: canonical(&[T::zero(), best.1[0], best.1[1], best.1[2]]),
        distinct,
        iterations,
        evaluations,
    }
}

fn check_schmidt<T: Real>(c: &[T; 3]) -> Result<()> {
    CglmpScenario::new([T::zero(); 2], [T::zero(); 2], *c).map(|_| ())
}

/// Maximizes CGLMP over the four phases at fixed Schmidt coefficients.
pub fn optimize_cglmp<T: Real>(schmidt: [T; 3], search: &PhaseSearch) -> Result<CglmpOptimum<T>> {
    check_schmidt(&schmidt)?;
    let (al, be) = CglmpScenario::<T>::standard_phases();
    let run = search_phases(&schmidt, search, &[[al[1], be[0], be[1]]]);
    let state = BipartitePureState::schmidt_diagonal(&schmidt)?;
    Ok(CglmpOptimum {
        value: run.value,
        gamma: None,
        schmidt,
        phases: run.phases,
        distinct_optima: run.distinct,
        entropy_bits: entanglement_entropy(&state),
        result: OptimizationResult {
            value: run.value,
            params: run.phases.to_vec(),
            iterations: run.iterations,
            evaluations: run.evaluations,
            gap: None,
            seed: None,
            best_start: 0,
            starts: search.polish + 1,
        },
    })
}

/// [`optimize_cglmp`] for the gamma family, recording gamma.
pub fn optimize_cglmp_gamma<T: Real>(gamma: T, search: &PhaseSearch) -> Result<CglmpOptimum<T>> {
    if !(gamma >= T::zero()) {
        return Err(Error::OutOfRange {
            what: "gamma",
            value: gamma.as_f64(),
            range: ">= 0",
        });
    }
    let mut opt = optimize_cglmp(gamma_schmidt(gamma), search)?;
    opt.gamma = Some(gamma);
    Ok(opt)
}

/// Upper end of the gamma interval searched by the global optimizer.
pub const GAMMA_MAX: f64 = 1.5;

/// Joint maximization over gamma in `[0, 1.5]` and all four phases:
/// a coarse gamma scan with full phase searches, then golden-section over
/// gamma around the best scan point with warm-started phase polishing.
pub fn optimize_cglmp_state_and_settings<T: Real>(search: &PhaseSearch) -> Result<CglmpOptimum<T>> {
    let coarse = PhaseSearch {
        grid_points: (search.grid_points / 2).max(8),
        polish: search.polish.min(4).max(1),
    };
    let scan: Vec<(T, PhaseRun<T>)> = (0..=15)
        .map(|i| {
            let g = T::lit(GAMMA_MAX * i as f64 / 15.0);
            (g, search_phases(&gamma_schmidt(g), &coarse, &[]))
        })
        .collect();
    let mut iterations: usize = scan.iter().map(|s| s.1.iterations).sum();
    let mut evaluations: usize = scan.iter().map(|s| s.1.evaluations).sum();
    let (best_i, _) = scan
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |acc, (i, s)| if s.1.value > acc.1 { (i, s.1.value) } else { acc });
    let g0 = scan[best_i].0;
    let warm = scan[best_i].1.phases;
    let width = T::lit(GAMMA_MAX / 15.0);
    let lo = (g0 - width).max(T::zero());
    let hi = (g0 + width).min(T::lit(GAMMA_MAX));
    let mut inner = |g: T| {
        let (v, _, it, ev) = polish_phases(&gamma_schmidt(g), [warm[1], warm[2], warm[3]]);
        iterations += it;
        evaluations += ev;
        v
    };
    let (gamma, _, golden_iters) = golden_section_max(&mut inner, lo, hi, T::lit(1e-9));
    let mut opt = optimize_cglmp_gamma(gamma, search)?;
    opt.result.iterations += iterations + golden_iters;
    opt.result.evaluations += evaluations;
    opt.result.params = vec![gamma, opt.phases[0], opt.phases[1], opt.phases[2], opt.phases[3]];
    Ok(opt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard(schmidt: [f64; 3]) -> CglmpScenario<f64> {
        let (a, b) = CglmpScenario::standard_phases();
        CglmpScenario::new(a, b, schmidt).unwrap()
    }

    #[test]
    fn uniform_table_scores_zero() {
        let t = BehaviorTable::<f64>::uniform(Scenario::CGLMP);
        assert!(cglmp_value(&t).unwrap().abs() < 1e-15);
    }

    #[test]
    fn wrong_shape_rejected() {
        let t = BehaviorTable::<f64>::uniform(Scenario::CHSH);
        assert!(matches!(cglmp_value(&t), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn deterministic_all_zero_saturates_bound() {
        assert_eq!(deterministic_cglmp([0, 0, 0, 0]), 2);
        let t = BehaviorTable::<f64>::deterministic(Scenario::CGLMP, &[0, 0], &[0, 0]).unwrap();
        assert_eq!(cglmp_value(&t).unwrap(), 2.0);
        assert_eq!(cglmp_local_bound(), 2);
    }

    #[test]
    fn maximally_entangled_at_standard_phases() {
        let s = standard([1.0 / 3f64.sqrt(); 3]);
        let expected = 4.0 * (2.0 * 3f64.sqrt() + 3.0) / 9.0;
        assert!((cglmp_value(&s.behavior().unwrap()).unwrap() - expected).abs() < 1e-12);
        assert!((analytic_cglmp(&s) - expected).abs() < 1e-12);
    }

    #[test]
    fn gamma_star_at_standard_phases() {
        let g = (11f64.sqrt() - 3f64.sqrt()) / 2.0;
        let s = standard(gamma_schmidt(g));
        assert!((analytic_cglmp(&s) - (1.0 + (11.0f64 / 3.0).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn single_cell_examples() {
        // |00>: each party's outcome is uniform and independent
        let s = standard([1.0, 0.0, 0.0]);
        assert!((joint_cell_probability(&s, 0, 0, 0) - 1.0 / 9.0).abs() < 1e-15);
        assert!((analytic_probability(&s, 0, 0, 0) - 1.0 / 3.0).abs() < 1e-15);
        let u = CglmpScenario::new([0.4, 0.0], [-0.4, 0.0], [1.0 / 3f64.sqrt(); 3]).unwrap();
        assert!((joint_cell_probability(&u, 0, 0, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((analytic_probability(&u, 0, 0, 0) - 1.0).abs() < 1e-15);
        let b = u.behavior().unwrap();
        for bb in 0..3 {
            assert!((b.prob(0, 0, bb, bb) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_schmidt_rejected() {
        assert!(CglmpScenario::new([0.0; 2], [0.0; 2], [1.0, 1.0, 0.0]).is_err());
        assert!(CglmpScenario::new([0.0; 2], [0.0; 2], [-1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn optimizer_on_maximally_entangled_state() {
        let opt = optimize_cglmp([1.0 / 3f64.sqrt(); 3], &PhaseSearch::default()).unwrap();
        let expected = 4.0 * (2.0 * 3f64.sqrt() + 3.0) / 9.0;
        assert!((opt.value - expected).abs() < 1e-9);
        assert!(!opt.distinct_optima.is_empty());
        // the standard phases, gauge-fixed, are among the maximizers
        let (a, b) = CglmpScenario::<f64>::standard_phases();
        let std = canonical(&[a[0], a[1], b[0], b[1]]);
        let s = CglmpScenario::new([std[0], std[1]], [std[2], std[3]], [1.0 / 3f64.sqrt(); 3]).unwrap();
        assert!((analytic_cglmp(&s) - opt.value).abs() < 1e-9);
    }

    #[test]
    fn product_state_stays_local() {
        let opt = optimize_cglmp([1.0, 0.0, 0.0], &PhaseSearch::default()).unwrap();
        assert!(opt.value <= 2.0 + 1e-9);
    }
}
