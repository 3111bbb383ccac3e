//! Maximizing the KL distance to the local polytope over the qutrit
//! phase-then-Fourier measurements and the gamma state family.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cglmp::{gamma_schmidt, optimize_cglmp, CglmpScenario, PhaseSearch, GAMMA_MAX};
use crate::error::{Error, Result};
use crate::optim::{golden_section_max, wrap_angle, NelderMead, OptimizationResult};
use crate::polytope::{enumerate_vertices, kl_to_local_with, KlOptions, KlSolver, LocalPolytope, SettingWeights};
use crate::quantum::{BehaviorTable, Scenario};
use crate::scalar::Real;

/// How setting pairs are weighted inside the distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SettingConvention {
    /// `w(x, y) = 1/4`.
    Uniform,
    /// Plain sum over setting pairs, i.e. four times the uniform value.
    UnweightedSum,
    /// The least favorable weights: `max_w min_mu KL_w`.
    WorstCase,
}

impl SettingConvention {
    pub const ALL: [SettingConvention; 3] = [Self::Uniform, Self::UnweightedSum, Self::WorstCase];

    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::UnweightedSum => "unweighted-sum",
            Self::WorstCase => "worst-case",
        }
    }
}

/// Distance of `p` under a setting convention, with the weights used.
pub fn kl_with_convention<T: Real>(
    p: &BehaviorTable<T>,
    polytope: &LocalPolytope<T>,
    convention: SettingConvention,
    options: &KlOptions<T>,
) -> Result<(T, Vec<T>)> {
    let s = p.scenario();
    let uniform = SettingWeights::uniform(s);
    match convention {
        SettingConvention::Uniform => {
            Ok((kl_to_local_with(p, polytope, &uniform, options)?.distance, uniform.as_slice().to_vec()))
        }
        SettingConvention::UnweightedSum => {
            let d = kl_to_local_with(p, polytope, &uniform, options)?.distance;
            Ok((d * T::from_usize(s.setting_pairs()).unwrap(), vec![T::one(); s.setting_pairs()]))
        }
        SettingConvention::WorstCase => {
            let n = s.setting_pairs();
            let softmax = |z: &[T]| -> Vec<T> {
                let mut w = vec![T::one()];
                w.extend(z.iter().map(|v| v.exp()));
                let total: T = w.iter().copied().sum();
                w.into_iter().map(|v| v / total).collect()
            };
            let eval = |z: &[T]| -> T {
                let w = SettingWeights::new(softmax(z)).expect("softmax is a distribution");
                kl_to_local_with(p, polytope, &w, options)
                    .map(|r| -r.distance)
                    .unwrap_or(T::infinity())
            };
            let nm = NelderMead::default().with_step(T::lit(0.5)).with_tolerance(T::lit(1e-7));
            let m = nm.minimize_restarted(eval, &vec![T::zero(); n - 1], 2, T::lit(1e-12));
            Ok((-m.value, softmax(&m.x)))
        }
    }
}

/// KL-maximizing phases for one gamma.
#[derive(Debug, Clone, Serialize)]
pub struct KlOptimum<T> {
    pub distance_bits: T,
    pub gamma: T,
    /// `(alpha1, alpha2, beta1, beta2)` with `alpha1 = 0`.
    pub phases: [T; 4],
    pub solver_gap: T,
    pub iterations: usize,
    pub result: OptimizationResult<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KlSearch {
    /// Grid points per phase axis for the coarse start search.
    pub grid_points: usize,
    /// Grid maxima polished with Nelder-Mead, besides the fixed starts.
    pub polish: usize,
    /// Gamma values scanned before the golden-section refinement.
    pub gamma_scan: usize,
}

impl Default for KlSearch {
    fn default() -> Self {
        Self {
            grid_points: 6,
            polish: 2,
            gamma_scan: 13,
        }
    }
}

/// Inner solves during the search use multiplicative weights, which is
/// several times faster here; the reported optimum is re-solved with the
/// default conditional-gradient method.
fn search_options<T: Real>() -> KlOptions<T> {
    KlOptions::default()
        .with_solver(KlSolver::MultiplicativeWeights)
        .with_gap(T::lit(1e-10))
}

fn distance_at<T: Real>(polytope: &LocalPolytope<T>, schmidt: [T; 3], p: &[T]) -> T {
    let run = || -> Result<T> {
        let s = CglmpScenario::new([T::zero(), p[0]], [p[1], p[2]], schmidt)?;
        let w = SettingWeights::uniform(Scenario::CGLMP);
        Ok(kl_to_local_with(&s.behavior()?, polytope, &w, &search_options())?.distance)
    };
    run().unwrap_or(T::neg_infinity())
}

struct PhaseRun<T> {
    value: T,
    phases: [T; 3],
    iterations: usize,
    evaluations: usize,
    starts: usize,
    best_start: usize,
}

fn polish<T: Real>(polytope: &LocalPolytope<T>, schmidt: [T; 3], start: [T; 3]) -> (T, [T; 3], usize, usize) {
    let nm = NelderMead::default().with_step(T::lit(0.1)).with_tolerance(T::lit(1e-8));
    let m = nm.minimize_restarted(|p| -distance_at(polytope, schmidt, p), &start, 2, T::lit(1e-12));
    (-m.value, [m.x[0], m.x[1], m.x[2]], m.iterations, m.evaluations)
}

fn search<T: Real>(polytope: &LocalPolytope<T>, schmidt: [T; 3], search: &KlSearch, fixed: &[[T; 3]]) -> PhaseRun<T> {
    let n = search.grid_points.max(1);
    let step = T::lit(2.0) * T::PI() / T::from_usize(n).unwrap();
    let mut grid: Vec<(T, [T; 3])> = (0..n * n * n)
        .into_par_iter()
        .map(|i| {
            let p = [
                step * T::from_usize(i / (n * n)).unwrap(),
                step * T::from_usize((i / n) % n).unwrap(),
                step * T::from_usize(i % n).unwrap(),
            ];
            (distance_at(polytope, schmidt, &p), p)
        })
        .collect();
    // stable sort keeps the lower grid index first among ties
    grid.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut starts = fixed.to_vec();
    starts.extend(grid.iter().take(search.polish).map(|g| g.1));
    let runs: Vec<_> = starts.par_iter().map(|s| polish(polytope, schmidt, *s)).collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 > runs[best].0 {
            best = i;
        }
    }
    PhaseRun {
        value: runs[best].0,
        phases: runs[best].1,
        iterations: runs.iter().map(|r| r.2).sum(),
        evaluations: runs.iter().map(|r| r.3).sum::<usize>() + grid.len(),
        starts: starts.len(),
        best_start: best,
    }
}

/// Starts shared by every search: the standard CGLMP phases and the
/// CGLMP-maximizing phases for this state.
fn fixed_starts<T: Real>(schmidt: [T; 3]) -> Result<Vec<[T; 3]>> {
    let (a, b) = CglmpScenario::<T>::standard_phases();
    let cg = optimize_cglmp(schmidt, &PhaseSearch { grid_points: 12, polish: 2 })?;
    Ok(vec![[a[1], b[0], b[1]], [cg.phases[1], cg.phases[2], cg.phases[3]]])
}

fn finish<T: Real>(polytope: &LocalPolytope<T>, gamma: T, phases: [T; 3], run: PhaseRun<T>) -> Result<KlOptimum<T>> {
    let s = CglmpScenario::new([T::zero(), phases[0]], [phases[1], phases[2]], gamma_schmidt(gamma))?;
    let kl = kl_to_local_with(
        &s.behavior()?,
        polytope,
        &SettingWeights::uniform(Scenario::CGLMP),
        &KlOptions::default(),
    )?;
    let phases = [T::zero(), wrap_angle(phases[0]), wrap_angle(phases[1]), wrap_angle(phases[2])];
    Ok(KlOptimum {
        distance_bits: kl.distance,
        gamma,
        phases,
        solver_gap: kl.gap,
        iterations: kl.iterations,
        result: OptimizationResult {
            value: kl.distance,
            params: std::iter::once(gamma).chain(phases).collect(),
            iterations: run.iterations,
            evaluations: run.evaluations,
            gap: Some(kl.gap),
            seed: None,
            best_start: run.best_start,
            starts: run.starts,
        },
    })
}

fn check_gamma<T: Real>(gamma: T) -> Result<()> {
    if !(gamma >= T::zero() && gamma.is_finite()) {
        return Err(Error::OutOfRange {
            what: "gamma",
            value: gamma.as_f64(),
            range: "[0, inf)",
        });
    }
    Ok(())
}

/// Maximum over phases of the uniform-weight KL distance at fixed gamma.
pub fn optimize_kl<T: Real>(gamma: T, opts: &KlSearch) -> Result<KlOptimum<T>> {
    check_gamma(gamma)?;
    let polytope = enumerate_vertices(Scenario::CGLMP)?;
    let schmidt = gamma_schmidt(gamma);
    let run = search(&polytope, schmidt, opts, &fixed_starts(schmidt)?);
    let phases = run.phases;
    finish(&polytope, gamma, phases, run)
}

/// Maximum over gamma in `[0, 1.5]` and the phases: a gamma scan with full
/// phase searches, then golden-section refinement around the best scan
/// point with warm-started phase polishing.
pub fn optimize_kl_global<T: Real>(opts: &KlSearch) -> Result<KlOptimum<T>> {
    let polytope = enumerate_vertices(Scenario::CGLMP)?;
    let m = opts.gamma_scan.max(3);
    let gammas: Vec<T> = (0..m)
        .map(|i| T::lit(GAMMA_MAX * (i + 1) as f64 / m as f64))
        .collect();
    let scan: Vec<PhaseRun<T>> = gammas
        .iter()
        .map(|&g| {
            let schmidt = gamma_schmidt(g);
            let fixed = fixed_starts(schmidt)?;
            Ok(search(&polytope, schmidt, opts, &fixed))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in scan.iter().enumerate() {
        if r.value > scan[best].value {
            best = i;
        }
    }
    let width = T::lit(GAMMA_MAX / m as f64);
    let lo = (gammas[best] - width).max(T::zero());
    let hi = (gammas[best] + width).min(T::lit(GAMMA_MAX));
    let mut warm = scan[best].phases;
    let mut iterations: usize = scan.iter().map(|r| r.iterations).sum();
    let mut evaluations: usize = scan.iter().map(|r| r.evaluations).sum();
    let (gamma, _, golden_iters) = golden_section_max(
        |g| {
            let (v, p, it, ev) = polish(&polytope, gamma_schmidt(g), warm);
            warm = p;
            iterations += it;
            evaluations += ev;
            v
        },
        lo,
        hi,
        T::lit(1e-5),
    );
    let schmidt = gamma_schmidt(gamma);
    let mut fixed = fixed_starts(schmidt)?;
    fixed.push(warm);
    let run = search(&polytope, schmidt, opts, &fixed);
    let phases = run.phases;
    let mut opt = finish(&polytope, gamma, phases, run)?;
    opt.result.iterations += iterations + golden_iters;
    opt.result.evaluations += evaluations;
    Ok(opt)
}

/// One row of the convention sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ConventionRow<T> {
    pub convention: SettingConvention,
    pub maximally_entangled_bits: T,
    pub global_bits: T,
    pub gamma: T,
    pub weights_at_global: Vec<T>,
}

/// Re-evaluates the two headline distances under every setting convention.
/// Phases are taken from the uniform-weight optima; under the worst-case
/// convention gamma is refined by golden section with phases re-polished
/// under uniform weights at each step.
pub fn convention_sweep<T: Real>(
    maximally_entangled: &KlOptimum<T>,
    global: &KlOptimum<T>,
) -> Result<Vec<ConventionRow<T>>> {
    let polytope = enumerate_vertices(Scenario::CGLMP)?;
    let options = KlOptions::default();
    let table = |gamma: T, phases: [T; 4]| -> Result<BehaviorTable<T>> {
        CglmpScenario::new([phases[0], phases[1]], [phases[2], phases[3]], gamma_schmidt(gamma))?.behavior()
    };
    SettingConvention::ALL
        .iter()
        .map(|&c| {
            let me = table(maximally_entangled.gamma, maximally_entangled.phases)?;
            let (me_bits, _) = kl_with_convention(&me, &polytope, c, &options)?;
            let (gamma, phases) = if c == SettingConvention::WorstCase {
                let mut warm = [global.phases[1], global.phases[2], global.phases[3]];
                let (g, _, _) = golden_section_max(
                    |g| {
                        let (_, p, _, _) = polish(&polytope, gamma_schmidt(g), warm);
                        warm = p;
                        table(g, [T::zero(), p[0], p[1], p[2]])
                            .and_then(|t| kl_with_convention(&t, &polytope, c, &options))
                            .map(|r| r.0)
                            .unwrap_or(T::neg_infinity())
                    },
                    (global.gamma - T::lit(0.15)).max(T::zero()),
                    global.gamma + T::lit(0.15),
                    T::lit(1e-3),
                );
                let (_, p, _, _) = polish(&polytope, gamma_schmidt(g), warm);
                (g, [T::zero(), p[0], p[1], p[2]])
            } else {
                (global.gamma, global.phases)
            };
            let (global_bits, weights) = kl_with_convention(&table(gamma, phases)?, &polytope, c, &options)?;
            Ok(ConventionRow {
                convention: c,
                maximally_entangled_bits: me_bits,
                global_bits,
                gamma,
                weights_at_global: weights,
            })
        })
        .collect()
}
