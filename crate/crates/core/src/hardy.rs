//! Hardy's paradox: one positive probability and three exact zeros that no
//! local deterministic model can reproduce.
//!
//! Setting 0 is `sigma_z`, setting 1 is `sigma_x`; outcome index 0 is `+1`
//! (`|0>` for `sigma_z`, `|+>` for `sigma_x`).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::golden_section_max;
use crate::quantum::{behavior, BehaviorTable, BipartitePureState, BlochMeasurement, GeneralMeasurement};
use crate::scalar::Real;

/// Threshold below which a probability counts as zero.
pub const HARDY_ZERO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyCertificate<T> {
    /// `P(a_x = -1, b_x = -1)`.
    pub p_xx_mm: T,
    /// `P(a_x = -1, b_z = -1)`.
    pub p_xz_mm: T,
    /// `P(a_z = -1, b_x = -1)`.
    pub p_zx_mm: T,
    /// `P(a_z = +1, b_z = +1)`.
    pub p_zz_pp: T,
    pub holds: bool,
}

impl<T: Real> HardyCertificate<T> {
    /// Reads the four events off a binary two-setting behavior with
    /// settings ordered `(z, x)`.
    pub fn from_behavior(b: &BehaviorTable<T>) -> Result<Self> {
        b.scenario().require(crate::quantum::Scenario::CHSH)?;
        let (p_xx_mm, p_xz_mm, p_zx_mm, p_zz_pp) = (b.prob(1, 1, 1, 1), b.prob(1, 0, 1, 1), b.prob(0, 1, 1, 1), b.prob(0, 0, 0, 0));
        let tau = T::lit(HARDY_ZERO);
        Ok(Self {
            p_xx_mm,
            p_xz_mm,
            p_zx_mm,
            p_zz_pp,
            holds: p_xx_mm > tau && p_xz_mm.max(p_zx_mm).max(p_zz_pp) < tau,
        })
    }

    pub fn zeros(&self) -> [T; 3] {
        [self.p_xz_mm, self.p_zx_mm, self.p_zz_pp]
    }
}

fn require_qubits<T: Real>(state: &BipartitePureState<T>) -> Result<()> {
    if state.dim_a() != 2 || state.dim_b() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: if state.dim_a() != 2 { state.dim_a() } else { state.dim_b() },
        });
    }
    Ok(())
}

/// Certificate with both parties measuring `sigma_z` and `sigma_x`.
pub fn hardy_certificate<T: Real>(state: &BipartitePureState<T>) -> Result<HardyCertificate<T>> {
    let zx = [BlochMeasurement::z().measurement(), BlochMeasurement::x().measurement()];
    hardy_certificate_with(state, &zx, &zx)
}

/// Certificate for arbitrary measurements, each given as `[z-like, x-like]`.
pub fn hardy_certificate_with<T: Real>(
    state: &BipartitePureState<T>,
    a: &[GeneralMeasurement<T>; 2],
    b: &[GeneralMeasurement<T>; 2],
) -> Result<HardyCertificate<T>> {
    require_qubits(state)?;
    HardyCertificate::from_behavior(&behavior(state, a, b)?)
}

/// Which of the three zero constraints an LHV model must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HardyConstraints {
    pub xz_mm: bool,
    pub zx_mm: bool,
    pub zz_pp: bool,
}

impl HardyConstraints {
    pub const ALL: Self = Self {
        xz_mm: true,
        zx_mm: true,
        zz_pp: true,
    };
    pub const NONE: Self = Self {
        xz_mm: false,
        zx_mm: false,
        zz_pp: false,
    };
}

/// A deterministic local assignment of `+-1` outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub a_x: i8,
    pub a_z: i8,
    pub b_x: i8,
    pub b_z: i8,
}

/// Outcome of the exhaustive 16-assignment sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LhvProof {
    pub constraints: HardyConstraints,
    pub checked: usize,
    /// Assignments compatible with the imposed zeros.
    pub compatible: Vec<Assignment>,
    /// Compatible assignments that also produce `(a_x, b_x) = (-1, -1)`.
    pub with_xx_mm: Vec<Assignment>,
}

impl LhvProof {
    /// `true` when no compatible assignment reaches `(-1, -1)` in `x, x`,
    /// so any mixture satisfying the zeros has `p_xx_mm = 0`.
    pub fn contradiction(&self) -> bool {
        self.with_xx_mm.is_empty()
    }
}

pub fn lhv_contradiction(constraints: HardyConstraints) -> LhvProof {
    let sign = |bit: u32| if bit == 0 { 1i8 } else { -1 };
    let all: Vec<Assignment> = (0..16u32)
        .map(|m| Assignment {
            a_x: sign(m & 1),
            a_z: sign((m >> 1) & 1),
            b_x: sign((m >> 2) & 1),
            b_z: sign((m >> 3) & 1),
        })
        .collect();
    let compatible: Vec<Assignment> = all
        .iter()
        .copied()
        .filter(|s| {
            !(constraints.xz_mm && s.a_x == -1 && s.b_z == -1)
                && !(constraints.zx_mm && s.a_z == -1 && s.b_x == -1)
                && !(constraints.zz_pp && s.a_z == 1 && s.b_z == 1)
        })
        .collect();
    let with_xx_mm = compatible.iter().copied().filter(|s| s.a_x == -1 && s.b_x == -1).collect();
    LhvProof {
        constraints,
        checked: all.len(),
        compatible,
        with_xx_mm,
    }
}

/// Largest Hardy probability for a theta-state over real local bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyOptimum<T> {
    pub theta: T,
    pub probability: T,
    /// Rotation angles `(a_z, a_x, b_z, b_x)`: each `+1` vector is
    /// `cos t |0> + sin t |1>`.
    pub angles: [T; 4],
    pub certificate: HardyCertificate<T>,
}

fn perp<T: Real>(v: [T; 2]) -> [T; 2] {
    [-v[1], v[0]]
}

fn unit<T: Real>(v: [T; 2]) -> Option<[T; 2]> {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    (n > T::epsilon()).then(|| [v[0] / n, v[1] / n])
}

/// Imposes the three zeros in closed form given Alice's `z` angle, for the
/// state matrix `diag(c, s)`. Returns the four `+1` angles and the Hardy
/// probability, or `None` at degenerate points.
fn eliminate<T: Real>(c: T, s: T, t: T) -> Option<([T; 4], T)> {
    let m = |v: [T; 2]| [c * v[0], s * v[1]];
    let angle = |v: [T; 2]| v[1].atan2(v[0]);
    let uz_p = [t.cos(), t.sin()];
    let uz_m = perp(uz_p);
    // <uz+| M |vz+> = 0
    let vz_m = unit(m(uz_p))?;
    let vz_p = [vz_m[1], -vz_m[0]];
    // <ux-| M |vz-> = 0
    let ux_m = perp(unit(m(vz_m))?);
    // <uz-| M |vx-> = 0
    let vx_m = perp(unit(m(uz_m))?);
    let amp = ux_m[0] * c * vx_m[0] + ux_m[1] * s * vx_m[1];
    let half_pi = T::FRAC_PI_2();
    Some((
        [t, angle(ux_m) - half_pi, angle(vz_p), angle(vx_m) - half_pi],
        amp * amp,
    ))
}

fn real_basis<T: Real>(t: T) -> GeneralMeasurement<T> {
    BlochMeasurement::from_angles(T::lit(2.0) * t, T::zero()).measurement()
}

/// Maximizes the Hardy probability over real local bases for
/// `cos(theta)|00> + sin(theta)|11>`, with the zeros imposed exactly.
pub fn optimize_hardy<T: Real>(theta: T) -> Result<HardyOptimum<T>> {
    let state = BipartitePureState::theta(theta)?;
    let (c, s) = (theta.cos(), theta.sin());
    let f = |t: T| eliminate(c, s, t).map(|r| r.1).unwrap_or(T::zero());
    let n = 720;
    let step = T::PI() / T::from_usize(n).unwrap();
    let mut best = 0;
    let mut best_v = T::neg_infinity();
    for i in 0..n {
        let v = f(step * T::from_usize(i).unwrap());
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    let t0 = step * T::from_usize(best).unwrap();
    let (t, _, _) = golden_section_max(f, t0 - step, t0 + step, T::lit(1e-12));
    let (angles, probability) = eliminate(c, s, t).unwrap_or(([t, t, t, t], T::zero()));
    let a = [real_basis(angles[0]), real_basis(angles[1])];
    let b = [real_basis(angles[2]), real_basis(angles[3])];
    let certificate = hardy_certificate_with(&state, &a, &b)?;
    Ok(HardyOptimum {
        theta,
        probability,
        angles,
        certificate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyScanRow<T> {
    pub theta: T,
    /// Paradox flag with fixed `sigma_z` / `sigma_x` measurements.
    pub holds: bool,
    /// `p_xx_mm` with fixed `sigma_z` / `sigma_x` measurements.
    pub p_xx_mm: T,
    /// Hardy probability after optimizing the local bases.
    pub optimized_probability: T,
    pub optimized_holds: bool,
}

pub fn hardy_scan<T: Real>(thetas: &[T]) -> Result<Vec<HardyScanRow<T>>> {
    thetas
        .par_iter()
        .map(|&theta| {
            let fixed = hardy_certificate(&BipartitePureState::theta(theta)?)?;
            let opt = optimize_hardy(theta)?;
            Ok(HardyScanRow {
                theta,
                holds: fixed.holds,
                p_xx_mm: fixed.p_xx_mm,
                optimized_probability: opt.probability,
                optimized_holds: opt.certificate.holds,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn hardy_state_certificate() {
        let c = hardy_certificate(&BipartitePureState::<f64>::hardy()).unwrap();
        assert!((c.p_xx_mm - 1.0 / 12.0).abs() < 1e-12);
        assert!(c.zeros().iter().all(|z| z.abs() < 1e-12));
        assert!(c.holds);
    }

    #[test]
    fn exceptions() {
        let product = BipartitePureState::<f64>::basis(2, 2, 0, 0).unwrap();
        assert!(!hardy_certificate(&product).unwrap().holds);
        let max = BipartitePureState::<f64>::theta(FRAC_PI_4).unwrap();
        assert!(!hardy_certificate(&max).unwrap().holds);
    }

    #[test]
    fn qutrit_rejected() {
        let s = BipartitePureState::<f64>::maximally_entangled(3).unwrap();
        assert!(matches!(hardy_certificate(&s), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lhv_sweeps() {
        let full = lhv_contradiction(HardyConstraints::ALL);
        assert_eq!(full.checked, 16);
        assert!(full.contradiction());
        let no_zz = lhv_contradiction(HardyConstraints {
            zz_pp: false,
            ..HardyConstraints::ALL
        });
        assert!(!no_zz.with_xx_mm.is_empty());
        assert_eq!(lhv_contradiction(HardyConstraints::NONE).with_xx_mm.len(), 4);
    }

    #[test]
    fn optimized_probability_vanishes_at_endpoints() {
        assert!(optimize_hardy(0.0f64).unwrap().probability < 1e-6);
        assert!(optimize_hardy(FRAC_PI_4).unwrap().probability < 1e-6);
        let mid = optimize_hardy(0.3f64).unwrap();
        assert!(mid.probability > 1e-4);
        assert!(mid.certificate.holds);
        assert!((mid.certificate.p_xx_mm - mid.probability).abs() < 1e-12);
    }
}
