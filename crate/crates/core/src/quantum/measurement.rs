use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// A projective measurement given by one orthonormal vector per outcome.
/// Outcome `i` is the projector `|v_i><v_i|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralMeasurement<T> {
    vectors: Vec<Vec<Complex<T>>>,
}

impl<T: Real> GeneralMeasurement<T> {
    pub fn new(vectors: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let d = vectors.len();
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        let defect = linalg::orthonormality_defect(&vectors);
        if defect > T::tol(1e-12) {
            return Err(Error::NotOrthonormal {
                deviation: defect.as_f64(),
            });
        }
        Ok(Self { vectors })
    }

    /// The computational basis of a `d`-level system.
    pub fn computational(d: usize) -> Self {
        let vectors = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let x = if i == j { T::one() } else { T::zero() };
                        Complex::new(x, T::zero())
                    })
                    .collect()
            })
            .collect();
        Self { vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn outcomes(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, outcome: usize) -> &[Complex<T>] {
        &self.vectors[outcome]
    }

    pub fn vectors(&self) -> &[Vec<Complex<T>>] {
        &self.vectors
    }

    /// Largest entry of `|sum_i |v_i><v_i| - I|`.
    pub fn completeness_defect(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for r in 0..d {
            for c in 0..d {
                let s = self
                    .vectors
                    .iter()
                    .map(|v| v[r] * v[c].conj())
                    .fold(Complex::new(T::zero(), T::zero()), |a, z| a + z);
                let target = if r == c { T::one() } else { T::zero() };
                worst = worst.max((s - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }
}

/// Qubit measurement of the observable `n . sigma`; outcome `+1` is
/// index 0 and `-1` is index 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochMeasurement<T> {
    direction: [T; 3],
}

impl<T: Real> BlochMeasurement<T> {
    pub fn new(direction: [T; 3]) -> Result<Self> {
        let n = direction.iter().map(|c| *c * *c).sum::<T>().sqrt();
        if (n - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::OutOfRange {
                what: "|n|",
                value: n.as_f64(),
                range: "1",
            });
        }
        Ok(Self { direction })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn along(v: [T; 3]) -> Result<Self> {
        let n = v.iter().map(|c| *c * *c).sum::<T>().sqrt();
        if !(n > T::zero()) {
            return Err(Error::OutOfRange {
                what: "|n|",
                value: 0.0,
                range: "> 0",
            });
        }
        Self::new([v[0] / n, v[1] / n, v[2] / n])
    }

    /// Direction from spherical angles: polar from +z, azimuth from +x.
    pub fn from_angles(polar: T, azimuth: T) -> Self {
        Self {
            direction: [
                polar.sin() * azimuth.cos(),
                polar.sin() * azimuth.sin(),
                polar.cos(),
            ],
        }
    }

    pub fn x() -> Self {
        Self {
            direction: [T::one(), T::zero(), T::zero()],
        }
    }

    pub fn y() -> Self {
        Self {
            direction: [T::zero(), T::one(), T::zero()],
        }
    }

    pub fn z() -> Self {
        Self {
            direction: [T::zero(), T::zero(), T::one()],
        }
    }

    pub fn direction(&self) -> [T; 3] {
        self.direction
    }

    /// `(polar, azimuth)` such that [`Self::from_angles`] reproduces the direction.
    pub fn angles(&self) -> (T, T) {
        let [x, y, z] = self.direction;
        (z.max(-T::one()).min(T::one()).acos(), y.atan2(x))
    }

    /// Eigenvectors of `n . sigma` for `+1` and `-1`.
    pub fn eigenvectors(&self) -> [[Complex<T>; 2]; 2] {
        let (polar, azimuth) = self.angles();
        let half = polar / T::lit(2.0);
        let phase = Complex::from_polar(T::one(), azimuth);
        let c = Complex::new(half.cos(), T::zero());
        let s = Complex::new(half.sin(), T::zero());
        [[c, phase * s], [-s, phase * c]]
    }

    pub fn measurement(&self) -> GeneralMeasurement<T> {
        let [plus, minus] = self.eigenvectors();
        GeneralMeasurement {
            vectors: vec![plus.to_vec(), minus.to_vec()],
        }
    }

    /// The 2x2 matrix `n . sigma`, row-major.
    pub fn observable(&self) -> [Complex<T>; 4] {
        let [x, y, z] = self.direction;
        let zero = T::zero();
        [
            Complex::new(z, zero),
            Complex::new(x, -y),
            Complex::new(x, y),
            Complex::new(-z, zero),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

/// A qutrit setting from the phase-then-Fourier family: a phase shift
/// `|n> -> e^{i n phase}|n>` followed by the Fourier transform and a
/// computational-basis measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSetting<T> {
    pub party: Party,
    pub phase: T,
}

impl<T: Real> PhaseSetting<T> {
    pub fn new(party: Party, phase: T) -> Self {
        Self { party, phase }
    }

    pub fn measurement(&self) -> GeneralMeasurement<T> {
        cglmp_projectors(self)
    }
}

/// The three normalized vectors of a CGLMP setting.
///
/// Outcome `k` of party A has components `chi^{k n} e^{i n alpha} / sqrt(3)`,
/// `chi = e^{2 pi i / 3}`; party B uses `chi^{-k n}`.
pub fn cglmp_projectors<T: Real>(setting: &PhaseSetting<T>) -> GeneralMeasurement<T> {
    let norm = T::one() / T::lit(3.0).sqrt();
    let sign = match setting.party {
        Party::A => T::one(),
        Party::B => -T::one(),
    };
    let third = T::lit(2.0) * T::PI() / T::lit(3.0);
    let vectors = (0..3)
        .map(|k| {
            (0..3)
                .map(|n| {
                    let kn = T::from_usize((k * n) % 3).unwrap();
                    let nf = T::from_usize(n).unwrap();
                    Complex::from_polar(norm, sign * third * kn + nf * setting.phase)
                })
                .collect()
        })
        .collect();
    GeneralMeasurement { vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bloch_eigenvectors_are_eigenvectors() {
        let m = BlochMeasurement::<f64>::along([0.3, -0.5, 0.8]).unwrap();
        let obs = m.observable();
        for (idx, v) in m.eigenvectors().iter().enumerate() {
            let lambda = if idx == 0 { 1.0 } else { -1.0 };
            let w0 = obs[0] * v[0] + obs[1] * v[1];
            let w1 = obs[2] * v[0] + obs[3] * v[1];
            assert!((w0 - v[0] * lambda).norm() < 1e-14);
            assert!((w1 - v[1] * lambda).norm() < 1e-14);
        }
        assert!(linalg::orthonormality_defect(m.measurement().vectors()) < 1e-14);
    }

    #[test]
    fn sigma_x_plus_is_the_plus_state() {
        let [plus, _] = BlochMeasurement::<f64>::x().eigenvectors();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((plus[0].re - h).abs() < 1e-15 && (plus[1].re - h).abs() < 1e-15);
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(BlochMeasurement::<f64>::new([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn cglmp_first_vector_is_uniform_superposition() {
        let m = cglmp_projectors(&PhaseSetting::<f64>::new(Party::A, 0.0));
        for z in m.vector(0) {
            assert!((z - Complex::new(1.0 / 3f64.sqrt(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn cglmp_party_b_conjugates_chi() {
        let a = cglmp_projectors(&PhaseSetting::<f64>::new(Party::A, 0.0));
        let b = cglmp_projectors(&PhaseSetting::<f64>::new(Party::B, 0.0));
        let chi = Complex::from_polar(1.0 / 3f64.sqrt(), 2.0 * std::f64::consts::PI / 3.0);
        assert!((a.vector(1)[1] - chi).norm() < 1e-15);
        assert!((b.vector(1)[1] - chi.conj()).norm() < 1e-15);
        assert!((b.vector(2)[1] - chi).norm() < 1e-15);
    }

    #[test]
    fn non_orthogonal_vectors_rejected() {
        let v = vec![
            vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
            vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        ];
        assert!(matches!(
            GeneralMeasurement::<f64>::new(v),
            Err(Error::NotOrthonormal { .. })
        ));
    }
}
