use num_complex::Complex;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// A pure state of two finite-dimensional systems, stored as the amplitude
/// table `c[j][k]` of `sum_jk c_jk |j>|k>` in row-major order.
///
/// States are validated to unit norm on construction and never mutated.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitePureState<T> {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> BipartitePureState<T> {
    /// Builds a state from an already normalized amplitude table.
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if dim_a < 2 {
            return Err(Error::OutOfRange {
                what: "dim_a",
                value: dim_a as f64,
                range: ">= 2",
            });
        }
        if dim_b < 2 {
            return Err(Error::OutOfRange {
                what: "dim_b",
                value: dim_b as f64,
                range: ">= 2",
            });
        }
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                found: amplitudes.len(),
            });
        }
        let n = linalg::norm_sqr(&amplitudes);
        if (n - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::NotNormalized { norm_sqr: n.as_f64() });
        }
        Ok(Self {
            dim_a,
            dim_b,
            amplitudes,
        })
    }

    /// Builds a state from an arbitrary nonzero amplitude table, rescaling
    /// it to unit norm.
    pub fn normalized(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let n = linalg::norm_sqr(&amplitudes).sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::NotNormalized {
                norm_sqr: (n * n).as_f64(),
            });
        }
        Self::new(dim_a, dim_b, amplitudes.into_iter().map(|z| z / n).collect())
    }

    /// `sum_n c_n |n>|n>` for nonnegative Schmidt coefficients, rescaled to
    /// unit norm.
    pub fn schmidt_diagonal(coefficients: &[T]) -> Result<Self> {
        let d = coefficients.len();
        if let Some(c) = coefficients.iter().find(|c| **c < T::zero()) {
            return Err(Error::OutOfRange {
                what: "schmidt coefficient",
                value: c.as_f64(),
                range: ">= 0",
            });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); d * d];
        for (n, c) in coefficients.iter().enumerate() {
            amps[n * d + n] = Complex::new(*c, T::zero());
        }
        Self::normalized(d, d, amps)
    }

    /// `cos(theta)|00> + sin(theta)|11>` for `theta` in `[0, pi/4]`.
    pub fn theta(theta: T) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::FRAC_PI_4() + T::tol(1e-15)) {
            return Err(Error::OutOfRange {
                what: "theta",
                value: theta.as_f64(),
                range: "[0, pi/4]",
            });
        }
        let z = Complex::new(T::zero(), T::zero());
        let amps = vec![
            Complex::new(theta.cos(), T::zero()),
            z,
            z,
            Complex::new(theta.sin(), T::zero()),
        ];
        Self::normalized(2, 2, amps)
    }

    /// `(|00> + gamma|11> + |22>) / sqrt(2 + gamma^2)`.
    pub fn gamma(gamma: T) -> Result<Self> {
        if !(gamma >= T::zero()) || !gamma.is_finite() {
            return Err(Error::OutOfRange {
                what: "gamma",
                value: gamma.as_f64(),
                range: ">= 0",
            });
        }
        Self::schmidt_diagonal(&[T::one(), gamma, T::one()])
    }

    /// `(|01> + |10> + |11>) / sqrt(3)` in the z basis.
    pub fn hardy() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        let o = Complex::new(T::one() / T::lit(3.0).sqrt(), T::zero());
        Self {
            dim_a: 2,
            dim_b: 2,
            amplitudes: vec![z, o, o, o],
        }
    }

    /// `sum_k |k>|k> / sqrt(d)`.
    pub fn maximally_entangled(d: usize) -> Result<Self> {
        Self::schmidt_diagonal(&vec![T::one(); d])
    }

    /// The product basis state `|j>|k>`.
    pub fn basis(dim_a: usize, dim_b: usize, j: usize, k: usize) -> Result<Self> {
        if j >= dim_a || k >= dim_b {
            return Err(Error::OutOfRange {
                what: "basis index",
                value: j.max(k) as f64,
                range: "< dimension",
            });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim_a * dim_b];
        amps[j * dim_b + k] = Complex::new(T::one(), T::zero());
        Self::new(dim_a, dim_b, amps)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn amplitude(&self, j: usize, k: usize) -> Complex<T> {
        self.amplitudes[j * self.dim_b + k]
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        linalg::norm_sqr(&self.amplitudes)
    }

    /// `rho_A = Tr_B |psi><psi|`, row-major `dim_a x dim_a`.
    pub fn reduced_a(&self) -> Vec<Complex<T>> {
        let (da, db) = (self.dim_a, self.dim_b);
        let mut rho = vec![Complex::new(T::zero(), T::zero()); da * da];
        for i in 0..da {
            for j in 0..da {
                rho[i * da + j] = (0..db)
                    .map(|k| self.amplitude(i, k) * self.amplitude(j, k).conj())
                    .fold(Complex::new(T::zero(), T::zero()), |s, z| s + z);
            }
        }
        rho
    }

    /// `rho_B = Tr_A |psi><psi|`, row-major `dim_b x dim_b`.
    pub fn reduced_b(&self) -> Vec<Complex<T>> {
        let (da, db) = (self.dim_a, self.dim_b);
        let mut rho = vec![Complex::new(T::zero(), T::zero()); db * db];
        for i in 0..db {
            for j in 0..db {
                rho[i * db + j] = (0..da)
                    .map(|k| self.amplitude(k, i) * self.amplitude(k, j).conj())
                    .fold(Complex::new(T::zero(), T::zero()), |s, z| s + z);
            }
        }
        rho
    }

    /// Recovers `theta` when the state is `cos(theta)|00> + sin(theta)|11>`
    /// with real nonnegative coefficients.
    pub fn theta_parameter(&self) -> Result<T> {
        let tol = T::tol(1e-12);
        if self.dim_a != 2 || self.dim_b != 2 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: self.dim_a * self.dim_b,
            });
        }
        let c00 = self.amplitude(0, 0);
        let c11 = self.amplitude(1, 1);
        let off = self.amplitude(0, 1).norm() + self.amplitude(1, 0).norm();
        if off > tol || c00.im.abs() > tol || c11.im.abs() > tol || c00.re < -tol || c11.re < -tol
        {
            return Err(Error::NotThetaState);
        }
        Ok(c11.re.max(T::zero()).atan2(c00.re.max(T::zero())))
    }
}

impl<T: Real + Serialize> Serialize for BipartitePureState<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[T; 2]>> = (0..self.dim_a)
            .map(|j| {
                (0..self.dim_b)
                    .map(|k| {
                        let z = self.amplitude(j, k);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        let mut s = serializer.serialize_struct("BipartitePureState", 3)?;
        s.serialize_field("dim_a", &self.dim_a)?;
        s.serialize_field("dim_b", &self.dim_b)?;
        s.serialize_field("amplitudes", &rows)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn theta_state_endpoints() {
        let s = BipartitePureState::<f64>::theta(FRAC_PI_4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(0, 0).re - h).abs() < 1e-15);
        assert!((s.amplitude(1, 1).re - h).abs() < 1e-15);
        let s0 = BipartitePureState::<f64>::theta(0.0).unwrap();
        assert_eq!(s0.amplitude(0, 0).re, 1.0);
        assert_eq!(s0.amplitude(1, 1).re, 0.0);
    }

    #[test]
    fn theta_pi_8_is_normalized() {
        let s = BipartitePureState::<f64>::theta(FRAC_PI_8).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((s.amplitude(0, 0).re - FRAC_PI_8.cos()).abs() < 1e-15);
    }

    #[test]
    fn theta_out_of_range_rejected() {
        assert!(matches!(
            BipartitePureState::<f64>::theta(1.0),
            Err(Error::OutOfRange { .. })
        ));
        assert!(BipartitePureState::<f64>::theta(-0.1).is_err());
    }

    #[test]
    fn gamma_states() {
        let one = BipartitePureState::<f64>::gamma(1.0).unwrap();
        for n in 0..3 {
            assert!((one.amplitude(n, n).re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
        let g = (11f64.sqrt() - 3f64.sqrt()) / 2.0;
        let s = BipartitePureState::<f64>::gamma(g).unwrap();
        // g = 0.792287, 2 + g^2 = 2.627718
        assert!((s.amplitude(0, 0).re - 0.616894).abs() < 5e-6);
        assert!((s.amplitude(1, 1).re - 0.488757).abs() < 5e-6);
        assert!((s.amplitude(2, 2).re - 0.616894).abs() < 5e-6);
        let zero = BipartitePureState::<f64>::gamma(0.0).unwrap();
        assert_eq!(zero.amplitude(1, 1).re, 0.0);
        assert!((zero.amplitude(0, 0).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(BipartitePureState::<f64>::gamma(-1e-3).is_err());
    }

    #[test]
    fn hardy_state_shape() {
        let s = BipartitePureState::<f64>::hardy();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(s.amplitude(0, 0).norm(), 0.0);
    }

    #[test]
    fn unnormalized_input_rejected() {
        let amps = vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.0), Complex::default(), Complex::default()];
        assert!(matches!(
            BipartitePureState::<f64>::new(2, 2, amps.clone()),
            Err(Error::NotNormalized { .. })
        ));
        assert!(BipartitePureState::<f64>::normalized(2, 2, amps).is_ok());
    }

    #[test]
    fn theta_parameter_round_trip() {
        let s = BipartitePureState::<f64>::theta(0.3).unwrap();
        assert!((s.theta_parameter().unwrap() - 0.3).abs() < 1e-14);
        assert_eq!(
            BipartitePureState::<f64>::hardy().theta_parameter(),
            Err(Error::NotThetaState)
        );
    }

    #[test]
    fn serializes_complex_as_pairs() {
        let s = BipartitePureState::<f64>::basis(2, 2, 0, 1).unwrap();
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["amplitudes"][0][1], serde_json::json!([1.0, 0.0]));
        assert_eq!(json["dim_a"], 2);
    }
}
