use crate::linalg;
use crate::quantum::BipartitePureState;
use crate::scalar::Real;

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn shannon_entropy<T: Real>(probs: &[T]) -> T {
    probs
        .iter()
        .filter(|p| **p > T::zero())
        .map(|&p| -p * p.log2())
        .fold(T::zero(), |acc, h| acc + h)
}

/// Spectrum of `rho_A`, with negative roundoff above `-1e-12` clamped to 0.
pub fn reduced_spectrum_a<T: Real>(state: &BipartitePureState<T>) -> Vec<T> {
    clamp(linalg::hermitian_eigenvalues(&state.reduced_a(), state.dim_a()))
}

pub fn reduced_spectrum_b<T: Real>(state: &BipartitePureState<T>) -> Vec<T> {
    clamp(linalg::hermitian_eigenvalues(&state.reduced_b(), state.dim_b()))
}

fn clamp<T: Real>(eig: Vec<T>) -> Vec<T> {
    let floor = -T::tol(1e-12);
    eig.into_iter()
        .map(|e| if e < T::zero() && e >= floor { T::zero() } else { e })
        .collect()
}

/// Entanglement of a pure state: von Neumann entropy of `rho_A` in bits.
pub fn entanglement_entropy<T: Real>(state: &BipartitePureState<T>) -> T {
    shannon_entropy(&reduced_spectrum_a(state))
}

/// Von Neumann entropy of `rho_B`; equal to [`entanglement_entropy`] for
/// every pure state.
pub fn entropy_b<T: Real>(state: &BipartitePureState<T>) -> T {
    shannon_entropy(&reduced_spectrum_b(state))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximally_entangled_qubits_carry_one_bit() {
        let s = BipartitePureState::<f64>::theta(std::f64::consts::FRAC_PI_4).unwrap();
        assert!((entanglement_entropy(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_entangled_qutrits() {
        let s = BipartitePureState::<f64>::maximally_entangled(3).unwrap();
        assert!((entanglement_entropy(&s) - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn theta_pi_8_binary_entropy() {
        let t = std::f64::consts::FRAC_PI_8;
        let s = BipartitePureState::<f64>::theta(t).unwrap();
        let (p, q) = (t.cos().powi(2), t.sin().powi(2));
        let h = -p * p.log2() - q * q.log2();
        assert!((entanglement_entropy(&s) - h).abs() < 1e-12);
        assert!((h - 0.6009).abs() < 1e-4);
    }

    #[test]
    fn product_state_has_zero_entropy() {
        let s = BipartitePureState::<f64>::basis(3, 3, 1, 2).unwrap();
        assert_eq!(entanglement_entropy(&s), 0.0);
    }

    #[test]
    fn hardy_reduced_spectrum() {
        let e = reduced_spectrum_a(&BipartitePureState::<f64>::hardy());
        // rho_A = [[1/3, 1/3], [1/3, 2/3]]; closed-form 2x2 eigenvalues
        let (tr, det) = (1.0, 2.0 / 9.0 - 1.0 / 9.0);
        let disc: f64 = (tr * tr / 4.0 - det as f64).sqrt();
        assert!((e[0] - (tr / 2.0 - disc)).abs() < 1e-12);
        assert!((e[1] - (tr / 2.0 + disc)).abs() < 1e-12);
        assert!((e[0] - (3.0 - 5f64.sqrt()) / 6.0).abs() < 1e-12);
    }
}
