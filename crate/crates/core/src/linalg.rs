//! Dense helpers for the tiny complex matrices that appear here (d <= 9).

use num_complex::Complex;

use crate::scalar::Real;

/// `<u|v>` with the first argument conjugated.
pub fn inner<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    u.iter()
        .zip(v)
        .map(|(a, b)| a.conj() * b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
}

pub fn norm_sqr<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest entry of `|G - I|` where `G` is the Gram matrix of `vectors`.
pub fn orthonormality_defect<T: Real>(vectors: &[Vec<Complex<T>>]) -> T {
    let mut worst = T::zero();
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate() {
            let g = inner(u, v);
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((g - Complex::new(target, T::zero())).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian `n x n` matrix stored row-major, ascending.
///
/// The matrix `X + iY` is embedded as the real symmetric `[[X, -Y], [Y, X]]`,
/// whose spectrum is that of the original with every eigenvalue doubled,
/// and diagonalized with cyclic Jacobi rotations.
pub fn hermitian_eigenvalues<T: Real>(h: &[Complex<T>], n: usize) -> Vec<T> {
    assert_eq!(h.len(), n * n, "matrix must be n x n");
    let m = 2 * n;
    let mut a = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[i * n + j];
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let mut eig = symmetric_eigenvalues(&mut a, m);
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    eig.into_iter().step_by(2).collect()
}

fn symmetric_eigenvalues<T: Real>(a: &mut [T], n: usize) -> Vec<T> {
    let two = T::lit(2.0);
    for _sweep in 0..64 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let scale: T = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum::<T>() + off;
        if off <= T::epsilon() * T::epsilon() * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (two * apq);
                let t = tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
