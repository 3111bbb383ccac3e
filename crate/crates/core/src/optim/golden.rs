use crate::scalar::Real;

/// Golden-section search for the maximum of a unimodal function on
/// `[lo, hi]`. Returns `(argmax, max, iterations)`.
pub fn golden_section_max<T, F>(mut f: F, lo: T, hi: T, tol: T) -> (T, T, usize)
where
    T: Real,
    F: FnMut(T) -> T,
{
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > tol && iterations < 200 {
        iterations += 1;
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc, iterations)
    } else {
        (d, fd, iterations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let (x, v, _) = golden_section_max(|x: f64| 1.0 - (x - 0.62).powi(2), 0.0, 1.5, 1e-9);
        assert!((x - 0.62).abs() < 1e-8);
        assert!((v - 1.0).abs() < 1e-15);
    }
}
