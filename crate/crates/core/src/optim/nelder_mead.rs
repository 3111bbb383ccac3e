use crate::scalar::Real;

/// Derivative-free downhill simplex minimizer.
///
/// Stops when the largest distance from the best vertex to any other
/// vertex drops below `diameter_tol`, or after `max_iter` iterations.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead<T> {
    pub max_iter: usize,
    pub diameter_tol: T,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: T,
}

impl<T: Real> Default for NelderMead<T> {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            diameter_tol: T::lit(1e-9),
            initial_step: T::lit(0.25),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Real> NelderMead<T> {
    pub fn with_step(mut self, step: T) -> Self {
        self.initial_step = step;
        self
    }

    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.diameter_tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn minimize<F>(&self, mut f: F, x0: &[T]) -> Minimum<T>
    where
        F: FnMut(&[T]) -> T,
    {
        let n = x0.len();
        assert!(n >= 1, "Nelder-Mead needs at least one parameter");
        let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
        let mut evaluations = 0usize;
        let mut eval = |x: &[T], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                T::infinity()
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), eval(x0, &mut evaluations)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            let v = eval(&x, &mut evaluations);
            simplex.push((x, v));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            let best = &simplex[0].0;
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(best)
                        .map(|(a, b)| (*a - *b) * (*a - *b))
                        .sum::<T>()
                        .sqrt()
                })
                .fold(T::zero(), T::max);
            if diameter < self.diameter_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let nf = T::from_usize(n).unwrap();
            let mut centroid = vec![T::zero(); n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += *xi / nf;
                }
            }
            let worst = simplex[n].clone();
            let along = |t: T| -> Vec<T> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| *c + t * (*c - *w))
                    .collect()
            };

            let xr = along(alpha);
            let fr = eval(&xr, &mut evaluations);
            if fr < simplex[0].1 {
                let xe = along(gamma);
                let fe = eval(&xe, &mut evaluations);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = along(rho);
                let fc = eval(&xc, &mut evaluations);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = eval(&xc, &mut evaluations);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            // shrink toward the best vertex
            let best = simplex[0].0.clone();
            for (x, v) in simplex.iter_mut().skip(1) {
                for (xi, bi) in x.iter_mut().zip(&best) {
                    *xi = *bi + sigma * (*xi - *bi);
                }
                *v = eval(x, &mut evaluations);
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            iterations,
            evaluations,
            converged,
        }
    }

    /// Restarts from the incumbent until a restart no longer improves the
    /// value by more than `improvement`, at most `restarts` times.
    pub fn minimize_restarted<F>(&self, mut f: F, x0: &[T], restarts: usize, improvement: T) -> Minimum<T>
    where
        F: FnMut(&[T]) -> T,
    {
        let mut best = self.minimize(&mut f, x0);
        for _ in 0..restarts {
            let next = self.minimize(&mut f, &best.x);
            let gained = best.value - next.value;
            let merged = Minimum {
                iterations: best.iterations + next.iterations,
                evaluations: best.evaluations + next.evaluations,
                ..if next.value < best.value { next } else { best.clone() }
            };
            best = merged;
            if !(gained > improvement) {
                break;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead::<f64>::default().with_max_iter(5000).with_tolerance(1e-10);
        let m = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn one_dimensional_quadratic() {
        let m = NelderMead::<f64>::default().minimize(|x| (x[0] - 0.3).powi(2), &[2.0]);
        assert!((m.x[0] - 0.3).abs() < 1e-8);
    }

    #[test]
    fn nan_treated_as_worse() {
        let m = NelderMead::<f64>::default().minimize(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) },
            &[0.5],
        );
        assert!((m.x[0] - 1.0).abs() < 1e-6);
    }
}
