//! Derivative-free minimizers for the correlation measures.

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
}

struct Cost<'a, F>(&'a F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Cost<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, argmin::core::Error> {
        Ok((self.0)(p))
    }
}

/// Nelder-Mead from `x0` with an axis-aligned initial simplex of size `step`.
/// Stops when the standard deviation of the simplex values drops below `tol`.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, tol: f64, max_iters: u64) -> Minimum {
    let mut simplex = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(tol).expect("non-negative tolerance");
    let run = Executor::new(Cost(f), solver).configure(|s| s.max_iters(max_iters)).run();
    match run {
        Ok(res) => {
            let state = res.state();
            let converged = matches!(
                state.get_termination_status(),
                TerminationStatus::Terminated(TerminationReason::SolverConverged)
            );
            let x = state.get_best_param().cloned().unwrap_or_else(|| x0.to_vec());
            Minimum { value: f(&x), x, converged }
        }
        Err(_) => Minimum { value: f(x0), x: x0.to_vec(), converged: false },
    }
}

/// Compass search: probe `±step` along each coordinate, halve the step when no probe
/// improves, stop once the step is below `tol`.
pub fn coordinate_descent<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, tol: f64, max_evals: usize) -> Minimum {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut step = step;
    let mut evals = 1;
    while step >= tol && evals < max_evals {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += dir * step;
                let fy = f(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Minimum { x, value: fx, converged: step < tol }
}

/// `n` nearly uniform points on the unit sphere, as `(polar, azimuth)` angles.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 2]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            [z.clamp(-1.0, 1.0).acos(), (golden * i as f64).rem_euclid(2.0 * std::f64::consts::PI)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nelder_mead_finds_rosenbrock_minimum() {
        let m = nelder_mead(&rosenbrock, &[-1.2, 1.0], 0.5, 1e-12, 5000);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn compass_search_on_quadratic() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.7).powi(2);
        let m = coordinate_descent(&f, &[0.0, 0.0], 0.5, 1e-8, 100_000);
        assert!(m.converged);
        assert!((m.x[0] - 0.3).abs() < 1e-7 && (m.x[1] + 0.7).abs() < 1e-7);
    }

    #[test]
    fn sphere_points_are_unit_and_spread() {
        let pts = fibonacci_sphere(16);
        assert_eq!(pts.len(), 16);
        let mean_z: f64 = pts.iter().map(|p| p[0].cos()).sum::<f64>() / 16.0;
        assert!(mean_z.abs() < 1e-12);
    }
}
