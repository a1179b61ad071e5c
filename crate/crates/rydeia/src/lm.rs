//! Damped least-squares minimization (Levenberg–Marquardt with Nielsen's
//! damping update) over a small number of bounded parameters.
//!
//! The Jacobian is numerically differentiated with central differences at a
//! relative step of 1e-6; parameters are optimized in caller-supplied scale
//! units so the step and gradient tolerances are meaningful across quantities
//! ranging from rad/s frequencies to a dimensionless optical depth. Lower
//! bounds are enforced by projection after every trial step.

use nalgebra::{DMatrix, DVector};

/// Stopping rules and differentiation step.
#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub max_iterations: usize,
    /// Converged when the scaled step satisfies ‖Δz‖ ≤ tol·(‖z‖ + tol).
    pub step_tolerance: f64,
    /// Converged when ‖Jᵀr‖_∞ < tol in scaled units.
    pub gradient_tolerance: f64,
    /// Relative central-difference step for the numerical Jacobian.
    pub relative_step: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            step_tolerance: 1e-10,
            gradient_tolerance: 1e-12,
            relative_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    StepSize,
    GradientNorm,
    MaxIterations,
    /// The damping factor grew past any useful size without finding a
    /// downhill step.
    Stalled,
}

#[derive(Debug, Clone, Copy)]
pub struct Report {
    pub converged: bool,
    pub iterations: usize,
    pub residual_rms: f64,
    pub termination: Termination,
}

/// Minimize ½‖r(x)‖² over `x`, starting from `x0`.
///
/// * `num_residuals` — length of the residual vector filled by `f`;
/// * `f(x, out)` — writes the residuals at `x` into `out`;
/// * `lower` — per-parameter lower bounds (`f64::NEG_INFINITY` for none);
/// * `scales` — positive typical magnitudes used to non-dimensionalize.
///
/// Returns the best parameters found and a convergence report; a
/// non-converged fit still returns the best-so-far point, flagged.
pub fn fit<F>(
    num_residuals: usize,
    mut f: F,
    x0: &[f64],
    lower: &[f64],
    scales: &[f64],
    opts: &Options,
) -> (Vec<f64>, Report)
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x0.len();
    assert_eq!(lower.len(), n);
    assert_eq!(scales.len(), n);
    assert!(scales.iter().all(|&s| s > 0.0), "scales must be positive");
    let m = num_residuals;

    let lb: Vec<f64> = lower.iter().zip(scales).map(|(l, s)| l / s).collect();
    let clamp = |z: &mut [f64], lb: &[f64]| {
        for (zi, li) in z.iter_mut().zip(lb.iter()) {
            if *zi < *li {
                *zi = *li;
            }
        }
    };
    let unscale = |z: &[f64]| -> Vec<f64> { z.iter().zip(scales).map(|(zi, s)| zi * s).collect() };

    let mut z: Vec<f64> = x0.iter().zip(scales).map(|(x, s)| x / s).collect();
    clamp(&mut z, &lb);

    let mut eval = |z: &[f64], out: &mut DVector<f64>| {
        f(&unscale(z), out.as_mut_slice());
    };

    let mut r = DVector::zeros(m);
    eval(&z, &mut r);
    let mut cost = r.norm_squared();

    let mut lambda = -1.0; // initialized from the first JᵀJ diagonal
    let mut nu = 2.0;
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;
    let mut converged = false;

    while iterations < opts.max_iterations {
        iterations += 1;

        // Numerical Jacobian, central differences; one-sided at active bounds.
        let mut jac = DMatrix::zeros(m, n);
        let mut r_plus = DVector::zeros(m);
        let mut r_minus = DVector::zeros(m);
        for j in 0..n {
            let h = opts.relative_step * z[j].abs().max(1.0);
            let zj = z[j];
            if zj - h >= lb[j] {
                let mut zp = z.clone();
                zp[j] = zj + h;
                eval(&zp, &mut r_plus);
                let mut zm = z.clone();
                zm[j] = zj - h;
                eval(&zm, &mut r_minus);
                let inv = 1.0 / (2.0 * h);
                for i in 0..m {
                    jac[(i, j)] = (r_plus[i] - r_minus[i]) * inv;
                }
            } else {
                let mut zp = z.clone();
                zp[j] = zj + h;
                eval(&zp, &mut r_plus);
                let inv = 1.0 / h;
                for i in 0..m {
                    jac[(i, j)] = (r_plus[i] - r[i]) * inv;
                }
            }
        }

        let g = jac.transpose() * &r;
        if g.amax() < opts.gradient_tolerance {
            converged = true;
            termination = Termination::GradientNorm;
            break;
        }

        let a = jac.transpose() * &jac;
        let dmax = (0..n).map(|j| a[(j, j)]).fold(0.0f64, f64::max);
        if lambda < 0.0 {
            lambda = 1e-3 * dmax.max(1e-300);
        }
        let diag_floor = 1e-12 * dmax.max(1e-300);

        // Inner loop: grow the damping until a step decreases the cost.
        let mut stepped = false;
        for _ in 0..40 {
            let mut damped = a.clone();
            for j in 0..n {
                damped[(j, j)] += lambda * a[(j, j)].max(diag_floor);
            }
            let delta = match damped.lu().solve(&(-&g)) {
                Some(d) if d.iter().all(|v| v.is_finite()) => d,
                _ => {
                    lambda *= nu;
                    nu *= 2.0;
                    continue;
                }
            };
            let mut z_try: Vec<f64> = z
                .iter()
                .zip(delta.iter())
                .map(|(zi, di)| zi + di)
                .collect();
            clamp(&mut z_try, &lb);

            let mut r_try = DVector::zeros(m);
            eval(&z_try, &mut r_try);
            let cost_try = r_try.norm_squared();

            let step_norm = delta.norm();
            let z_norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let step_small = step_norm <= opts.step_tolerance * (z_norm + opts.step_tolerance);

            if cost_try.is_finite() && cost_try < cost {
                // Gain ratio against the local quadratic model.
                let mut predicted = 0.0;
                for j in 0..n {
                    predicted += delta[j] * (lambda * a[(j, j)].max(diag_floor) * delta[j] - g[j]);
                }
                let rho = if predicted > 0.0 {
                    (cost - cost_try) / predicted
                } else {
                    1.0
                };
                lambda *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
                nu = 2.0;

                z = z_try;
                r = r_try;
                cost = cost_try;
                stepped = true;
                if step_small {
                    converged = true;
                    termination = Termination::StepSize;
                }
                break;
            }
            // A proposed step below the step tolerance that still cannot
            // reduce the cost means the optimum is resolved to within the
            // requested precision.
            if step_small {
                converged = true;
                termination = Termination::StepSize;
                break;
            }
            lambda *= nu;
            nu *= 2.0;
            if lambda > 1e100 {
                break;
            }
        }

        if converged {
            break;
        }
        if !stepped {
            termination = Termination::Stalled;
            break;
        }
    }

    let report = Report {
        converged,
        iterations,
        residual_rms: (cost / m as f64).sqrt(),
        termination,
    };
    (unscale(&z), report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_lorentzian_dip() {
        // T(x) = offset − amp·w²/((x−c)² + w²), sampled exactly.
        let truth = [2.0e6_f64, 0.5e6, 0.8, 1.0];
        let xs: Vec<f64> = (0..121).map(|k| 0.1e6 * k as f64 - 4.0e6).collect();
        let model = |p: &[f64], x: f64| {
            let (c, w, a, o) = (p[0], p[1], p[2], p[3]);
            o - a * w * w / ((x - c) * (x - c) + w * w)
        };
        let data: Vec<f64> = xs.iter().map(|&x| model(&truth, x)).collect();

        let residual = |p: &[f64], out: &mut [f64]| {
            for (i, (&x, &d)) in xs.iter().zip(data.iter()).enumerate() {
                out[i] = model(p, x) - d;
            }
        };
        let x0 = [1.2e6, 1.0e6, 0.5, 0.9];
        let lower = [f64::NEG_INFINITY, 1.0, 0.0, f64::NEG_INFINITY];
        let scales = [1.0e6, 1.0e6, 1.0, 1.0];
        let (x, report) = fit(xs.len(), residual, &x0, &lower, &scales, &Options::default());
        assert!(report.converged, "{report:?}");
        for (got, want) in x.iter().zip(truth.iter()) {
            assert!(
                (got - want).abs() <= 1e-8 * want.abs(),
                "{got} vs {want} ({report:?})"
            );
        }
    }

    #[test]
    fn respects_lower_bounds() {
        // Minimize (x + 3)² subject to x >= 0: optimum at the bound.
        let residual = |p: &[f64], out: &mut [f64]| {
            out[0] = p[0] + 3.0;
        };
        let (x, report) = fit(1, residual, &[5.0], &[0.0], &[1.0], &Options::default());
        assert!(x[0].abs() <= 1e-9, "{x:?} {report:?}");
    }

    #[test]
    fn linear_problem_is_solved_exactly() {
        let residual = |p: &[f64], out: &mut [f64]| {
            out[0] = 2.0 * p[0] + p[1] - 5.0;
            out[1] = p[0] - p[1] - 1.0;
            out[2] = p[0] + p[1] - 3.0;
        };
        let (x, report) = fit(
            3,
            residual,
            &[0.0, 0.0],
            &[f64::NEG_INFINITY, f64::NEG_INFINITY],
            &[1.0, 1.0],
            &Options::default(),
        );
        assert!(report.converged);
        assert!((x[0] - 2.0).abs() < 1e-8 && (x[1] - 1.0).abs() < 1e-8, "{x:?}");
    }
}
