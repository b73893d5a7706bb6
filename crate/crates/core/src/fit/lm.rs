//! Damped least-squares (Levenberg-Marquardt) minimizer for the small
//! fitting problems in this crate (≤ 8 parameters, up to a few thousand
//! residuals).
//!
//! Deterministic: identical problems and starting points produce
//! bit-identical results. Jacobians are analytic where the problem
//! provides them and central finite differences (relative step 1e-6)
//! otherwise. Convergence when the relative parameter step drops below
//! 1e-9 or the gradient infinity-norm below 1e-10, capped at 500
//! iterations. Box constraints are handled by projection.

/// A least-squares problem: residual vector and optionally its Jacobian.
pub trait LmProblem {
    fn residual_count(&self) -> usize;

    fn residuals(&self, params: &[f64], out: &mut [f64]);

    /// Fill the row-major `residual_count x params.len()` Jacobian and
    /// return true, or return false to request finite differences.
    fn jacobian(&self, _params: &[f64], _out: &mut [f64]) -> bool {
        false
    }
}

/// Solver options. Defaults carry the tolerances used across the crate.
#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub relative_step_tolerance: f64,
    pub gradient_tolerance: f64,
    pub finite_difference_relative_step: f64,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            relative_step_tolerance: 1e-9,
            gradient_tolerance: 1e-10,
            finite_difference_relative_step: 1e-6,
            initial_lambda: 1e-3,
        }
    }
}

/// Minimization outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    pub params: Vec<f64>,
    /// Linearized one-sigma standard errors from the covariance at the
    /// solution; infinite where the normal matrix is not invertible.
    pub std_errors: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Root-mean-square residual at the solution.
    pub residual_rms: f64,
    /// Gradient infinity-norm at the solution.
    pub gradient_norm: f64,
    /// Final cost `½ Σ r²`.
    pub cost: f64,
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn clamp_into(params: &mut [f64], lower: &[f64], upper: &[f64]) {
    for i in 0..params.len() {
        params[i] = params[i].clamp(lower[i], upper[i]);
    }
}

fn finite_difference_jacobian(
    problem: &impl LmProblem,
    params: &[f64],
    lower: &[f64],
    upper: &[f64],
    rel_step: f64,
    jac: &mut [f64],
) {
    let m = problem.residual_count();
    let n = params.len();
    let mut fwd = vec![0.0; m];
    let mut bwd = vec![0.0; m];
    let mut p = params.to_vec();
    for j in 0..n {
        let h = rel_step * params[j].abs().max(1e-3);
        let hi = (params[j] + h).min(upper[j] + h); // probing just past a bound is fine
        let lo = (params[j] - h).max(lower[j] - h);
        p[j] = hi;
        problem.residuals(&p, &mut fwd);
        p[j] = lo;
        problem.residuals(&p, &mut bwd);
        p[j] = params[j];
        let denom = hi - lo;
        for i in 0..m {
            jac[i * n + j] = (fwd[i] - bwd[i]) / denom;
        }
    }
}

/// Solve `A x = b` for a small symmetric system by Gaussian elimination
/// with partial pivoting. Returns false when the matrix is singular.
fn solve_symmetric(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return false;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in col + 1..n {
            sum -= a[col * n + k] * b[k];
        }
        b[col] = sum / a[col * n + col];
    }
    true
}

/// Invert a small matrix in place via Gauss-Jordan; returns None when
/// singular.
fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut work = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if work[row * n + col].abs() > work[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if work[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                work.swap(col * n + k, pivot * n + k);
                inv.swap(col * n + k, pivot * n + k);
            }
        }
        let scale = 1.0 / work[col * n + col];
        for k in 0..n {
            work[col * n + k] *= scale;
            inv[col * n + k] *= scale;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = work[row * n + col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..n {
                work[row * n + k] -= factor * work[col * n + k];
                inv[row * n + k] -= factor * inv[col * n + k];
            }
        }
    }
    Some(inv)
}

/// Run the minimizer from `x0` inside the box `[lower, upper]`.
pub fn levenberg_marquardt(
    problem: &impl LmProblem,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &LmOptions,
) -> LmResult {
    let n = x0.len();
    let m = problem.residual_count();
    assert_eq!(lower.len(), n);
    assert_eq!(upper.len(), n);

    let mut x = x0.to_vec();
    clamp_into(&mut x, lower, upper);

    let mut residuals = vec![0.0; m];
    problem.residuals(&x, &mut residuals);
    let mut cost = cost_of(&residuals);

    let mut jac = vec![0.0; m * n];
    let mut lambda = opts.initial_lambda;
    let mut nu = 2.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut gradient_norm = f64::INFINITY;

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;

        if !problem.jacobian(&x, &mut jac) {
            finite_difference_jacobian(
                problem,
                &x,
                lower,
                upper,
                opts.finite_difference_relative_step,
                &mut jac,
            );
        }

        // Normal equations: JtJ and gradient Jt r.
        let mut jtj = vec![0.0; n * n];
        let mut grad = vec![0.0; n];
        for i in 0..m {
            let row = &jac[i * n..(i + 1) * n];
            let r = residuals[i];
            for a in 0..n {
                grad[a] += row[a] * r;
                for b in a..n {
                    jtj[a * n + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                jtj[a * n + b] = jtj[b * n + a];
            }
        }

        gradient_norm = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if gradient_norm <= opts.gradient_tolerance {
            converged = true;
            break;
        }

        // Damped step; retry with larger lambda until the cost drops or
        // the trial steps shrink below the step tolerance (x-convergence
        // at a numerical optimum).
        let mut stepped = false;
        let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for _ in 0..32 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[d * n + d] += lambda * jtj[d * n + d].max(1e-12);
            }
            let mut step: Vec<f64> = grad.iter().map(|g| -g).collect();
            if !solve_symmetric(&mut a, &mut step, n) {
                lambda *= nu;
                nu *= 2.0;
                continue;
            }

            let mut trial: Vec<f64> = (0..n).map(|i| x[i] + step[i]).collect();
            clamp_into(&mut trial, lower, upper);
            let step_norm = (0..n)
                .map(|i| (trial[i] - x[i]) * (trial[i] - x[i]))
                .sum::<f64>()
                .sqrt();
            let mut trial_residuals = vec![0.0; m];
            problem.residuals(&trial, &mut trial_residuals);
            let trial_cost = cost_of(&trial_residuals);

            if trial_cost.is_finite() && trial_cost < cost {
                let actual_step: Vec<f64> = (0..n).map(|i| trial[i] - x[i]).collect();
                let predicted = 0.5
                    * actual_step
                        .iter()
                        .enumerate()
                        .map(|(i, s)| s * (lambda * jtj[i * n + i].max(1e-12) * s - grad[i]))
                        .sum::<f64>();
                let rho = if predicted > 0.0 {
                    (cost - trial_cost) / predicted
                } else {
                    1.0
                };
                lambda *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
                lambda = lambda.max(1e-14);
                nu = 2.0;

                x = trial;
                residuals = trial_residuals;
                cost = trial_cost;
                stepped = true;

                if step_norm <= opts.relative_step_tolerance * (x_norm + 1e-12) {
                    converged = true;
                }
                break;
            }

            if step_norm <= opts.relative_step_tolerance * (x_norm + 1e-12) {
                // Even a sub-tolerance step cannot improve the cost.
                converged = true;
                break;
            }
            lambda *= nu;
            nu *= 2.0;
            if lambda > 1e16 {
                break;
            }
        }

        if converged || !stepped {
            break;
        }
    }

    // Covariance from the undamped normal matrix at the solution.
    if !problem.jacobian(&x, &mut jac) {
        finite_difference_jacobian(
            problem,
            &x,
            lower,
            upper,
            opts.finite_difference_relative_step,
            &mut jac,
        );
    }
    let mut jtj = vec![0.0; n * n];
    for i in 0..m {
        let row = &jac[i * n..(i + 1) * n];
        for a in 0..n {
            for b in a..n {
                jtj[a * n + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            jtj[a * n + b] = jtj[b * n + a];
        }
    }
    problem.residuals(&x, &mut residuals);
    let final_cost = cost_of(&residuals);
    let dof = m.saturating_sub(n).max(1) as f64;
    let variance = 2.0 * final_cost / dof;
    let std_errors = match invert(&jtj, n) {
        Some(inv) => (0..n)
            .map(|i| {
                let v = inv[i * n + i] * variance;
                if v.is_finite() && v >= 0.0 {
                    v.sqrt()
                } else {
                    f64::INFINITY
                }
            })
            .collect(),
        None => vec![f64::INFINITY; n],
    };

    LmResult {
        params: x,
        std_errors,
        iterations,
        converged,
        residual_rms: (2.0 * final_cost / m as f64).sqrt(),
        gradient_norm,
        cost: final_cost,
    }
}

/// Unbounded convenience wrapper.
pub fn levenberg_marquardt_unbounded(
    problem: &impl LmProblem,
    x0: &[f64],
    opts: &LmOptions,
) -> LmResult {
    let lower = vec![f64::NEG_INFINITY; x0.len()];
    let upper = vec![f64::INFINITY; x0.len()];
    levenberg_marquardt(problem, x0, &lower, &upper, opts)
}
