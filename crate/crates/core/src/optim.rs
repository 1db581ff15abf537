//! Unconstrained minimization for the likelihood fits: Nelder–Mead for a
//! robust start, BFGS with finite-difference gradients to polish, and
//! finite-difference Hessians for observed information.

use nalgebra::{DMatrix, DVector};

/// Outcome of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm of the finite-difference gradient at `x`.
    pub grad_norm: f64,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn gradient_step(x: f64) -> f64 {
    6e-6 * x.abs().max(1.0)
}

/// Central-difference gradient.
pub fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = gradient_step(x[i]);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian with steps `h_i = 1e-4 · max(1, |x_i|)`, symmetrized.
pub fn central_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    let f0 = f(x);
    let mut probe = x.to_vec();
    let mut eval = |di: (usize, f64), dj: (usize, f64)| {
        probe[di.0] += di.1;
        probe[dj.0] += dj.1;
        let v = f(&probe);
        probe[di.0] = x[di.0];
        probe[dj.0] = x[dj.0];
        v
    };
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let fp = eval((i, h[i]), (i, 0.0));
        let fm = eval((i, -h[i]), (i, 0.0));
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let fpp = eval((i, h[i]), (j, h[j]));
            let fpm = eval((i, h[i]), (j, -h[j]));
            let fmp = eval((i, -h[i]), (j, h[j]));
            let fmm = eval((i, -h[i]), (j, -h[j]));
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Downhill simplex. `step` sets the initial simplex edge along each axis.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, ftol: f64, max_iter: usize) -> Minimum {
    let n = x0.len();
    let eval = |x: &[f64]| finite_or_inf(f(x));
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if best.is_finite() && (worst - best).abs() <= ftol * (best.abs() + ftol) {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x_best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *v = eval(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    let grad_norm = sup_norm(&central_gradient(f, &x));
    Minimum {
        x,
        value,
        iterations,
        converged,
        grad_norm,
    }
}

/// Iterations without a 10% drop in the gradient norm before BFGS gives up.
const STALL_LIMIT: usize = 25;

/// Quasi-Newton descent with an Armijo backtracking line search. Converged
/// once the sup-norm of the gradient is at most `gtol`.
pub fn bfgs<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], gtol: f64, max_iter: usize) -> Minimum {
    let n = x0.len();
    let eval = |x: &DVector<f64>| finite_or_inf(f(x.as_slice()));
    let grad = |x: &DVector<f64>| DVector::from_vec(central_gradient(f, x.as_slice()));
    let mut x = DVector::from_column_slice(x0);
    let mut fx = eval(&x);
    let mut g = grad(&x);
    let mut inv_h = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut iterations = 0;
    let mut best_g = g.amax();
    let mut since_best = 0;
    let mut converged = g.amax() <= gtol;
    while !converged && iterations < max_iter && fx.is_finite() {
        iterations += 1;
        let mut dir = -(&inv_h * &g);
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            inv_h = DMatrix::identity(n, n);
            fresh = true;
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + alpha * &dir;
            let ft = eval(&trial);
            if ft <= fx + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let mut g_pre = None;
        if accepted.is_none() {
            // Decreases below rounding noise in f: accept a step that stays
            // level within that noise and shrinks the gradient.
            let noise = 1e-12 * (1.0 + fx.abs());
            let mut alpha = 1.0;
            for _ in 0..20 {
                let trial = &x + alpha * &dir;
                let ft = eval(&trial);
                if ft <= fx + noise {
                    let gt = grad(&trial);
                    if gt.amax() < g.amax() {
                        accepted = Some((trial, ft));
                        g_pre = Some(gt);
                        break;
                    }
                }
                alpha *= 0.5;
            }
        }
        let Some((x_new, f_new)) = accepted else {
            if fresh {
                break;
            }
            inv_h = DMatrix::identity(n, n);
            fresh = true;
            continue;
        };
        let g_new = g_pre.unwrap_or_else(|| grad(&x_new));
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                inv_h *= sy / y.dot(&y);
            }
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(n, n);
            let left = &eye - rho * &s * y.transpose();
            let right = &eye - rho * &y * s.transpose();
            inv_h = &left * &inv_h * &right + rho * &s * s.transpose();
            fresh = false;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        converged = g.amax() <= gtol;
        if g.amax() < 0.9 * best_g {
            best_g = g.amax();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > STALL_LIMIT {
                break;
            }
        }
    }
    Minimum {
        grad_norm: g.amax(),
        x: x.as_slice().to_vec(),
        value: fx,
        iterations,
        converged,
    }
}

/// Newton steps with a finite-difference Hessian, each accepted only if it
/// keeps `f` level within rounding and shrinks the gradient. Finishes stiff
/// problems where quasi-Newton stalls on noise in `f`.
pub fn newton_polish<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], gtol: f64, max_steps: usize) -> Minimum {
    let mut x = DVector::from_column_slice(x0);
    let mut fx = finite_or_inf(f(x0));
    let mut g = DVector::from_vec(central_gradient(f, x0));
    let mut iterations = 0;
    while g.amax() > gtol && iterations < max_steps && fx.is_finite() {
        iterations += 1;
        let Some(chol) = central_hessian(f, x.as_slice()).cholesky() else {
            break;
        };
        let dir = -chol.solve(&g);
        let noise = 1e-12 * (1.0 + fx.abs());
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = &x + alpha * &dir;
            let ft = finite_or_inf(f(trial.as_slice()));
            if ft <= fx + noise {
                let gt = DVector::from_vec(central_gradient(f, trial.as_slice()));
                if gt.amax() < g.amax() {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else {
            break;
        };
        x = xn;
        fx = fnew;
        g = gn;
    }
    Minimum {
        converged: g.amax() <= gtol,
        grad_norm: g.amax(),
        x: x.as_slice().to_vec(),
        value: fx,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn quadratic_hessian_is_exact() {
        let f = |x: &[f64]| 3.0 * x[0] * x[0] + 2.0 * x[0] * x[1] + 0.5 * x[1] * x[1] + x[2] * x[2] * 4.0;
        let h = central_hessian(&f, &[0.3, -1.2, 2.0]);
        let expected = [[6.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 8.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((h[(i, j)] - expected[i][j]).abs() < 1e-5, "{i},{j}: {}", h[(i, j)]);
            }
        }
    }

    #[test]
    fn gradient_of_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * x[1] * x[1];
        let g = central_gradient(&f, &[2.0, 0.5]);
        assert_relative_eq!(g[0], 2.0, max_relative = 1e-8);
        assert_relative_eq!(g[1], 3.0, max_relative = 1e-8);
    }

    #[test]
    fn simplex_then_quasi_newton_finds_rosenbrock_minimum() {
        let nm = nelder_mead(&rosenbrock, &[-1.2, 1.0], 0.5, 1e-10, 5000);
        let q = bfgs(&rosenbrock, &nm.x, 1e-6, 500);
        assert!(q.converged, "{q:?}");
        assert!((q.x[0] - 1.0).abs() < 1e-5 && (q.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn bfgs_from_cold_start() {
        let q = bfgs(&rosenbrock, &[-1.2, 1.0], 1e-6, 2000);
        assert!(q.converged);
        assert!((q.x[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn newton_finishes_a_stiff_quadratic() {
        let f = |x: &[f64]| 5e3 * (x[0] - 0.3).powi(2) + 0.5 * (x[1] + 1.0).powi(2) + 10.0 * (x[0] - 0.3) * (x[1] + 1.0);
        let q = newton_polish(&f, &[0.31, -0.9], 1e-8, 20);
        assert!(q.converged, "{q:?}");
        assert!((q.x[0] - 0.3).abs() < 1e-9 && (q.x[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn nan_regions_are_avoided() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 2.0).powi(2) };
        let q = nelder_mead(&f, &[0.1], 1.0, 1e-12, 1000);
        assert!((q.x[0] - 2.0).abs() < 1e-4);
    }
}
