//! Numerical minimisation and root finding used by the likelihood fits.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, sqrt};

/// Result of a Nelder-Mead run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Stopping rules for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Simplex diameter (max distance from the best vertex) at which to stop.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 500, initial_step: 0.1 }
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .map(|v| sqrt(v.iter().zip(best).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()))
        .fold(0.0, f64::max)
}

/// Derivative-free simplex minimisation of `f` starting at `x0`.
///
/// Non-finite objective values are treated as `+inf`, so callers can return
/// `f64::INFINITY` for infeasible points. After the simplex collapses it is
/// rebuilt once around the best vertex, which guards against premature
/// collapse; iterations of both phases count against `max_iterations`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: SimplexOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    // Standard coefficients.
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut start = x0.to_vec();
    let mut iterations = 0;
    let mut restarts_left = 1;
    loop {
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        simplex.push(start.clone());
        for i in 0..dim {
            let mut v = start.clone();
            v[i] += opts.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

        let mut converged = false;
        while iterations < opts.max_iterations {
            // Sort vertices by value; stable so ties keep insertion order.
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            if diameter(&simplex) < opts.tolerance {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; dim];
            for v in &simplex[..dim] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / dim as f64;
                }
            }
            let worst = simplex[dim].clone();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect()
            };

            let reflected = along(alpha);
            let fr = eval(&reflected);
            if fr < values[0] {
                let expanded = along(gamma);
                let fe = eval(&expanded);
                if fe < fr {
                    simplex[dim] = expanded;
                    values[dim] = fe;
                } else {
                    simplex[dim] = reflected;
                    values[dim] = fr;
                }
                continue;
            }
            if fr < values[dim - 1] {
                simplex[dim] = reflected;
                values[dim] = fr;
                continue;
            }
            let (contracted, fc) = if fr < values[dim] {
                let c = along(rho * alpha);
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = along(-rho);
                let fc = eval(&c);
                (c, fc)
            };
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
                continue;
            }
            let best = simplex[0].clone();
            for i in 1..=dim {
                let shrunk: Vec<f64> =
                    best.iter().zip(&simplex[i]).map(|(b, x)| b + sigma * (x - b)).collect();
                values[i] = eval(&shrunk);
                simplex[i] = shrunk;
            }
        }

        if !converged || restarts_left == 0 {
            let (best_i, _) = values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("simplex is non-empty");
            return Minimum {
                x: simplex[best_i].clone(),
                value: values[best_i],
                iterations,
                converged,
            };
        }
        restarts_left -= 1;
        start = simplex[0].clone();
    }
}

/// Brent's method for a root of `f` in `[a, b]`, where `f(a)` and `f(b)`
/// have opposite signs. Returns `None` if the bracket is invalid.
pub fn brent_root<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.is_nan() || fb.is_nan() || (fa > 0.0) == (fb > 0.0) {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if abs(fc) < abs(fb) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * abs(b) + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if abs(m) <= tol || fb == 0.0 {
            return Some(b);
        }
        if abs(e) >= tol && abs(fa) > abs(fb) {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - abs(tol * q)).min(abs(e * q)) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if abs(d) > tol { d } else if m > 0.0 { tol } else { -tol };
        fb = f(b);
        if fb.is_nan() {
            return None;
        }
    }
    Some(b)
}

/// Widens `[lo, hi]` geometrically (multiplicatively when `positive`) until
/// `f` changes sign across it, then returns the bracket.
pub fn expand_bracket<F>(mut f: F, mut lo: f64, mut hi: f64, positive: bool) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let mut fhi = f(hi);
    for _ in 0..200 {
        if flo.is_nan() || fhi.is_nan() {
            return None;
        }
        if (flo <= 0.0) != (fhi <= 0.0) {
            return Some((lo, hi));
        }
        if positive {
            if abs(flo) < abs(fhi) {
                lo *= 0.5;
                flo = f(lo);
            } else {
                hi *= 2.0;
                fhi = f(hi);
            }
        } else {
            let w = hi - lo;
            if abs(flo) < abs(fhi) {
                lo -= w;
                flo = f(lo);
            } else {
                hi += w;
                fhi = f(hi);
            }
        }
    }
    None
}
