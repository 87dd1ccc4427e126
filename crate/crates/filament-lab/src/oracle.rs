//! Reference implementations used only to validate the fast paths.
//!
//! Everything here trades speed for transparency: a fixed-step classical
//! Runge–Kutta scheme (a genuinely different method from the adaptive pair in
//! [`crate::ode`]), and brute-force quadratures for oscillatory integrals.
//! Tests compare the production code against these at matched points.

use crate::C64;

/// Classical fixed-step RK4 from `x0` to `x_end` in `n_steps` equal steps.
pub fn rk4_fixed<F>(mut rhs: F, x0: f64, y0: &[f64], x_end: f64, n_steps: usize) -> Vec<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let h = (x_end - x0) / n_steps as f64;
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for step in 0..n_steps {
        let x = x0 + step as f64 * h;
        rhs(x, &y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(x + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(x + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(x + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// RK4 with step halving until two successive answers agree to `tol` in the
/// maximum norm.  Returns the finer answer and the last observed change.
pub fn rk4_converged<F>(
    mut rhs: F,
    x0: f64,
    y0: &[f64],
    x_end: f64,
    tol: f64,
    start_steps: usize,
) -> (Vec<f64>, f64)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut steps = start_steps.max(2);
    let mut prev = rk4_fixed(&mut rhs, x0, y0, x_end, steps);
    loop {
        steps *= 2;
        let next = rk4_fixed(&mut rhs, x0, y0, x_end, steps);
        let diff = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if diff < tol || steps > 1 << 26 {
            return (next, diff);
        }
        prev = next;
    }
}

/// Brute-force complex trapezoid quadrature of `f` on `[a, b]` with `n` panels.
pub fn trapezoid_c64<F>(mut f: F, a: f64, b: f64, n: usize) -> C64
where
    F: FnMut(f64) -> C64,
{
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for k in 1..n {
        acc += f(a + k as f64 * h);
    }
    acc * h
}
