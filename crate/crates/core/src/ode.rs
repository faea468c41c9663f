//! Fixed-step integrators shared by the evolution and geodesic solvers.

/// One classical fourth-order Runge-Kutta step of `dy/dt = f(t, y)`.
pub fn rk4_step<F>(f: &mut F, t: f64, y: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
{
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, k)| x + s * k).collect() };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    y.iter()
        .enumerate()
        .map(|(i, x)| x + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Splits `[t0, t1]` into steps no longer than `max_step`; the last step
/// lands exactly on `t1`.
pub fn step_count(t0: f64, t1: f64, max_step: f64) -> usize {
    let span = t1 - t0;
    if span <= 0.0 {
        return 0;
    }
    // Tolerate round-off so that e.g. span 1.0 with step 1e-3 is 1000 steps.
    ((span / max_step) - 1e-9).ceil().max(1.0) as usize
}

/// Composite Simpson rule on `steps` (rounded up to even) equal intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, steps: usize) -> f64 {
    if b == a {
        return 0.0;
    }
    let m = steps.max(2) + steps % 2;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
