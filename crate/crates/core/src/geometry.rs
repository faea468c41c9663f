//! Entropy geometry of the qubit Bloch ball.
//!
//! The metric is the negative Hessian of the von Neumann entropy `S(r)` in
//! Bloch coordinates. Because `S` depends on `r` only through `x = ‖r‖`, every
//! tensor here is assembled from a handful of radial functions:
//!
//! * `a(x) = artanh(x) / x` (tangential eigenvalue of the metric),
//! * `φ(x) = (1/(1-x²) - a(x)) / x²`,
//! * `ψ(x) = φ'(x) / x`.
//!
//! With these, `g_jk = a δ_jk + φ r_j r_k` and
//! `Γ_jkl = ½[φ (r_j δ_kl + r_k δ_jl + r_l δ_jk) + ψ r_j r_k r_l]`.
//! Near the origin the closed forms cancel catastrophically, so below
//! [`SERIES_SWITCH`] the radial functions are summed from their Taylor series.

use crate::error::{Error, Result};
use crate::qubit::{norm3, BlochState};

/// Largest admissible `‖r‖` for metric and connection evaluations.
pub const R_MAX: f64 = 0.999;

/// Below this radius the radial functions use their power series.
pub const SERIES_SWITCH: f64 = 0.25;

const SERIES_TERMS: usize = 24;

pub type Matrix3 = [[f64; 3]; 3];
pub type Tensor3 = [[[f64; 3]; 3]; 3];

/// `artanh(x) / x`, equal to 1 at the origin.
pub fn atanh_ratio(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        let x2 = x * x;
        let mut p = 1.0;
        let mut acc = 0.0;
        for n in 0..SERIES_TERMS {
            acc += p / (2 * n + 1) as f64;
            p *= x2;
        }
        acc
    } else {
        x.atanh() / x
    }
}

/// `(1/(1-x²) - artanh(x)/x) / x²`; tends to 2/3 at the origin.
fn phi(x: f64) -> f64 {
    let x2 = x * x;
    if x < SERIES_SWITCH {
        let mut p = 1.0;
        let mut acc = 0.0;
        for n in 1..=SERIES_TERMS {
            let k = (2 * n) as f64;
            acc += k / (k + 1.0) * p;
            p *= x2;
        }
        acc
    } else {
        (1.0 / (1.0 - x2) - x.atanh() / x) / x2
    }
}

/// `φ'(x) / x`; tends to 8/5 at the origin.
fn psi(x: f64) -> f64 {
    let x2 = x * x;
    if x < SERIES_SWITCH {
        let mut p = 1.0;
        let mut acc = 0.0;
        for n in 2..=SERIES_TERMS + 1 {
            let k = (2 * n) as f64;
            acc += k * (k - 2.0) / (k + 1.0) * p;
            p *= x2;
        }
        acc
    } else {
        let d = 1.0 - x2;
        (2.0 / (d * d) - 3.0 * phi(x)) / x2
    }
}

/// Von Neumann entropy (natural log) of the state with Bloch vector `r`.
pub fn entropy(r: &BlochState) -> Result<f64> {
    let x = r.norm();
    if !x.is_finite() {
        return Err(Error::NonFinite("Bloch vector".into()));
    }
    if x > 1.0 + 1e-12 {
        return Err(Error::OutOfDomain { norm: x, limit: 1.0 });
    }
    Ok(entropy_of_radius(x.min(1.0)))
}

pub(crate) fn entropy_of_radius(x: f64) -> f64 {
    let h = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.ln() };
    h(0.5 * (1.0 + x)) + h(0.5 * (1.0 - x))
}

fn check_open_ball(r: &BlochState) -> Result<f64> {
    let x = r.norm();
    if !x.is_finite() {
        return Err(Error::NonFinite("Bloch vector".into()));
    }
    if x >= 1.0 {
        return Err(Error::OutOfDomain { norm: x, limit: 1.0 });
    }
    Ok(x)
}

fn check_limit(r: &BlochState, r_max: f64) -> Result<f64> {
    let x = r.norm();
    if !x.is_finite() {
        return Err(Error::NonFinite("Bloch vector".into()));
    }
    if x > r_max {
        return Err(Error::OutOfDomain { norm: x, limit: r_max });
    }
    Ok(x)
}

/// Gradient coordinates `χ = -∇S = r artanh‖r‖ / ‖r‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualCoords {
    pub chi: [f64; 3],
}

pub fn dual_coords(r: &BlochState) -> Result<DualCoords> {
    let x = check_open_ball(r)?;
    let a = atanh_ratio(x);
    Ok(DualCoords {
        chi: r.r.map(|c| c * a),
    })
}

/// Inverse of [`dual_coords`]: `r = χ tanh‖χ‖ / ‖χ‖`.
pub fn bloch_from_dual(chi: &DualCoords) -> BlochState {
    let y = norm3(&chi.chi);
    let ratio = if y == 0.0 { 1.0 } else { y.tanh() / y };
    BlochState::raw(chi.chi.map(|c| c * ratio))
}

/// Legendre transform `F = S + r·χ`.
pub fn legendre_f(r: &BlochState) -> Result<f64> {
    let chi = dual_coords(r)?;
    let dot: f64 = r.r.iter().zip(chi.chi).map(|(a, b)| a * b).sum();
    Ok(entropy(r)? + dot)
}

/// Covariant and contravariant metric at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricAtPoint {
    pub g_cov: Matrix3,
    pub g_contra: Matrix3,
    pub at: BlochState,
}

pub fn metric(r: &BlochState) -> Result<MetricAtPoint> {
    metric_with_limit(r, R_MAX)
}

pub fn metric_with_limit(r: &BlochState, r_max: f64) -> Result<MetricAtPoint> {
    let x = check_limit(r, r_max)?;
    let a = atanh_ratio(x);
    let f = phi(x);
    // Radial part of the inverse: ((1 - x²) - 1/a) / x², written so it stays
    // accurate as x -> 0.
    let c = -f * (1.0 - x * x) / a;
    let mut g_cov = [[0.0; 3]; 3];
    let mut g_contra = [[0.0; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let rr = r.r[j] * r.r[k];
            let d = if j == k { 1.0 } else { 0.0 };
            g_cov[j][k] = a * d + f * rr;
            g_contra[j][k] = d / a + c * rr;
        }
    }
    Ok(MetricAtPoint {
        g_cov,
        g_contra,
        at: *r,
    })
}

/// Fully covariant Christoffel symbols `Γ_jkl = -½ ∂³S`.
pub fn christoffel(r: &BlochState) -> Result<Tensor3> {
    let x = check_limit(r, R_MAX)?;
    let (f, p) = (phi(x), psi(x));
    let v = &r.r;
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut out = [[[0.0; 3]; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            for l in 0..3 {
                out[j][k][l] = 0.5 * (f * (v[j] * d(k, l) + v[k] * d(j, l) + v[l] * d(j, k)) + p * v[j] * v[k] * v[l]);
            }
        }
    }
    Ok(out)
}

/// Residual of the geodesic equation along a trajectory and its Euclidean
/// norm `A`, the unsustainability estimate.
pub fn geodesic_residual(r: &BlochState, velocity: &[f64; 3], acceleration: &[f64; 3]) -> Result<([f64; 3], f64)> {
    if !velocity.iter().chain(acceleration).all(|x| x.is_finite()) {
        return Err(Error::NonFinite("trajectory derivatives".into()));
    }
    let m = metric(r)?;
    let gamma = christoffel(r)?;
    let mut lowered = [0.0; 3];
    for (k, slot) in lowered.iter_mut().enumerate() {
        let mut s = 0.0;
        for l in 0..3 {
            for mm in 0..3 {
                s += gamma[k][l][mm] * velocity[l] * velocity[mm];
            }
        }
        *slot = s;
    }
    let mut res = *acceleration;
    for (j, slot) in res.iter_mut().enumerate() {
        for k in 0..3 {
            *slot += m.g_contra[j][k] * lowered[k];
        }
    }
    let a = norm3(&res);
    Ok((res, a))
}

/// Geodesic acceleration `-g^{jk} Γ_klm v^l v^m`, contracted in closed form.
pub fn geodesic_acceleration(r: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    let x = norm3(r);
    let (a, f, p) = (atanh_ratio(x), phi(x), psi(x));
    let rv = dot(r, v);
    let vv = dot(v, v);
    // w_k = Γ_klm v^l v^m
    let w: [f64; 3] = std::array::from_fn(|k| 0.5 * (f * (r[k] * vv + 2.0 * v[k] * rv) + p * r[k] * rv * rv));
    let c = -f * (1.0 - x * x) / a;
    let rw = dot(r, &w);
    std::array::from_fn(|j| -(w[j] / a + c * r[j] * rw))
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// A sampled closed-system geodesic.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub points: Vec<BlochState>,
    pub velocities: Vec<[f64; 3]>,
    /// Set when integration stopped because the path reached `R_MAX`.
    pub left_domain: bool,
}

/// RK4 integration of `r̈ = -g^{-1} Γ(ṙ, ṙ)` from `(r0, v0)`.
pub fn integrate_geodesic(r0: &BlochState, v0: &[f64; 3], duration: f64, step: f64) -> Result<GeodesicPath> {
    if !(step > 0.0) || !(duration >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need step > 0 and duration >= 0 (got {step}, {duration})"
        )));
    }
    let x0 = r0.norm();
    if !(x0 < R_MAX) {
        return Err(Error::OutOfDomain { norm: x0, limit: R_MAX });
    }
    let n = crate::ode::step_count(0.0, duration, step);
    let h = if n == 0 { 0.0 } else { duration / n as f64 };
    let mut path = GeodesicPath {
        times: vec![0.0],
        points: vec![*r0],
        velocities: vec![*v0],
        left_domain: false,
    };
    let rhs = |y: &[f64; 6]| -> Option<[f64; 6]> {
        let r = [y[0], y[1], y[2]];
        let v = [y[3], y[4], y[5]];
        if norm3(&r) >= R_MAX {
            return None;
        }
        let acc = geodesic_acceleration(&r, &v);
        Some([v[0], v[1], v[2], acc[0], acc[1], acc[2]])
    };
    let add = |y: &[f64; 6], s: f64, k: &[f64; 6]| -> [f64; 6] { std::array::from_fn(|i| y[i] + s * k[i]) };
    let mut y = [r0.r[0], r0.r[1], r0.r[2], v0[0], v0[1], v0[2]];
    for i in 0..n {
        let stage = (|| {
            let k1 = rhs(&y)?;
            let k2 = rhs(&add(&y, 0.5 * h, &k1))?;
            let k3 = rhs(&add(&y, 0.5 * h, &k2))?;
            let k4 = rhs(&add(&y, h, &k3))?;
            let next: [f64; 6] = std::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
            (norm3(&[next[0], next[1], next[2]]) < R_MAX).then_some(next)
        })();
        match stage {
            Some(next) => y = next,
            None => {
                path.left_domain = true;
                break;
            }
        }
        path.times.push((i + 1) as f64 * h);
        path.points.push(BlochState::raw([y[0], y[1], y[2]]));
        path.velocities.push([y[3], y[4], y[5]]);
    }
    Ok(path)
}
