//! Thermodynamic-length geometry in the space of forcing coefficients `λ`.
//!
//! A [`MetricProvider`] supplies `g̃(λ)`; the connection is obtained by central
//! finite differences of the metric, and geodesics of `g̃` are the driving
//! protocols with least integrated dissipation `∫ λ̇ g̃ λ̇ dt`.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Default finite-difference step, scaled by `|λ_i| + 1` per component.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Largest condition number accepted when inverting the metric.
pub const MAX_CONDITION: f64 = 1e8;

/// A symmetric positive-semidefinite metric field on `R^α`.
pub trait MetricProvider: Send + Sync {
    fn alpha(&self) -> usize;
    fn metric(&self, lambda: &[f64]) -> Result<DMatrix<f64>>;
}

/// A dissipation-rate model `ω̇(λ, λ̇)` with inverse temperature `β`.
pub trait RateModel: Send + Sync {
    fn alpha(&self) -> usize;
    fn beta(&self) -> f64;
    fn rate(&self, lambda: &[f64], velocity: &[f64]) -> f64;
}

/// Position-independent metric.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantMetric(pub DMatrix<f64>);

impl ConstantMetric {
    pub fn identity(alpha: usize) -> Self {
        Self(DMatrix::identity(alpha, alpha))
    }
}

impl MetricProvider for ConstantMetric {
    fn alpha(&self) -> usize {
        self.0.nrows()
    }
    fn metric(&self, _lambda: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.0.clone())
    }
}

/// `g̃ = diag(1/λ_i²)`; its geodesics are exponentials in each component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseSquareMetric {
    pub alpha: usize,
}

impl MetricProvider for InverseSquareMetric {
    fn alpha(&self) -> usize {
        self.alpha
    }
    fn metric(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::from_diagonal(&DVector::from_iterator(
            self.alpha,
            lambda.iter().map(|l| 1.0 / (l * l)),
        )))
    }
}

fn lambda_names(alpha: usize, with_velocity: bool) -> Vec<(String, usize)> {
    let mut names = Vec::new();
    for i in 0..alpha {
        names.push((format!("l{}", i + 1), i));
        names.push((format!("lambda_{}", i + 1), i));
        names.push((format!("lambda{}", i + 1), i));
        if with_velocity {
            names.push((format!("v{}", i + 1), alpha + i));
            names.push((format!("dl{}", i + 1), alpha + i));
        }
    }
    if alpha == 1 {
        names.push(("l".into(), 0));
        names.push(("lambda".into(), 0));
        if with_velocity {
            names.push(("v".into(), 1));
        }
    }
    names
}

fn compile_with(text: &str, names: &[(String, usize)]) -> Result<Expr> {
    let refs: Vec<(&str, usize)> = names.iter().map(|(n, i)| (n.as_str(), *i)).collect();
    Expr::compile(text, &refs)
}

/// Metric given by arithmetic expressions in `l1..lα`.
///
/// `text` holds `;`-separated entries: either `α` of them (a diagonal metric)
/// or `α²` (row-major, symmetrized).
#[derive(Clone, Debug)]
pub struct ExprMetric {
    alpha: usize,
    entries: Vec<Expr>,
}

impl ExprMetric {
    pub fn parse(alpha: usize, text: &str) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidArgument("metric dimension must be positive".into()));
        }
        let names = lambda_names(alpha, false);
        let entries = text
            .split(';')
            .map(|t| compile_with(t.trim(), &names))
            .collect::<Result<Vec<_>>>()?;
        if entries.len() != alpha && entries.len() != alpha * alpha {
            return Err(Error::InvalidArgument(format!(
                "metric expression has {} entries; expected {} or {}",
                entries.len(),
                alpha,
                alpha * alpha
            )));
        }
        Ok(Self { alpha, entries })
    }
}

impl MetricProvider for ExprMetric {
    fn alpha(&self) -> usize {
        self.alpha
    }
    fn metric(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        let a = self.alpha;
        let mut g = DMatrix::zeros(a, a);
        if self.entries.len() == a {
            for i in 0..a {
                g[(i, i)] = self.entries[i].eval(lambda);
            }
        } else {
            for i in 0..a {
                for j in 0..a {
                    g[(i, j)] = self.entries[i * a + j].eval(lambda);
                }
            }
            g = (&g + g.transpose()) * 0.5;
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("metric at λ = {lambda:?}")));
        }
        Ok(g)
    }
}

/// Rate model `ω̇(λ, v)` given as an expression in `l1..lα` and `v1..vα`.
#[derive(Clone, Debug)]
pub struct ExprRate {
    alpha: usize,
    beta: f64,
    expr: Expr,
}

impl ExprRate {
    pub fn parse(alpha: usize, beta: f64, text: &str) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidArgument("rate dimension must be positive".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        let expr = compile_with(text.trim(), &lambda_names(alpha, true))?;
        Ok(Self { alpha, beta, expr })
    }
}

impl RateModel for ExprRate {
    fn alpha(&self) -> usize {
        self.alpha
    }
    fn beta(&self) -> f64 {
        self.beta
    }
    fn rate(&self, lambda: &[f64], velocity: &[f64]) -> f64 {
        let args: Vec<f64> = lambda.iter().chain(velocity).copied().collect();
        self.expr.eval(&args)
    }
}

/// `g̃_jk(λ) = (β/2) ∂²ω̇/∂λ̇^j∂λ̇^k` at `λ̇ = 0`, by central differences.
pub fn metric_from_rate<M: RateModel + ?Sized>(model: &M, lambda: &[f64], fd_step: f64) -> Result<DMatrix<f64>> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fd_step must be positive, got {fd_step}"
        )));
    }
    let a = model.alpha();
    check_len(lambda, a)?;
    let h = fd_step;
    let f = |v: &[f64]| -> Result<f64> {
        let w = model.rate(lambda, v);
        if w.is_finite() {
            Ok(w)
        } else {
            Err(Error::NonFinite(format!("rate at λ = {lambda:?}, λ̇ = {v:?}")))
        }
    };
    let mut v = vec![0.0; a];
    let f0 = f(&v)?;
    let mut g = DMatrix::zeros(a, a);
    for j in 0..a {
        v[j] = h;
        let fp = f(&v)?;
        v[j] = -h;
        let fm = f(&v)?;
        v[j] = 0.0;
        g[(j, j)] = (fp - 2.0 * f0 + fm) / (h * h);
        for k in 0..j {
            let mut s = 0.0;
            for (sj, sk, w) in [(h, h, 1.0), (h, -h, -1.0), (-h, h, -1.0), (-h, -h, 1.0)] {
                v[j] = sj;
                v[k] = sk;
                s += w * f(&v)?;
            }
            v[j] = 0.0;
            v[k] = 0.0;
            let m = s / (4.0 * h * h);
            g[(j, k)] = m;
            g[(k, j)] = m;
        }
    }
    Ok(g * (0.5 * model.beta()))
}

/// Metric provider backed by a rate model.
pub struct RateMetric<M> {
    pub model: M,
    pub fd_step: f64,
}

impl<M: RateModel> MetricProvider for RateMetric<M> {
    fn alpha(&self) -> usize {
        self.model.alpha()
    }
    fn metric(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        metric_from_rate(&self.model, lambda, self.fd_step)
    }
}

impl<P: MetricProvider + ?Sized> MetricProvider for Arc<P> {
    fn alpha(&self) -> usize {
        (**self).alpha()
    }
    fn metric(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        (**self).metric(lambda)
    }
}

impl<P: MetricProvider + ?Sized> MetricProvider for Box<P> {
    fn alpha(&self) -> usize {
        (**self).alpha()
    }
    fn metric(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        (**self).metric(lambda)
    }
}

fn check_len(lambda: &[f64], alpha: usize) -> Result<()> {
    if lambda.len() != alpha {
        return Err(Error::DimensionMismatch {
            expected: alpha,
            actual: lambda.len(),
        });
    }
    if lambda.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("λ = {lambda:?}")));
    }
    Ok(())
}

/// Inverts a metric after checking its conditioning.
pub fn invert_metric(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(g.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if !(min > 0.0) || max / min > MAX_CONDITION {
        return Err(Error::SingularMetric(if min > 0.0 { max / min } else { f64::INFINITY }));
    }
    g.clone().try_inverse().ok_or(Error::SingularMetric(f64::INFINITY))
}

/// Connection coefficients `Γ̃^j_kl`, indexed `[(j * α + k) * α + l]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    alpha: usize,
    data: Vec<f64>,
}

impl Connection {
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn get(&self, j: usize, k: usize, l: usize) -> f64 {
        self.data[(j * self.alpha + k) * self.alpha + l]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Γ̃^j_kl v^k v^l`
    pub fn contract(&self, v: &[f64]) -> Vec<f64> {
        let a = self.alpha;
        (0..a)
            .map(|j| {
                let mut s = 0.0;
                for k in 0..a {
                    for l in 0..a {
                        s += self.get(j, k, l) * v[k] * v[l];
                    }
                }
                s
            })
            .collect()
    }
}

/// Levi-Civita connection of `p` at `λ` from central differences of `g̃`.
pub fn christoffel_fd<P: MetricProvider + ?Sized>(p: &P, lambda: &[f64], fd_step: f64) -> Result<Connection> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fd_step must be positive, got {fd_step}"
        )));
    }
    let a = p.alpha();
    check_len(lambda, a)?;
    let inv = invert_metric(&p.metric(lambda)?)?;
    // dg[m] = ∂g/∂λ^m
    let mut dg = Vec::with_capacity(a);
    let mut x = lambda.to_vec();
    for m in 0..a {
        let h = fd_step * (lambda[m].abs() + 1.0);
        x[m] = lambda[m] + h;
        let gp = p.metric(&x)?;
        x[m] = lambda[m] - h;
        let gm = p.metric(&x)?;
        x[m] = lambda[m];
        dg.push((gp - gm) / (2.0 * h));
    }
    let mut data = vec![0.0; a * a * a];
    for k in 0..a {
        for l in k..a {
            for j in 0..a {
                let mut s = 0.0;
                for m in 0..a {
                    s += inv[(j, m)] * (dg[l][(k, m)] + dg[k][(l, m)] - dg[m][(k, l)]);
                }
                data[(j * a + k) * a + l] = 0.5 * s;
                data[(j * a + l) * a + k] = 0.5 * s;
            }
        }
    }
    Ok(Connection { alpha: a, data })
}

/// Time-sampled forcing trajectory `λ(t)` on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlPath {
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl ControlPath {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 || times.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "control path needs >= 2 samples with matching times ({} times, {} points)",
                times.len(),
                points.len()
            )));
        }
        let alpha = points[0].len();
        if alpha == 0 || points.iter().any(|p| p.len() != alpha) {
            return Err(Error::InvalidArgument("inconsistent control dimension".into()));
        }
        let dt = times[1] - times[0];
        for w in times.windows(2) {
            let d = w[1] - w[0];
            if !(d > 0.0) {
                return Err(Error::InvalidArgument("times must be strictly increasing".into()));
            }
            if (d - dt).abs() > 1e-9 * dt.abs().max(1.0) {
                return Err(Error::InvalidArgument("time step must be uniform".into()));
            }
        }
        Ok(Self { times, points })
    }

    pub fn alpha(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Second-order finite-difference velocities (one-sided at the ends).
    pub fn velocities(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let a = self.alpha();
        let h = self.dt();
        let p = &self.points;
        (0..n)
            .map(|i| {
                (0..a)
                    .map(|c| {
                        if n == 2 {
                            (p[1][c] - p[0][c]) / h
                        } else if i == 0 {
                            (-3.0 * p[0][c] + 4.0 * p[1][c] - p[2][c]) / (2.0 * h)
                        } else if i == n - 1 {
                            (3.0 * p[n - 1][c] - 4.0 * p[n - 2][c] + p[n - 3][c]) / (2.0 * h)
                        } else {
                            (p[i + 1][c] - p[i - 1][c]) / (2.0 * h)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// CSV with header `t,lambda_1,...,lambda_α`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 0..self.alpha() {
            let _ = write!(out, ",lambda_{}", i + 1);
        }
        out.push('\n');
        for (t, p) in self.times.iter().zip(&self.points) {
            let _ = write!(out, "{t:e}");
            for x in p {
                let _ = write!(out, ",{x:e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(0, "empty control path"))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "t" {
            return Err(Error::parse(hl + 1, "header must be `t,lambda_1,...`"));
        }
        for (i, c) in cols.iter().enumerate().skip(1) {
            if *c != format!("lambda_{i}") {
                return Err(Error::parse(hl + 1, format!("unexpected column '{c}'")));
            }
        }
        let mut times = Vec::new();
        let mut points = Vec::new();
        for (i, line) in lines {
            let vals = line
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parse(i + 1, format!("malformed number '{}'", s.trim())))
                })
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() != cols.len() {
                return Err(Error::parse(i + 1, "wrong number of columns"));
            }
            times.push(vals[0]);
            points.push(vals[1..].to_vec());
        }
        Self::new(times, points)
    }
}

/// A geodesic of `g̃` together with its sampled velocities.
#[derive(Clone, Debug, PartialEq)]
pub struct OpenGeodesic {
    pub path: ControlPath,
    pub velocities: Vec<Vec<f64>>,
    /// Set when integration stopped at a singular or non-finite metric.
    pub truncated: bool,
}

/// RK4 integration of `λ̈^j = -Γ̃^j_kl λ̇^k λ̇^l`.
pub fn integrate_geodesic_open<P: MetricProvider + ?Sized>(
    p: &P,
    lambda0: &[f64],
    v0: &[f64],
    duration: f64,
    step: f64,
) -> Result<OpenGeodesic> {
    integrate_geodesic_open_with(p, lambda0, v0, duration, step, DEFAULT_FD_STEP)
}

pub fn integrate_geodesic_open_with<P: MetricProvider + ?Sized>(
    p: &P,
    lambda0: &[f64],
    v0: &[f64],
    duration: f64,
    step: f64,
    fd_step: f64,
) -> Result<OpenGeodesic> {
    let a = p.alpha();
    check_len(lambda0, a)?;
    check_len(v0, a)?;
    if !(step > 0.0) || !(duration > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need step > 0 and duration > 0 (got {step}, {duration})"
        )));
    }
    // Fail fast if the starting metric is unusable.
    christoffel_fd(p, lambda0, fd_step)?;
    let n = crate::ode::step_count(0.0, duration, step);
    let h = duration / n as f64;
    let rhs = |y: &[f64]| -> Result<Vec<f64>> {
        let (x, v) = y.split_at(a);
        let gamma = christoffel_fd(p, x, fd_step)?;
        let acc = gamma.contract(v);
        Ok(v.iter().copied().chain(acc.into_iter().map(|c| -c)).collect())
    };
    let add = |y: &[f64], s: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let mut y: Vec<f64> = lambda0.iter().chain(v0).copied().collect();
    let mut times = vec![0.0];
    let mut points = vec![lambda0.to_vec()];
    let mut velocities = vec![v0.to_vec()];
    let mut truncated = false;
    for i in 0..n {
        let next = (|| -> Result<Vec<f64>> {
            let k1 = rhs(&y)?;
            let k2 = rhs(&add(&y, 0.5 * h, &k1))?;
            let k3 = rhs(&add(&y, 0.5 * h, &k2))?;
            let k4 = rhs(&add(&y, h, &k3))?;
            Ok((0..2 * a)
                .map(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
                .collect())
        })();
        match next {
            Ok(v) if v.iter().all(|x| x.is_finite()) => y = v,
            Ok(_) | Err(Error::SingularMetric(_)) | Err(Error::NonFinite(_)) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
        times.push((i + 1) as f64 * h);
        points.push(y[..a].to_vec());
        velocities.push(y[a..].to_vec());
    }
    if times.len() < 2 {
        return Err(Error::SingularMetric(f64::INFINITY));
    }
    Ok(OpenGeodesic {
        path: ControlPath::new(times, points)?,
        velocities,
        truncated,
    })
}

/// `g̃(λ)(v, v)`
pub fn quadratic_form(g: &DMatrix<f64>, v: &[f64]) -> f64 {
    let v = DVector::from_column_slice(v);
    (v.transpose() * g * &v)[(0, 0)]
}

/// Trapezoidal `∫ λ̇ g̃ λ̇ dt` with finite-difference velocities.
pub fn dissipation_integral<P: MetricProvider + ?Sized>(p: &P, path: &ControlPath) -> Result<f64> {
    if path.len() < 3 {
        return Err(Error::InvalidArgument("dissipation needs at least 3 samples".into()));
    }
    if path.alpha() != p.alpha() {
        return Err(Error::DimensionMismatch {
            expected: p.alpha(),
            actual: path.alpha(),
        });
    }
    let vel = path.velocities();
    let rates = path
        .points()
        .iter()
        .zip(&vel)
        .map(|(x, v)| Ok(quadratic_form(&p.metric(x)?, v)))
        .collect::<Result<Vec<f64>>>()?;
    let h = path.dt();
    let inner: f64 = rates[1..rates.len() - 1].iter().sum();
    Ok(h * (0.5 * (rates[0] + rates[rates.len() - 1]) + inner))
}
