//! Single-qubit dynamics: Hamiltonian coefficients, the quaternion form of the
//! evolution operator, and Bloch-vector trajectories.
//!
//! Units have `ħ = 1`. The Hamiltonian is `H(t) = Σ_α h_α(t) σ_α` and the
//! evolution operator is written as
//! `U(t, t0) = exp(-i ∫ h_0) [u σ_0 + i (v_1 σ_1 + v_2 σ_2 + v_3 σ_3)]`
//! with `q = (u, v)` obeying a linear ODE with an antisymmetric generator.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{rk4_step, simpson, step_count};
use crate::pauli::{decompose, sigma, ComplexMatrix};

/// Default step for the quaternion integrator.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Time-dependent coefficients `(h_0, h_1, h_2, h_3)`.
pub trait HamiltonianCoeffs {
    fn at(&self, t: f64) -> [f64; 4];
}

impl<F: Fn(f64) -> [f64; 4]> HamiltonianCoeffs for F {
    fn at(&self, t: f64) -> [f64; 4] {
        self(t)
    }
}

/// Time-independent coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantHamiltonian(pub [f64; 4]);

impl HamiltonianCoeffs for ConstantHamiltonian {
    fn at(&self, _t: f64) -> [f64; 4] {
        self.0
    }
}

/// The two wealth eigenvalues `E_a > E_d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WealthSpectrum {
    e_a: f64,
    e_d: f64,
}

impl WealthSpectrum {
    pub fn new(e_a: f64, e_d: f64) -> Result<Self> {
        if !(e_a.is_finite() && e_d.is_finite()) {
            return Err(Error::NonFinite("wealth eigenvalues".into()));
        }
        if e_a <= e_d {
            return Err(Error::InvalidArgument(format!(
                "wealth spectrum requires E_a > E_d (got {e_a} <= {e_d})"
            )));
        }
        Ok(Self { e_a, e_d })
    }

    /// Builds the spectrum from its mean and half range.
    pub fn from_mean_half_range(mean: f64, half_range: f64) -> Result<Self> {
        Self::new(mean + half_range, mean - half_range)
    }

    pub fn e_a(&self) -> f64 {
        self.e_a
    }

    pub fn e_d(&self) -> f64 {
        self.e_d
    }

    /// `E_m = (E_a + E_d) / 2`
    pub fn mean(&self) -> f64 {
        0.5 * (self.e_a + self.e_d)
    }

    /// `Δ = (E_a - E_d) / 2`
    pub fn half_range(&self) -> f64 {
        0.5 * (self.e_a - self.e_d)
    }

    /// `(E_m, 0, 0, Δ)`
    pub fn coeffs(&self) -> ConstantHamiltonian {
        ConstantHamiltonian([self.mean(), 0.0, 0.0, self.half_range()])
    }
}

/// The real 4-vector `q = (u, v_1, v_2, v_3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionQuaternion {
    pub u: f64,
    pub v: [f64; 3],
}

impl EvolutionQuaternion {
    pub const IDENTITY: Self = Self { u: 1.0, v: [0.0; 3] };

    pub fn new(u: f64, v: [f64; 3]) -> Self {
        Self { u, v }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.u, self.v[0], self.v[1], self.v[2]]
    }

    pub fn norm(&self) -> f64 {
        self.as_array().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Real Bloch vector of a qubit density matrix `ρ = ½(σ_0 + r·σ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState {
    pub r: [f64; 3],
}

impl BlochState {
    pub const ORIGIN: Self = Self { r: [0.0; 3] };

    /// Checked constructor: rejects `‖r‖ > 1` (with round-off slack).
    pub fn new(r: [f64; 3]) -> Result<Self> {
        let s = Self { r };
        if !r.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("Bloch vector".into()));
        }
        if s.norm() > 1.0 + 1e-12 {
            return Err(Error::OutOfDomain {
                norm: s.norm(),
                limit: 1.0,
            });
        }
        Ok(s)
    }

    /// Skips the positivity check. Used for the literal trajectory formula,
    /// which can leave the unit ball.
    pub fn raw(r: [f64; 3]) -> Self {
        Self { r }
    }

    pub fn norm(&self) -> f64 {
        norm3(&self.r)
    }

    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + 1e-12
    }

    /// `ρ = ½(σ_0 + Σ r^j σ_j)`
    pub fn density_matrix(&self) -> ComplexMatrix {
        let mut rho = sigma(0);
        for (j, &x) in self.r.iter().enumerate() {
            rho = &rho + &sigma(j as u8 + 1).scale_real(x);
        }
        rho.scale_real(0.5)
    }
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// The antisymmetric generator acting on `q`.
fn generator(h: [f64; 4], q: &[f64]) -> Vec<f64> {
    let [_, h1, h2, h3] = h;
    vec![
        h1 * q[1] + h2 * q[2] + h3 * q[3],
        -h1 * q[0] - h3 * q[2] + h2 * q[3],
        -h2 * q[0] + h3 * q[1] - h1 * q[3],
        -h3 * q[0] - h2 * q[1] + h1 * q[2],
    ]
}

fn finite_coeffs<H: HamiltonianCoeffs + ?Sized>(h: &H, t: f64) -> Result<[f64; 4]> {
    let c = h.at(t);
    if c.iter().all(|x| x.is_finite()) {
        Ok(c)
    } else {
        Err(Error::NonFinite(format!("Hamiltonian coefficients at t = {t}")))
    }
}

/// RK4 solution of `dq/dt = M(t) q` with `q(t0) = (1, 0, 0, 0)`.
pub fn integrate_q<H: HamiltonianCoeffs + ?Sized>(h: &H, t0: f64, t: f64, step: f64) -> Result<EvolutionQuaternion> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if t < t0 {
        return Err(Error::InvalidArgument(format!("end time {t} precedes start {t0}")));
    }
    let n = step_count(t0, t, step);
    let mut y = EvolutionQuaternion::IDENTITY.as_array().to_vec();
    if n == 0 {
        return Ok(EvolutionQuaternion::IDENTITY);
    }
    let dt = (t - t0) / n as f64;
    for i in 0..n {
        let s = t0 + i as f64 * dt;
        // Validate the three sample times used by this step.
        for probe in [s, s + 0.5 * dt, s + dt] {
            finite_coeffs(h, probe)?;
        }
        let mut rhs = |tt: f64, q: &[f64]| generator(h.at(tt), q);
        y = rk4_step(&mut rhs, s, &y, dt);
    }
    Ok(EvolutionQuaternion::new(y[0], [y[1], y[2], y[3]]))
}

/// `∫_{t0}^{t} h_0(τ) dτ` by Simpson's rule on the integrator's step grid.
pub fn phase_integral<H: HamiltonianCoeffs + ?Sized>(h: &H, t0: f64, t: f64, step: f64) -> f64 {
    let n = step_count(t0, t, step);
    simpson(|s| h.at(s)[0], t0, t, n)
}

/// Closed-form `q` for a fixed spectrum: `(cos[(t-t0)Δ], 0, 0, -sin[(t-t0)Δ])`.
pub fn closed_form_q(spec: &WealthSpectrum, t0: f64, t: f64) -> EvolutionQuaternion {
    let angle = (t - t0) * spec.half_range();
    EvolutionQuaternion::new(angle.cos(), [0.0, 0.0, -angle.sin()])
}

/// `e^{-i φ}[u σ_0 + i Σ v_α σ_α]`.
pub fn build_unitary(q: &EvolutionQuaternion, phase_integral: f64) -> Result<ComplexMatrix> {
    let norm = q.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized(norm));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut m = sigma(0).scale_real(q.u);
    for (a, &va) in q.v.iter().enumerate() {
        m = &m + &sigma(a as u8 + 1).scale(i * va);
    }
    Ok(m.scale(Complex64::from_polar(1.0, -phase_integral)))
}

/// Full evolution operator from integrated coefficients.
pub fn evolution_operator<H: HamiltonianCoeffs + ?Sized>(h: &H, t0: f64, t: f64, step: f64) -> Result<ComplexMatrix> {
    let q = integrate_q(h, t0, t, step)?;
    build_unitary(&q, phase_integral(h, t0, t, step))
}

/// Conjugates `ρ(0)` by `U` and reads the Bloch vector back.
pub fn evolve_density(r0: &BlochState, u: &ComplexMatrix) -> Result<BlochState> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: u.dim(),
        });
    }
    let err = u.unitarity_error();
    if err > 1e-8 {
        return Err(Error::NotUnitary(err));
    }
    let rho = &(u * &r0.density_matrix()) * &u.adjoint();
    let (el, _) = decompose(&rho, 1)?;
    let mut r = [0.0; 3];
    for (s, c) in el.terms() {
        r[s.letters()[0] as usize - 1] = 2.0 * c;
    }
    Ok(BlochState::raw(r))
}

/// The literal trajectory `(r¹(0)cos 2tΔ + r²(0)sin 2tΔ, r²(0), r³(0))`.
///
/// Not norm preserving; see [`exact_trajectory`] for the conjugation dynamics.
pub fn paper_trajectory(r0: &BlochState, delta: f64, t: f64) -> BlochState {
    let (s, c) = (2.0 * t * delta).sin_cos();
    let [r1, r2, r3] = r0.r;
    BlochState::raw([r1 * c + r2 * s, r2, r3])
}

/// Bloch vector under conjugation by the fixed-spectrum operator built from
/// [`closed_form_q`]: a rotation about the third axis at angular rate `2Δ`.
pub fn exact_trajectory(r0: &BlochState, delta: f64, t: f64) -> BlochState {
    let (s, c) = (2.0 * t * delta).sin_cos();
    let [r1, r2, r3] = r0.r;
    BlochState::raw([r1 * c - r2 * s, r2 * c + r1 * s, r3])
}

/// Which closed-system trajectory feeds the geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TrajectorySource {
    /// The displayed formula with constant `r²`.
    #[default]
    Paper,
    /// Exact unitary conjugation.
    Exact,
}

impl FromStr for TrajectorySource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" => Ok(Self::Paper),
            "exact" => Ok(Self::Exact),
            other => Err(Error::InvalidArgument(format!(
                "unknown trajectory source '{other}' (expected paper|exact)"
            ))),
        }
    }
}

impl fmt::Display for TrajectorySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Exact => "exact",
        })
    }
}

/// Position, velocity and acceleration of a trajectory at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub position: BlochState,
    pub velocity: [f64; 3],
    pub acceleration: [f64; 3],
}

pub fn trajectory_at(r0: &BlochState, delta: f64, t: f64, source: TrajectorySource) -> BlochState {
    match source {
        TrajectorySource::Paper => paper_trajectory(r0, delta, t),
        TrajectorySource::Exact => exact_trajectory(r0, delta, t),
    }
}

/// Analytic first and second time derivatives of the chosen trajectory.
pub fn trajectory_derivatives(r0: &BlochState, delta: f64, t: f64, source: TrajectorySource) -> TrajectoryPoint {
    let w = 2.0 * delta;
    let (s, c) = (w * t).sin_cos();
    let [r1, r2, _] = r0.r;
    let position = trajectory_at(r0, delta, t, source);
    let p = position.r;
    let (velocity, acceleration) = match source {
        TrajectorySource::Paper => ([w * (-r1 * s + r2 * c), 0.0, 0.0], [-w * w * p[0], 0.0, 0.0]),
        TrajectorySource::Exact => ([-w * p[1], w * p[0], 0.0], [-w * w * p[0], -w * w * p[1], 0.0]),
    };
    TrajectoryPoint {
        position,
        velocity,
        acceleration,
    }
}
