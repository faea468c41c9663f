//! Penalty-metric complexity geometry on su(2^n).
//!
//! Components on Pauli strings of weight at most two form the `P` part of an
//! element, the rest the `Q` part. The penalized inner product weighs `Q`
//! components by the factor `q`; the variation ODE for `K` mixes the two parts
//! through commutators.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{commutator, pauli_coefficients, AlgebraElement, ComplexMatrix, PauliString};

/// Strings up to this weight belong to the `P` part.
pub const MAX_P_WEIGHT: usize = 2;

/// Multiplicative cost weight of the `Q` components.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PenaltyFactor(f64);

impl PenaltyFactor {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "penalty factor must be positive, got {q}"
            )));
        }
        Ok(Self(q))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// How the `Q` term of the inner product is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `(1/2^n) Tr(J₁ P J₂) + q Tr(J₁ Q J₂)`.
    #[default]
    Literal,
    /// `1/2^n` on both terms.
    Symmetric,
}

impl Normalization {
    pub fn from_flag(normalize_q_term: bool) -> Self {
        if normalize_q_term {
            Self::Symmetric
        } else {
            Self::Literal
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "literal" | "false" => Ok(Self::Literal),
            "symmetric" | "true" => Ok(Self::Symmetric),
            other => Err(Error::InvalidArgument(format!("unknown normalization '{other}'"))),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Literal => "literal",
            Self::Symmetric => "symmetric",
        })
    }
}

pub fn is_p_string(s: &PauliString) -> bool {
    s.weight() <= MAX_P_WEIGHT
}

/// An element split into its `P` and `Q` parts.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperoperatorSplit {
    pub p_part: AlgebraElement,
    pub q_part: AlgebraElement,
}

pub fn split_pq(h: &AlgebraElement) -> SuperoperatorSplit {
    SuperoperatorSplit {
        p_part: h.filter(is_p_string),
        q_part: h.filter(|s| !is_p_string(s)),
    }
}

fn check_same_n(a: &AlgebraElement, b: &AlgebraElement) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            actual: b.n(),
        });
    }
    Ok(())
}

fn q_weight(n: usize, q: PenaltyFactor, norm: Normalization) -> f64 {
    match norm {
        Normalization::Literal => q.value() * (1u64 << n) as f64,
        Normalization::Symmetric => q.value(),
    }
}

/// Penalized inner product evaluated in coordinates, using
/// `Tr(σ_s σ_t) = 2^n δ_st`.
pub fn inner_product(a: &AlgebraElement, b: &AlgebraElement, q: PenaltyFactor, norm: Normalization) -> Result<f64> {
    check_same_n(a, b)?;
    let wq = q_weight(a.n(), q, norm);
    Ok(a.terms()
        .map(|(s, x)| {
            let y = b.coefficient(s);
            if is_p_string(s) {
                x * y
            } else {
                wq * x * y
            }
        })
        .sum())
}

/// The same inner product evaluated from dense matrices and traces.
pub fn inner_product_matrix(
    a: &AlgebraElement,
    b: &AlgebraElement,
    q: PenaltyFactor,
    norm: Normalization,
) -> Result<f64> {
    check_same_n(a, b)?;
    let split = split_pq(b);
    let ja = a.to_matrix();
    let dim = a.dim() as f64;
    let p_term = ja.matmul(&split.p_part.to_matrix())?.trace().re / dim;
    let q_trace = ja.matmul(&split.q_part.to_matrix())?.trace().re;
    let q_term = match norm {
        Normalization::Literal => q.value() * q_trace,
        Normalization::Symmetric => q.value() * q_trace / dim,
    };
    Ok(p_term + q_term)
}

/// Cost functional `⟨H, H⟩`.
pub fn cost(h: &AlgebraElement, q: PenaltyFactor, norm: Normalization) -> f64 {
    inner_product(h, h, q, norm).expect("same element")
}

/// Geodesic of the constant diagonal metric: the straight line
/// `x(t) = x0 + v0 t`, sampled every `step` up to `duration`.
pub fn literal_geodesic(
    x0: &AlgebraElement,
    v0: &AlgebraElement,
    _q: PenaltyFactor,
    duration: f64,
    step: f64,
) -> Result<Vec<(f64, AlgebraElement)>> {
    check_same_n(x0, v0)?;
    if !(step > 0.0) || !(duration >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need step > 0 and duration >= 0 (got {step}, {duration})"
        )));
    }
    let n = crate::ode::step_count(0.0, duration, step);
    let h = if n == 0 { 0.0 } else { duration / n as f64 };
    (0..=n)
        .map(|i| {
            let t = i as f64 * h;
            Ok((t, x0.axpy(t, v0)?))
        })
        .collect()
}

fn qubits_of(m: &ComplexMatrix) -> Result<usize> {
    let dim = m.dim();
    if !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Rebuilds `Σ w(s) c_s σ_s` from complex Pauli coefficients, dropping the
/// identity component.
fn weighted_rebuild(m: &ComplexMatrix, weight: impl Fn(&PauliString) -> f64) -> Result<ComplexMatrix> {
    let n = qubits_of(m)?;
    let dim = m.dim();
    let mut out = ComplexMatrix::zeros(dim);
    for (s, c) in pauli_coefficients(m, n)? {
        if s.is_identity() || c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let w = weight(&s);
        if w == 0.0 {
            continue;
        }
        for row in 0..dim {
            let (col, v) = s.row_entry(row);
            out.set(row, col, out.get(row, col) + v * c * w);
        }
    }
    Ok(out)
}

/// `P` superoperator on matrices.
pub fn project_p(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    weighted_rebuild(m, |s| if is_p_string(s) { 1.0 } else { 0.0 })
}

/// `Q` superoperator on matrices.
pub fn project_q(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    weighted_rebuild(m, |s| if is_p_string(s) { 0.0 } else { 1.0 })
}

/// `F^power` with `F = P + Q/q`.
pub fn apply_f(m: &ComplexMatrix, q: PenaltyFactor, power: i32) -> Result<ComplexMatrix> {
    let qw = q.value().powi(-power);
    weighted_rebuild(m, |s| if is_p_string(s) { 1.0 } else { qw })
}

/// `K` at time `t`: Hermitian and traceless.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationState {
    pub k: ComplexMatrix,
    pub t: f64,
}

impl VariationState {
    pub const TOL: f64 = 1e-9;

    pub fn new(k: ComplexMatrix, t: f64) -> Result<Self> {
        qubits_of(&k)?;
        let herr = k.hermiticity_error();
        if herr > Self::TOL {
            return Err(Error::NotHermitian(herr));
        }
        let tr = k.trace().norm();
        if tr > Self::TOL {
            return Err(Error::InvalidArgument(format!("K must be traceless (|Tr K| = {tr:e})")));
        }
        Ok(Self { k, t })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            k: ComplexMatrix::zeros(1 << n),
            t: 0.0,
        }
    }

    pub fn from_element(el: &AlgebraElement, t: f64) -> Self {
        Self { k: el.to_matrix(), t }
    }

    /// Largest of the Hermiticity error and `|Tr K|`.
    pub fn structure_error(&self) -> f64 {
        self.k.hermiticity_error().max(self.k.trace().norm())
    }
}

/// `dK/dt = i(q-1) F([Q[H], P[K]] - [P[H], Q[K]]) - F² i [P[H], Q[H]]`.
pub fn brandt_rhs(h: &AlgebraElement, k: &ComplexMatrix, q: PenaltyFactor) -> Result<ComplexMatrix> {
    if h.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            actual: k.dim(),
        });
    }
    let split = split_pq(h);
    let ph = split.p_part.to_matrix();
    let qh = split.q_part.to_matrix();
    let i = Complex64::new(0.0, 1.0);

    let drive = commutator(&ph, &qh)?;
    let mut out = apply_f(&drive, q, 2)?.scale(-i);

    if q.value() != 1.0 && k.max_abs() > 0.0 {
        let pk = project_p(k)?;
        let qk = project_q(k)?;
        let mixed = &commutator(&qh, &pk)? - &commutator(&ph, &qk)?;
        let term = apply_f(&mixed, q, 1)?.scale(i * (q.value() - 1.0));
        out = &out + &term;
    }
    Ok(out)
}

/// RK4 integration of the variation ODE along a Hamiltonian path.
/// Returns the state at every step, starting with `k0`.
pub fn integrate_brandt<F>(
    h_path: F,
    k0: &VariationState,
    q: PenaltyFactor,
    duration: f64,
    step: f64,
) -> Result<Vec<VariationState>>
where
    F: Fn(f64) -> AlgebraElement,
{
    if !(step > 0.0) || !(duration >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need step > 0 and duration >= 0 (got {step}, {duration})"
        )));
    }
    let n = crate::ode::step_count(0.0, duration, step);
    let h = if n == 0 { 0.0 } else { duration / n as f64 };
    let mut out = Vec::with_capacity(n + 1);
    out.push(k0.clone());
    let mut k = k0.k.clone();
    let t0 = k0.t;
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let (h_start, h_mid, h_end) = (h_path(t), h_path(t + 0.5 * h), h_path(t + h));
        let k1 = brandt_rhs(&h_start, &k, q)?;
        let k2 = brandt_rhs(&h_mid, &(&k + &k1.scale_real(0.5 * h)), q)?;
        let k3 = brandt_rhs(&h_mid, &(&k + &k2.scale_real(0.5 * h)), q)?;
        let k4 = brandt_rhs(&h_end, &(&k + &k3.scale_real(h)), q)?;
        let incr = &(&(&k1 + &k2.scale_real(2.0)) + &k3.scale_real(2.0)) + &k4;
        k = &k + &incr.scale_real(h / 6.0);
        if !k.is_finite() {
            return Err(Error::NonFinite(format!("K at t = {}", t + h)));
        }
        out.push(VariationState { k: k.clone(), t: t + h });
    }
    Ok(out)
}

/// Piecewise-constant Hamiltonian path: each block holds from its start time
/// until the next block begins.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianPath {
    blocks: Vec<(f64, AlgebraElement)>,
}

impl HamiltonianPath {
    pub fn new(mut blocks: Vec<(f64, AlgebraElement)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("empty Hamiltonian path".into()));
        }
        blocks.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = blocks[0].1.n();
        if blocks.iter().any(|(_, h)| h.n() != n) {
            return Err(Error::InvalidArgument("blocks act on different qubit counts".into()));
        }
        if blocks.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("duplicate block start time".into()));
        }
        Ok(Self { blocks })
    }

    pub fn constant(h: AlgebraElement) -> Self {
        Self { blocks: vec![(0.0, h)] }
    }

    pub fn n(&self) -> usize {
        self.blocks[0].1.n()
    }

    /// The block in force at `t` (the first block before its own start).
    pub fn at(&self, t: f64) -> &AlgebraElement {
        let idx = self.blocks.partition_point(|(s, _)| *s <= t);
        &self.blocks[idx.saturating_sub(1)].1
    }

    /// Parses blocks introduced by `t=<time>` header lines, each followed by
    /// `<pauli-word> <coefficient>` lines.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut blocks: Vec<(f64, String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("t=").or_else(|| line.strip_prefix("t =")) {
                let t: f64 = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(i + 1, format!("malformed time '{}'", rest.trim())))?;
                blocks.push((t, String::new(), i + 1));
            } else {
                let block = blocks
                    .last_mut()
                    .ok_or_else(|| Error::parse(i + 1, "term before the first `t=` header"))?;
                block.1.push_str(line);
                block.1.push('\n');
            }
        }
        let parsed = blocks
            .into_iter()
            .map(|(t, body, line)| {
                AlgebraElement::parse_text(&body)
                    .map(|el| (t, el))
                    .map_err(|e| Error::parse(line, format!("block t={t}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parsed)
    }
}
