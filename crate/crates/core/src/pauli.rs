//! Pauli matrices, Pauli strings and coordinates on su(2^n).
//!
//! Qubit 0 is the leftmost letter of a string and the most significant bit of
//! a basis index, so `"XZ"` is `σ_1 ⊗ σ_3`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used when validating Hermitian inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries. Fails unless `entries.len()` is a
    /// positive perfect square.
    pub fn from_vec(entries: Vec<Complex64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(Error::InvalidArgument(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        Ok(Self { dim, data: entries })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = Complex64::new(d, 0.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let n = a * b;
        let mut out = Self::zeros(n);
        for i in 0..a {
            for j in 0..a {
                let x = self.data[i * a + j];
                if x == ZERO {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        out.data[(i * b + k) * n + j * b + l] = x * other.data[k * b + l];
                    }
                }
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.adjoint().matmul(self).expect("adjoint has matching dimension");
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(())
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix addition");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix subtraction");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs).expect("dimension mismatch in matrix product")
    }
}

/// The single-qubit Pauli matrix `σ_k`, `k ∈ {0,1,2,3}`.
pub fn sigma(k: u8) -> ComplexMatrix {
    let e = match k {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -I, I, ZERO],
        3 => [ONE, ZERO, ZERO, -ONE],
        _ => panic!("Pauli index {k} out of range"),
    };
    ComplexMatrix::from_vec(e.to_vec()).expect("2x2")
}

/// `ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    Ok(&ab - &ba)
}

/// A word over `{I, X, Y, Z}`, stored as letters `0..=3`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    letters: Vec<u8>,
}

impl PauliString {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli string".into()));
        }
        if let Some(&bad) = letters.iter().find(|&&l| l > 3) {
            return Err(Error::InvalidArgument(format!("Pauli letter {bad} out of range")));
        }
        Ok(Self { letters })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            letters: vec![0; n.max(1)],
        }
    }

    /// Decodes the base-4 index used by [`PauliString::all`].
    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut letters = vec![0u8; n];
        for slot in letters.iter_mut().rev() {
            *slot = (index % 4) as u8;
            index /= 4;
        }
        Self { letters }
    }

    /// All `4^n` strings in lexicographic order, identity first.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n)).map(move |i| PauliString::from_index(n, i))
    }

    /// The `4^n - 1` basis strings of su(2^n).
    pub fn basis(n: usize) -> impl Iterator<Item = PauliString> {
        Self::all(n).skip(1)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&l| l == 0)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != 0).count()
    }

    /// Bit mask of the qubits flipped by X or Y (qubit 0 is the high bit).
    fn flip_mask(&self) -> usize {
        let n = self.letters.len();
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == 1 || l == 2)
            .fold(0, |m, (q, _)| m | 1 << (n - 1 - q))
    }

    /// Column index and value of the single non-zero entry in `row`.
    pub(crate) fn row_entry(&self, row: usize) -> (usize, Complex64) {
        let n = self.letters.len();
        let mut phase = ONE;
        for (q, &l) in self.letters.iter().enumerate() {
            let bit = (row >> (n - 1 - q)) & 1;
            phase *= match (l, bit) {
                (2, 0) => -I,
                (2, _) => I,
                (3, 1) => -ONE,
                _ => ONE,
            };
        }
        (row ^ self.flip_mask(), phase)
    }

    /// The `2^n × 2^n` tensor product of the letters' Pauli matrices.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let dim = 1usize << self.letters.len();
        let mut m = ComplexMatrix::zeros(dim);
        for row in 0..dim {
            let (col, v) = self.row_entry(row);
            m.set(row, col, v);
        }
        m
    }

    /// `Tr(m · σ_s)` in `O(2^n)` using the monomial structure of `σ_s`.
    pub fn trace_product(&self, m: &ComplexMatrix) -> Complex64 {
        let dim = m.dim();
        (0..dim)
            .map(|j| {
                let (i, v) = self.row_entry(j);
                m.get(i, j) * v
            })
            .sum()
    }

    /// Multiplies two strings: `σ_a σ_b = phase · σ_c`.
    pub fn product(&self, other: &Self) -> (Complex64, PauliString) {
        assert_eq!(self.len(), other.len());
        let mut phase = ONE;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, c) = single_product(a, b);
                phase *= p;
                c
            })
            .collect();
        (phase, PauliString { letters })
    }
}

fn single_product(a: u8, b: u8) -> (Complex64, u8) {
    match (a, b) {
        (0, x) | (x, 0) => (ONE, x),
        (x, y) if x == y => (ONE, 0),
        (1, 2) => (I, 3),
        (2, 1) => (-I, 3),
        (2, 3) => (I, 1),
        (3, 2) => (-I, 1),
        (3, 1) => (I, 2),
        (1, 3) => (-I, 2),
        _ => unreachable!(),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.letters {
            f.write_str(["I", "X", "Y", "Z"][l as usize])?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts `IXYZ` (any case) or the digits `0123`.
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' | '0' => Ok(0),
                'X' | '1' => Ok(1),
                'Y' | '2' => Ok(2),
                'Z' | '3' => Ok(3),
                other => Err(Error::InvalidArgument(format!(
                    "invalid Pauli letter '{other}' in \"{s}\""
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        PauliString::new(letters)
    }
}

/// Weight of a string: count of non-identity letters.
pub fn weight(s: &PauliString) -> usize {
    s.weight()
}

/// Tensor-product matrix of a string.
pub fn string_to_matrix(s: &PauliString) -> ComplexMatrix {
    s.to_matrix()
}

/// An element of su(2^n) in Pauli-string coordinates.
///
/// Coordinates are stored sparsely; the identity string is never a key.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    n: usize,
    coords: BTreeMap<PauliString, f64>,
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "qubit count must be positive");
        Self {
            n,
            coords: BTreeMap::new(),
        }
    }

    pub fn from_terms<I, S>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut el = Self::zero(n);
        for (s, c) in terms {
            el.add_term(s.as_ref().parse()?, c)?;
        }
        Ok(el)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Adds `coefficient` to the coordinate of `s`.
    pub fn add_term(&mut self, s: PauliString, coefficient: f64) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: s.len(),
            });
        }
        if s.is_identity() {
            return Err(Error::InvalidArgument(
                "the identity string is not an su(2^n) basis element".into(),
            ));
        }
        if !coefficient.is_finite() {
            return Err(Error::NonFinite(format!("coefficient of {s}")));
        }
        *self.coords.entry(s).or_insert(0.0) += coefficient;
        Ok(())
    }

    pub fn coefficient(&self, s: &PauliString) -> f64 {
        self.coords.get(s).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.coords.iter().map(|(s, &c)| (s, c))
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.values().all(|&c| c == 0.0)
    }

    /// Keeps only the coordinates whose string satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&PauliString) -> bool) -> Self {
        Self {
            n: self.n,
            coords: self
                .coords
                .iter()
                .filter(|(s, _)| keep(s))
                .map(|(s, &c)| (s.clone(), c))
                .collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            coords: self.coords.iter().map(|(s, &c)| (s.clone(), c * factor)).collect(),
        }
    }

    /// Coordinate-wise linear combination `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let mut out = self.clone();
        for (s, &c) in &other.coords {
            *out.coords.entry(s.clone()).or_insert(0.0) += factor * c;
        }
        Ok(out)
    }

    /// Euclidean norm of the coordinate vector.
    pub fn coord_norm(&self) -> f64 {
        self.coords.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `Σ x^s σ_s` as a dense matrix.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim);
        for (s, &c) in &self.coords {
            for row in 0..dim {
                let (col, v) = s.row_entry(row);
                let cur = m.get(row, col);
                m.set(row, col, cur + v * c);
            }
        }
        m
    }

    /// Parses lines `<pauli-word> <coefficient>`; blank lines and `#` comments
    /// are skipped. Repeated words accumulate.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut el: Option<Self> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (word, value) = match (parts.next(), parts.next(), parts.next()) {
                (Some(w), Some(v), None) => (w, v),
                _ => return Err(Error::parse(i + 1, "expected `<pauli-word> <coefficient>`")),
            };
            let s: PauliString = word.parse().map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
            let c: f64 = value
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("malformed number '{value}'")))?;
            let target = el.get_or_insert_with(|| Self::zero(s.len()));
            target.add_term(s, c).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        el.ok_or_else(|| Error::parse(0, "no terms"))
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, c) in &self.coords {
            writeln!(f, "{s} {c}")?;
        }
        Ok(())
    }
}

/// Complex coefficients `Tr(m σ_s) / 2^n` for every string, identity included.
pub fn pauli_coefficients(m: &ComplexMatrix, n: usize) -> Result<Vec<(PauliString, Complex64)>> {
    check_qubit_dim(m, n)?;
    let norm = 1.0 / m.dim() as f64;
    Ok(PauliString::all(n)
        .map(|s| {
            let c = s.trace_product(m) * norm;
            (s, c)
        })
        .collect())
}

/// Splits a Hermitian matrix into su(2^n) coordinates plus its identity
/// coefficient.
pub fn decompose(m: &ComplexMatrix, n: usize) -> Result<(AlgebraElement, f64)> {
    check_qubit_dim(m, n)?;
    let herr = m.hermiticity_error();
    if herr > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herr));
    }
    let mut el = AlgebraElement::zero(n);
    let mut identity = 0.0;
    for (s, c) in pauli_coefficients(m, n)? {
        if s.is_identity() {
            identity = c.re;
        } else if c.re != 0.0 {
            el.coords.insert(s, c.re);
        }
    }
    Ok((el, identity))
}

fn check_qubit_dim(m: &ComplexMatrix, n: usize) -> Result<()> {
    let dim = m.dim();
    if !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    if n >= usize::BITS as usize || dim != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1usize.checked_shl(n as u32).unwrap_or(0),
            actual: dim,
        });
    }
    Ok(())
}
