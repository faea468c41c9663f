//! Qudit circuits built from three primitive gates, compiled to a dense
//! unitary.
//!
//! Qudit 0 is the most significant digit of a basis index. Gates apply in list
//! order, so the compiled operator of `[g1, g2]` is `G2 · G1`.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::ComplexMatrix;

/// Largest supported total dimension `d^n`.
pub const MAX_DIM: usize = 4096;

/// Tolerance on gate payload unitarity.
pub const PAYLOAD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    /// Arbitrary single-qudit unitary on the target.
    Determination(ComplexMatrix),
    /// Phase `e^{iφ}` on the target's highest basis state.
    Phase(f64),
    /// Payload on the target when the control sits in its highest basis state.
    Controlled { control: usize, payload: ComplexMatrix },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub target: usize,
    pub kind: GateKind,
}

impl Gate {
    pub fn determination(target: usize, payload: ComplexMatrix) -> Self {
        Self {
            target,
            kind: GateKind::Determination(payload),
        }
    }

    pub fn phase(target: usize, angle: f64) -> Self {
        Self {
            target,
            kind: GateKind::Phase(angle),
        }
    }

    pub fn controlled(control: usize, target: usize, payload: ComplexMatrix) -> Self {
        Self {
            target,
            kind: GateKind::Controlled { control, payload },
        }
    }
}

/// `n` qudits of dimension `d` and an ordered gate list.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    d: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 1 || d < 2 {
            return Err(Error::InvalidArgument(format!(
                "circuit needs n >= 1 and d >= 2 (got n={n}, d={d})"
            )));
        }
        Ok(Self {
            n,
            d,
            gates: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Total Hilbert-space dimension, or `None` on overflow.
    pub fn dimension(&self) -> Option<usize> {
        self.d.checked_pow(self.n as u32)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.validate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn with(mut self, gate: Gate) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    fn validate(&self, gate: &Gate) -> Result<()> {
        if gate.target >= self.n {
            return Err(Error::InvalidArgument(format!(
                "target {} out of range for {} qudits",
                gate.target, self.n
            )));
        }
        let payload = match &gate.kind {
            GateKind::Phase(phi) => {
                if !phi.is_finite() {
                    return Err(Error::NonFinite("phase angle".into()));
                }
                return Ok(());
            }
            GateKind::Determination(p) => p,
            GateKind::Controlled { control, payload } => {
                if *control >= self.n || *control == gate.target {
                    return Err(Error::InvalidArgument(format!(
                        "control {control} invalid for target {} on {} qudits",
                        gate.target, self.n
                    )));
                }
                payload
            }
        };
        if payload.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: payload.dim(),
            });
        }
        let err = payload.unitarity_error();
        if !(err <= PAYLOAD_TOL) {
            return Err(Error::NotUnitary(err));
        }
        Ok(())
    }

    /// Parses the text format: a header `n=<n> d=<d>` followed by one gate
    /// per line, `DET <t> <entries>`, `PHASE <t> <angle>` or
    /// `CTRL <c> <t> <entries>`, with `d*d` complex entries as `re,im`.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(0, "missing header"))?;
        let (mut n, mut d) = (None, None);
        for tok in header.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::parse(hl, format!("bad header token '{tok}'")))?;
            let v: usize = v
                .parse()
                .map_err(|_| Error::parse(hl, format!("bad header value '{v}'")))?;
            match k {
                "n" => n = Some(v),
                "d" => d = Some(v),
                _ => return Err(Error::parse(hl, format!("unknown header key '{k}'"))),
            }
        }
        let (n, d) = match (n, d) {
            (Some(n), Some(d)) => (n, d),
            _ => return Err(Error::parse(hl, "header must be `n=<n> d=<d>`")),
        };
        let mut circuit = Circuit::new(n, d).map_err(|e| Error::parse(hl, e.to_string()))?;
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let index = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(ln, format!("bad qudit index '{s}'")))
            };
            let gate = match toks.first().map(|s| s.to_ascii_uppercase()).as_deref() {
                Some("DET") if toks.len() >= 2 => {
                    Gate::determination(index(toks[1])?, parse_entries(&toks[2..], d, ln)?)
                }
                Some("PHASE") if toks.len() == 3 => {
                    let phi: f64 = toks[2]
                        .parse()
                        .map_err(|_| Error::parse(ln, format!("bad angle '{}'", toks[2])))?;
                    Gate::phase(index(toks[1])?, phi)
                }
                Some("CTRL") if toks.len() >= 3 => {
                    Gate::controlled(index(toks[1])?, index(toks[2])?, parse_entries(&toks[3..], d, ln)?)
                }
                _ => return Err(Error::parse(ln, format!("unrecognized gate line '{line}'"))),
            };
            circuit.push(gate).map_err(|e| Error::parse(ln, e.to_string()))?;
        }
        Ok(circuit)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n={} d={}\n", self.n, self.d);
        let entries = |m: &ComplexMatrix| -> String {
            m.entries()
                .iter()
                .map(|z| format!("{:e},{:e}", z.re, z.im))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for g in &self.gates {
            let _ = match &g.kind {
                GateKind::Determination(p) => writeln!(out, "DET {} {}", g.target, entries(p)),
                GateKind::Phase(phi) => writeln!(out, "PHASE {} {:e}", g.target, phi),
                GateKind::Controlled { control, payload } => {
                    writeln!(out, "CTRL {} {} {}", control, g.target, entries(payload))
                }
            };
        }
        out
    }
}

fn parse_entries(toks: &[&str], d: usize, line: usize) -> Result<ComplexMatrix> {
    if toks.len() != d * d {
        return Err(Error::parse(
            line,
            format!("expected {} entries, got {}", d * d, toks.len()),
        ));
    }
    let entries = toks
        .iter()
        .map(|t| {
            let (re, im) = t
                .split_once(',')
                .ok_or_else(|| Error::parse(line, format!("entry '{t}' is not `re,im`")))?;
            let p = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::parse(line, format!("bad number '{s}'")))
            };
            Ok(Complex64::new(p(re)?, p(im)?))
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexMatrix::from_vec(entries)
}

/// Applies `payload` to digit `target` of every column of `u`, restricted to
/// basis states whose `control` digit equals `d - 1` when a control is given.
fn apply_local(
    u: &mut ComplexMatrix,
    n: usize,
    d: usize,
    target: usize,
    control: Option<usize>,
    payload: &ComplexMatrix,
) {
    let dim = u.dim();
    let stride = d.pow((n - 1 - target) as u32);
    let digit = |idx: usize, q: usize| (idx / d.pow((n - 1 - q) as u32)) % d;
    let bases: Vec<usize> = (0..dim)
        .filter(|&i| digit(i, target) == 0)
        .filter(|&i| control.is_none_or(|c| digit(i, c) == d - 1))
        .collect();
    let mut old = vec![Complex64::new(0.0, 0.0); d];
    for col in 0..dim {
        for &base in &bases {
            for (j, slot) in old.iter_mut().enumerate() {
                *slot = u.get(base + j * stride, col);
            }
            for i in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, o) in old.iter().enumerate() {
                    acc += payload.get(i, j) * o;
                }
                u.set(base + i * stride, col, acc);
            }
        }
    }
}

/// Product of the gate embeddings in application order.
pub fn compile(c: &Circuit) -> Result<ComplexMatrix> {
    let dim = c
        .dimension()
        .filter(|&dim| dim <= MAX_DIM)
        .ok_or(Error::Oversize(c.dimension().unwrap_or(usize::MAX)))?;
    let (n, d) = (c.n, c.d);
    let mut u = ComplexMatrix::identity(dim);
    for g in &c.gates {
        c.validate(g)?;
        match &g.kind {
            GateKind::Determination(p) => apply_local(&mut u, n, d, g.target, None, p),
            GateKind::Controlled { control, payload } => apply_local(&mut u, n, d, g.target, Some(*control), payload),
            GateKind::Phase(phi) => {
                let stride = d.pow((n - 1 - g.target) as u32);
                let ph = Complex64::from_polar(1.0, *phi);
                for row in (0..dim).filter(|&i| (i / stride) % d == d - 1) {
                    for col in 0..dim {
                        u.set(row, col, u.get(row, col) * ph);
                    }
                }
            }
        }
    }
    Ok(u)
}
