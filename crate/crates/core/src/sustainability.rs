//! Unsustainability fields over initial mixings `(r¹(0), r²(0))`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{geodesic_residual, R_MAX};
use crate::qubit::{trajectory_derivatives, BlochState, TrajectorySource};

/// Default shading threshold on `A`.
pub const DEFAULT_THRESHOLD: f64 = 0.01;
/// Default grid spacing, giving 201 points per axis over `[-1, 1]`.
pub const DEFAULT_GRID_STEP: f64 = 0.01;
/// Default sweep of half ranges for the collapse curve.
pub const DEFAULT_DELTAS: [f64; 4] = [0.1, 0.2, 0.5, 1.0];

/// Parameters of one field evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub delta: f64,
    pub eval_time: f64,
    pub grid_step: f64,
    pub r3_0: f64,
    pub source: TrajectorySource,
}

impl GridSpec {
    pub fn new(delta: f64, eval_time: f64) -> Self {
        Self {
            delta,
            eval_time,
            grid_step: DEFAULT_GRID_STEP,
            r3_0: 0.0,
            source: TrajectorySource::Paper,
        }
    }

    /// Evaluation time given as a fraction of the period `π/Δ`.
    pub fn at_period_fraction(delta: f64, fraction: f64) -> Self {
        Self::new(delta, fraction * PI / delta)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} = {v}")));
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta must be positive; delta", self.delta);
        }
        if !self.eval_time.is_finite() {
            return bad("eval_time must be finite; eval_time", self.eval_time);
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return bad("grid_step must be positive; grid_step", self.grid_step);
        }
        if !(self.r3_0.abs() < 1.0) {
            return bad("|r3_0| must be below 1; r3_0", self.r3_0);
        }
        Ok(())
    }

    /// Axis coordinates `i * grid_step` for `|i| <= floor(1 / grid_step)`.
    pub fn axis(&self) -> Vec<f64> {
        let k = (1.0 / self.grid_step + 1e-9).floor() as i64;
        (-k..=k).map(|i| i as f64 * self.grid_step).collect()
    }
}

/// Values of `A` on a square grid, row-major with `r²(0)` indexing rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SustainabilityField {
    pub spec: GridSpec,
    pub axis: Vec<f64>,
    /// `None` marks a masked cell.
    pub values: Vec<Option<f64>>,
}

impl SustainabilityField {
    pub fn side(&self) -> usize {
        self.axis.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.side() + col]
    }

    /// Iterates `(r1, r2, A)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, Option<f64>)> + '_ {
        let m = self.side();
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.axis[i % m], self.axis[i / m], *v))
    }

    /// Share of the initial-mixing disc `‖r(0)‖ < 1` where `A < threshold`.
    pub fn shaded_fraction(&self, threshold: f64) -> f64 {
        let (mut disc, mut shaded) = (0usize, 0usize);
        for (r1, r2, a) in self.cells() {
            if (r1 * r1 + r2 * r2 + self.spec.r3_0 * self.spec.r3_0).sqrt() < 1.0 {
                disc += 1;
                if a.is_some_and(|a| a < threshold) {
                    shaded += 1;
                }
            }
        }
        if disc == 0 {
            0.0
        } else {
            shaded as f64 / disc as f64
        }
    }

    /// CSV with `#` metadata lines and header `r1,r2,A,masked`.
    pub fn to_csv(&self) -> String {
        let s = &self.spec;
        let mut out = String::new();
        let _ = writeln!(out, "# delta = {}", s.delta);
        let _ = writeln!(out, "# eval_time = {}", s.eval_time);
        let _ = writeln!(out, "# grid_step = {}", s.grid_step);
        let _ = writeln!(out, "# r3_0 = {}", s.r3_0);
        let _ = writeln!(out, "# source = {}", s.source);
        out.push_str("r1,r2,A,masked\n");
        for (r1, r2, a) in self.cells() {
            match a {
                Some(a) => {
                    let _ = writeln!(out, "{r1:.6},{r2:.6},{a:.12e},0");
                }
                None => {
                    let _ = writeln!(out, "{r1:.6},{r2:.6},nan,1");
                }
            }
        }
        out
    }
}

/// `A` at one initial mixing, or `None` when the point leaves the domain.
pub fn unsustainability_at(spec: &GridSpec, r1: f64, r2: f64) -> Option<f64> {
    let r0 = BlochState::raw([r1, r2, spec.r3_0]);
    if !(r0.norm() < R_MAX) {
        return None;
    }
    let p = trajectory_derivatives(&r0, spec.delta, spec.eval_time, spec.source);
    if !(p.position.norm() < R_MAX) {
        return None;
    }
    geodesic_residual(&p.position, &p.velocity, &p.acceleration)
        .ok()
        .map(|(_, a)| a)
}

/// Evaluates the field. `workers` > 1 spreads rows over a thread pool; the
/// output does not depend on the worker count.
pub fn sustainability_grid(spec: &GridSpec, workers: usize) -> Result<SustainabilityField> {
    spec.validate()?;
    let axis = spec.axis();
    let row = |r2: f64| -> Vec<Option<f64>> { axis.iter().map(|&r1| unsustainability_at(spec, r1, r2)).collect() };
    let rows: Vec<Vec<Option<f64>>> = if workers > 1 {
        parallel_rows(&axis, workers, &row)?
    } else {
        axis.iter().map(|&r2| row(r2)).collect()
    };
    Ok(SustainabilityField {
        spec: *spec,
        axis: axis.clone(),
        values: rows.into_iter().flatten().collect(),
    })
}

#[cfg(feature = "parallel")]
fn parallel_rows<F>(axis: &[f64], workers: usize, row: &F) -> Result<Vec<Vec<Option<f64>>>>
where
    F: Fn(f64) -> Vec<Option<f64>> + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| axis.par_iter().map(|&r2| row(r2)).collect()))
}

#[cfg(not(feature = "parallel"))]
fn parallel_rows<F>(axis: &[f64], _workers: usize, row: &F) -> Result<Vec<Vec<Option<f64>>>>
where
    F: Fn(f64) -> Vec<Option<f64>> + Sync,
{
    Ok(axis.iter().map(|&r2| row(r2)).collect())
}

/// Shaded fraction at half period `t = π/(2Δ)` for each `Δ`.
pub fn collapse_curve(deltas: &[f64], threshold: f64, template: &GridSpec, workers: usize) -> Result<Vec<(f64, f64)>> {
    deltas
        .iter()
        .map(|&delta| {
            let spec = GridSpec {
                delta,
                eval_time: PI / (2.0 * delta),
                ..*template
            };
            let field = sustainability_grid(&spec, workers)?;
            Ok((delta, field.shaded_fraction(threshold)))
        })
        .collect()
}

pub fn collapse_csv(curve: &[(f64, f64)]) -> String {
    let mut out = String::from("delta,shaded_fraction\n");
    for (d, f) in curve {
        let _ = writeln!(out, "{d},{f:.12}");
    }
    out
}
