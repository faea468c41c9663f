//! wasm-bindgen exports for the browser demo in `www/`.
//!
//! Each export wraps a plain function so the logic is testable natively.
//! Results cross the boundary as flat numeric arrays.

use geoecon::geometry::integrate_geodesic;
use geoecon::heatmap::heatmap_pixels;
use geoecon::sustainability::{sustainability_grid, GridSpec};
use geoecon::tomography::{direct_inversion, sample_counts};
use geoecon::{BlochState, TrajectorySource};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

type Res<T> = Result<T, String>;

fn vec3(v: &[f64], what: &str) -> Res<[f64; 3]> {
    v.try_into().map_err(|_| format!("{what} needs 3 components"))
}

fn state(v: &[f64], what: &str) -> Res<BlochState> {
    BlochState::new(vec3(v, what)?).map_err(|e| format!("{what}: {e}"))
}

pub fn heatmap_inner(delta: f64, fraction: f64, exact: bool, grid_step: f64, threshold: f64) -> Res<Vec<u8>> {
    let mut spec = GridSpec::at_period_fraction(delta, fraction);
    spec.grid_step = grid_step;
    spec.source = if exact {
        TrajectorySource::Exact
    } else {
        TrajectorySource::Paper
    };
    let field = sustainability_grid(&spec, 1).map_err(|e| e.to_string())?;
    Ok(heatmap_pixels(&field, threshold))
}

pub fn side_inner(grid_step: f64) -> usize {
    GridSpec {
        grid_step,
        ..GridSpec::new(1.0, 0.0)
    }
    .axis()
    .len()
}

pub fn geodesic_inner(r0: &[f64], v0: &[f64], duration: f64, stride: usize) -> Res<Vec<f64>> {
    let r0 = state(r0, "r0")?;
    let path = integrate_geodesic(&r0, &vec3(v0, "v0")?, duration, 1e-3).map_err(|e| e.to_string())?;
    let stride = stride.max(1);
    let last = path.points.len() - 1;
    Ok((0..=last)
        .filter(|i| i % stride == 0 || *i == last)
        .flat_map(|i| path.points[i].r)
        .collect())
}

pub fn tomography_inner(r: &[f64], shots: u32, seed: u32) -> Res<Vec<f64>> {
    let truth = state(r, "r")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let counts = sample_counts(&truth, shots as u64, &mut rng).map_err(|e| e.to_string())?;
    let rec = direct_inversion(&counts);
    let err = (0..3)
        .map(|j| (rec.state.r[j] - truth.r[j]).powi(2))
        .sum::<f64>()
        .sqrt();
    let mut out = rec.state.r.to_vec();
    out.push(err);
    out.push(if rec.valid { 1.0 } else { 0.0 });
    Ok(out)
}

/// Heatmap pixels (row-major, top row = largest `r²(0)`) for the field at
/// `fraction · π/Δ`. Values are 0 masked, 64 circle, 128 shaded, 255 clear.
#[wasm_bindgen]
pub fn heatmap(delta: f64, fraction: f64, exact: bool, grid_step: f64, threshold: f64) -> Result<Vec<u8>, JsError> {
    heatmap_inner(delta, fraction, exact, grid_step, threshold).map_err(|e| JsError::new(&e))
}

/// Side length of the heatmap for `grid_step`.
#[wasm_bindgen]
pub fn heatmap_side(grid_step: f64) -> usize {
    side_inner(grid_step)
}

/// Closed-system geodesic from `(r0, v0)`, flattened as `x, y, z` triples
/// sampled every `stride` steps of size `1e-3`.
#[wasm_bindgen]
pub fn geodesic(r0: &[f64], v0: &[f64], duration: f64, stride: usize) -> Result<Vec<f64>, JsError> {
    geodesic_inner(r0, v0, duration, stride).map_err(|e| JsError::new(&e))
}

/// Samples `shots` outcomes per axis and reconstructs the Bloch vector:
/// `[r̂¹, r̂², r̂³, ‖r̂ - r‖, valid]` with `valid` as 0 or 1.
#[wasm_bindgen]
pub fn tomography(r: &[f64], shots: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    tomography_inner(r, shots, seed).map_err(|e| JsError::new(&e))
}
