//! Information geometry of a two-level economy modelled as a quantum circuit.
//!
//! * [`pauli`]: Pauli strings, dense complex matrices, su(2^n) coordinates.
//! * [`circuit`]: the three primitive qudit gates and compilation to a unitary.
//! * [`qubit`]: single-qubit evolution (quaternion ODE, closed form, Bloch
//!   trajectories).
//! * [`geometry`]: entropy Hessian metric, dual coordinates, Christoffel
//!   symbols, geodesics and the unsustainability residual.
//! * [`sustainability`] / [`heatmap`]: fields of the residual over initial
//!   mixings and their grayscale rendering.
//! * [`tomography`]: direct-inversion reconstruction from counts.
//! * [`open_system`]: thermodynamic-length metric, connection, geodesics and
//!   dissipation.
//! * [`complexity`]: penalty inner product, P/Q split and the variation ODE.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod complexity;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod heatmap;
pub mod ode;
pub mod open_system;
pub mod pauli;
pub mod qubit;
pub mod sustainability;
pub mod tomography;

pub use error::{Error, Result};
pub use pauli::{AlgebraElement, ComplexMatrix, PauliString};
pub use qubit::{BlochState, EvolutionQuaternion, TrajectorySource, WealthSpectrum};
