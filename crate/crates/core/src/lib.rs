//! Quaternion dynamics for the competition between an iterated qubit purification
//! protocol and decoherence.
//!
//! A qubit density matrix is encoded by a quaternion `ζ` (see [`qubit_state`]); the
//! purification step, the Hamiltonian evolution and two decoherence models are maps
//! on quaternions (see [`dynamics`]). [`scan`] sweeps initial-condition and
//! parameter planes, [`fractal`] measures the borders between purification- and
//! decoherence-dominated regions, and [`export`] writes the results as PGM, CSV and
//! PLY files. [`reference_oracle`] is an independent 2×2 matrix implementation used
//! only for cross-checking.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod fractal;
pub mod quat;
pub mod qubit_state;
pub mod raster;
pub mod reference_oracle;
pub mod scan;

pub use dynamics::{
    CycleCriterion, CycleMetric, CycleReport, DephasingParams, DuParams, OrbitRecord, Regime,
    System,
};
pub use error::{Error, Result};
pub use quat::{Axis, Quaternion};
pub use qubit_state::{Observables, PolarState};
pub use raster::Raster;
pub use reference_oracle::DensityMatrix;

pub use num_complex::Complex64;
