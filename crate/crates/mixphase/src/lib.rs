//! Geometric and dynamic phases of mixed quantum states.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrix kernel (Hermitian eigensolver, matrix
//!   functions, polar decomposition, principal argument). Deterministic by
//!   construction: fixed sweep orders, stable sorts, pinned eigenvector
//!   phases. No BLAS/LAPACK.
//! - [`state`]: density matrices, thermal states, purifications, fidelity
//!   and the Bures-type distance, parallel gauge transport.
//! - [`holonomy`]: discrete Berry phase, the Uhlmann connection, holonomy
//!   and phase over closed parameter loops, plaquette curvature probes.
//! - [`dynamics`]: von Neumann evolution, the adiabatic generator, the
//!   anti-commutator flow generator, general and quasi-static dynamic
//!   phases, and the incompatibility witness for the hybrid equation.
//! - [`models`]: two-band lattice models (topological-wire and dimerized
//!   chain flavors), the thermal oscillator, and the continuum limit, each
//!   with piecewise closed forms plus independent numeric evaluations.
//! - [`sweep`]: reproducible experiment grids over temperature and duration
//!   with CSV/JSON emission; the engine behind the `mixphase` CLI.
//!
//! Units: ħ = k_B = 1. Public inputs are dimensionless groups (energy·time,
//! inverse-temperature·energy). Phases live on (−π, π].

pub mod dynamics;
pub mod error;
pub mod holonomy;
pub mod linalg;
pub mod models;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use linalg::{PhaseValue, C64, CMat};
