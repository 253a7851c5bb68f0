//! Randomized surrounding (RS) and restarted randomized surrounding (RRS)
//! solvers for linear systems `Ax = b`.
//!
//! The crate is split into:
//!
//! * [`matrix`]: dense and CSR storage with cached row norms, Matrix Market I/O.
//! * [`sampling`]: seeded row sampling proportional to squared row norms.
//! * [`solver`]: the reflection primitive and the RS, RRS, weighted RRS and
//!   Kaczmarz iterations.
//! * [`analysis`]: spectral quantities, rate constants, reference solutions
//!   and the ERR / SNR metrics.
//! * [`problems`]: Gaussian and parallel-beam tomography test problems.
//! * [`harness`]: multi-trial benchmarks, convergence curves, tomography runs
//!   and bound reports, with CSV / SVG / PGM writers.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod problems;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use matrix::{Matrix, RowView};
pub use problems::{Problem, ProblemKind};
pub use sampling::{RngStream, RowSampler};
pub use solver::{Method, SolveConfig, SolveTrace, Termination};
