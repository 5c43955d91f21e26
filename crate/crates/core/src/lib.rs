//! Circulant preconditioners for Toeplitz and dense linear systems,
//! together with an exact statevector simulation of a singular-value-
//! estimation (SVE) based linear solver that works on the preconditioned
//! system `C⁻¹Ax = C⁻¹b`.

pub mod cli;
pub mod error;
pub mod matcore;
pub mod precond;
pub mod qsim;
pub mod solver;

pub use error::{Error, Result};