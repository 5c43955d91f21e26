//! Circulant preconditioner constructions and spectrum analysis of the
//! preconditioned matrix.

pub mod circulant;
pub mod spectrum;

pub use circulant::{
    chan_optimal, chan_optimal_toeplitz, circulant_eigenvalues, strang, super_optimal,
    CirculantSpec, StrangEvenRule, CIRCULANT_SINGULAR_TOL,
};
pub use spectrum::{preconditioned_matrix, spectrum_report, SpectrumReport};
