//! Complex dense linear algebra substrate: Fourier transforms, matrices
//! with cached norms and SVD, Toeplitz/symbol generators, and file I/O.

pub mod dense;
pub mod fft;
pub mod io;
pub mod toeplitz;

pub use dense::{ConditionNumber, DenseMatrix, SvdDecomposition, RANK_TOL};
pub use fft::{dft_unnormalized, fft, fft_in_place, fourier_matrix, idft_unnormalized, ifft, FftDirection};
pub use toeplitz::{toeplitz_from_symbol, SymbolSpec, ToeplitzSpec};
