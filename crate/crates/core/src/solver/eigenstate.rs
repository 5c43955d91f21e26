//! The eigenvalue-state circuit: from `|A⟩`, Fourier transforms on both
//! registers and a difference projection leave the normalized eigenvalue
//! vector of the Frobenius-optimal circulant on the surviving register.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;
use crate::matcore::fft::FftDirection;
use crate::qsim::kptree::KpTree;
use crate::qsim::state::StateVector;

#[derive(Debug, Clone)]
pub struct EigenvalueStateOutcome {
    /// normalized state `(1/‖C‖_F)Σ λ_k |k⟩` over the surviving register
    pub state: StateVector,
    /// post-selection probability; equals `‖C‖_F²/‖A‖_F²` exactly in
    /// simulation
    pub success_prob: f64,
    /// `‖C‖_F/‖A‖_F`: the post-selection amplitude. The squared value is
    /// the probability; both are reported because they differ.
    pub amplitude_ratio: f64,
    /// `‖C‖_F` recovered from the run as `‖A‖_F·√success_prob`
    pub norm_estimate: f64,
    /// `λ_k = norm_estimate · amps[k]`: the eigenvalue estimates
    pub lambda_estimates: Vec<C64>,
}

/// Prepare `|A⟩` from the storage tree, apply `F` to the row register and
/// `conj(F) = F†` to the column register, subtract the registers, and
/// project the difference onto 0.
pub fn eigenvalue_state(a: &DenseMatrix) -> Result<EigenvalueStateOutcome> {
    let n = a.n();
    if a.frob() <= 0.0 {
        return Err(Error::EmptyPostSelection("matrix has zero Frobenius norm".into()));
    }
    let tree = KpTree::build(a);
    let state = tree.prepare_matrix_state()?;
    let state = state.apply_fourier(0, FftDirection::Forward)?;
    let state = state.apply_fourier(1, FftDirection::Inverse)?;
    // (u, v) ↦ (u, u−v mod n): the difference register in place of v
    let state = state.map_pair(0, 1, |u, v| (u, (u + n - v) % n))?;
    let (state, success_prob) = state.project_register(1, 0).map_err(|e| match e {
        Error::EmptyPostSelection(_) => Error::EmptyPostSelection(
            "difference projection is empty: every circulant-diagonal sum of A vanishes".into(),
        ),
        other => other,
    })?;
    let norm_estimate = a.frob() * success_prob.sqrt();
    let lambda_estimates = state.amps().iter().map(|z| z * norm_estimate).collect();
    Ok(EigenvalueStateOutcome {
        amplitude_ratio: success_prob.sqrt(),
        success_prob,
        norm_estimate,
        state,
        lambda_estimates,
    })
}
