//! Error calculus for states assembled from noisy components: the
//! three-term bound on `‖|φ⟩ − |ψ⟩‖²`, its simplified forms under the
//! eigenvalue scaling convention, and the precision selection rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs of the assembled-state error bound: per-coefficient error η₀,
/// per-vector error η₁, normalization error η₂, the extremal vector norms
/// η₃ and η₄, and the exact squared normalization `W`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub eta0: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
    pub w_norm: f64,
}

impl ErrorBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta0", self.eta0),
            ("eta1", self.eta1),
            ("eta2", self.eta2),
            ("eta3", self.eta3),
            ("eta4", self.eta4),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "{name} must be a finite nonnegative real, got {v}"
                )));
            }
        }
        if !(self.w_norm > 0.0) {
            return Err(Error::Domain(format!("W must be positive, got {}", self.w_norm)));
        }
        if self.w_norm - self.eta2 <= 0.0 {
            return Err(Error::Domain(format!(
                "W − η₂ must be positive (W = {}, η₂ = {})",
                self.w_norm, self.eta2
            )));
        }
        Ok(())
    }
}

/// `3η₁η₄ + 3η₂²η₃η₄ / (W(√W + √(W−η₂))²) + 3nη₀²η₃/W`.
pub fn assembled_state_error_bound(budget: &ErrorBudget, n: usize) -> Result<f64> {
    budget.validate()?;
    let w = budget.w_norm;
    let denom = w * (w.sqrt() + (w - budget.eta2).sqrt()).powi(2);
    Ok(3.0 * budget.eta1 * budget.eta4
        + 3.0 * budget.eta2.powi(2) * budget.eta3 * budget.eta4 / denom
        + 3.0 * n as f64 * budget.eta0.powi(2) * budget.eta3 / w)
}

/// The bound specialized to the preconditioner-column assembly, in three
/// stages of simplification. Under the scaling convention the eigenvalue
/// magnitudes sit in `[1/κ, 1]` and `W = β‖A‖_F²`, which removes `‖A‖_F`
/// from the expressions; `bound_full` is the unsimplified form evaluated at
/// that normalization and `bound_scaled`/`bound_simplified` are the successive
/// simplifications. Requires `ε² ≤ β`.
pub fn simplified_bounds(
    eps: f64,
    kappa_c: f64,
    beta: f64,
    max_lambda_sq: f64,
) -> Result<(f64, f64, f64)> {
    if !(eps >= 0.0) || !(kappa_c >= 1.0) || !(beta > 0.0) || !(max_lambda_sq > 0.0) {
        return Err(Error::Domain(
            "simplified_bounds needs eps ≥ 0, κ ≥ 1, β > 0, max|λ|² > 0".into(),
        ));
    }
    let e2 = eps * eps;
    if e2 > beta {
        return Err(Error::Domain(format!("ε² = {e2} exceeds β = {beta}")));
    }
    if e2 == 0.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let budget = ErrorBudget {
        eta0: 0.0,
        eta1: e2,
        eta2: e2, // ‖A‖_F²ε² at the unit-norm convention ‖A‖_F = 1
        eta3: kappa_c * kappa_c / max_lambda_sq, // 1/min|λ|²
        eta4: max_lambda_sq,
        w_norm: beta, // β‖A‖_F² at ‖A‖_F = 1
    };
    let bound_full = assembled_state_error_bound(&budget, 0)?;
    let bound_scaled = 3.0 * e2 * max_lambda_sq
        + 3.0 * e2 * e2 * kappa_c * kappa_c
            / (beta * beta * (1.0 + (1.0 - e2 / beta).sqrt()).powi(2));
    let bound_simplified = 3.0 * e2 + 3.0 * e2 * e2 * kappa_c * kappa_c / (beta * beta);
    Ok((bound_full, bound_scaled, bound_simplified))
}

/// Precision selection: `ε = √(ε₀·β/κ)` balances the second simplified
/// term to `3ε₀²` via the identity `ε⁴κ² = ε₀²β²`.
pub fn choose_epsilon(eps0: f64, beta: f64, kappa_c: f64) -> Result<f64> {
    if !(eps0 > 0.0) || !(beta > 0.0) || !(kappa_c > 0.0) {
        return Err(Error::Domain("choose_epsilon needs positive inputs".into()));
    }
    Ok((eps0 * beta / kappa_c).sqrt())
}
