//! Linear inversion through the reverse SVE: estimate σ̃ on a register,
//! rotate an ancilla by `Z·σ̃⁻¹`, post-select it, and uncompute the
//! register with the inverse of the value-preserving SVE.
//!
//! The simulator evaluates this chain in fused form: with nothing
//! measured in between, the two QPE blocks cancel around the diagonal
//! branch weights, so the success branch is exactly `V† D V` applied to
//! the embedded input, where `D` carries the reverse-direction phase
//! rotation times `Z·σ̃(j)⁻¹` on kept branches and 0 on truncated ones.
//! Post-selection is exact branch renormalization with the probability
//! recorded, never rejection sampling.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;
use crate::qsim::state::StateVector;
use crate::qsim::sve::{FusedSve, SveConfig};
use crate::qsim::walk::{build_isometries, WalkOperator};

#[derive(Debug, Clone)]
pub struct InversionResult {
    /// normalized state ∝ A⁻¹|b⟩ (column register)
    pub state: StateVector,
    /// ancilla post-selection probability
    pub success_prob: f64,
    /// rotation scale; `Z·σ̃⁻¹ ≤ 1` on every kept branch
    pub z: f64,
    pub sigma_cutoff: f64,
    /// overlap with the normalized dense solve of the same matrix
    pub fidelity_vs_classical: f64,
    /// weight on branches below the cutoff, excluded from inversion
    pub truncated_weight: f64,
    /// post-selected weight lost to imperfect un-computation
    pub leak: f64,
    /// distinct kept σ̃ values with non-negligible mass
    pub sigma_support: Vec<f64>,
    /// exact pre-measurement distribution of the value register
    pub sigma_distribution: Vec<f64>,
    /// σ̃ decode table aligned with `sigma_distribution`
    pub sigma_values: Vec<f64>,
}

/// Invert `A` against `|b⟩`. `z` defaults to `(1 − 2^{−t})·min kept σ̃`,
/// the largest scale keeping every rotation amplitude below 1.
pub fn invert_via_sve(
    a: &DenseMatrix,
    b: &StateVector,
    cfg: &SveConfig,
    z: Option<f64>,
) -> Result<InversionResult> {
    let walk = build_isometries(a)?;
    invert_with_walk(&walk, b, cfg, z, true)
}

/// Inversion against a pre-built walk operator (used by the pipelines,
/// whose walk comes from assembled column states rather than a classical
/// matrix). `classical_fidelity` controls whether the dense-solve oracle
/// comparison is run.
pub fn invert_with_walk(
    walk: &WalkOperator,
    b: &StateVector,
    cfg: &SveConfig,
    z: Option<f64>,
    classical_fidelity: bool,
) -> Result<InversionResult> {
    let a = walk.matrix();
    let frob = a.frob();
    let sigma_cutoff = frob * (0.5f64).powi(cfg.phase_bits as i32);

    let ctx = FusedSve::new(walk, b, cfg)?;
    let kept = ctx.branch_sigmas(|s| s >= sigma_cutoff);
    if kept.is_empty() {
        return Err(Error::NumericallySingular(format!(
            "all σ̃ branches fall below the cutoff {sigma_cutoff:.3e}"
        )));
    }
    let min_kept = kept[0];
    // one QPE resolution of slack: a branch sitting exactly at σ = Z has
    // half its spread a grid step below Z
    let grid = std::f64::consts::PI * frob * (0.5f64).powi(cfg.phase_bits as i32);
    let z = match z {
        Some(z) => {
            if z > min_kept + 4.0 * grid {
                return Err(Error::InvalidRotation {
                    z,
                    min_sigma: min_kept,
                });
            }
            z
        }
        None => (1.0 - (0.5f64).powi(cfg.phase_bits as i32)) * min_kept,
    };

    // rotation amplitude Z·σ̃⁻¹ clamped at 1: spread branches below Z sit
    // at the fully-rotated angle instead of an invalid amplitude
    let applied = ctx.apply_weights(walk, |s| s >= sigma_cutoff, |s| {
        C64::new((z / s).min(1.0), 0.0)
    })?;
    if applied.success_prob < 1e-200 {
        return Err(Error::NumericallySingular(
            "post-selection has vanishing success probability".into(),
        ));
    }
    let raw = StateVector::new_unnormalized(vec![walk.n()], vec!["col".into()], applied.output)?;
    let (state, _) = raw.normalize()?;

    let fidelity_vs_classical = if classical_fidelity {
        let x = a.solve(b.amps())?;
        let norm: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        state
            .amps()
            .iter()
            .zip(&x)
            .map(|(s, v)| s.conj() * (v / norm))
            .sum::<C64>()
            .norm()
    } else {
        f64::NAN
    };

    Ok(InversionResult {
        state,
        success_prob: applied.success_prob,
        z,
        sigma_cutoff,
        fidelity_vs_classical,
        truncated_weight: applied.truncated_weight,
        leak: applied.leak,
        sigma_support: kept,
        sigma_distribution: ctx.distribution(),
        sigma_values: ctx.sigma_values.clone(),
    })
}
