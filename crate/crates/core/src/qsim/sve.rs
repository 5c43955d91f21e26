//! Singular value estimation by phase estimation on the column-space walk.
//!
//! Three variants share one pipeline. All begin by embedding the input
//! into the (row ⊗ column) product space, run QPE on the walk operator,
//! write the singular value estimate into a value register, and undo the
//! QPE:
//!
//! * forward: `Σ αᵢ|vᵢ⟩ ↦ Σ αᵢ|uᵢ⟩|σ̃ᵢ⟩`, phase rotation `e^{+iθ̃/2}`
//!   keyed on the sign branch, exit through `U_N⁻¹`;
//! * reverse: `Σ αᵢ|uᵢ⟩ ↦ Σ αᵢ|vᵢ⟩|σ̃ᵢ⟩`, rotation `e^{−iθ̃/2}`, exit
//!   through `U_M⁻¹`;
//! * value-preserving: `Σ αᵢ|vᵢ⟩ ↦ Σ αᵢ|vᵢ⟩|σ̃ᵢ⟩`, no rotation.
//!
//! Register layout through the pipeline is (row ⊗ column) ⊗ phase ⊗
//! value. The value register stores the magnitude index `m = |j|` of the
//! two's-complement phase outcome `j` (so `m ∈ 0..=2^{t−1}`), which
//! decodes to `σ̃(m) = ‖A‖_F·cos(π·m/2^t)`. Phase outcomes on the t-bit
//! grid therefore decode without any further rounding, and
//! `|σ̃ − σ| ≤ π‖A‖_F·2^{−t}` at distribution modes.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;
use crate::qsim::qpe::{QpeCore, DEFAULT_AMP_CAP};
use crate::qsim::state::StateVector;
use crate::qsim::walk::{build_isometries, WalkOperator};

/// Margin by which a σ̃ peak must clear the sinc²-tail envelope of the
/// stronger branches to count as a resolved branch.
pub const BRANCH_ENVELOPE_FACTOR: f64 = 6.0;

/// What to do with the phase register after the un-computation step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum GarbagePolicy {
    /// Slice the phase register on `|0⟩`; weight left elsewhere is
    /// reported as `leak`.
    #[default]
    ExactUncompute,
    /// Keep the phase register in the output.
    KeepAncilla,
}

#[derive(Debug, Clone)]
pub struct SveConfig {
    /// t: phase register holds 2^t states
    pub phase_bits: usize,
    /// 0 = exact distributions; >0 enables sampling helpers
    pub shots: u64,
    pub seed: u64,
    pub garbage_policy: GarbagePolicy,
    /// refuse configurations with phase_bits above this
    pub phase_bits_cap: usize,
    /// refuse simulations with more than this many amplitudes
    pub amp_cap: usize,
}

impl Default for SveConfig {
    fn default() -> Self {
        SveConfig {
            phase_bits: 8,
            shots: 0,
            seed: 0,
            garbage_policy: GarbagePolicy::ExactUncompute,
            phase_bits_cap: 12,
            amp_cap: DEFAULT_AMP_CAP,
        }
    }
}

impl SveConfig {
    pub fn with_phase_bits(t: usize) -> Self {
        SveConfig {
            phase_bits: t,
            ..SveConfig::default()
        }
    }

    pub fn validate(&self, sys_dim: usize) -> Result<()> {
        if self.phase_bits == 0 {
            return Err(Error::Dimension("phase_bits must be positive".into()));
        }
        if self.phase_bits > self.phase_bits_cap {
            return Err(Error::CapExceeded {
                required: self.phase_bits,
                cap: self.phase_bits_cap,
            });
        }
        let required = sys_dim
            .checked_shl(self.phase_bits as u32)
            .ok_or(Error::CapExceeded {
                required: usize::MAX,
                cap: self.amp_cap,
            })?;
        if required > self.amp_cap {
            return Err(Error::CapExceeded {
                required,
                cap: self.amp_cap,
            });
        }
        Ok(())
    }

    /// `ε = π·2^{−t}`: the singular value precision delivered at
    /// distribution modes, relative to `‖A‖_F`.
    pub fn epsilon(&self) -> f64 {
        std::f64::consts::PI * (0.5f64).powi(self.phase_bits as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SveKind {
    ForwardVtoU,
    ReverseUtoV,
    ValuePreserving,
}

#[derive(Debug, Clone)]
pub struct SveOutcome {
    /// (system ⊗ value) for `ExactUncompute`, (system ⊗ phase ⊗ value)
    /// for `KeepAncilla`; normalized.
    pub state: StateVector,
    /// decode table: `sigma_values[m] = ‖A‖_F·cos(π·m/2^t)`
    pub sigma_values: Vec<f64>,
    /// exact measurement distribution of the value register
    pub distribution: Vec<f64>,
    /// squared weight not captured by the output state
    pub leak: f64,
    /// ‖A‖_F of the estimated matrix
    pub frob: f64,
}

impl SveOutcome {
    /// Index of the most likely value outcome.
    pub fn mode(&self) -> usize {
        self.distribution
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(m, _)| m)
            .unwrap_or(0)
    }

    pub fn sigma_at_mode(&self) -> f64 {
        self.sigma_values[self.mode()]
    }

    /// Median of `shots` sampled σ̃ values with a seeded generator.
    pub fn median_of_shots(&self, shots: u64, seed: u64) -> f64 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut samples: Vec<f64> = (0..shots.max(1))
            .map(|_| {
                let mut u = rng.random::<f64>();
                let mut pick = self.distribution.len() - 1;
                for (m, p) in self.distribution.iter().enumerate() {
                    u -= p;
                    if u <= 0.0 {
                        pick = m;
                        break;
                    }
                }
                self.sigma_values[pick]
            })
            .collect();
        samples.sort_by(f64::total_cmp);
        samples[samples.len() / 2]
    }

    /// CSV dump of the value-register distribution:
    /// `outcome,probability,sigma`.
    pub fn distribution_csv(&self) -> String {
        let mut out = String::from("outcome,probability,sigma\n");
        for (m, p) in self.distribution.iter().enumerate() {
            out.push_str(&format!("{m},{p:.17e},{:.17e}\n", self.sigma_values[m]));
        }
        out
    }
}

/// `Σ αᵢ|vᵢ⟩ ↦ Σ αᵢ|uᵢ⟩|σ̃ᵢ⟩`.
pub fn sve_forward(a: &DenseMatrix, input: &StateVector, cfg: &SveConfig) -> Result<SveOutcome> {
    run_sve(a, input, cfg, SveKind::ForwardVtoU)
}

/// `Σ αᵢ|uᵢ⟩ ↦ Σ αᵢ|vᵢ⟩|σ̃ᵢ⟩`.
pub fn sve_reverse(a: &DenseMatrix, input: &StateVector, cfg: &SveConfig) -> Result<SveOutcome> {
    run_sve(a, input, cfg, SveKind::ReverseUtoV)
}

/// `Σ αᵢ|vᵢ⟩ ↦ Σ αᵢ|vᵢ⟩|σ̃ᵢ⟩`: the singular-vector-preserving variant
/// whose inverse uncomputes a value register.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn sve_value_preserving(
    a: &DenseMatrix,
    input: &StateVector,
    cfg: &SveConfig,
) -> Result<SveOutcome> {
    run_sve(a, input, cfg, SveKind::ValuePreserving)
}

/// Magnitude index of the two's-complement phase outcome `j`.
pub(crate) fn value_index(j: usize, n_phase: usize) -> usize {
    j.min(n_phase - j)
}

/// `σ̃` decode table over value indices `0..=2^{t−1}`.
pub(crate) fn sigma_table(frob: f64, t: usize) -> Vec<f64> {
    let n_phase = 1usize << t;
    (0..=n_phase / 2)
        .map(|m| frob * (std::f64::consts::PI * m as f64 / n_phase as f64).cos())
        .collect()
}

fn run_sve(a: &DenseMatrix, input: &StateVector, cfg: &SveConfig, kind: SveKind) -> Result<SveOutcome> {
    let n = a.n();
    cfg.validate(n * n)?;
    if input.total_dim() != n {
        return Err(Error::Dimension(format!(
            "SVE input has dimension {}, matrix is {n}×{n}",
            input.total_dim()
        )));
    }
    let walk = build_isometries(a)?;
    let core = QpeCore::new(&walk.walk_matrix(), cfg.phase_bits, cfg.amp_cap)?;
    let embedded = match kind {
        SveKind::ForwardVtoU | SveKind::ValuePreserving => walk.embed_m(input.amps())?,
        SveKind::ReverseUtoV => walk.embed_n(input.amps())?,
    };
    let mut joint = core.apply(&embedded)?;

    let n_phase = core.phase_states();
    let n_val = n_phase / 2 + 1;
    let frob = a.frob();
    let sigma_values = sigma_table(frob, cfg.phase_bits);

    // exact value-register distribution (fixed by the QPE output; the
    // remaining steps act unitarily within each value class)
    let mut distribution = vec![0.0f64; n_val];
    for j in 0..n_phase {
        let m = value_index(j, n_phase);
        let w: f64 = (0..n * n).map(|s| joint[(s, j)].norm_sqr()).sum();
        distribution[m] += w;
    }
    let total: f64 = distribution.iter().sum();
    if total > 0.0 {
        for p in distribution.iter_mut() {
            *p /= total;
        }
    }

    // sign-keyed phase rotation
    match kind {
        SveKind::ValuePreserving => {}
        _ => {
            let sign = if kind == SveKind::ForwardVtoU { 1.0 } else { -1.0 };
            for j in 0..n_phase {
                let rot = C64::from_polar(1.0, sign * std::f64::consts::PI * core.signed_phase(j));
                for s in 0..n * n {
                    joint[(s, j)] *= rot;
                }
            }
        }
    }

    // per-value-class un-QPE, then exit through the closing isometry
    let contract = |big: &[C64]| -> Result<Vec<C64>> {
        match kind {
            SveKind::ForwardVtoU => walk.contract_n(big),
            SveKind::ReverseUtoV | SveKind::ValuePreserving => walk.contract_m(big),
        }
    };
    let out_label = match kind {
        SveKind::ForwardVtoU => "row",
        SveKind::ReverseUtoV | SveKind::ValuePreserving => "col",
    };

    let mut captured_sq = 0.0f64;
    let (dims, labels, mut amps) = match cfg.garbage_policy {
        GarbagePolicy::ExactUncompute => (
            vec![n, n_val],
            vec![out_label.to_string(), "value".to_string()],
            vec![C64::new(0.0, 0.0); n * n_val],
        ),
        GarbagePolicy::KeepAncilla => (
            vec![n, n_phase, n_val],
            vec![out_label.to_string(), "phase".to_string(), "value".to_string()],
            vec![C64::new(0.0, 0.0); n * n_phase * n_val],
        ),
    };

    let mut masked = ndarray::Array2::from_elem((n * n, n_phase), C64::new(0.0, 0.0));
    for m in 0..n_val {
        if distribution[m] <= 0.0 {
            continue;
        }
        masked.fill(C64::new(0.0, 0.0));
        let js: [usize; 2] = [m, (n_phase - m) % n_phase];
        for &j in js.iter().take(if js[0] == js[1] { 1 } else { 2 }) {
            for s in 0..n * n {
                masked[(s, j)] = joint[(s, j)];
            }
        }
        let back = core.unapply(&masked)?;
        match cfg.garbage_policy {
            GarbagePolicy::ExactUncompute => {
                let slice: Vec<C64> = (0..n * n).map(|s| back[(s, 0)]).collect();
                let reduced = contract(&slice)?;
                for (i, z) in reduced.iter().enumerate() {
                    amps[i * n_val + m] = *z;
                    captured_sq += z.norm_sqr();
                }
            }
            GarbagePolicy::KeepAncilla => {
                for j in 0..n_phase {
                    let slice: Vec<C64> = (0..n * n).map(|s| back[(s, j)]).collect();
                    let reduced = contract(&slice)?;
                    for (i, z) in reduced.iter().enumerate() {
                        amps[(i * n_phase + j) * n_val + m] = *z;
                        captured_sq += z.norm_sqr();
                    }
                }
            }
        }
    }

    let input_sq: f64 = input.amps().iter().map(|z| z.norm_sqr()).sum();
    let leak = (input_sq - captured_sq).max(0.0);
    if captured_sq < 1e-200 {
        return Err(Error::EmptyPostSelection("SVE output has no captured weight".into()));
    }
    let raw = StateVector::new_unnormalized(dims, labels, amps)?;
    let (state, _) = raw.normalize()?;
    Ok(SveOutcome {
        state,
        sigma_values,
        distribution,
        leak,
        frob,
    })
}

/// Exact value-register distribution of the forward SVE (the input is a
/// column-register state embedded through `U_M`) without constructing the
/// output state; the cheap path for histogram checks and dumps.
pub fn sve_distribution(a: &DenseMatrix, input: &StateVector, cfg: &SveConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.n();
    cfg.validate(n * n)?;
    if input.total_dim() != n {
        return Err(Error::Dimension(format!(
            "SVE input has dimension {}, matrix is {n}×{n}",
            input.total_dim()
        )));
    }
    let walk = build_isometries(a)?;
    let core = QpeCore::new(&walk.walk_matrix(), cfg.phase_bits, cfg.amp_cap)?;
    let embedded = walk.embed_m(input.amps())?;
    let joint = core.apply(&embedded)?;
    let n_phase = core.phase_states();
    let mut distribution = vec![0.0f64; n_phase / 2 + 1];
    for j in 0..n_phase {
        let m = value_index(j, n_phase);
        let w: f64 = (0..n * n).map(|s| joint[(s, j)].norm_sqr()).sum();
        distribution[m] += w;
    }
    let total: f64 = distribution.iter().sum();
    if total > 0.0 {
        for p in distribution.iter_mut() {
            *p /= total;
        }
    }
    Ok((distribution, sigma_table(a.frob(), cfg.phase_bits)))
}

/// Fused SVE-mediated application of branch weights `f(σ̃)`: the success
/// branch of "reverse SVE, rotate an ancilla by `weight(σ̃)`, post-select,
/// uncompute the value register by the inverse of the value-preserving
/// SVE". With nothing measured in between, the two QPE blocks cancel
/// around the diagonal weights, so the chain collapses to `V† D V` on the
/// embedded input with `D` diagonal in the phase register. The forward
/// QPE pass is shared across repeated weight applications.
pub(crate) struct FusedSve {
    core: QpeCore,
    /// QPE output over (system, phase)
    joint: ndarray::Array2<C64>,
    /// branch mass per phase index j
    masses: Vec<f64>,
    pub sigma_values: Vec<f64>,
    n: usize,
}

/// One weighted application through the fused chain.
pub(crate) struct FusedBranchApply {
    /// unnormalized output vector (column register, length n)
    pub output: Vec<C64>,
    /// Σ_j mass_j·|weight(σ̃(j))|²: the ancilla post-selection probability
    pub success_prob: f64,
    /// mass on branches where `keep` was false
    pub truncated_weight: f64,
    /// success_prob − ‖output‖²: weight lost to imperfect un-computation
    pub leak: f64,
}

impl FusedSve {
    pub fn new(walk: &WalkOperator, input: &StateVector, cfg: &SveConfig) -> Result<Self> {
        let n = walk.n();
        cfg.validate(n * n)?;
        if input.total_dim() != n {
            return Err(Error::Dimension(format!(
                "input has dimension {}, matrix is {n}×{n}",
                input.total_dim()
            )));
        }
        let core = QpeCore::new(&walk.walk_matrix(), cfg.phase_bits, cfg.amp_cap)?;
        let embedded = walk.embed_n(input.amps())?;
        let joint = core.apply(&embedded)?;
        let n_phase = core.phase_states();
        let masses: Vec<f64> = (0..n_phase)
            .map(|j| (0..n * n).map(|s| joint[(s, j)].norm_sqr()).sum())
            .collect();
        let sigma_values = sigma_table(walk.matrix().frob(), cfg.phase_bits);
        Ok(FusedSve {
            core,
            joint,
            masses,
            sigma_values,
            n,
        })
    }

    /// σ̃ of phase index j.
    fn sigma_of(&self, j: usize) -> f64 {
        self.sigma_values[value_index(j, self.core.phase_states())]
    }

    /// Exact value-register distribution before post-selection.
    pub fn distribution(&self) -> Vec<f64> {
        let n_phase = self.core.phase_states();
        let mut dist = vec![0.0f64; n_phase / 2 + 1];
        for j in 0..n_phase {
            dist[value_index(j, n_phase)] += self.masses[j];
        }
        let total: f64 = dist.iter().sum();
        if total > 0.0 {
            for p in dist.iter_mut() {
                *p /= total;
            }
        }
        dist
    }

    /// Detect genuine σ̃ branches in the value distribution: accept peaks
    /// in descending mass order whenever the mass clears the sinc²-tail
    /// envelope of every already-accepted branch by the fixed margin
    /// [`BRANCH_ENVELOPE_FACTOR`]. A branch whose peak cannot clear the
    /// margin is unresolvable at this phase precision and is left to the
    /// cutoff handling. Returns σ̃ values that pass `keep`, sorted
    /// ascending.
    pub fn branch_sigmas(&self, keep: impl Fn(f64) -> bool) -> Vec<f64> {
        let dist = self.distribution();
        let mut order: Vec<usize> = (0..dist.len()).collect();
        order.sort_by(|a, b| dist[*b].total_cmp(&dist[*a]));
        let mut accepted: Vec<usize> = Vec::new();
        for &m in &order {
            if dist[m] < 1e-12 {
                break;
            }
            let envelope: f64 = accepted
                .iter()
                .map(|&m0| {
                    let d = m.abs_diff(m0) as f64;
                    let tail = 2.0 / (std::f64::consts::PI * (2.0 * d - 1.0).max(1.0));
                    dist[m0] * (tail * tail).min(1.0)
                })
                .sum();
            if dist[m] > BRANCH_ENVELOPE_FACTOR * envelope {
                accepted.push(m);
            }
        }
        let mut out: Vec<f64> = accepted
            .into_iter()
            .map(|m| self.sigma_values[m])
            .filter(|s| keep(*s))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn apply_weights(
        &self,
        walk: &WalkOperator,
        keep: impl Fn(f64) -> bool,
        weight: impl Fn(f64) -> C64,
    ) -> Result<FusedBranchApply> {
        let n_phase = self.core.phase_states();
        let mut scaled = self.joint.clone();
        let mut success_prob = 0.0;
        let mut truncated_weight = 0.0;
        for j in 0..n_phase {
            let sigma = self.sigma_of(j);
            let factor = if keep(sigma) {
                // reverse-direction phase rotation times the branch weight
                C64::from_polar(1.0, -std::f64::consts::PI * self.core.signed_phase(j))
                    * weight(sigma)
            } else {
                truncated_weight += self.masses[j];
                C64::new(0.0, 0.0)
            };
            success_prob += self.masses[j] * factor.norm_sqr();
            for s in 0..self.n * self.n {
                scaled[(s, j)] *= factor;
            }
        }
        let back = self.core.unapply(&scaled)?;
        let slice: Vec<C64> = (0..self.n * self.n).map(|s| back[(s, 0)]).collect();
        let output = walk.contract_m(&slice)?;
        let out_sq: f64 = output.iter().map(|z| z.norm_sqr()).sum();
        Ok(FusedBranchApply {
            output,
            success_prob,
            truncated_weight,
            leak: (success_prob - out_sq).max(0.0),
        })
    }
}
