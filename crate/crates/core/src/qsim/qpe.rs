//! Textbook quantum phase estimation, simulated exactly.
//!
//! The phase register holds `N = 2^t` basis states. The circuit is
//! `invQFT · (controlled powers of U) · H^{⊗t}`; controlled powers are
//! assembled from the repeated squarings `U^{2^s}`. Phases are read in
//! two's complement: register value `j` means `φ̃ = j/N` for `j < N/2`
//! and `φ̃ = (j−N)/N` otherwise.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::qsim::state::StateVector;

/// Default cap on simulated amplitudes (`system · 2^t`).
pub const DEFAULT_AMP_CAP: usize = 1 << 26;

/// Unitarity tolerance for operators fed to phase estimation.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Precomputed repeated squarings of one unitary, reused by the QPE
/// forward and inverse passes.
pub(crate) struct QpeCore {
    dim: usize,
    t: usize,
    /// u_pows[s] = U^{2^s}
    u_pows: Vec<Array2<C64>>,
}

pub(crate) fn unitarity_deviation(u: &Array2<C64>) -> f64 {
    let d = u.nrows();
    let prod = u.t().mapv(|z| z.conj()).dot(u);
    let mut dev = 0.0;
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            dev += (prod[(i, j)] - want).norm_sqr();
        }
    }
    dev.sqrt()
}

impl QpeCore {
    pub fn new(u: &Array2<C64>, t: usize, amp_cap: usize) -> Result<Self> {
        let (r, c) = u.dim();
        if r != c || r == 0 {
            return Err(Error::Dimension("phase estimation needs a square operator".into()));
        }
        if t == 0 {
            return Err(Error::Dimension("phase estimation needs at least one phase bit".into()));
        }
        let required = r << t;
        if required > amp_cap {
            return Err(Error::CapExceeded {
                required,
                cap: amp_cap,
            });
        }
        let dev = unitarity_deviation(u);
        if dev > UNITARITY_TOL * (r as f64).sqrt() {
            return Err(Error::NotUnitary { deviation: dev });
        }
        let mut u_pows = Vec::with_capacity(t);
        u_pows.push(u.clone());
        for s in 1..t {
            let prev = &u_pows[s - 1];
            u_pows.push(prev.dot(prev));
        }
        Ok(QpeCore { dim: r, t, u_pows })
    }

    pub fn phase_states(&self) -> usize {
        1 << self.t
    }

    /// Signed phase value of register basis state `j` (two's complement,
    /// in `[−1/2, 1/2)`).
    pub fn signed_phase(&self, j: usize) -> f64 {
        let n = self.phase_states();
        if j < n / 2 {
            j as f64 / n as f64
        } else {
            (j as f64 - n as f64) / n as f64
        }
    }

    /// Run QPE on a system vector with the phase register starting in
    /// `|0⟩`. Returns the joint state with shape (system, 2^t).
    pub fn apply(&self, sys: &[C64]) -> Result<Array2<C64>> {
        if sys.len() != self.dim {
            return Err(Error::Dimension("QPE input dimension mismatch".into()));
        }
        let n = self.phase_states();
        let scale = 1.0 / (n as f64).sqrt();
        let mut state = Array2::from_shape_fn((self.dim, n), |(s, _)| sys[s] * scale);
        self.controlled_powers(&mut state, false);
        self.fft_rows(&mut state, FftKind::InvQft);
        Ok(state)
    }

    /// Inverse of the full QPE circuit on a joint state.
    pub fn unapply(&self, state: &Array2<C64>) -> Result<Array2<C64>> {
        if state.dim() != (self.dim, self.phase_states()) {
            return Err(Error::Dimension("QPE unapply shape mismatch".into()));
        }
        let mut out = state.clone();
        self.fft_rows(&mut out, FftKind::Qft);
        self.controlled_powers(&mut out, true);
        hadamard_rows(&mut out);
        Ok(out)
    }

    fn controlled_powers(&self, state: &mut Array2<C64>, adjoint: bool) {
        let n = self.phase_states();
        for s in 0..self.t {
            let js: Vec<usize> = (0..n).filter(|j| (j >> s) & 1 == 1).collect();
            let mut gathered = Array2::from_elem((self.dim, js.len()), C64::new(0.0, 0.0));
            for (col, &j) in js.iter().enumerate() {
                for row in 0..self.dim {
                    gathered[(row, col)] = state[(row, j)];
                }
            }
            let applied = if adjoint {
                self.u_pows[s].t().mapv(|z| z.conj()).dot(&gathered)
            } else {
                self.u_pows[s].dot(&gathered)
            };
            for (col, &j) in js.iter().enumerate() {
                for row in 0..self.dim {
                    state[(row, j)] = applied[(row, col)];
                }
            }
        }
    }

    fn fft_rows(&self, state: &mut Array2<C64>, kind: FftKind) {
        let n = self.phase_states();
        let mut planner = FftPlanner::new();
        let plan = match kind {
            // inverse QFT has kernel exp(−2πi jk/N): a forward DFT
            FftKind::InvQft => planner.plan_fft_forward(n),
            FftKind::Qft => planner.plan_fft_inverse(n),
        };
        let scale = 1.0 / (n as f64).sqrt();
        for mut row in state.rows_mut() {
            let buf = row.as_slice_mut().expect("standard layout rows are contiguous");
            plan.process(buf);
            for z in buf.iter_mut() {
                *z *= scale;
            }
        }
    }
}

enum FftKind {
    Qft,
    InvQft,
}

/// In-place Walsh–Hadamard transform of each row (its own inverse).
fn hadamard_rows(state: &mut Array2<C64>) {
    let n = state.ncols();
    debug_assert!(n.is_power_of_two());
    let scale = 1.0 / 2f64.sqrt();
    for mut row in state.rows_mut() {
        let buf = row.as_slice_mut().expect("standard layout rows are contiguous");
        let mut half = 1;
        while half < n {
            let step = half * 2;
            for start in (0..n).step_by(step) {
                for k in start..start + half {
                    let a = buf[k];
                    let b = buf[k + half];
                    buf[k] = (a + b) * scale;
                    buf[k + half] = (a - b) * scale;
                }
            }
            half = step;
        }
    }
}

/// Standard phase estimation: appends a `2^t`-sized register named
/// `phase` holding the t-bit eigenphase estimate, entangled with the
/// input (no measurement is performed).
pub fn phase_estimation(u: &Array2<C64>, input: &StateVector, t: usize) -> Result<StateVector> {
    let core = QpeCore::new(u, t, DEFAULT_AMP_CAP)?;
    if input.total_dim() != u.nrows() {
        return Err(Error::Dimension(format!(
            "operator of size {} does not act on state of dimension {}",
            u.nrows(),
            input.total_dim()
        )));
    }
    let joint = core.apply(input.amps())?;
    let n = core.phase_states();
    let mut dims = input.dims().to_vec();
    dims.push(n);
    let mut labels = input.labels().to_vec();
    labels.push("phase".into());
    let mut amps = Vec::with_capacity(joint.len());
    for row in joint.rows() {
        amps.extend(row.iter().copied());
    }
    if input.is_normalized() {
        StateVector::new_normalized(dims, labels, amps)
    } else {
        StateVector::new_unnormalized(dims, labels, amps)
    }
}

/// Exact single-eigenphase QPE weight: probability of outcome `j` for
/// true phase `φ`; the standard `sin` ratio form, periodic in `φ`.
pub fn qpe_outcome_probability(phi: f64, j: usize, t: usize) -> f64 {
    let n = (1usize << t) as f64;
    let delta = phi - j as f64 / n;
    let delta = delta - delta.round();
    if delta.abs() < 1e-15 {
        return 1.0;
    }
    let x = std::f64::consts::PI * delta;
    ((n * x).sin() / (n * x.sin())).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::test_support::c;

    fn diag_unitary(phases: &[f64]) -> Array2<C64> {
        let d = phases.len();
        Array2::from_shape_fn((d, d), |(i, j)| {
            if i == j {
                C64::from_polar(1.0, 2.0 * std::f64::consts::PI * phases[i])
            } else {
                c(0.0, 0.0)
            }
        })
    }

    #[test]
    fn identity_gives_zero_phase_deterministically() {
        let u = diag_unitary(&[0.0, 0.0]);
        let input = StateVector::from_vector("sys", vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let out = phase_estimation(&u, &input, 3).unwrap();
        let dist = out.distribution(1).unwrap();
        assert!((dist[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_quarter_phase_reads_01() {
        // U = diag(1, i): second basis state has φ = 1/4; with t = 2 the
        // register reads index 1 (bits 01)
        let u = diag_unitary(&[0.0, 0.25]);
        let input = StateVector::from_vector("sys", vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let out = phase_estimation(&u, &input, 2).unwrap();
        let dist = out.distribution(1).unwrap();
        assert!((dist[1] - 1.0).abs() < 1e-12, "dist {dist:?}");
    }

    #[test]
    fn non_representable_phase_matches_analytic_distribution() {
        let phi = 0.3;
        let u = diag_unitary(&[0.0, phi]);
        let input = StateVector::from_vector("sys", vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let t = 6;
        let out = phase_estimation(&u, &input, t).unwrap();
        let dist = out.distribution(1).unwrap();
        // oracle: the analytic QPE outcome distribution
        for (j, p) in dist.iter().enumerate() {
            let want = qpe_outcome_probability(phi, j, t);
            assert!((p - want).abs() <= 1e-12, "j={j}: {p} vs {want}");
        }
        let mode = dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(mode, (phi * 64.0).round() as usize);
        assert!(dist[mode] >= 4.0 / std::f64::consts::PI.powi(2));
    }

    #[test]
    fn unapply_inverts_apply() {
        let u = diag_unitary(&[0.17, 0.62, 0.85]);
        let core = QpeCore::new(&u, 4, DEFAULT_AMP_CAP).unwrap();
        let sys = vec![c(0.5, 0.1), c(-0.3, 0.4), c(0.2, -0.67)];
        let fwd = core.apply(&sys).unwrap();
        let back = core.unapply(&fwd).unwrap();
        // phase register returns to |0⟩ carrying the original system state
        for (s, want) in sys.iter().enumerate() {
            assert!((back[(s, 0)] - want).norm() < 1e-12);
            for j in 1..16 {
                assert!(back[(s, j)].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let mut u = diag_unitary(&[0.0, 0.0]);
        u[(0, 0)] = c(2.0, 0.0);
        let input = StateVector::from_vector("sys", vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        match phase_estimation(&u, &input, 2) {
            Err(Error::NotUnitary { deviation }) => assert!(deviation > 1.0),
            other => panic!("expected NotUnitary, got {other:?}"),
        }
    }

    #[test]
    fn rejects_cap_excess() {
        let u = diag_unitary(&[0.0, 0.5]);
        assert!(matches!(
            QpeCore::new(&u, 30, 1 << 20),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn signed_phase_convention() {
        let u = diag_unitary(&[0.0, 0.5]);
        let core = QpeCore::new(&u, 3, DEFAULT_AMP_CAP).unwrap();
        assert_eq!(core.signed_phase(0), 0.0);
        assert_eq!(core.signed_phase(1), 0.125);
        assert_eq!(core.signed_phase(3), 0.375);
        assert_eq!(core.signed_phase(4), -0.5);
        assert_eq!(core.signed_phase(7), -0.125);
    }
}
