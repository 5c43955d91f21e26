//! The two isometries behind the SVE walk and the walk operator itself.
//!
//! The product space is (row ⊗ column) with basis `|i,j⟩` at index
//! `i·n + j`. `M|j⟩ = |A_j⟩|j⟩` embeds a column-register state;
//! `N|i⟩ = |i⟩|A_F⟩` embeds a row-register state;
//! `W = (2NN† − I)(2MM† − I)` rotates each invariant plane
//! span{M|vᵢ⟩, N|uᵢ⟩} by the angle `θᵢ` with
//! `cos θᵢ = 2σᵢ²/‖A‖_F² − 1`.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;
use crate::qsim::kptree::KpTree;

#[derive(Debug, Clone)]
pub struct WalkOperator {
    /// the matrix the walk encodes (columns times norms for assembled input)
    a: DenseMatrix,
    m_iso: Array2<C64>,
    n_iso: Array2<C64>,
}

/// `W` restricted to span{M|vᵢ⟩, N|uᵢ⟩} in the ordered (non-orthogonal)
/// basis (N|uᵢ⟩, M|vᵢ⟩).
#[derive(Debug, Clone)]
pub struct WalkBlock {
    pub matrix: [[C64; 2]; 2],
    /// `arccos(2σᵢ²/‖A‖_F² − 1)`
    pub theta: f64,
    /// set when σᵢ = 0 (the two basis vectors are orthogonal and W acts as
    /// −I) or σᵢ = ‖A‖_F (the basis degenerates to one direction)
    pub degenerate: bool,
}

/// Build `M` and `N` from the columns of `A`. Every column must have
/// positive norm and `‖A‖_F > 0`.
pub fn build_isometries(a: &DenseMatrix) -> Result<WalkOperator> {
    let n = a.n();
    if a.frob() <= 0.0 {
        return Err(Error::Dimension("walk operator needs a nonzero matrix".into()));
    }
    let tree = KpTree::build(a);
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        if tree.column_root(j) <= 0.0 {
            return Err(Error::ZeroColumn { j });
        }
        columns.push(tree.prepare_column(j)?);
    }
    let norms: Vec<f64> = (0..n).map(|j| tree.column_norm(j)).collect();
    WalkOperator::from_column_states(&columns, &norms)
}

impl WalkOperator {
    /// Build from already-prepared normalized column states and their
    /// norms; the encoded matrix is `Σ_j norms[j]·columns[j]·⟨j|`.
    pub fn from_column_states(columns: &[Vec<C64>], norms: &[f64]) -> Result<Self> {
        let n = columns.len();
        if n == 0 || norms.len() != n || columns.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension("need n column states of length n with n norms".into()));
        }
        for (j, &w) in norms.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::ZeroColumn { j });
            }
        }
        let mut entries = Array2::from_elem((n, n), C64::new(0.0, 0.0));
        for j in 0..n {
            for i in 0..n {
                entries[(i, j)] = columns[j][i] * norms[j];
            }
        }
        let a = DenseMatrix::new(entries)?;
        let frob = a.frob();

        let mut m_iso = Array2::from_elem((n * n, n), C64::new(0.0, 0.0));
        for j in 0..n {
            for i in 0..n {
                m_iso[(i * n + j, j)] = columns[j][i];
            }
        }
        let mut n_iso = Array2::from_elem((n * n, n), C64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..n {
                n_iso[(i * n + j, i)] = C64::new(norms[j] / frob, 0.0);
            }
        }
        Ok(WalkOperator { a, m_iso, n_iso })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// The encoded matrix (equals `‖A‖_F · N†M`).
    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn m_iso(&self) -> &Array2<C64> {
        &self.m_iso
    }

    pub fn n_iso(&self) -> &Array2<C64> {
        &self.n_iso
    }

    /// Embed a column-register state: `ψ ↦ M·ψ`.
    pub fn embed_m(&self, psi: &[C64]) -> Result<Vec<C64>> {
        self.embed(&self.m_iso, psi)
    }

    /// Embed a row-register state: `ψ ↦ N·ψ`.
    pub fn embed_n(&self, psi: &[C64]) -> Result<Vec<C64>> {
        self.embed(&self.n_iso, psi)
    }

    fn embed(&self, iso: &Array2<C64>, psi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != self.n() {
            return Err(Error::Dimension("embed dimension mismatch".into()));
        }
        let x = Array1::from_vec(psi.to_vec());
        Ok(iso.dot(&x).to_vec())
    }

    /// Contract with `M†` (the inverse of the embedding on its range).
    pub fn contract_m(&self, big: &[C64]) -> Result<Vec<C64>> {
        self.contract(&self.m_iso, big)
    }

    /// Contract with `N†`.
    pub fn contract_n(&self, big: &[C64]) -> Result<Vec<C64>> {
        self.contract(&self.n_iso, big)
    }

    fn contract(&self, iso: &Array2<C64>, big: &[C64]) -> Result<Vec<C64>> {
        let n = self.n();
        if big.len() != n * n {
            return Err(Error::Dimension("contract dimension mismatch".into()));
        }
        let x = Array1::from_vec(big.to_vec());
        Ok(iso.t().mapv(|z| z.conj()).dot(&x).to_vec())
    }

    /// Dense `W = (2NN† − I)(2MM† − I)`.
    pub fn walk_matrix(&self) -> Array2<C64> {
        let n2 = self.n() * self.n();
        let mh = self.m_iso.t().mapv(|z| z.conj());
        let nh = self.n_iso.t().mapv(|z| z.conj());
        let mut refl_m = self.m_iso.dot(&mh).mapv(|z| z * 2.0);
        let mut refl_n = self.n_iso.dot(&nh).mapv(|z| z * 2.0);
        for k in 0..n2 {
            refl_m[(k, k)] -= 1.0;
            refl_n[(k, k)] -= 1.0;
        }
        refl_n.dot(&refl_m)
    }

    /// Eigenphase of the `i`-th invariant plane:
    /// `θᵢ = arccos(2σᵢ²/‖A‖_F² − 1)`.
    pub fn eigenphase(&self, i: usize) -> Result<f64> {
        let svd = self.a.svd();
        if i >= svd.sigma.len() {
            return Err(Error::IndexOutOfRange(format!("singular index {i}")));
        }
        let ratio = svd.sigma[i] / self.a.frob();
        Ok((2.0 * ratio * ratio - 1.0).clamp(-1.0, 1.0).acos())
    }

    /// The 2×2 representation of `W` on span{M|vᵢ⟩, N|uᵢ⟩} in the ordered
    /// basis (N|uᵢ⟩, M|vᵢ⟩), solved from the actual walk action when the
    /// basis is nondegenerate and from the rotation formula otherwise.
    pub fn walk_block(&self, i: usize) -> Result<WalkBlock> {
        let svd = self.a.svd();
        if i >= svd.sigma.len() {
            return Err(Error::IndexOutOfRange(format!("singular index {i}")));
        }
        let frob = self.a.frob();
        let sigma = svd.sigma[i];
        let ratio = sigma / frob;
        let theta = (2.0 * ratio * ratio - 1.0).clamp(-1.0, 1.0).acos();
        let formula = [
            [
                C64::new(4.0 * ratio * ratio - 1.0, 0.0),
                C64::new(2.0 * ratio, 0.0),
            ],
            [C64::new(-2.0 * ratio, 0.0), C64::new(-1.0, 0.0)],
        ];
        // degenerate plane: σ = 0 makes the basis orthogonal with W = −I;
        // σ = ‖A‖_F collapses the two basis vectors onto one direction
        let degenerate = sigma <= 1e-14 * frob || (1.0 - ratio) <= 1e-12;
        if degenerate {
            return Ok(WalkBlock {
                matrix: formula,
                theta,
                degenerate: true,
            });
        }

        let n = self.n();
        let v_i: Vec<C64> = (0..n).map(|k| svd.v[(k, i)]).collect();
        let u_i: Vec<C64> = (0..n).map(|k| svd.u[(k, i)]).collect();
        let mv = self.embed_m(&v_i)?;
        let nu = self.embed_n(&u_i)?;
        let w = self.walk_matrix();
        let wmv = w.dot(&Array1::from_vec(mv.clone()));
        let wnu = w.dot(&Array1::from_vec(nu.clone()));

        let dot = |a: &[C64], b: &[C64]| -> C64 {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
        };
        // Gram system in the (N|u⟩, M|v⟩) basis
        let g = [
            [dot(&nu, &nu), dot(&nu, &mv)],
            [dot(&mv, &nu), dot(&mv, &mv)],
        ];
        let rhs = [
            [dot(&nu, wnu.as_slice().unwrap()), dot(&nu, wmv.as_slice().unwrap())],
            [dot(&mv, wnu.as_slice().unwrap()), dot(&mv, wmv.as_slice().unwrap())],
        ];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if det.norm() < 1e-12 {
            return Ok(WalkBlock {
                matrix: formula,
                theta,
                degenerate: true,
            });
        }
        let inv = [
            [g[1][1] / det, -g[0][1] / det],
            [-g[1][0] / det, g[0][0] / det],
        ];
        let mut block = [[C64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                block[r][c] = inv[r][0] * rhs[0][c] + inv[r][1] * rhs[1][c];
            }
        }
        Ok(WalkBlock {
            matrix: block,
            theta,
            degenerate: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::test_support::{c, frob_dist, rand_cmat, rng};

    fn eye(n: usize) -> Array2<C64> {
        Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    fn well_formed(r: &mut rand_chacha::ChaCha20Rng, n: usize) -> DenseMatrix {
        loop {
            let a = DenseMatrix::new(rand_cmat(r, n)).unwrap();
            if (0..n).all(|j| a.column_norm(j) > 1e-3) {
                return a;
            }
        }
    }

    #[test]
    fn identity_matrix_gives_scaled_overlap() {
        let w = build_isometries(&DenseMatrix::identity(2)).unwrap();
        let nm = w.n_iso().t().mapv(|z| z.conj()).dot(w.m_iso());
        let want = eye(2).mapv(|z| z / 2f64.sqrt());
        assert!(frob_dist(&nm, &want) <= 1e-12);
    }

    #[test]
    fn diagonal_matrix_overlap() {
        let a = DenseMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let w = build_isometries(&a).unwrap();
        let nm = w.n_iso().t().mapv(|z| z.conj()).dot(w.m_iso());
        let s = 5f64.sqrt();
        assert!((nm[(0, 0)] - c(1.0 / s, 0.0)).norm() <= 1e-12);
        assert!((nm[(1, 1)] - c(2.0 / s, 0.0)).norm() <= 1e-12);
        assert!(nm[(0, 1)].norm() <= 1e-12 && nm[(1, 0)].norm() <= 1e-12);
    }

    #[test]
    fn isometry_identities_hold() {
        let mut r = rng(127);
        for n in 2..=6 {
            let a = well_formed(&mut r, n);
            let w = build_isometries(&a).unwrap();
            let mh = w.m_iso().t().mapv(|z| z.conj());
            let nh = w.n_iso().t().mapv(|z| z.conj());
            assert!(frob_dist(&mh.dot(w.m_iso()), &eye(n)) <= 1e-10);
            assert!(frob_dist(&nh.dot(w.n_iso()), &eye(n)) <= 1e-10);
            let scaled = a.entries().mapv(|z| z / a.frob());
            assert!(frob_dist(&nh.dot(w.m_iso()), &scaled) <= 1e-10);
            // W unitary
            let wm = w.walk_matrix();
            let wh = wm.t().mapv(|z| z.conj());
            assert!(frob_dist(&wh.dot(&wm), &eye(n * n)) <= 1e-10);
        }
    }

    #[test]
    fn zero_column_rejected() {
        let mut e = rand_cmat(&mut rng(131), 3);
        for i in 0..3 {
            e[(i, 1)] = c(0.0, 0.0);
        }
        let a = DenseMatrix::new(e).unwrap();
        match build_isometries(&a) {
            Err(Error::ZeroColumn { j }) => assert_eq!(j, 1),
            other => panic!("expected ZeroColumn, got {other:?}"),
        }
    }

    #[test]
    fn invariant_plane_and_block_formula() {
        let mut r = rng(137);
        for n in 2..=5 {
            let a = well_formed(&mut r, n);
            let w = build_isometries(&a).unwrap();
            let svd = a.svd();
            let wm = w.walk_matrix();
            for i in 0..n {
                let v_i: Vec<C64> = (0..n).map(|k| svd.v[(k, i)]).collect();
                let u_i: Vec<C64> = (0..n).map(|k| svd.u[(k, i)]).collect();
                let mv = Array1::from_vec(w.embed_m(&v_i).unwrap());
                let nu = Array1::from_vec(w.embed_n(&u_i).unwrap());
                let ratio = svd.sigma[i] / a.frob();
                // W·M|v⟩ = (2σ/F)N|u⟩ − M|v⟩
                let got = wm.dot(&mv);
                let want = nu.mapv(|z| z * 2.0 * ratio) - &mv;
                let res: f64 = got
                    .iter()
                    .zip(want.iter())
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-9, "n={n} i={i} residual {res}");
                // W·N|u⟩ = (4σ²/F²−1)N|u⟩ − (2σ/F)M|v⟩
                let got2 = wm.dot(&nu);
                let want2 = nu.mapv(|z| z * (4.0 * ratio * ratio - 1.0)) - mv.mapv(|z| z * 2.0 * ratio);
                let res2: f64 = got2
                    .iter()
                    .zip(want2.iter())
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res2 <= 1e-9, "n={n} i={i} residual {res2}");

                let block = w.walk_block(i).unwrap();
                let want_block = [
                    [c(4.0 * ratio * ratio - 1.0, 0.0), c(2.0 * ratio, 0.0)],
                    [c(-2.0 * ratio, 0.0), c(-1.0, 0.0)],
                ];
                for rr in 0..2 {
                    for cc in 0..2 {
                        assert!(
                            (block.matrix[rr][cc] - want_block[rr][cc]).norm() <= 1e-10,
                            "block entry ({rr},{cc})"
                        );
                    }
                }
                // eigenvalues of the block are e^{±iθ}
                let tr = block.matrix[0][0] + block.matrix[1][1];
                let det = block.matrix[0][0] * block.matrix[1][1]
                    - block.matrix[0][1] * block.matrix[1][0];
                let disc = (tr * tr - det * 4.0).sqrt();
                let e1 = (tr + disc) * 0.5;
                let e2 = (tr - disc) * 0.5;
                let want_pos = C64::from_polar(1.0, block.theta);
                let want_neg = C64::from_polar(1.0, -block.theta);
                let direct = ((e1 - want_pos).norm() + (e2 - want_neg).norm()).min(
                    (e1 - want_neg).norm() + (e2 - want_pos).norm(),
                );
                assert!(direct <= 1e-9, "eigenphase mismatch {direct}");
            }
        }
    }

    #[test]
    fn identity_block_is_pi_over_two_rotation() {
        let w = build_isometries(&DenseMatrix::identity(2)).unwrap();
        let block = w.walk_block(0).unwrap();
        let s = 2f64.sqrt();
        assert!((block.matrix[0][0] - c(1.0, 0.0)).norm() <= 1e-10);
        assert!((block.matrix[0][1] - c(s, 0.0)).norm() <= 1e-10);
        assert!((block.matrix[1][0] - c(-s, 0.0)).norm() <= 1e-10);
        assert!((block.matrix[1][1] - c(-1.0, 0.0)).norm() <= 1e-10);
        assert!((block.theta - std::f64::consts::FRAC_PI_2).abs() <= 1e-12);
    }

    #[test]
    fn rank_one_block_is_degenerate_with_zero_angle() {
        // A = σ|u⟩⟨v| with σ = ‖A‖_F fixes M|v⟩
        let u = [c(0.6, 0.0), c(0.8, 0.0)];
        let v = [c(0.8, 0.0), c(0.6, 0.0)];
        let a = DenseMatrix::new(Array2::from_shape_fn((2, 2), |(i, j)| u[i] * v[j].conj() * 2.0)).unwrap();
        let w = build_isometries(&a).unwrap();
        let block = w.walk_block(0).unwrap();
        assert!(block.degenerate);
        assert!(block.theta.abs() <= 1e-7, "theta {}", block.theta);
    }

    #[test]
    fn zero_sigma_block_is_minus_identity() {
        // rank-1 matrix has σ₁ = 0
        let u = [c(0.6, 0.0), c(0.8, 0.0)];
        let v = [c(0.8, 0.0), c(0.6, 0.0)];
        let a = DenseMatrix::new(Array2::from_shape_fn((2, 2), |(i, j)| u[i] * v[j].conj())).unwrap();
        let w = build_isometries(&a).unwrap();
        let block = w.walk_block(1).unwrap();
        assert!(block.degenerate);
        assert!((block.matrix[0][0] - c(-1.0, 0.0)).norm() <= 1e-12);
        assert!(block.matrix[0][1].norm() <= 1e-12);
        assert!((block.theta - std::f64::consts::PI).abs() <= 1e-7);
    }
}
