//! Dense complex matrices with a cached Frobenius norm and a lazily
//! computed, gauge-fixed SVD.

use std::sync::OnceLock;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Determinant, Eig, Solve, SVD};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative tolerance below which a singular value counts as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Square complex matrix. Entries are validated to be finite at
/// construction; the Frobenius norm is cached and the SVD is computed on
/// first use and then shared.
#[derive(Debug)]
pub struct DenseMatrix {
    n: usize,
    entries: Array2<C64>,
    frob: f64,
    svd: OnceLock<SvdDecomposition>,
}

impl Clone for DenseMatrix {
    fn clone(&self) -> Self {
        DenseMatrix {
            n: self.n,
            entries: self.entries.clone(),
            frob: self.frob,
            svd: OnceLock::new(),
        }
    }
}

/// `A = U · diag(sigma) · V†` with `U, V` unitary and `sigma`
/// nonincreasing. The phase gauge is fixed so that the first component of
/// each right singular vector with magnitude above `1e-12` is real
/// positive.
#[derive(Debug, Clone)]
pub struct SvdDecomposition {
    pub u: Array2<C64>,
    pub sigma: Vec<f64>,
    pub v: Array2<C64>,
}

/// Condition number together with an explicit singularity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionNumber {
    pub kappa: f64,
    pub singular: bool,
}

impl DenseMatrix {
    pub fn new(entries: Array2<C64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r == 0 {
            return Err(Error::Dimension(format!(
                "DenseMatrix must be square and nonempty, got {r}x{c}"
            )));
        }
        for z in entries.iter() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite("matrix entry".into()));
            }
        }
        let frob = entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(DenseMatrix {
            n: r,
            entries,
            frob,
            svd: OnceLock::new(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let e = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        DenseMatrix::new(e).expect("identity is valid")
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::Dimension("empty diagonal".into()));
        }
        let mut e = Array2::zeros((n, n));
        for (k, z) in diag.iter().enumerate() {
            e[(k, k)] = *z;
        }
        DenseMatrix::new(e)
    }

    /// Build from columns given as plain vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let n = cols.len();
        if n == 0 || cols.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension("from_columns requires n columns of length n".into()));
        }
        let e = Array2::from_shape_fn((n, n), |(i, j)| cols[j][i]);
        DenseMatrix::new(e)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn frob(&self) -> f64 {
        self.frob
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let e = self.entries.t().mapv(|z| z.conj());
        DenseMatrix::new(e.to_owned()).expect("adjoint of valid matrix is valid")
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n != rhs.n {
            return Err(Error::Dimension("matmul dimension mismatch".into()));
        }
        DenseMatrix::new(self.entries.dot(&rhs.entries))
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.n {
            return Err(Error::Dimension("apply dimension mismatch".into()));
        }
        let x = Array1::from_vec(v.to_vec());
        Ok(self.entries.dot(&x).to_vec())
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.entries.column(j).to_vec()
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.entries
            .column(j)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Max nonzero count over rows and columns, with entries below
    /// `1e-12 · max|a|` treated as zero.
    pub fn sparsity(&self) -> usize {
        let maxabs = self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = 1e-12 * maxabs;
        let mut best = 0;
        for i in 0..self.n {
            let r = self.entries.row(i).iter().filter(|z| z.norm() > tol).count();
            let c = self
                .entries
                .column(i)
                .iter()
                .filter(|z| z.norm() > tol)
                .count();
            best = best.max(r).max(c);
        }
        best
    }

    /// Gauge-fixed SVD, computed once and cached.
    pub fn svd(&self) -> &SvdDecomposition {
        self.svd.get_or_init(|| compute_svd(&self.entries))
    }

    pub fn condition_number(&self) -> ConditionNumber {
        let s = &self.svd().sigma;
        let smax = s.first().copied().unwrap_or(0.0);
        let smin = s.last().copied().unwrap_or(0.0);
        if smax == 0.0 || smin <= RANK_TOL * smax {
            ConditionNumber {
                kappa: f64::INFINITY,
                singular: true,
            }
        } else {
            ConditionNumber {
                kappa: smax / smin,
                singular: false,
            }
        }
    }

    /// Dense LU solve; the classical oracle for the SVE-based inversion.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.n {
            return Err(Error::Dimension("solve dimension mismatch".into()));
        }
        let rhs = Array1::from_vec(b.to_vec());
        let x = self
            .entries
            .solve(&rhs)
            .map_err(|e| Error::Singular(format!("dense solve failed: {e}")))?;
        Ok(x.to_vec())
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let (vals, _) = self.entries.eig()?;
        Ok(vals.to_vec())
    }

    pub fn determinant(&self) -> Result<C64> {
        Ok(self.entries.det()?)
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.entries[(i, i)]).sum()
    }
}

fn compute_svd(a: &Array2<C64>) -> SvdDecomposition {
    let (u, s, vh) = a
        .svd(true, true)
        .expect("LAPACK SVD of a finite matrix succeeds");
    let mut u = u.expect("U requested");
    let vh = vh.expect("V^H requested");
    // v = (V^H)† ; columns of v are the right singular vectors
    let mut v = vh.t().mapv(|z| z.conj()).to_owned();
    let n = a.nrows();
    // Fix phases: first component of each right singular vector with
    // magnitude > 1e-12 becomes real positive.
    for i in 0..n {
        let mut phase = C64::new(1.0, 0.0);
        for k in 0..n {
            let z = v[(k, i)];
            if z.norm() > 1e-12 {
                phase = z / z.norm();
                break;
            }
        }
        let corr = phase.conj();
        for k in 0..n {
            v[(k, i)] *= corr;
            u[(k, i)] *= corr;
        }
    }
    SvdDecomposition {
        u,
        sigma: s.to_vec(),
        v,
    }
}

impl SvdDecomposition {
    /// Reconstruct `U · diag(sigma) · V†`.
    pub fn reconstruct(&self) -> Array2<C64> {
        let n = self.sigma.len();
        let mut us = self.u.clone();
        for i in 0..n {
            for k in 0..n {
                us[(k, i)] *= self.sigma[i];
            }
        }
        let vh = self.v.t().mapv(|z| z.conj());
        us.dot(&vh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::test_support::{c, frob_dist, rand_cmat, rng};
    use ndarray_linalg::Eigh;

    #[test]
    fn frobenius_norm_cached_consistently() {
        let mut r = rng(3);
        for _ in 0..20 {
            let a = rand_cmat(&mut r, 6);
            let m = DenseMatrix::new(a.clone()).unwrap();
            let direct: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            assert!((m.frob().powi(2) - direct).abs() <= 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = Array2::from_elem((2, 2), c(0.0, 0.0));
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(DenseMatrix::new(a), Err(Error::NonFinite(_))));
    }

    #[test]
    fn svd_identity() {
        let m = DenseMatrix::identity(3);
        let s = &m.svd().sigma;
        for x in s {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_diagonal_case() {
        let m = DenseMatrix::from_diagonal(&[c(3.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        let d = m.svd();
        assert!((d.sigma[0] - 3.0).abs() < 1e-12);
        assert!((d.sigma[1] - 2.0).abs() < 1e-12);
        assert!((d.sigma[2] - 1.0).abs() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                assert!((d.u[(i, j)] - want).norm() < 1e-12);
                assert!((d.v[(i, j)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_reconstruction_and_orthogonality() {
        let mut r = rng(11);
        for _ in 0..30 {
            let a = rand_cmat(&mut r, 8);
            let m = DenseMatrix::new(a.clone()).unwrap();
            let d = m.svd();
            assert!(frob_dist(&d.reconstruct(), &a) <= 1e-10 * m.frob());
            let uhu = d.u.t().mapv(|z| z.conj()).dot(&d.u);
            let vhv = d.v.t().mapv(|z| z.conj()).dot(&d.v);
            let eye = Array2::from_shape_fn((8, 8), |(i, j)| {
                if i == j {
                    c(1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
            assert!(frob_dist(&uhu, &eye) <= 1e-10);
            assert!(frob_dist(&vhv, &eye) <= 1e-10);
            // nonincreasing
            for w in d.sigma.windows(2) {
                assert!(w[0] >= w[1] - 1e-15);
            }
        }
    }

    #[test]
    fn svd_sigma_squared_matches_hermitian_eigenvalues() {
        // oracle: eigenvalues of A†A via the Hermitian eigensolver
        let mut r = rng(21);
        let a = rand_cmat(&mut r, 6);
        let m = DenseMatrix::new(a.clone()).unwrap();
        let aha = a.t().mapv(|z| z.conj()).dot(&a);
        let (mut evals, _) = aha.eigh(ndarray_linalg::UPLO::Lower).unwrap();
        evals.as_slice_mut().unwrap().sort_by(|x, y| y.total_cmp(x));
        for (s, e) in m.svd().sigma.iter().zip(evals.iter()) {
            assert!((s * s - e).abs() <= 1e-9 * e.abs().max(1.0), "s²={} e={}", s * s, e);
        }
    }

    #[test]
    fn svd_gauge_first_component_real_positive() {
        let mut r = rng(31);
        let a = rand_cmat(&mut r, 5);
        let m = DenseMatrix::new(a).unwrap();
        let d = m.svd();
        for i in 0..5 {
            let z = (0..5).map(|k| d.v[(k, i)]).find(|z| z.norm() > 1e-12).unwrap();
            assert!(z.im.abs() < 1e-12 && z.re > 0.0, "column {i} first nonzero {z}");
        }
    }

    #[test]
    fn condition_number_identity_and_diag() {
        assert_eq!(DenseMatrix::identity(4).condition_number().kappa, 1.0);
        let d = DenseMatrix::from_diagonal(&[c(4.0, 0.0), c(1.0, 0.0)]).unwrap();
        let cn = d.condition_number();
        assert!((cn.kappa - 4.0).abs() < 1e-12);
        assert!(!cn.singular);
    }

    #[test]
    fn condition_number_zero_matrix_is_singular() {
        let z = DenseMatrix::new(Array2::from_elem((3, 3), c(0.0, 0.0))).unwrap();
        let cn = z.condition_number();
        assert!(cn.kappa.is_infinite());
        assert!(cn.singular);
    }

    #[test]
    fn condition_number_tridiagonal_matches_analytic_eigenvalues() {
        // Toeplitz(−1,2,−1) eigenvalues are 2−2cos(kπ/(n+1)), k=1..n
        let n = 16;
        let t = crate::matcore::toeplitz::ToeplitzSpec::tridiagonal(
            n,
            c(-1.0, 0.0),
            c(2.0, 0.0),
            c(-1.0, 0.0),
        )
        .unwrap();
        let m = t.materialize().unwrap();
        let kappa = m.condition_number().kappa;
        let eig =
            |k: usize| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let want = eig(n) / eig(1);
        assert!((kappa - want).abs() <= 1e-9 * want, "kappa {kappa} want {want}");
    }
}
