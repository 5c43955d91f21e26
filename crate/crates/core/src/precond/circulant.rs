//! Circulant matrices and the three classical circulant preconditioners:
//! the Strang copy, the Frobenius-optimal projection, and the
//! super-optimal construction.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;
use crate::matcore::fft::{dft_unnormalized, fft_in_place, idft_unnormalized, FftDirection};
use crate::matcore::toeplitz::ToeplitzSpec;

/// Relative eigenvalue threshold below which a circulant is treated as
/// singular.
pub const CIRCULANT_SINGULAR_TOL: f64 = 1e-12;

/// Circulant matrix held as its first column together with its eigenvalue
/// vector `λ_k = Σ_j c_j ω^{jk}`.
#[derive(Debug, Clone)]
pub struct CirculantSpec {
    n: usize,
    first_col: Vec<C64>,
    eigvals: Vec<C64>,
}

/// Eigenvalues of the circulant with first column `c`:
/// `λ_k = Σ_j c_j ω^{jk}` computed by FFT in `O(n log n)`.
pub fn circulant_eigenvalues(first_col: &[C64]) -> Result<Vec<C64>> {
    dft_unnormalized(first_col)
}

impl CirculantSpec {
    pub fn from_first_column(first_col: Vec<C64>) -> Result<Self> {
        if first_col.is_empty() {
            return Err(Error::Dimension("circulant needs a nonempty first column".into()));
        }
        for z in &first_col {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite("circulant first column".into()));
            }
        }
        let eigvals = circulant_eigenvalues(&first_col)?;
        Ok(CirculantSpec {
            n: first_col.len(),
            first_col,
            eigvals,
        })
    }

    pub fn from_eigenvalues(eigvals: Vec<C64>) -> Result<Self> {
        if eigvals.is_empty() {
            return Err(Error::Dimension("circulant needs a nonempty eigenvalue vector".into()));
        }
        for z in &eigvals {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite("circulant eigenvalues".into()));
            }
        }
        let first_col = idft_unnormalized(&eigvals)?;
        Ok(CirculantSpec {
            n: eigvals.len(),
            first_col,
            eigvals,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); n];
        c[0] = C64::new(1.0, 0.0);
        CirculantSpec::from_first_column(c).expect("identity circulant is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn first_col(&self) -> &[C64] {
        &self.first_col
    }

    pub fn eigvals(&self) -> &[C64] {
        &self.eigvals
    }

    /// `‖C‖_F = (Σ_k |λ_k|²)^{1/2}`.
    pub fn frob(&self) -> f64 {
        self.eigvals.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_eig(&self) -> f64 {
        self.eigvals.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs_eig(&self) -> f64 {
        self.eigvals.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn condition_number(&self) -> f64 {
        let max = self.max_abs_eig();
        let min = self.min_abs_eig();
        if min <= CIRCULANT_SINGULAR_TOL * max {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn is_singular(&self) -> bool {
        self.min_abs_eig() <= CIRCULANT_SINGULAR_TOL * self.max_abs_eig()
    }

    /// Entry `(i, j) = c_{(i−j) mod n}`, the expansion `Σ_j c_j Q^j` in the
    /// shift permutation `Q`.
    pub fn materialize(&self) -> Result<DenseMatrix> {
        let n = self.n;
        let e = Array2::from_shape_fn((n, n), |(i, j)| self.first_col[(i + n - j) % n]);
        DenseMatrix::new(e)
    }

    /// `C·v` via `F†·diag(λ)·F·v`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.n {
            return Err(Error::Dimension("circulant apply dimension mismatch".into()));
        }
        let mut buf = v.to_vec();
        fft_in_place(&mut buf, FftDirection::Forward);
        for (z, lam) in buf.iter_mut().zip(&self.eigvals) {
            *z *= lam;
        }
        fft_in_place(&mut buf, FftDirection::Inverse);
        Ok(buf)
    }

    /// `C⁻¹·v` via `F†·diag(1/λ)·F·v` in `O(n log n)`.
    pub fn apply_inverse(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.n {
            return Err(Error::Dimension("circulant solve dimension mismatch".into()));
        }
        let max = self.max_abs_eig();
        for (k, lam) in self.eigvals.iter().enumerate() {
            if lam.norm() < CIRCULANT_SINGULAR_TOL * max {
                return Err(Error::Singular(format!(
                    "circulant eigenvalue {k} has magnitude {:.3e}",
                    lam.norm()
                )));
            }
        }
        let mut buf = v.to_vec();
        fft_in_place(&mut buf, FftDirection::Forward);
        for (z, lam) in buf.iter_mut().zip(&self.eigvals) {
            *z /= lam;
        }
        fft_in_place(&mut buf, FftDirection::Inverse);
        Ok(buf)
    }
}

/// Tie rule for the middle Strang coefficient at even sizes `n = 2m`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum StrangEvenRule {
    /// `s_m = t_m`
    #[default]
    Copy,
    /// `s_m = (t_m + t_{−m})/2`
    Average,
}

/// Strang preconditioner: copy the central diagonals of `T` and wrap the
/// rest. Odd `n = 2m+1`: `s_k = t_k` for `k ≤ m`, `s_k = t_{k−n}` for
/// `k > m`. Even `n = 2m`: the middle coefficient follows `rule`.
pub fn strang(t: &ToeplitzSpec, rule: StrangEvenRule) -> CirculantSpec {
    let n = t.n();
    let m = n / 2;
    let mut col = vec![C64::new(0.0, 0.0); n];
    for (k, s) in col.iter_mut().enumerate() {
        let ki = k as i64;
        let ni = n as i64;
        *s = if n % 2 == 1 {
            if k <= m {
                t.coeff(ki)
            } else {
                t.coeff(ki - ni)
            }
        } else if k < m {
            t.coeff(ki)
        } else if k == m {
            match rule {
                StrangEvenRule::Copy => t.coeff(ki),
                StrangEvenRule::Average => (t.coeff(ki) + t.coeff(ki - ni)) * 0.5,
            }
        } else {
            t.coeff(ki - ni)
        };
    }
    CirculantSpec::from_first_column(col).expect("strang column is finite")
}

/// Frobenius-optimal circulant `c_F(A)`: first column
/// `c_j = (1/n) Σ_{p−q ≡ j (mod n)} a_{pq}`, the orthogonal projection of
/// `A` onto the circulant algebra.
pub fn chan_optimal(a: &DenseMatrix) -> CirculantSpec {
    let n = a.n();
    let mut col = vec![C64::new(0.0, 0.0); n];
    for p in 0..n {
        for q in 0..n {
            let j = (p + n - q) % n;
            col[j] += a.entry(p, q);
        }
    }
    let scale = 1.0 / n as f64;
    for z in col.iter_mut() {
        *z *= scale;
    }
    CirculantSpec::from_first_column(col).expect("projection of finite matrix is finite")
}

/// Closed form of `c_F(T)` for Toeplitz input:
/// `c_k = [(n−k)·t_k + k·t_{k−n}]/n`.
pub fn chan_optimal_toeplitz(t: &ToeplitzSpec) -> CirculantSpec {
    let n = t.n();
    let mut col = vec![C64::new(0.0, 0.0); n];
    for (k, z) in col.iter_mut().enumerate() {
        let ki = k as i64;
        let ni = n as i64;
        *z = (t.coeff(ki) * (n - k) as f64 + t.coeff(ki - ni) * k as f64) / n as f64;
    }
    CirculantSpec::from_first_column(col).expect("closed form of finite Toeplitz is finite")
}

/// Super-optimal circulant `t_F(A) = c_F(AA†)·[c_F(A†)]⁻¹`, computed as an
/// elementwise eigenvalue quotient in the Fourier basis.
pub fn super_optimal(a: &DenseMatrix) -> Result<CirculantSpec> {
    let aa = a.matmul(&a.adjoint())?;
    let num = chan_optimal(&aa);
    let den = chan_optimal(&a.adjoint());
    let mut eig = Vec::with_capacity(a.n());
    for (k, (nu, de)) in num.eigvals().iter().zip(den.eigvals()).enumerate() {
        if de.norm() < 1e-12 {
            return Err(Error::SuperOptimalUndefined {
                index: k,
                magnitude: de.norm(),
            });
        }
        eig.push(nu / de);
    }
    CirculantSpec::from_eigenvalues(eig)
}
