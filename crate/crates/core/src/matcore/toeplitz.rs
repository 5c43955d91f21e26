//! Toeplitz matrices given by their diagonals, and band-limited generating
//! symbols that produce Toeplitz families across sizes.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;

/// Toeplitz matrix `entry(i,j) = t_{i−j}`, determined by the `2n−1`
/// diagonal coefficients `t_{1−n} … t_{n−1}`.
#[derive(Debug, Clone)]
pub struct ToeplitzSpec {
    n: usize,
    /// coeffs[k + n − 1] = t_k for k in [1−n, n−1]
    coeffs: Vec<C64>,
}

impl ToeplitzSpec {
    pub fn from_coeffs(n: usize, coeffs: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("ToeplitzSpec requires n >= 1".into()));
        }
        if coeffs.len() != 2 * n - 1 {
            return Err(Error::Dimension(format!(
                "ToeplitzSpec of size {n} needs {} coefficients, got {}",
                2 * n - 1,
                coeffs.len()
            )));
        }
        for z in &coeffs {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite("Toeplitz coefficient".into()));
            }
        }
        Ok(ToeplitzSpec { n, coeffs })
    }

    /// Tridiagonal Toeplitz with subdiagonal `sub`, diagonal `diag`,
    /// superdiagonal `sup`.
    pub fn tridiagonal(n: usize, sub: C64, diag: C64, sup: C64) -> Result<Self> {
        let mut coeffs = vec![C64::new(0.0, 0.0); 2 * n - 1];
        coeffs[n - 1] = diag;
        if n > 1 {
            coeffs[n] = sub; // t_1 (first subdiagonal)
            coeffs[n - 2] = sup; // t_{−1} (first superdiagonal)
        }
        ToeplitzSpec::from_coeffs(n, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Diagonal coefficient `t_k`, `k ∈ [1−n, n−1]`.
    pub fn coeff(&self, k: i64) -> C64 {
        let n = self.n as i64;
        if k <= -n || k >= n {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + n - 1) as usize]
        }
    }

    pub fn materialize(&self) -> Result<DenseMatrix> {
        let n = self.n;
        let e = Array2::from_shape_fn((n, n), |(i, j)| self.coeff(i as i64 - j as i64));
        DenseMatrix::new(e)
    }

    /// A Toeplitz matrix is circulant exactly when `t_{−k} = t_{n−k}`.
    pub fn is_circulant(&self, tol: f64) -> bool {
        let n = self.n as i64;
        (1..n).all(|k| (self.coeff(-k) - self.coeff(n - k)).norm() <= tol)
    }
}

/// Band-limited generating function: finitely many Fourier coefficients
/// `t_k`, `k ∈ [−K, K]`. Generates Toeplitz matrices of any size by
/// truncating the band to `|k| ≤ min(K, n−1)`.
#[derive(Debug, Clone, Default)]
pub struct SymbolSpec {
    coeffs: BTreeMap<i64, C64>,
}

impl SymbolSpec {
    pub fn from_coeffs(coeffs: BTreeMap<i64, C64>) -> Result<Self> {
        for z in coeffs.values() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite("symbol coefficient".into()));
            }
        }
        Ok(SymbolSpec { coeffs })
    }

    /// Real symmetric symbol `f(θ) = t0 + Σ_{k≥1} 2·t_k·cos(kθ)`.
    pub fn real_even(t0: f64, tail: &[f64]) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, C64::new(t0, 0.0));
        for (i, &t) in tail.iter().enumerate() {
            let k = i as i64 + 1;
            coeffs.insert(k, C64::new(t, 0.0));
            coeffs.insert(-k, C64::new(t, 0.0));
        }
        SymbolSpec { coeffs }
    }

    pub fn bandwidth(&self) -> i64 {
        self.coeffs.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn coeff(&self, k: i64) -> C64 {
        self.coeffs.get(&k).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, C64> {
        &self.coeffs
    }
}

/// Toeplitz matrix of size `n` generated by the symbol: `t_k` for
/// `|k| ≤ min(K, n−1)`, zero beyond.
pub fn toeplitz_from_symbol(s: &SymbolSpec, n: usize) -> Result<ToeplitzSpec> {
    if n == 0 {
        return Err(Error::Dimension("toeplitz_from_symbol requires n >= 1".into()));
    }
    let band = s.bandwidth().min(n as i64 - 1);
    let mut coeffs = vec![C64::new(0.0, 0.0); 2 * n - 1];
    for k in -band..=band {
        coeffs[(k + n as i64 - 1) as usize] = s.coeff(k);
    }
    ToeplitzSpec::from_coeffs(n, coeffs)
}
