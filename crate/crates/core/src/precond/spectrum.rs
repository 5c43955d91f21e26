//! Spectrum analysis of the preconditioned matrix `C⁻¹A`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;
use crate::precond::circulant::CirculantSpec;

/// Eigenvalue summary of `C⁻¹A`: condition numbers, the full preconditioned
/// spectrum, and outlier counts over an epsilon grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub kappa_a: f64,
    pub kappa_precond: f64,
    /// eigenvalues of `C⁻¹A` as `[re, im]` pairs
    pub eigvals_precond: Vec<[f64; 2]>,
    pub min_abs_eig: f64,
    pub eps_grid: Vec<f64>,
    /// `outlier_counts[i]` = #{ λ : |λ − 1| > eps_grid[i] }
    pub outlier_counts: Vec<usize>,
}

impl SpectrumReport {
    pub fn eigvals(&self) -> Vec<C64> {
        self.eigvals_precond.iter().map(|[re, im]| C64::new(*re, *im)).collect()
    }

    pub fn outliers(&self, eps: f64) -> usize {
        self.eigvals_precond
            .iter()
            .filter(|[re, im]| (C64::new(*re, *im) - C64::new(1.0, 0.0)).norm() > eps)
            .count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV with a summary header followed by one row per eigenvalue.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# n={} kappa_a={:.17e} kappa_precond={:.17e} min_abs_eig={:.17e}\n",
            self.n, self.kappa_a, self.kappa_precond, self.min_abs_eig
        ));
        for (eps, count) in self.eps_grid.iter().zip(&self.outlier_counts) {
            out.push_str(&format!("# outliers eps={eps:.6e} count={count}\n"));
        }
        out.push_str("index,re,im,abs,dist_from_one\n");
        for (k, [re, im]) in self.eigvals_precond.iter().enumerate() {
            let z = C64::new(*re, *im);
            out.push_str(&format!(
                "{k},{re:.17e},{im:.17e},{:.17e},{:.17e}\n",
                z.norm(),
                (z - C64::new(1.0, 0.0)).norm()
            ));
        }
        out
    }
}

/// Materialize `C⁻¹A` column by column through the FFT solve.
pub fn preconditioned_matrix(c: &CirculantSpec, a: &DenseMatrix) -> Result<DenseMatrix> {
    if c.n() != a.n() {
        return Err(Error::Dimension("preconditioner size mismatch".into()));
    }
    let mut cols = Vec::with_capacity(a.n());
    for j in 0..a.n() {
        cols.push(c.apply_inverse(&a.column(j))?);
    }
    DenseMatrix::from_columns(&cols)
}

/// Dense eigensolve of `C⁻¹A` plus outlier bookkeeping.
pub fn spectrum_report(c: &CirculantSpec, a: &DenseMatrix, eps_grid: &[f64]) -> Result<SpectrumReport> {
    if c.is_singular() {
        return Err(Error::Singular("preconditioner is singular".into()));
    }
    let pre = preconditioned_matrix(c, a)?;
    let eig = pre.eigenvalues()?;
    let min_abs_eig = eig.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let one = C64::new(1.0, 0.0);
    let outlier_counts = eps_grid
        .iter()
        .map(|eps| eig.iter().filter(|z| (*z - one).norm() > *eps).count())
        .collect();
    Ok(SpectrumReport {
        n: a.n(),
        kappa_a: a.condition_number().kappa,
        kappa_precond: pre.condition_number().kappa,
        eigvals_precond: eig.iter().map(|z| [z.re, z.im]).collect(),
        min_abs_eig,
        eps_grid: eps_grid.to_vec(),
        outlier_counts,
    })
}
