//! Python bindings: the matrix types, the circulant preconditioner
//! constructions, spectrum analysis, and the SVE simulation entry points.

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use circulant_sve::matcore::{self, DenseMatrix, SymbolSpec, ToeplitzSpec};
use circulant_sve::precond;
use circulant_sve::qsim::{self, KpTree, StateVector, SveConfig};
use circulant_sve::solver;

extern crate circulant_sve as core_crate;

fn to_py_err(err: core_crate::Error) -> PyErr {
    use core_crate::Error as E;
    match err {
        E::Dimension(_) | E::IndexOutOfRange(_) | E::NonFinite(_) | E::Parse(_) | E::Domain(_) => {
            PyValueError::new_err(err.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().unbind().into(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.unbind().into()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.unbind().into()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.unbind().into(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.unbind().into()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.unbind().into()
        }
    })
}

fn json_str_to_py(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

fn unit_state(amps: Vec<C64>, label: &str) -> PyResult<StateVector> {
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm <= 0.0 {
        return Err(PyValueError::new_err("state vector has zero norm"));
    }
    StateVector::from_vector(label, amps.into_iter().map(|z| z / norm).collect()).map_err(to_py_err)
}

/// Square complex matrix with cached Frobenius norm and SVD.
#[pyclass(name = "Matrix")]
struct PyMatrix {
    inner: DenseMatrix,
}

#[pymethods]
impl PyMatrix {
    /// Build from n and a row-major list of n² complex entries.
    #[new]
    fn new(n: usize, entries: Vec<C64>) -> PyResult<Self> {
        if entries.len() != n * n {
            return Err(PyValueError::new_err(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let a = ndarray::Array2::from_shape_fn((n, n), |(i, j)| entries[i * n + j]);
        Ok(PyMatrix {
            inner: DenseMatrix::new(a).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        PyMatrix {
            inner: DenseMatrix::identity(n),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn frob(&self) -> f64 {
        self.inner.frob()
    }

    fn entries(&self) -> Vec<C64> {
        self.inner.entries().iter().copied().collect()
    }

    fn singular_values(&self) -> Vec<f64> {
        self.inner.svd().sigma.clone()
    }

    fn condition_number(&self) -> f64 {
        self.inner.condition_number().kappa
    }

    fn sparsity(&self) -> usize {
        self.inner.sparsity()
    }

    /// Dense solve A·x = b (the classical oracle).
    fn solve(&self, b: Vec<C64>) -> PyResult<Vec<C64>> {
        self.inner.solve(&b).map_err(to_py_err)
    }

    fn to_market(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        matcore::io::write_matrix_market(&self.inner, matcore::io::MarketLayout::Coordinate, &mut buf)
            .map_err(to_py_err)?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_market(text: &str) -> PyResult<Self> {
        Ok(PyMatrix {
            inner: matcore::io::read_matrix_market(text.as_bytes()).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Matrix(n={}, frob={:.6})", self.inner.n(), self.inner.frob())
    }
}

/// Toeplitz matrix given by its diagonals `t_k`, `k ∈ [1−n, n−1]`.
#[pyclass(name = "Toeplitz")]
struct PyToeplitz {
    inner: ToeplitzSpec,
}

#[pymethods]
impl PyToeplitz {
    /// Build from n and a dict {k: complex} of diagonal coefficients.
    #[new]
    fn new(n: usize, diags: std::collections::HashMap<i64, C64>) -> PyResult<Self> {
        let mut coeffs = vec![C64::new(0.0, 0.0); 2 * n - 1];
        for (k, v) in diags {
            if k <= -(n as i64) || k >= n as i64 {
                return Err(PyValueError::new_err(format!("diagonal {k} out of range")));
            }
            coeffs[(k + n as i64 - 1) as usize] = v;
        }
        Ok(PyToeplitz {
            inner: ToeplitzSpec::from_coeffs(n, coeffs).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn tridiagonal(n: usize, sub: C64, diag: C64, sup: C64) -> PyResult<Self> {
        Ok(PyToeplitz {
            inner: ToeplitzSpec::tridiagonal(n, sub, diag, sup).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn coeff(&self, k: i64) -> C64 {
        self.inner.coeff(k)
    }

    fn materialize(&self) -> PyResult<PyMatrix> {
        Ok(PyMatrix {
            inner: self.inner.materialize().map_err(to_py_err)?,
        })
    }
}

/// Circulant matrix held as first column plus eigenvalues.
#[pyclass(name = "Circulant")]
struct PyCirculant {
    inner: precond::CirculantSpec,
}

#[pymethods]
impl PyCirculant {
    #[new]
    fn new(first_col: Vec<C64>) -> PyResult<Self> {
        Ok(PyCirculant {
            inner: precond::CirculantSpec::from_first_column(first_col).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        PyCirculant {
            inner: precond::CirculantSpec::identity(n),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn first_col(&self) -> Vec<C64> {
        self.inner.first_col().to_vec()
    }

    fn eigvals(&self) -> Vec<C64> {
        self.inner.eigvals().to_vec()
    }

    #[getter]
    fn frob(&self) -> f64 {
        self.inner.frob()
    }

    fn condition_number(&self) -> f64 {
        self.inner.condition_number()
    }

    fn materialize(&self) -> PyResult<PyMatrix> {
        Ok(PyMatrix {
            inner: self.inner.materialize().map_err(to_py_err)?,
        })
    }

    fn apply(&self, v: Vec<C64>) -> PyResult<Vec<C64>> {
        self.inner.apply(&v).map_err(to_py_err)
    }

    /// `C⁻¹·v` through the FFT diagonalization.
    fn apply_inverse(&self, v: Vec<C64>) -> PyResult<Vec<C64>> {
        self.inner.apply_inverse(&v).map_err(to_py_err)
    }
}

/// Binary-tree amplitude store over matrix columns.
#[pyclass(name = "KpTree")]
struct PyKpTree {
    inner: KpTree,
}

#[pymethods]
impl PyKpTree {
    #[new]
    fn new(matrix: &PyMatrix) -> Self {
        PyKpTree {
            inner: KpTree::build(&matrix.inner),
        }
    }

    fn column_root(&self, j: usize) -> f64 {
        self.inner.column_root(j)
    }

    fn norm_root(&self) -> f64 {
        self.inner.norm_root()
    }

    fn update(&self, i: usize, j: usize, value: C64) -> PyResult<PyKpTree> {
        let (tree, _) = self.inner.update(i, j, value).map_err(to_py_err)?;
        Ok(PyKpTree { inner: tree })
    }

    /// Normalized column state produced by tree descent.
    fn prepare_column(&self, j: usize) -> PyResult<Vec<C64>> {
        self.inner.prepare_column(j).map_err(to_py_err)
    }
}

#[pyfunction]
fn fft(v: Vec<C64>) -> PyResult<Vec<C64>> {
    matcore::fft(&v).map_err(to_py_err)
}

#[pyfunction]
fn ifft(v: Vec<C64>) -> PyResult<Vec<C64>> {
    matcore::ifft(&v).map_err(to_py_err)
}

#[pyfunction]
fn circulant_eigenvalues(first_col: Vec<C64>) -> PyResult<Vec<C64>> {
    precond::circulant_eigenvalues(&first_col).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (t, even_rule = "copy"))]
fn strang(t: &PyToeplitz, even_rule: &str) -> PyResult<PyCirculant> {
    let rule = match even_rule {
        "copy" => precond::StrangEvenRule::Copy,
        "average" => precond::StrangEvenRule::Average,
        other => {
            return Err(PyValueError::new_err(format!(
                "even_rule must be 'copy' or 'average', got '{other}'"
            )))
        }
    };
    Ok(PyCirculant {
        inner: precond::strang(&t.inner, rule),
    })
}

#[pyfunction]
fn chan_optimal(a: &PyMatrix) -> PyCirculant {
    PyCirculant {
        inner: precond::chan_optimal(&a.inner),
    }
}

#[pyfunction]
fn chan_optimal_toeplitz(t: &PyToeplitz) -> PyCirculant {
    PyCirculant {
        inner: precond::chan_optimal_toeplitz(&t.inner),
    }
}

#[pyfunction]
fn super_optimal(a: &PyMatrix) -> PyResult<PyCirculant> {
    Ok(PyCirculant {
        inner: precond::super_optimal(&a.inner).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn toeplitz_from_symbol(coeffs: std::collections::HashMap<i64, C64>, n: usize) -> PyResult<PyToeplitz> {
    let sym = SymbolSpec::from_coeffs(coeffs.into_iter().collect()).map_err(to_py_err)?;
    Ok(PyToeplitz {
        inner: matcore::toeplitz_from_symbol(&sym, n).map_err(to_py_err)?,
    })
}

/// Eigenvalues of C⁻¹A, condition numbers, and outlier counts as a dict.
#[pyfunction]
fn spectrum_report(py: Python<'_>, c: &PyCirculant, a: &PyMatrix, eps_grid: Vec<f64>) -> PyResult<Py<PyAny>> {
    let rep = precond::spectrum_report(&c.inner, &a.inner, &eps_grid).map_err(to_py_err)?;
    json_str_to_py(py, &rep.to_json())
}

/// Exact σ̃ distribution of the forward SVE: returns (probabilities, σ̃ values).
#[pyfunction]
#[pyo3(signature = (a, input, phase_bits = 8))]
fn sve_distribution(a: &PyMatrix, input: Vec<C64>, phase_bits: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let state = unit_state(input, "col")?;
    let cfg = SveConfig::with_phase_bits(phase_bits);
    qsim::sve::sve_distribution(&a.inner, &state, &cfg).map_err(to_py_err)
}

/// Forward SVE `Σ αᵢ|vᵢ⟩ ↦ Σ αᵢ|uᵢ⟩|σ̃ᵢ⟩`; returns a dict with the output
/// state JSON, the σ̃ decode table, the distribution, and the leak.
#[pyfunction]
#[pyo3(signature = (a, input, phase_bits = 8))]
fn sve_forward(py: Python<'_>, a: &PyMatrix, input: Vec<C64>, phase_bits: usize) -> PyResult<Py<PyAny>> {
    let state = unit_state(input, "col")?;
    let cfg = SveConfig::with_phase_bits(phase_bits);
    let out = qsim::sve_forward(&a.inner, &state, &cfg).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("state", json_str_to_py(py, &out.state.to_json())?)?;
    dict.set_item("sigma_values", out.sigma_values)?;
    dict.set_item("distribution", out.distribution)?;
    dict.set_item("leak", out.leak)?;
    dict.set_item("frob", out.frob)?;
    Ok(dict.unbind().into())
}

/// SVE-based inversion; returns a dict with solution amplitudes, success
/// probability, Z, cutoff, and the dense-solve fidelity.
#[pyfunction]
#[pyo3(signature = (a, b, phase_bits = 10, z = None))]
fn invert_via_sve(
    py: Python<'_>,
    a: &PyMatrix,
    b: Vec<C64>,
    phase_bits: usize,
    z: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let state = unit_state(b, "b")?;
    let cfg = SveConfig::with_phase_bits(phase_bits);
    let res = solver::invert_via_sve(&a.inner, &state, &cfg, z).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("solution", res.state.amps().to_vec())?;
    dict.set_item("success_prob", res.success_prob)?;
    dict.set_item("z", res.z)?;
    dict.set_item("sigma_cutoff", res.sigma_cutoff)?;
    dict.set_item("fidelity_vs_classical", res.fidelity_vs_classical)?;
    dict.set_item("truncated_weight", res.truncated_weight)?;
    dict.set_item("leak", res.leak)?;
    dict.set_item("sigma_support", res.sigma_support)?;
    Ok(dict.unbind().into())
}

/// Eigenvalue-state circuit; returns a dict with the post-selected state,
/// the success probability, and both the amplitude and probability ratios.
#[pyfunction]
fn eigenvalue_state(py: Python<'_>, a: &PyMatrix) -> PyResult<Py<PyAny>> {
    let out = solver::eigenvalue_state(&a.inner).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("state", out.state.amps().to_vec())?;
    dict.set_item("success_prob", out.success_prob)?;
    dict.set_item("amplitude_ratio", out.amplitude_ratio)?;
    dict.set_item("norm_estimate", out.norm_estimate)?;
    dict.set_item("lambda_estimates", out.lambda_estimates)?;
    Ok(dict.unbind().into())
}

/// Full circulant-preconditioned solve; returns the solve report dict.
#[pyfunction]
#[pyo3(signature = (a, b, phase_bits = 10, eps0 = 0.01))]
fn preconditioned_solve(
    py: Python<'_>,
    a: &PyMatrix,
    b: Vec<C64>,
    phase_bits: usize,
    eps0: f64,
) -> PyResult<Py<PyAny>> {
    let cfg = SveConfig::with_phase_bits(phase_bits);
    let out = solver::preconditioned_solve(&a.inner, &b, &cfg, eps0).map_err(to_py_err)?;
    let report = solver::SolveReport::from_outcome(&out, phase_bits, cfg.seed);
    json_str_to_py(py, &report.to_json())
}

/// General-preconditioner pipeline; returns the solve report dict.
#[pyfunction]
#[pyo3(signature = (a, m, b, phase_bits = 10, eps0 = 0.01))]
fn general_preconditioned_solve(
    py: Python<'_>,
    a: &PyMatrix,
    m: &PyMatrix,
    b: Vec<C64>,
    phase_bits: usize,
    eps0: f64,
) -> PyResult<Py<PyAny>> {
    let cfg = SveConfig::with_phase_bits(phase_bits);
    let out =
        solver::general_preconditioned_solve(&a.inner, &m.inner, &b, &cfg, eps0).map_err(to_py_err)?;
    let report = solver::SolveReport::from_outcome(&out, phase_bits, cfg.seed);
    json_str_to_py(py, &report.to_json())
}

/// `3η₁η₄ + 3η₂²η₃η₄/(W(√W + √(W−η₂))²) + 3nη₀²η₃/W`.
#[pyfunction]
fn error_bound(eta0: f64, eta1: f64, eta2: f64, eta3: f64, eta4: f64, w_norm: f64, n: usize) -> PyResult<f64> {
    let budget = solver::ErrorBudget {
        eta0,
        eta1,
        eta2,
        eta3,
        eta4,
        w_norm,
    };
    solver::assembled_state_error_bound(&budget, n).map_err(to_py_err)
}

#[pyfunction]
fn simplified_bounds(eps: f64, kappa_c: f64, beta: f64, max_lambda_sq: f64) -> PyResult<(f64, f64, f64)> {
    solver::simplified_bounds(eps, kappa_c, beta, max_lambda_sq).map_err(to_py_err)
}

#[pyfunction]
fn choose_epsilon(eps0: f64, beta: f64, kappa_c: f64) -> PyResult<f64> {
    solver::choose_epsilon(eps0, beta, kappa_c).map_err(to_py_err)
}

#[pymodule]
fn circulant_sve_py(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyToeplitz>()?;
    m.add_class::<PyCirculant>()?;
    m.add_class::<PyKpTree>()?;
    m.add_function(wrap_pyfunction!(fft, m)?)?;
    m.add_function(wrap_pyfunction!(ifft, m)?)?;
    m.add_function(wrap_pyfunction!(circulant_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(strang, m)?)?;
    m.add_function(wrap_pyfunction!(chan_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(chan_optimal_toeplitz, m)?)?;
    m.add_function(wrap_pyfunction!(super_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(toeplitz_from_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_report, m)?)?;
    m.add_function(wrap_pyfunction!(sve_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(sve_forward, m)?)?;
    m.add_function(wrap_pyfunction!(invert_via_sve, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalue_state, m)?)?;
    m.add_function(wrap_pyfunction!(preconditioned_solve, m)?)?;
    m.add_function(wrap_pyfunction!(general_preconditioned_solve, m)?)?;
    m.add_function(wrap_pyfunction!(error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(simplified_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(choose_epsilon, m)?)?;
    Ok(())
}
