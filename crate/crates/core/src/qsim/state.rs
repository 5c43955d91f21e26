//! Complex amplitude vectors over an ordered list of labeled registers.
//!
//! Register sizes are arbitrary positive integers. Amplitude index layout
//! is row-major with the first register slowest: for dims `[d0, d1, d2]`
//! the basis state `(i0, i1, i2)` sits at `(i0·d1 + i1)·d2 + i2`.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::fft::{fft_in_place, FftDirection};

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct StateVector {
    dims: Vec<usize>,
    labels: Vec<String>,
    amps: Vec<C64>,
    norm: f64,
    normalized: bool,
}

impl StateVector {
    fn check_layout(dims: &[usize], labels: &[String]) -> Result<usize> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Dimension("registers must be nonempty with positive sizes".into()));
        }
        if dims.len() != labels.len() {
            return Err(Error::Dimension("one label per register required".into()));
        }
        Ok(dims.iter().product())
    }

    /// Computational basis state `|indices⟩`.
    pub fn basis(dims: Vec<usize>, labels: Vec<String>, indices: &[usize]) -> Result<Self> {
        let total = Self::check_layout(&dims, &labels)?;
        if indices.len() != dims.len() || indices.iter().zip(&dims).any(|(i, d)| i >= d) {
            return Err(Error::IndexOutOfRange(format!("basis indices {indices:?} for dims {dims:?}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); total];
        let mut idx = 0usize;
        for (i, d) in indices.iter().zip(&dims) {
            idx = idx * d + i;
        }
        amps[idx] = C64::new(1.0, 0.0);
        Ok(StateVector {
            dims,
            labels,
            amps,
            norm: 1.0,
            normalized: true,
        })
    }

    /// Unit-norm state; rejects amplitude vectors more than `1e-10` from
    /// unit norm.
    pub fn new_normalized(dims: Vec<usize>, labels: Vec<String>, amps: Vec<C64>) -> Result<Self> {
        let total = Self::check_layout(&dims, &labels)?;
        if amps.len() != total {
            return Err(Error::Dimension(format!("expected {total} amplitudes, got {}", amps.len())));
        }
        for z in &amps {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite("amplitude".into()));
            }
        }
        let norm = norm_of(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("state norm {norm} is not 1 within {NORM_TOL}")));
        }
        Ok(StateVector {
            dims,
            labels,
            amps,
            norm: 1.0,
            normalized: true,
        })
    }

    /// Unnormalized intermediate; carries the explicit flag and its norm.
    pub fn new_unnormalized(dims: Vec<usize>, labels: Vec<String>, amps: Vec<C64>) -> Result<Self> {
        let total = Self::check_layout(&dims, &labels)?;
        if amps.len() != total {
            return Err(Error::Dimension(format!("expected {total} amplitudes, got {}", amps.len())));
        }
        for z in &amps {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite("amplitude".into()));
            }
        }
        let norm = norm_of(&amps);
        Ok(StateVector {
            dims,
            labels,
            amps,
            norm,
            normalized: false,
        })
    }

    /// Single-register state from a unit vector.
    pub fn from_vector(label: &str, amps: Vec<C64>) -> Result<Self> {
        let n = amps.len();
        StateVector::new_normalized(vec![n], vec![label.to_string()], amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn register_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Renormalize to unit norm, returning the norm the state had before.
    pub fn normalize(mut self) -> Result<(Self, f64)> {
        let n = norm_of(&self.amps);
        if n < 1e-150 {
            return Err(Error::EmptyPostSelection("state norm vanished".into()));
        }
        for z in self.amps.iter_mut() {
            *z /= n;
        }
        self.norm = 1.0;
        self.normalized = true;
        Ok((self, n))
    }

    fn strides(&self, reg: usize) -> (usize, usize, usize) {
        let d = self.dims[reg];
        let lo: usize = self.dims[reg + 1..].iter().product();
        let block = d * lo;
        (d, lo, block)
    }

    fn assert_reg(&self, reg: usize) -> Result<()> {
        if reg >= self.dims.len() {
            return Err(Error::IndexOutOfRange(format!(
                "register {reg} of {}",
                self.dims.len()
            )));
        }
        Ok(())
    }

    /// Apply a `d×d` matrix to one register.
    pub fn apply_matrix(&self, reg: usize, m: &Array2<C64>) -> Result<Self> {
        self.assert_reg(reg)?;
        let (d, lo, block) = self.strides(reg);
        if m.dim() != (d, d) {
            return Err(Error::Dimension(format!(
                "matrix {:?} does not fit register of size {d}",
                m.dim()
            )));
        }
        let mut out = self.clone();
        let mut buf = vec![C64::new(0.0, 0.0); d];
        let n_hi = self.amps.len() / block;
        for hi in 0..n_hi {
            for off in 0..lo {
                let base = hi * block + off;
                for v in 0..d {
                    buf[v] = self.amps[base + v * lo];
                }
                for (v, row) in m.rows().into_iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (w, coef) in row.iter().enumerate() {
                        acc += coef * buf[w];
                    }
                    out.amps[base + v * lo] = acc;
                }
            }
        }
        Ok(out)
    }

    /// Apply the unitary DFT (`Forward` = `F`, `Inverse` = `F†`) to one
    /// register.
    pub fn apply_fourier(&self, reg: usize, dir: FftDirection) -> Result<Self> {
        self.assert_reg(reg)?;
        let (d, lo, block) = self.strides(reg);
        let mut out = self.clone();
        let mut buf = vec![C64::new(0.0, 0.0); d];
        let n_hi = self.amps.len() / block;
        for hi in 0..n_hi {
            for off in 0..lo {
                let base = hi * block + off;
                for v in 0..d {
                    buf[v] = out.amps[base + v * lo];
                }
                fft_in_place(&mut buf, dir);
                for v in 0..d {
                    out.amps[base + v * lo] = buf[v];
                }
            }
        }
        Ok(out)
    }

    /// Relabel basis states of a register pair by a bijection
    /// `(a, b) ↦ f(a, b)`.
    pub fn map_pair(&self, ra: usize, rb: usize, f: impl Fn(usize, usize) -> (usize, usize)) -> Result<Self> {
        self.assert_reg(ra)?;
        self.assert_reg(rb)?;
        if ra == rb {
            return Err(Error::Dimension("map_pair needs two distinct registers".into()));
        }
        let da = self.dims[ra];
        let db = self.dims[rb];
        let mut seen = vec![false; da * db];
        for a in 0..da {
            for b in 0..db {
                let (x, y) = f(a, b);
                if x >= da || y >= db {
                    return Err(Error::IndexOutOfRange("map_pair image out of range".into()));
                }
                let slot = x * db + y;
                if seen[slot] {
                    return Err(Error::Domain("map_pair is not a bijection".into()));
                }
                seen[slot] = true;
            }
        }
        let mut out = self.clone();
        for z in out.amps.iter_mut() {
            *z = C64::new(0.0, 0.0);
        }
        let total = self.amps.len();
        for idx in 0..total {
            let indices = self.decode(idx);
            let (x, y) = f(indices[ra], indices[rb]);
            let mut tgt = indices.clone();
            tgt[ra] = x;
            tgt[rb] = y;
            out.amps[self.encode(&tgt)] = self.amps[idx];
        }
        Ok(out)
    }

    fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.dims.len()];
        for (r, d) in self.dims.iter().enumerate().rev() {
            out[r] = idx % d;
            idx /= d;
        }
        out
    }

    fn encode(&self, indices: &[usize]) -> usize {
        let mut idx = 0usize;
        for (i, d) in indices.iter().zip(&self.dims) {
            idx = idx * d + i;
        }
        idx
    }

    /// Append a fresh register in state `|index⟩` at the end of the layout.
    pub fn append_register(&self, size: usize, label: &str, index: usize) -> Result<Self> {
        if size == 0 || index >= size {
            return Err(Error::IndexOutOfRange("append_register index".into()));
        }
        let mut dims = self.dims.clone();
        dims.push(size);
        let mut labels = self.labels.clone();
        labels.push(label.to_string());
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len() * size];
        for (i, z) in self.amps.iter().enumerate() {
            amps[i * size + index] = *z;
        }
        Ok(StateVector {
            dims,
            labels,
            amps,
            norm: self.norm,
            normalized: self.normalized,
        })
    }

    /// Project one register onto `|value⟩`, remove it, and renormalize.
    /// Returns the post-measurement state together with the outcome
    /// probability (of the normalized input).
    pub fn project_register(&self, reg: usize, value: usize) -> Result<(Self, f64)> {
        self.assert_reg(reg)?;
        let (d, lo, block) = self.strides(reg);
        if value >= d {
            return Err(Error::IndexOutOfRange("projection value".into()));
        }
        let n_hi = self.amps.len() / block;
        let mut amps = Vec::with_capacity(n_hi * lo);
        for hi in 0..n_hi {
            let base = hi * block + value * lo;
            amps.extend_from_slice(&self.amps[base..base + lo]);
        }
        let total_sq: f64 = self.amps.iter().map(|z| z.norm_sqr()).sum();
        let kept_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if kept_sq < 1e-300 || total_sq < 1e-300 {
            return Err(Error::EmptyPostSelection(format!(
                "projection of register {reg} onto {value} has zero weight"
            )));
        }
        let prob = kept_sq / total_sq;
        let scale = 1.0 / kept_sq.sqrt();
        for z in amps.iter_mut() {
            *z *= scale;
        }
        let mut dims = self.dims.clone();
        dims.remove(reg);
        let mut labels = self.labels.clone();
        labels.remove(reg);
        if dims.is_empty() {
            dims.push(1);
            labels.push("scalar".into());
        }
        Ok((
            StateVector {
                dims,
                labels,
                amps,
                norm: 1.0,
                normalized: true,
            },
            prob,
        ))
    }

    /// Remove a register that is in a product state with the rest; errors
    /// if it is entangled beyond `tol`.
    pub fn drop_product_register(&self, reg: usize, tol: f64) -> Result<Self> {
        self.assert_reg(reg)?;
        let (d, lo, block) = self.strides(reg);
        let n_hi = self.amps.len() / block;
        let rest = n_hi * lo;
        // X[r, v] = amplitude with register value v and remaining index r
        let mut x = vec![C64::new(0.0, 0.0); rest * d];
        for hi in 0..n_hi {
            for v in 0..d {
                for off in 0..lo {
                    x[(hi * lo + off) * d + v] = self.amps[hi * block + v * lo + off];
                }
            }
        }
        // product state ⇔ rows are proportional to a single register vector
        let mut phi = vec![C64::new(0.0, 0.0); d];
        let mut best = 0.0;
        let mut best_r = 0;
        for r in 0..rest {
            let w: f64 = (0..d).map(|v| x[r * d + v].norm_sqr()).sum();
            if w > best {
                best = w;
                best_r = r;
            }
        }
        if best < 1e-300 {
            return Err(Error::EmptyPostSelection("zero state".into()));
        }
        for (v, p) in phi.iter_mut().enumerate() {
            *p = x[best_r * d + v];
        }
        let phi_norm = norm_of(&phi);
        for p in phi.iter_mut() {
            *p /= phi_norm;
        }
        let mut amps = Vec::with_capacity(rest);
        let mut residual_sq = 0.0;
        for r in 0..rest {
            let mut coef = C64::new(0.0, 0.0);
            for v in 0..d {
                coef += phi[v].conj() * x[r * d + v];
            }
            for v in 0..d {
                let res = x[r * d + v] - coef * phi[v];
                residual_sq += res.norm_sqr();
            }
            amps.push(coef);
        }
        let total_sq: f64 = self.amps.iter().map(|z| z.norm_sqr()).sum();
        if residual_sq.sqrt() > tol * total_sq.sqrt() {
            return Err(Error::EntangledRegister(self.labels[reg].clone()));
        }
        let mut dims = self.dims.clone();
        dims.remove(reg);
        let mut labels = self.labels.clone();
        labels.remove(reg);
        StateVector::new_unnormalized(dims, labels, amps).map(|mut s| {
            s.normalized = self.normalized;
            if s.normalized {
                s.norm = 1.0;
            }
            s
        })
    }

    /// Exact outcome distribution of one register (marginal over the rest),
    /// computed from the normalized state.
    pub fn distribution(&self, reg: usize) -> Result<Vec<f64>> {
        self.assert_reg(reg)?;
        let (d, lo, block) = self.strides(reg);
        let n_hi = self.amps.len() / block;
        let total_sq: f64 = self.amps.iter().map(|z| z.norm_sqr()).sum();
        let mut out = vec![0.0; d];
        for hi in 0..n_hi {
            for v in 0..d {
                let base = hi * block + v * lo;
                out[v] += self.amps[base..base + lo]
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>();
            }
        }
        if total_sq > 0.0 {
            for p in out.iter_mut() {
                *p /= total_sq;
            }
        }
        Ok(out)
    }

    /// Sample a full measurement outcome (one index per register) with the
    /// caller's RNG.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let total_sq: f64 = self.amps.iter().map(|z| z.norm_sqr()).sum();
        let mut u = rng.random::<f64>() * total_sq;
        let mut idx = self.amps.len() - 1;
        for (i, z) in self.amps.iter().enumerate() {
            u -= z.norm_sqr();
            if u <= 0.0 {
                idx = i;
                break;
            }
        }
        self.decode(idx)
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::Dimension("inner product dims mismatch".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|` on normalized inputs.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for z in out.amps.iter_mut() {
            *z *= factor;
        }
        out.norm = self.norm * factor.norm();
        out.normalized = self.normalized && (factor.norm() - 1.0).abs() <= NORM_TOL;
        out
    }

    pub fn to_json(&self) -> String {
        let schema = StateJson {
            dims: self.dims.clone(),
            labels: self.labels.clone(),
            amps: self.amps.iter().map(|z| [z.re, z.im]).collect(),
        };
        serde_json::to_string_pretty(&schema).expect("serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schema: StateJson = serde_json::from_str(text)?;
        let amps: Vec<C64> = schema.amps.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        let norm = norm_of(&amps);
        if (norm - 1.0).abs() <= NORM_TOL {
            StateVector::new_normalized(schema.dims, schema.labels, amps)
        } else {
            StateVector::new_unnormalized(schema.dims, schema.labels, amps)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    dims: Vec<usize>,
    labels: Vec<String>,
    amps: Vec<[f64; 2]>,
}

pub(crate) fn norm_of(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
