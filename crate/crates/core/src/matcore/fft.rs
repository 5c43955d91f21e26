//! Unitary discrete Fourier transforms.
//!
//! The Fourier matrix used throughout the crate is
//! `F[j][k] = ω^{jk}/√n` with `ω = exp(−2πi/n)`, so `fft` computes `F·v`
//! and `ifft` computes `F†·v`. Arbitrary lengths are supported (rustfft
//! falls back to mixed-radix / Bluestein internally).

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Dense Fourier matrix `F[j][k] = ω^{jk}/√n`, `ω = exp(−2πi/n)`.
pub fn fourier_matrix(n: usize) -> Result<Array2<C64>> {
    if n == 0 {
        return Err(Error::Dimension("fourier_matrix requires n >= 1".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(Array2::from_shape_fn((n, n), |(j, k)| {
        // reduce jk mod n before forming the angle to keep large n accurate
        let e = ((j as u64 * k as u64) % n as u64) as f64;
        let angle = -2.0 * std::f64::consts::PI * e / n as f64;
        C64::from_polar(scale, angle)
    }))
}

/// Unitary forward transform `F·v`.
pub fn fft(v: &[C64]) -> Result<Vec<C64>> {
    if v.is_empty() {
        return Err(Error::Dimension("fft of empty vector".into()));
    }
    let mut buf = v.to_vec();
    fft_in_place(&mut buf, FftDirection::Forward);
    Ok(buf)
}

/// Unitary inverse transform `F†·v`.
pub fn ifft(v: &[C64]) -> Result<Vec<C64>> {
    if v.is_empty() {
        return Err(Error::Dimension("ifft of empty vector".into()));
    }
    let mut buf = v.to_vec();
    fft_in_place(&mut buf, FftDirection::Inverse);
    Ok(buf)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FftDirection {
    /// Apply `F` (kernel `exp(−2πi jk/n)`, scaled by `1/√n`).
    Forward,
    /// Apply `F†` (kernel `exp(+2πi jk/n)`, scaled by `1/√n`).
    Inverse,
}

/// In-place unitary transform of one buffer.
pub fn fft_in_place(buf: &mut [C64], dir: FftDirection) {
    let n = buf.len();
    debug_assert!(n > 0);
    let mut planner = FftPlanner::new();
    let plan = match dir {
        FftDirection::Forward => planner.plan_fft_forward(n),
        FftDirection::Inverse => planner.plan_fft_inverse(n),
    };
    plan.process(buf);
    let scale = 1.0 / (n as f64).sqrt();
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

/// Unnormalized forward DFT `k ↦ Σ_j v_j ω^{jk}`; the eigenvalue map of a
/// circulant first column.
pub fn dft_unnormalized(v: &[C64]) -> Result<Vec<C64>> {
    let mut out = fft(v)?;
    let s = (v.len() as f64).sqrt();
    for z in out.iter_mut() {
        *z *= s;
    }
    Ok(out)
}

/// Inverse of [`dft_unnormalized`].
pub fn idft_unnormalized(v: &[C64]) -> Result<Vec<C64>> {
    let mut out = ifft(v)?;
    let s = 1.0 / (v.len() as f64).sqrt();
    for z in out.iter_mut() {
        *z *= s;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::test_support::{c, rand_cvec};
    use ndarray::Array1;

    #[test]
    fn fourier_matrix_n1_is_identity() {
        let f = fourier_matrix(1).unwrap();
        assert_eq!(f.shape(), &[1, 1]);
        assert!((f[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fourier_matrix_n2() {
        let f = fourier_matrix(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        for (idx, want) in [((0, 0), s), ((0, 1), s), ((1, 0), s), ((1, 1), -s)] {
            assert!((f[idx] - c(want, 0.0)).norm() < 1e-15, "entry {idx:?}");
        }
    }

    #[test]
    fn fourier_matrix_n8_unitary() {
        let f = fourier_matrix(8).unwrap();
        let fh = f.t().mapv(|z| z.conj());
        let prod = f.dot(&fh);
        let mut dev: f64 = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                dev += (prod[(i, j)] - want).norm_sqr();
            }
        }
        assert!(dev.sqrt() <= 1e-12, "deviation {}", dev.sqrt());
    }

    #[test]
    fn fourier_matrix_n0_errors() {
        assert!(matches!(fourier_matrix(0), Err(Error::Dimension(_))));
    }

    #[test]
    fn fft_basis_vector_gives_first_column() {
        let v = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let out = fft(&v).unwrap();
        for z in &out {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn fft_constant_vector_concentrates() {
        let v = vec![c(1.0, 0.0); 4];
        let out = fft(&v).unwrap();
        assert!((out[0] - c(2.0, 0.0)).norm() < 1e-14);
        for z in &out[1..] {
            assert!(z.norm() < 1e-14);
        }
    }

    #[test]
    fn fft_empty_errors() {
        assert!(matches!(fft(&[]), Err(Error::Dimension(_))));
    }

    #[test]
    fn fft_matches_dense_fourier_matrix_n12() {
        let mut rng = crate::matcore::test_support::rng(7);
        let v = rand_cvec(&mut rng, 12);
        let f = fourier_matrix(12).unwrap();
        let dense = f.dot(&Array1::from_vec(v.clone()));
        let fast = fft(&v).unwrap();
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let err: f64 = dense
            .iter()
            .zip(&fast)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-12 * vnorm.max(1.0), "err {err}");
    }

    #[test]
    fn fft_round_trips() {
        let mut rng = crate::matcore::test_support::rng(13);
        for n in [1usize, 2, 3, 5, 12, 17, 31] {
            let v = rand_cvec(&mut rng, n);
            let back = ifft(&fft(&v).unwrap()).unwrap();
            let err: f64 = v
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-12, "n={n} err={err}");
        }
    }
}
