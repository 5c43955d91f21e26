//! File exchange formats: Matrix Market (coordinate and array, real and
//! complex) plus the JSON schemas used by the CLI.
//!
//! JSON matrix schema: `{"n": int, "rows": [[re, im], ...]}` where `rows`
//! lists all n² entries in row-major order.
//! Toeplitz schema: `{"n": int, "t": {"-1": [re, im], "0": [...], ...}}`.
//! Symbol schema: `{"coeffs": {"-1": [re, im], "0": [...], ...}}`.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;
use crate::matcore::toeplitz::{SymbolSpec, ToeplitzSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketLayout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MarketField {
    Real,
    Integer,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MarketSymmetry {
    General,
    Symmetric,
    Hermitian,
    SkewSymmetric,
}

/// Read a square matrix from Matrix Market text.
pub fn read_matrix_market<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut lines = BufReader::new(reader).lines();
    let header = loop {
        match lines.next() {
            Some(l) => {
                let l = l?;
                if !l.trim().is_empty() {
                    break l;
                }
            }
            None => return Err(Error::Parse("empty Matrix Market input".into())),
        }
    };
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() < 5 || !toks[0].eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(Error::Parse("missing %%MatrixMarket header".into()));
    }
    if !toks[1].eq_ignore_ascii_case("matrix") {
        return Err(Error::Parse("only 'matrix' objects are supported".into()));
    }
    let layout = match toks[2].to_ascii_lowercase().as_str() {
        "coordinate" => MarketLayout::Coordinate,
        "array" => MarketLayout::Array,
        other => return Err(Error::Parse(format!("unsupported layout '{other}'"))),
    };
    let field = match toks[3].to_ascii_lowercase().as_str() {
        "real" => MarketField::Real,
        "integer" => MarketField::Integer,
        "complex" => MarketField::Complex,
        other => return Err(Error::Parse(format!("unsupported field '{other}'"))),
    };
    let symmetry = match toks[4].to_ascii_lowercase().as_str() {
        "general" => MarketSymmetry::General,
        "symmetric" => MarketSymmetry::Symmetric,
        "hermitian" => MarketSymmetry::Hermitian,
        "skew-symmetric" => MarketSymmetry::SkewSymmetric,
        other => return Err(Error::Parse(format!("unsupported symmetry '{other}'"))),
    };

    let mut data_lines = lines
        .filter_map(|l| l.ok())
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty() && !l.starts_with('%'));

    let size_line = data_lines
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad size token '{t}'"))))
        .collect::<Result<_>>()?;

    let parse_value = |toks: &[&str], field: MarketField| -> Result<C64> {
        match field {
            MarketField::Complex => {
                if toks.len() < 2 {
                    return Err(Error::Parse("complex entry needs re and im".into()));
                }
                let re: f64 = toks[0].parse().map_err(|_| Error::Parse(format!("bad value '{}'", toks[0])))?;
                let im: f64 = toks[1].parse().map_err(|_| Error::Parse(format!("bad value '{}'", toks[1])))?;
                Ok(C64::new(re, im))
            }
            _ => {
                if toks.is_empty() {
                    return Err(Error::Parse("missing value".into()));
                }
                let re: f64 = toks[0].parse().map_err(|_| Error::Parse(format!("bad value '{}'", toks[0])))?;
                Ok(C64::new(re, 0.0))
            }
        }
    };

    match layout {
        MarketLayout::Coordinate => {
            if sizes.len() != 3 {
                return Err(Error::Parse("coordinate size line needs m n nnz".into()));
            }
            let (m, n, nnz) = (sizes[0], sizes[1], sizes[2]);
            if m != n || n == 0 {
                return Err(Error::Dimension(format!("matrix must be square and nonempty, got {m}x{n}")));
            }
            let mut a = Array2::from_elem((n, n), C64::new(0.0, 0.0));
            let mut count = 0usize;
            for line in data_lines {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() < 2 {
                    return Err(Error::Parse(format!("bad coordinate line '{line}'")));
                }
                let i: usize = toks[0].parse().map_err(|_| Error::Parse(format!("bad row index '{}'", toks[0])))?;
                let j: usize = toks[1].parse().map_err(|_| Error::Parse(format!("bad col index '{}'", toks[1])))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::Parse(format!("coordinate ({i},{j}) out of range for n={n}")));
                }
                let v = parse_value(&toks[2..], field)?;
                a[(i - 1, j - 1)] = v;
                match symmetry {
                    MarketSymmetry::General => {}
                    MarketSymmetry::Symmetric => a[(j - 1, i - 1)] = v,
                    MarketSymmetry::Hermitian => a[(j - 1, i - 1)] = v.conj(),
                    MarketSymmetry::SkewSymmetric => a[(j - 1, i - 1)] = -v,
                }
                count += 1;
            }
            if count != nnz {
                return Err(Error::Parse(format!("expected {nnz} entries, found {count}")));
            }
            DenseMatrix::new(a)
        }
        MarketLayout::Array => {
            if sizes.len() != 2 {
                return Err(Error::Parse("array size line needs m n".into()));
            }
            let (m, n) = (sizes[0], sizes[1]);
            if m != n || n == 0 {
                return Err(Error::Dimension(format!("matrix must be square and nonempty, got {m}x{n}")));
            }
            let mut values = Vec::with_capacity(n * n);
            for line in data_lines {
                let toks: Vec<&str> = line.split_whitespace().collect();
                values.push(parse_value(&toks, field)?);
            }
            let expected = match symmetry {
                MarketSymmetry::General => n * n,
                // packed lower triangle, diagonal included
                _ => n * (n + 1) / 2,
            };
            if values.len() != expected {
                return Err(Error::Parse(format!("expected {expected} array values, found {}", values.len())));
            }
            let mut a = Array2::from_elem((n, n), C64::new(0.0, 0.0));
            match symmetry {
                MarketSymmetry::General => {
                    // column-major
                    let mut it = values.into_iter();
                    for j in 0..n {
                        for i in 0..n {
                            a[(i, j)] = it.next().unwrap();
                        }
                    }
                }
                sym => {
                    let mut it = values.into_iter();
                    for j in 0..n {
                        for i in j..n {
                            let v = it.next().unwrap();
                            a[(i, j)] = v;
                            match sym {
                                MarketSymmetry::Symmetric => a[(j, i)] = v,
                                MarketSymmetry::Hermitian => a[(j, i)] = v.conj(),
                                MarketSymmetry::SkewSymmetric => a[(j, i)] = -v,
                                MarketSymmetry::General => unreachable!(),
                            }
                        }
                    }
                }
            }
            DenseMatrix::new(a)
        }
    }
}

/// Write a matrix in Matrix Market format. Emits a real field when every
/// entry has exactly zero imaginary part, complex otherwise.
pub fn write_matrix_market<W: Write>(m: &DenseMatrix, layout: MarketLayout, out: &mut W) -> Result<()> {
    let n = m.n();
    let all_real = m.entries().iter().all(|z| z.im == 0.0);
    let field = if all_real { "real" } else { "complex" };
    match layout {
        MarketLayout::Coordinate => {
            let nnz = m.entries().iter().filter(|z| z.norm() != 0.0).count();
            writeln!(out, "%%MatrixMarket matrix coordinate {field} general")?;
            writeln!(out, "{n} {n} {nnz}")?;
            for j in 0..n {
                for i in 0..n {
                    let z = m.entry(i, j);
                    if z.norm() != 0.0 {
                        if all_real {
                            writeln!(out, "{} {} {:.17e}", i + 1, j + 1, z.re)?;
                        } else {
                            writeln!(out, "{} {} {:.17e} {:.17e}", i + 1, j + 1, z.re, z.im)?;
                        }
                    }
                }
            }
        }
        MarketLayout::Array => {
            writeln!(out, "%%MatrixMarket matrix array {field} general")?;
            writeln!(out, "{n} {n}")?;
            for j in 0..n {
                for i in 0..n {
                    let z = m.entry(i, j);
                    if all_real {
                        writeln!(out, "{:.17e}", z.re)?;
                    } else {
                        writeln!(out, "{:.17e} {:.17e}", z.re, z.im)?;
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    rows: Vec<[f64; 2]>,
}

/// Serialize to the JSON matrix schema (row-major `[re, im]` pairs).
pub fn matrix_to_json(m: &DenseMatrix) -> String {
    let rows: Vec<[f64; 2]> = m.entries().iter().map(|z| [z.re, z.im]).collect();
    serde_json::to_string_pretty(&MatrixJson { n: m.n(), rows }).expect("serialization cannot fail")
}

pub fn matrix_from_json(text: &str) -> Result<DenseMatrix> {
    let parsed: MatrixJson = serde_json::from_str(text)?;
    if parsed.rows.len() != parsed.n * parsed.n {
        return Err(Error::Parse(format!(
            "matrix JSON: expected {} entries, got {}",
            parsed.n * parsed.n,
            parsed.rows.len()
        )));
    }
    let a = Array2::from_shape_fn((parsed.n, parsed.n), |(i, j)| {
        let [re, im] = parsed.rows[i * parsed.n + j];
        C64::new(re, im)
    });
    DenseMatrix::new(a)
}

#[derive(Serialize, Deserialize)]
struct ToeplitzJson {
    n: usize,
    t: BTreeMap<String, [f64; 2]>,
}

pub fn toeplitz_to_json(t: &ToeplitzSpec) -> String {
    let mut map = BTreeMap::new();
    let n = t.n() as i64;
    for k in (1 - n)..n {
        let z = t.coeff(k);
        if z.norm() != 0.0 {
            map.insert(k.to_string(), [z.re, z.im]);
        }
    }
    serde_json::to_string_pretty(&ToeplitzJson { n: t.n(), t: map }).expect("serialization cannot fail")
}

pub fn toeplitz_from_json(text: &str) -> Result<ToeplitzSpec> {
    let parsed: ToeplitzJson = serde_json::from_str(text)?;
    if parsed.n == 0 {
        return Err(Error::Dimension("Toeplitz JSON requires n >= 1".into()));
    }
    let n = parsed.n as i64;
    let mut coeffs = vec![C64::new(0.0, 0.0); 2 * parsed.n - 1];
    for (key, [re, im]) in &parsed.t {
        let k: i64 = key
            .parse()
            .map_err(|_| Error::Parse(format!("bad diagonal index '{key}'")))?;
        if k <= -n || k >= n {
            return Err(Error::Parse(format!("diagonal index {k} out of range for n={n}")));
        }
        coeffs[(k + n - 1) as usize] = C64::new(*re, *im);
    }
    ToeplitzSpec::from_coeffs(parsed.n, coeffs)
}

#[derive(Serialize, Deserialize)]
struct SymbolJson {
    coeffs: BTreeMap<String, [f64; 2]>,
}

pub fn symbol_to_json(s: &SymbolSpec) -> String {
    let coeffs = s
        .coeffs()
        .iter()
        .map(|(k, z)| (k.to_string(), [z.re, z.im]))
        .collect();
    serde_json::to_string_pretty(&SymbolJson { coeffs }).expect("serialization cannot fail")
}

pub fn symbol_from_json(text: &str) -> Result<SymbolSpec> {
    let parsed: SymbolJson = serde_json::from_str(text)?;
    let mut coeffs = BTreeMap::new();
    for (key, [re, im]) in &parsed.coeffs {
        let k: i64 = key
            .parse()
            .map_err(|_| Error::Parse(format!("bad coefficient index '{key}'")))?;
        coeffs.insert(k, C64::new(*re, *im));
    }
    SymbolSpec::from_coeffs(coeffs)
}

pub fn read_matrix_market_file<P: AsRef<Path>>(path: P) -> Result<DenseMatrix> {
    let f = std::fs::File::open(path)?;
    read_matrix_market(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::test_support::{c, rand_cmat, rng};

    #[test]
    fn coordinate_complex_round_trip() {
        let mut r = rng(5);
        let m = DenseMatrix::new(rand_cmat(&mut r, 5)).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&m, MarketLayout::Coordinate, &mut buf).unwrap();
        let back = read_matrix_market(&buf[..]).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((m.entry(i, j) - back.entry(i, j)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn array_real_round_trip() {
        let t = ToeplitzSpec::tridiagonal(4, c(-1.0, 0.0), c(2.0, 0.0), c(-1.0, 0.0)).unwrap();
        let m = t.materialize().unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&m, MarketLayout::Array, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix array real general"));
        let back = read_matrix_market(&buf[..]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((m.entry(i, j) - back.entry(i, j)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn reads_symmetric_coordinate() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 2.0\n2 1 -1.0\n2 2 2.0\n3 3 2.0\n";
        let m = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(m.entry(0, 1), c(-1.0, 0.0));
        assert_eq!(m.entry(1, 0), c(-1.0, 0.0));
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_matrix_market("not a matrix".as_bytes()).is_err());
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n5 5 1.0\n";
        assert!(read_matrix_market(bad.as_bytes()).is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let mut r = rng(9);
        let m = DenseMatrix::new(rand_cmat(&mut r, 3)).unwrap();
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.entry(i, j), back.entry(i, j));
            }
        }
    }

    #[test]
    fn toeplitz_json_round_trip() {
        let t = ToeplitzSpec::tridiagonal(5, c(-1.0, 0.5), c(2.0, 0.0), c(-1.0, -0.5)).unwrap();
        let back = toeplitz_from_json(&toeplitz_to_json(&t)).unwrap();
        for k in -4..=4 {
            assert_eq!(t.coeff(k), back.coeff(k));
        }
    }

    #[test]
    fn symbol_json_round_trip() {
        let s = SymbolSpec::real_even(2.0, &[0.5]);
        let back = symbol_from_json(&symbol_to_json(&s)).unwrap();
        assert_eq!(back.coeff(0), c(2.0, 0.0));
        assert_eq!(back.coeff(1), c(0.5, 0.0));
        assert_eq!(back.coeff(-1), c(0.5, 0.0));
    }
}
