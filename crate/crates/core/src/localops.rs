//! Built-in d-level operator matrices and per-compilation user operators.
//!
//! Conventions, in the level basis `|0⟩ … |d−1⟩`:
//!
//! | name | matrix |
//! |------|--------|
//! | `ident` | identity |
//! | `a` | truncated annihilation, `⟨i|a|i+1⟩ = √(i+1)` |
//! | `ad` | creation, the transpose of `a` |
//! | `n` | `diag(0, 1, …, d−1)` |
//! | `q`, `qhoPos` | `(a + ad)/√2` |
//! | `p`, `qhoMom` | `i(ad − a)/√2` |
//! | `q<m>`, `p<m>` | m-th matrix power of the truncated `q` or `p`, `2 ≤ m ≤ 9` |
//! | `Sx`, `Sy`, `Sz` | spin-s operators with `s = (d−1)/2`, `Sz = diag(s, s−1, …, −s)` |
//! | `Pr<k>` | indicator `|k⟩⟨k|` |
//! | `k<i>b<j>` | transfer `|i⟩⟨j|` |
//!
//! `q<m>` is the power of the truncated matrix, not the truncation of the
//! exact power; the two differ in the bottom-right corner.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix used for local operators.
pub type Matrix = DMatrix<Complex64>;

const MAX_POWER: u32 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalOpError {
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("operator `{name}` uses level {index}, out of range for d = {d}")]
    IndexOutOfRange { name: String, index: usize, d: usize },
    #[error("malformed power in `{0}` (powers must be 2..=9)")]
    MalformedPower(String),
    #[error("subsystem dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("matrix for `{name}` is {rows}x{cols}, not square")]
    NotSquare {
        name: String,
        rows: usize,
        cols: usize,
    },
    #[error("matrix row {row} of `{name}` has {found} entries, expected {expected}")]
    RaggedRow {
        name: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("operator `{name}` is {found}x{found} but the subsystem has d = {expected}")]
    DimensionMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("operator name `{0}` is already defined")]
    NameCollision(String),
    #[error("operator name `{0}` must be non-empty and alphanumeric")]
    InvalidName(String),
}

/// A named `d×d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    pub name: String,
    pub matrix: Matrix,
}

impl LocalOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn annihilation(d: usize) -> Matrix {
    Matrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            re((j as f64).sqrt())
        } else {
            Complex64::default()
        }
    })
}

fn position(d: usize) -> Matrix {
    let a = annihilation(d);
    (&a + a.adjoint()) * re(FRAC_1_SQRT_2)
}

fn momentum(d: usize) -> Matrix {
    let a = annihilation(d);
    (a.adjoint() - &a) * Complex64::new(0.0, FRAC_1_SQRT_2)
}

/// Spin raising operator in the basis ordered `m = s, s−1, …, −s`.
fn spin_raise(d: usize) -> Matrix {
    let s = (d as f64 - 1.0) / 2.0;
    Matrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            let m = s - j as f64;
            re((s * (s + 1.0) - m * (m + 1.0)).sqrt())
        } else {
            Complex64::default()
        }
    })
}

fn ket_bra(d: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    m[(i, j)] = re(1.0);
    m
}

fn parse_index(digits: &str) -> Option<usize> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        None
    } else {
        digits.parse().ok()
    }
}

fn parse_power(name: &str, digits: &str) -> Result<u32, LocalOpError> {
    parse_index(digits)
        .and_then(|m| u32::try_from(m).ok())
        .filter(|m| (2..=MAX_POWER).contains(m))
        .ok_or_else(|| LocalOpError::MalformedPower(name.to_string()))
}

fn matrix_power(base: &Matrix, m: u32) -> Matrix {
    let mut out = base.clone();
    for _ in 1..m {
        out = &out * base;
    }
    out
}

fn is_plain_builtin(name: &str) -> bool {
    matches!(
        name,
        "ident" | "a" | "ad" | "n" | "q" | "qhoPos" | "p" | "qhoMom" | "Sx" | "Sy" | "Sz"
    )
}

/// Whether `name` falls in the builtin namespace (including the
/// parametrized `q<m>`, `p<m>`, `Pr<k>` and `k<i>b<j>` families).
pub fn is_builtin_name(name: &str) -> bool {
    if is_plain_builtin(name) {
        return true;
    }
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if let Some(rest) = name.strip_prefix("Pr") {
        return digits(rest);
    }
    if let Some(rest) = name.strip_prefix('q').or_else(|| name.strip_prefix('p')) {
        if digits(rest) {
            return true;
        }
    }
    if let Some(rest) = name.strip_prefix('k') {
        if let Some((i, j)) = rest.split_once('b') {
            return digits(i) && digits(j);
        }
    }
    false
}

/// Looks up a builtin operator at dimension `d`.
pub fn builtin(name: &str, d: usize) -> Result<LocalOperator, LocalOpError> {
    if d < 2 {
        return Err(LocalOpError::InvalidDimension(d));
    }
    let out_of_range = |index: usize| LocalOpError::IndexOutOfRange {
        name: name.to_string(),
        index,
        d,
    };
    let matrix = match name {
        "ident" => Matrix::identity(d, d),
        "a" => annihilation(d),
        "ad" => annihilation(d).transpose(),
        "n" => Matrix::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| re(i as f64))),
        "q" | "qhoPos" => position(d),
        "p" | "qhoMom" => momentum(d),
        "Sz" => {
            let s = (d as f64 - 1.0) / 2.0;
            Matrix::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| re(s - i as f64)))
        }
        "Sx" => {
            let sp = spin_raise(d);
            (&sp + sp.adjoint()) * re(0.5)
        }
        "Sy" => {
            let sp = spin_raise(d);
            (&sp - sp.adjoint()) * Complex64::new(0.0, -0.5)
        }
        _ => {
            if let Some(rest) = name.strip_prefix("Pr") {
                let k = parse_index(rest)
                    .ok_or_else(|| LocalOpError::UnknownOperator(name.to_string()))?;
                if k >= d {
                    return Err(out_of_range(k));
                }
                ket_bra(d, k, k)
            } else if let Some((i, j)) = name
                .strip_prefix('k')
                .and_then(|r| r.split_once('b'))
                .and_then(|(i, j)| Some((parse_index(i)?, parse_index(j)?)))
            {
                if i >= d {
                    return Err(out_of_range(i));
                }
                if j >= d {
                    return Err(out_of_range(j));
                }
                ket_bra(d, i, j)
            } else if let Some(rest) = name.strip_prefix('q').filter(|r| parse_index(r).is_some()) {
                matrix_power(&position(d), parse_power(name, rest)?)
            } else if let Some(rest) = name.strip_prefix('p').filter(|r| parse_index(r).is_some()) {
                matrix_power(&momentum(d), parse_power(name, rest)?)
            } else {
                return Err(LocalOpError::UnknownOperator(name.to_string()));
            }
        }
    };
    Ok(LocalOperator {
        name: name.to_string(),
        matrix,
    })
}

/// User-supplied matrices for one compilation. Names resolve here before
/// the builtin catalogue.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserOps {
    ops: BTreeMap<String, Matrix>,
}

impl UserOps {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str, matrix: Matrix) -> Result<(), LocalOpError> {
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric()) {
            return Err(LocalOpError::InvalidName(name.to_string()));
        }
        if is_builtin_name(name) || self.ops.contains_key(name) {
            return Err(LocalOpError::NameCollision(name.to_string()));
        }
        if matrix.nrows() != matrix.ncols() {
            return Err(LocalOpError::NotSquare {
                name: name.to_string(),
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        self.ops.insert(name.to_string(), matrix);
        Ok(())
    }

    /// Registers a matrix given as rows.
    pub fn register_rows(
        &mut self,
        name: &str,
        rows: &[Vec<Complex64>],
    ) -> Result<(), LocalOpError> {
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
            return Err(LocalOpError::RaggedRow {
                name: name.to_string(),
                row,
                expected: ncols,
                found: r.len(),
            });
        }
        let matrix = Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
        self.register(name, matrix)
    }

    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.ops.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.ops.keys().map(String::as_str)
    }

    /// Resolves `name` at dimension `d`: user operators first, then builtins.
    pub fn resolve(&self, name: &str, d: usize) -> Result<LocalOperator, LocalOpError> {
        match self.ops.get(name) {
            Some(m) if m.nrows() != d => Err(LocalOpError::DimensionMismatch {
                name: name.to_string(),
                expected: d,
                found: m.nrows(),
            }),
            Some(m) => Ok(LocalOperator {
                name: name.to_string(),
                matrix: m.clone(),
            }),
            None => builtin(name, d),
        }
    }
}
