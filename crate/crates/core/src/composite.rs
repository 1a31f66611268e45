//! Operators over collections of d-level subsystems and their compilation
//! to Pauli sums.
//!
//! A [`CompositeOperator`] is a list of terms `b · M₀ ⊗ M₁ ⊗ …`. Every
//! subsystem owns a contiguous block of qubits, assigned in registration
//! order. A matrix element `M[r, c]` of a local operator compiles to
//!
//! ```text
//! M[r, c] · ⊗_{q ∈ bitmask(r, c)} E(b_q, b'_q)
//! ```
//!
//! with `b = codeword(r)`, `b' = codeword(c)`, and the single-qubit pieces
//! `E(0,0) = (I+Z)/2`, `E(1,1) = (I−Z)/2`, `E(0,1) = (X+iY)/2`,
//! `E(1,0) = (X−iY)/2`.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::encodings::{Encoding, EncodingError};
use crate::localops::{LocalOpError, LocalOperator, Matrix, UserOps};
use crate::pauli::{PauliAxis, PauliString, PauliSum, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositeError {
    #[error("subsystem index {index} out of range ({count} subsystems registered)")]
    InvalidSubsystem { index: usize, count: usize },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    LocalOp(#[from] LocalOpError),
}

/// Which positions an encoded matrix element acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskMode {
    /// The encoding's bitmask subset. Exact on the code subspace.
    #[default]
    Reduced,
    /// Every position of the subsystem. For unary this makes the compiled
    /// operator vanish outside the code subspace as well.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    /// Terms with `|coeff| <= tol` are dropped from the final sum.
    pub tol: f64,
    pub mask: MaskMode,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOLERANCE,
            mask: MaskMode::Reduced,
        }
    }
}

impl CompileOptions {
    pub fn strict() -> Self {
        Self {
            mask: MaskMode::Full,
            ..Self::default()
        }
    }
}

/// A d-level subsystem and the qubit block it occupies.
#[derive(Debug, Clone, PartialEq)]
pub struct Subsystem {
    dim: usize,
    encoding: Encoding,
    offset: usize,
    width: usize,
}

impl Subsystem {
    /// A standalone subsystem starting at qubit 0.
    pub fn new(dim: usize, encoding: Encoding) -> Result<Self, CompositeError> {
        Self::at_offset(dim, encoding, 0)
    }

    fn at_offset(dim: usize, encoding: Encoding, offset: usize) -> Result<Self, CompositeError> {
        let width = encoding.qubit_count(dim)?;
        Ok(Self {
            dim,
            encoding,
            offset,
            width,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    /// First qubit of this subsystem's block.
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Number of qubits in this subsystem's block.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn qubits(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.width
    }

    /// Compiles a builtin operator on this subsystem alone.
    pub fn op_to_pauli(&self, name: &str) -> Result<PauliSum, CompositeError> {
        let op = crate::localops::builtin(name, self.dim)?;
        self.compile(&op.matrix, CompileOptions::default())
    }

    pub fn compile(&self, matrix: &Matrix, opts: CompileOptions) -> Result<PauliSum, CompositeError> {
        if matrix.nrows() != self.dim || matrix.ncols() != self.dim {
            return Err(LocalOpError::DimensionMismatch {
                name: "<matrix>".into(),
                expected: self.dim,
                found: matrix.nrows(),
            }
            .into());
        }
        Ok(compile_local(matrix, &self.encoding, self.offset, opts.mask)?.simplify(opts.tol))
    }
}

fn expansion(b: u8, b_prime: u8) -> [(Option<PauliAxis>, Complex64); 2] {
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    match (b, b_prime) {
        (0, 0) => [(None, half), (Some(PauliAxis::Z), half)],
        (1, 1) => [(None, half), (Some(PauliAxis::Z), -half)],
        (0, 1) => [(Some(PauliAxis::X), half), (Some(PauliAxis::Y), half_i)],
        _ => [(Some(PauliAxis::X), half), (Some(PauliAxis::Y), -half_i)],
    }
}

/// Compiles a `d×d` matrix under `enc`, placing the subsystem's positions at
/// qubits `offset..`. Entries are skipped only when exactly zero; the result
/// has exact zeros removed but is not otherwise pruned.
pub fn compile_local(
    matrix: &Matrix,
    enc: &Encoding,
    offset: usize,
    mask: MaskMode,
) -> Result<PauliSum, EncodingError> {
    let d = matrix.nrows();
    let width = enc.qubit_count(d)?;
    let words = (0..d)
        .map(|k| enc.codeword(k, d))
        .collect::<Result<Vec<_>, _>>()?;
    let full: Vec<usize> = (0..width).collect();
    let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
    let mut partial: Vec<(Vec<(usize, PauliAxis)>, Complex64)> = Vec::new();
    let mut next = Vec::new();
    for r in 0..d {
        for c in 0..d {
            let value = matrix[(r, c)];
            if value == Complex64::default() {
                continue;
            }
            let positions = match mask {
                MaskMode::Reduced => enc.bitmask(r, c, d)?,
                MaskMode::Full => full.clone(),
            };
            partial.clear();
            partial.push((Vec::with_capacity(positions.len()), value));
            for &q in &positions {
                next.clear();
                for (ops, coeff) in &partial {
                    for (axis, factor) in expansion(words[r][q], words[c][q]) {
                        let mut ops = ops.clone();
                        if let Some(axis) = axis {
                            ops.push((offset + q, axis));
                        }
                        next.push((ops, coeff * factor));
                    }
                }
                std::mem::swap(&mut partial, &mut next);
            }
            for (ops, coeff) in partial.drain(..) {
                *acc.entry(PauliString::from_sorted_unchecked(ops)).or_default() += coeff;
            }
        }
    }
    Ok(acc.into_iter().collect::<PauliSum>().simplify(0.0))
}

/// Operator reference accepted by [`CompositeOperator::add_term`].
#[derive(Debug, Clone, PartialEq)]
pub enum OpSpec {
    Name(String),
    Matrix(Matrix),
}

impl From<&str> for OpSpec {
    fn from(name: &str) -> Self {
        OpSpec::Name(name.to_string())
    }
}

impl From<String> for OpSpec {
    fn from(name: String) -> Self {
        OpSpec::Name(name)
    }
}

impl From<Matrix> for OpSpec {
    fn from(m: Matrix) -> Self {
        OpSpec::Matrix(m)
    }
}

/// `coeff · Π factors`; an empty factor list is the global identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeTerm {
    pub coeff: Complex64,
    /// `(subsystem index, operator)` in multiplication order.
    pub factors: Vec<(usize, LocalOperator)>,
}

impl CompositeTerm {
    /// Product of the factors acting on each subsystem, in listed order.
    pub fn local_products(&self) -> BTreeMap<usize, Matrix> {
        let mut out: BTreeMap<usize, Matrix> = BTreeMap::new();
        for (idx, op) in &self.factors {
            match out.get_mut(idx) {
                Some(m) => *m = &*m * &op.matrix,
                None => {
                    out.insert(*idx, op.matrix.clone());
                }
            }
        }
        out
    }
}

/// A sum of products of local operators over registered subsystems.
#[derive(Debug, Clone, Default)]
pub struct CompositeOperator {
    subsystems: Vec<Subsystem>,
    terms: Vec<CompositeTerm>,
    user_ops: UserOps,
}

/// Size and cost summary of a compiled operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceReport {
    pub n_qubits: usize,
    pub n_terms: usize,
    pub max_weight: usize,
    pub mean_weight: f64,
    pub coeff_one_norm: f64,
}

impl ResourceReport {
    pub fn from_sum(sum: &PauliSum, n_qubits: usize) -> Self {
        let n_terms = sum.len();
        let total_weight: usize = sum.iter().map(|(s, _)| s.weight()).sum();
        Self {
            n_qubits,
            n_terms,
            max_weight: sum.max_weight(),
            mean_weight: if n_terms == 0 {
                0.0
            } else {
                total_weight as f64 / n_terms as f64
            },
            coeff_one_norm: sum.iter().map(|(_, c)| c.norm()).sum(),
        }
    }
}

impl CompositeOperator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Operator names in later `add_term` calls resolve against `ops` first.
    pub fn with_user_ops(ops: UserOps) -> Self {
        Self {
            user_ops: ops,
            ..Self::default()
        }
    }

    pub fn user_ops(&self) -> &UserOps {
        &self.user_ops
    }

    /// Appends a subsystem and returns its index. Each call creates an
    /// independent subsystem, even for identical `(d, encoding)`.
    pub fn append_subsystem(&mut self, d: usize, encoding: Encoding) -> Result<usize, CompositeError> {
        let sub = Subsystem::at_offset(d, encoding, self.n_qubits())?;
        self.subsystems.push(sub);
        Ok(self.subsystems.len() - 1)
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn terms(&self) -> &[CompositeTerm] {
        &self.terms
    }

    /// Level counts of the subsystems, in registration order.
    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(Subsystem::dim).collect()
    }

    /// Total qubits allocated, whether or not any term touches them.
    pub fn n_qubits(&self) -> usize {
        self.subsystems.last().map_or(0, |s| s.offset + s.width)
    }

    /// Appends `coeff · Π factors`. Names resolve at the subsystem's `d`;
    /// factors on the same subsystem multiply in the order given.
    pub fn add_term<I, O>(&mut self, coeff: Complex64, factors: I) -> Result<(), CompositeError>
    where
        I: IntoIterator<Item = (usize, O)>,
        O: Into<OpSpec>,
    {
        let count = self.subsystems.len();
        let factors = factors
            .into_iter()
            .map(|(index, op)| {
                let sub = self
                    .subsystems
                    .get(index)
                    .ok_or(CompositeError::InvalidSubsystem { index, count })?;
                let op = match op.into() {
                    OpSpec::Name(name) => self.user_ops.resolve(&name, sub.dim)?,
                    OpSpec::Matrix(matrix) => {
                        if matrix.nrows() != matrix.ncols() {
                            return Err(LocalOpError::NotSquare {
                                name: "<matrix>".into(),
                                rows: matrix.nrows(),
                                cols: matrix.ncols(),
                            }
                            .into());
                        }
                        if matrix.nrows() != sub.dim {
                            return Err(LocalOpError::DimensionMismatch {
                                name: "<matrix>".into(),
                                expected: sub.dim,
                                found: matrix.nrows(),
                            }
                            .into());
                        }
                        LocalOperator {
                            name: "<matrix>".into(),
                            matrix,
                        }
                    }
                };
                Ok((index, op))
            })
            .collect::<Result<Vec<_>, CompositeError>>()?;
        self.terms.push(CompositeTerm { coeff, factors });
        Ok(())
    }

    /// Appends `coeff · I` over every qubit.
    pub fn add_identity(&mut self, coeff: Complex64) {
        self.terms.push(CompositeTerm {
            coeff,
            factors: Vec::new(),
        });
    }

    /// Compiles every term and sums the results.
    ///
    /// Same-subsystem factors are multiplied as matrices before encoding;
    /// different subsystems occupy disjoint qubits, so their compiled sums
    /// combine by tensor product.
    pub fn to_pauli(&self, opts: CompileOptions) -> Result<PauliSum, CompositeError> {
        let mut total = PauliSum::new();
        let mut cache: HashMap<(usize, Vec<u64>), PauliSum> = HashMap::new();
        for term in &self.terms {
            let mut product = PauliSum::identity(term.coeff);
            for (idx, matrix) in term.local_products() {
                let key = (idx, matrix_key(&matrix));
                let local = match cache.get(&key) {
                    Some(p) => p,
                    None => {
                        let sub = &self.subsystems[idx];
                        let p = compile_local(&matrix, &sub.encoding, sub.offset, opts.mask)?;
                        cache.entry(key).or_insert(p)
                    }
                };
                product = product.mul_sum(local);
            }
            total.extend_from(&product);
        }
        total.prune(opts.tol);
        Ok(total)
    }

    pub fn resource_report(&self, opts: CompileOptions) -> Result<ResourceReport, CompositeError> {
        let sum = self.to_pauli(opts)?;
        Ok(ResourceReport::from_sum(&sum, self.n_qubits()))
    }
}

/// Exact bit pattern of a matrix, used to reuse compiled local operators.
fn matrix_key(m: &Matrix) -> Vec<u64> {
    let mut key = Vec::with_capacity(1 + 2 * m.len());
    key.push(m.nrows() as u64);
    for z in m.iter() {
        key.push(z.re.to_bits());
        key.push(z.im.to_bits());
    }
    key
}
