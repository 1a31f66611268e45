//! Brute-force verification of compiled operators.
//!
//! Basis conventions: a qubit basis state `|b⟩` has index `Σ b_q 2^q`
//! (qubit 0 least significant), and a level tuple `(k₀, k₁, …)` has index
//! `k₀ + d₀·(k₁ + d₁·(…))` (subsystem 0 fastest). With these, a single
//! standard-binary subsystem whose `d` is a power of two compiles to a
//! Pauli sum whose dense matrix is the original matrix itself.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use thiserror::Error;

use crate::composite::{CompositeError, CompositeOperator};
use crate::encodings::{Encoding, EncodingError};
use crate::localops::Matrix;
use crate::pauli::{PauliAxis, PauliString, PauliSum};

/// Largest dense dimension the oracle will build by default.
pub const DEFAULT_GUARD: usize = 1 << 12;

/// Widest subsystem accepted by [`compile_by_trace`].
pub const MAX_TRACE_WIDTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("required dimension {required} exceeds the guard {guard}")]
    GuardExceeded { required: u128, guard: usize },
    #[error("trace projection supports at most {MAX_TRACE_WIDTH} qubits, got {0}")]
    TooWide(usize),
    #[error(transparent)]
    Composite(#[from] CompositeError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

fn check_guard(required: u128, guard: usize) -> Result<usize, OracleError> {
    if required > guard as u128 {
        Err(OracleError::GuardExceeded { required, guard })
    } else {
        Ok(required as usize)
    }
}

/// Product of the subsystem dimensions, saturating instead of overflowing.
pub fn code_dimension(dims: &[usize]) -> u128 {
    dims.iter()
        .fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
}

/// A square dense matrix within the oracle's size guard.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: Matrix,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `Σ coeff · ⊗_α (product of subsystem α's factors)`, identity where a
/// subsystem has no factor.
pub fn composite_to_dense(op: &CompositeOperator, guard: usize) -> Result<DenseOperator, OracleError> {
    let dims = op.dims();
    let n = check_guard(code_dimension(&dims), guard)?;
    let mut total = Matrix::zeros(n, n);
    for term in op.terms() {
        let products = term.local_products();
        let mut acc = Matrix::from_element(1, 1, term.coeff);
        for (idx, &d) in dims.iter().enumerate() {
            let local = products
                .get(&idx)
                .cloned()
                .unwrap_or_else(|| Matrix::identity(d, d));
            acc = local.kronecker(&acc);
        }
        total += acc;
    }
    Ok(DenseOperator { matrix: total })
}

/// Dense `2^n × 2^n` matrix of a Pauli sum.
pub fn pauli_to_dense(p: &PauliSum, n_qubits: usize, guard: usize) -> Result<DenseOperator, OracleError> {
    let required = if n_qubits >= 127 {
        u128::MAX
    } else {
        1u128 << n_qubits
    };
    let n = check_guard(required, guard)?;
    let mut m = Matrix::zeros(n, n);
    let needed = p.n_qubits();
    if needed > n_qubits {
        return Err(OracleError::GuardExceeded {
            required: 1u128.checked_shl(needed as u32).unwrap_or(u128::MAX),
            guard,
        });
    }
    for (s, c) in p.iter() {
        for col in 0..n {
            let mut state = BasisState::from_index(col, n_qubits);
            let phase = state.apply(s);
            m[(state.to_index(), col)] += c * phase;
        }
    }
    Ok(DenseOperator { matrix: m })
}

/// A computational basis state over any number of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct BasisState(Vec<u64>);

impl BasisState {
    fn zeros(n_qubits: usize) -> Self {
        BasisState(vec![0; n_qubits.div_ceil(64).max(1)])
    }

    fn from_index(index: usize, n_qubits: usize) -> Self {
        let mut s = Self::zeros(n_qubits);
        s.0[0] = index as u64;
        s
    }

    fn to_index(&self) -> usize {
        self.0[0] as usize
    }

    fn bit(&self, q: usize) -> u8 {
        ((self.0[q / 64] >> (q % 64)) & 1) as u8
    }

    fn set(&mut self, q: usize) {
        self.0[q / 64] |= 1 << (q % 64);
    }

    fn flip(&mut self, q: usize) {
        self.0[q / 64] ^= 1 << (q % 64);
    }

    /// Replaces `|b⟩` by `P|b⟩ / phase` and returns the phase.
    fn apply(&mut self, s: &PauliString) -> Complex64 {
        let mut turns = 0u8;
        for &(q, axis) in s.ops() {
            let b = self.bit(q);
            match axis {
                PauliAxis::X => self.flip(q),
                PauliAxis::Y => {
                    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                    turns += if b == 0 { 1 } else { 3 };
                    self.flip(q);
                }
                PauliAxis::Z => turns += 2 * b,
            }
        }
        match turns % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

/// Codeword basis states of every level tuple, in tuple-index order.
struct CodeBasis {
    states: Vec<BasisState>,
    lookup: HashMap<BasisState, usize>,
}

impl CodeBasis {
    fn new(op: &CompositeOperator, n_qubits: usize, guard: usize) -> Result<Self, OracleError> {
        let dims = op.dims();
        let n = check_guard(code_dimension(&dims), guard)?;
        let words: Vec<Vec<Vec<u8>>> = op
            .subsystems()
            .iter()
            .map(|s| {
                (0..s.dim())
                    .map(|k| s.encoding().codeword(k, s.dim()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let mut states = Vec::with_capacity(n);
        for index in 0..n {
            let mut state = BasisState::zeros(n_qubits);
            let levels = unravel(index, &dims);
            for (alpha, sub) in op.subsystems().iter().enumerate() {
                let word = &words[alpha][levels[alpha]];
                for (pos, &b) in word.iter().enumerate() {
                    if b == 1 {
                        state.set(sub.offset() + pos);
                    }
                }
            }
            states.push(state);
        }
        let lookup = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self { states, lookup })
    }
}

/// Level tuple of a tuple index (subsystem 0 fastest).
pub fn unravel(mut index: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&d| {
            let k = index % d;
            index /= d;
            k
        })
        .collect()
}

fn ravel(levels: &[usize], dims: &[usize]) -> usize {
    levels
        .iter()
        .zip(dims)
        .rev()
        .fold(0, |acc, (&k, &d)| acc * d + k)
}

type TermProducts = Vec<(Complex64, BTreeMap<usize, Matrix>)>;

fn term_products(op: &CompositeOperator) -> TermProducts {
    op.terms()
        .iter()
        .map(|t| (t.coeff, t.local_products()))
        .collect()
}

/// Column `col` of the composite's matrix, in tuple-index order.
fn composite_column(terms: &TermProducts, col: usize, dims: &[usize], out: &mut [Complex64]) {
    out.iter_mut().for_each(|z| *z = Complex64::default());
    let levels = unravel(col, dims);
    for (coeff, products) in terms {
        // partial row tuples with their amplitudes
        let mut rows: Vec<(Vec<usize>, Complex64)> = vec![(Vec::new(), *coeff)];
        for (idx, &c) in levels.iter().enumerate() {
            let mut next = Vec::new();
            match products.get(&idx) {
                None => {
                    for (mut r, a) in rows {
                        r.push(c);
                        next.push((r, a));
                    }
                }
                Some(m) => {
                    for (r, a) in &rows {
                        for k in 0..m.nrows() {
                            let v = m[(k, c)];
                            if v != Complex64::default() {
                                let mut r = r.clone();
                                r.push(k);
                                next.push((r, a * v));
                            }
                        }
                    }
                }
            }
            rows = next;
        }
        for (r, a) in rows {
            out[ravel(&r, dims)] += a;
        }
    }
}

/// Outcome of an oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub passed: bool,
    pub tol: f64,
    pub max_deviation: f64,
    /// `(row, column)` of the largest deviation: level tuples for subspace
    /// checks, single basis indices for full-space checks.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    pub expected: Complex64,
    pub found: Complex64,
    pub elements_checked: usize,
}

impl Verdict {
    fn new(tol: f64) -> Self {
        Self {
            passed: true,
            tol,
            max_deviation: 0.0,
            witness: None,
            expected: Complex64::default(),
            found: Complex64::default(),
            elements_checked: 0,
        }
    }

    fn observe(&mut self, row: Vec<usize>, col: Vec<usize>, expected: Complex64, found: Complex64) {
        let dev = (expected - found).norm();
        if self.witness.is_none() || dev > self.max_deviation {
            self.max_deviation = dev;
            self.witness = Some((row, col));
            self.expected = expected;
            self.found = found;
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.max_deviation <= self.tol;
        self
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", if self.passed { "PASS" } else { "FAIL" })?;
        writeln!(f, "elements checked: {}", self.elements_checked)?;
        writeln!(f, "max deviation: {:e} (tol {:e})", self.max_deviation, self.tol)?;
        if let Some((r, c)) = &self.witness {
            writeln!(
                f,
                "worst element: row {r:?}, col {c:?}: expected {}, found {}",
                crate::numfmt::format_complex(self.expected),
                crate::numfmt::format_complex(self.found)
            )?;
        }
        Ok(())
    }
}

impl CodeBasis {
    /// Column `col` of `p` restricted to codeword states.
    fn projected_column(&self, p: &PauliSum, col: usize, out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = Complex64::default());
        let mut state = self.states[col].clone();
        for (s, c) in p.iter() {
            state.0.copy_from_slice(&self.states[col].0);
            let phase = state.apply(s);
            if let Some(&row) = self.lookup.get(&state) {
                out[row] += c * phase;
            }
        }
    }
}

/// Matrix of `p` between codeword states: entry `(r, c)` is
/// `⟨codeword(r)| p |codeword(c)⟩` over level-tuple indices.
pub fn projected_matrix(op: &CompositeOperator, p: &PauliSum, guard: usize) -> Result<Matrix, OracleError> {
    let basis = CodeBasis::new(op, op.n_qubits().max(p.n_qubits()), guard)?;
    let n = basis.states.len();
    let mut m = Matrix::zeros(n, n);
    let mut column = vec![Complex64::default(); n];
    for col in 0..n {
        basis.projected_column(p, col, &mut column);
        for (row, z) in column.iter().enumerate() {
            m[(row, col)] = *z;
        }
    }
    Ok(m)
}

/// Compares `p` with `op` on every pair of codeword states.
pub fn verify_subspace(
    op: &CompositeOperator,
    p: &PauliSum,
    tol: f64,
    guard: usize,
) -> Result<Verdict, OracleError> {
    let basis = CodeBasis::new(op, op.n_qubits().max(p.n_qubits()), guard)?;
    let dims = op.dims();
    let n = basis.states.len();
    let mut verdict = Verdict::new(tol);
    let mut expected = vec![Complex64::default(); n];
    let mut found = vec![Complex64::default(); n];
    let terms = term_products(op);
    for col in 0..n {
        composite_column(&terms, col, &dims, &mut expected);
        basis.projected_column(p, col, &mut found);
        for (row, (&e, &f)) in expected.iter().zip(&found).enumerate() {
            if verdict.witness.is_none() || (e - f).norm() > verdict.max_deviation {
                verdict.observe(unravel(row, &dims), unravel(col, &dims), e, f);
            }
        }
    }
    verdict.elements_checked = n * n;
    Ok(verdict.finish())
}

/// Compares `dense(p)` with the composite padded onto the full qubit space
/// (zero on non-codeword states). Holds for compact codes with `d = 2^width`,
/// and for any builtin code compiled with full masks.
pub fn verify_full_space(
    op: &CompositeOperator,
    p: &PauliSum,
    tol: f64,
    guard: usize,
) -> Result<Verdict, OracleError> {
    let n_qubits = op.n_qubits().max(p.n_qubits());
    let dense = pauli_to_dense(p, n_qubits, guard)?;
    let basis = CodeBasis::new(op, n_qubits, guard)?;
    let composite = composite_to_dense(op, guard)?;
    let mut padded = Matrix::zeros(dense.dim(), dense.dim());
    for (i, si) in basis.states.iter().enumerate() {
        for (j, sj) in basis.states.iter().enumerate() {
            padded[(si.to_index(), sj.to_index())] = composite.matrix[(i, j)];
        }
    }
    let mut verdict = Verdict::new(tol);
    for col in 0..dense.dim() {
        for row in 0..dense.dim() {
            let (e, found) = (padded[(row, col)], dense.matrix[(row, col)]);
            if verdict.witness.is_none() || (e - found).norm() > verdict.max_deviation {
                verdict.observe(vec![row], vec![col], e, found);
            }
        }
    }
    verdict.elements_checked = dense.dim() * dense.dim();
    Ok(verdict.finish())
}

/// Eigenvalues (ascending) of the Hermitian part of a square matrix.
pub fn hermitian_eigenvalues(m: &Matrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Spectrum of `p` restricted to the code subspace.
pub fn projected_spectrum(op: &CompositeOperator, p: &PauliSum, guard: usize) -> Result<Vec<f64>, OracleError> {
    Ok(hermitian_eigenvalues(&projected_matrix(op, p, guard)?))
}

/// Independent compilation route for one subsystem: every Pauli string `P`
/// on the subsystem's qubits receives `Tr(P · pad(M)) / 2^width`, where
/// `pad(M)` places `M[r, c]` at `|codeword(r)⟩⟨codeword(c)|`. Agrees with
/// full-mask compilation for every code. Cost grows as `4^width`.
pub fn compile_by_trace(matrix: &Matrix, enc: &Encoding, offset: usize) -> Result<PauliSum, OracleError> {
    let d = matrix.nrows();
    let width = enc.qubit_count(d)?;
    if width > MAX_TRACE_WIDTH {
        return Err(OracleError::TooWide(width));
    }
    let states: Vec<BasisState> = (0..d)
        .map(|k| {
            let word = enc.codeword(k, d)?;
            let mut s = BasisState::zeros(width);
            for (q, &b) in word.iter().enumerate() {
                if b == 1 {
                    s.set(q);
                }
            }
            Ok(s)
        })
        .collect::<Result<_, EncodingError>>()?;
    let norm = 1.0 / (1u64 << width) as f64;
    let axes = [None, Some(PauliAxis::X), Some(PauliAxis::Y), Some(PauliAxis::Z)];
    let mut out = PauliSum::new();
    for code in 0..(1usize << (2 * width)) {
        let local = PauliString::from_ops(
            (0..width).filter_map(|q| axes[(code >> (2 * q)) & 3].map(|a| (q, a))),
        )
        .expect("distinct qubits");
        let mut coeff = Complex64::default();
        for r in 0..d {
            for c in 0..d {
                let m = matrix[(r, c)];
                if m == Complex64::default() {
                    continue;
                }
                // Tr(P |r⟩⟨c|) = ⟨c| P |r⟩
                let mut state = states[r].clone();
                let phase = state.apply(&local);
                if state == states[c] {
                    coeff += m * phase;
                }
            }
        }
        if coeff != Complex64::default() {
            let shifted =
                PauliString::from_ops(local.ops().iter().map(|&(q, a)| (q + offset, a)))
                    .expect("distinct qubits");
            out.add_term(shifted, coeff * norm);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::{compile_local, CompileOptions, MaskMode};
    use crate::encodings::LocalCode;
    use crate::localops::builtin;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_factor_dense_is_the_factor() {
        let mut op = CompositeOperator::new();
        op.append_subsystem(3, Encoding::gray()).unwrap();
        op.add_term(c(1.0, 0.0), [(0, "a")]).unwrap();
        let dense = composite_to_dense(&op, DEFAULT_GUARD).unwrap();
        assert_eq!(dense.matrix(), &builtin("a", 3).unwrap().matrix);
    }

    #[test]
    fn block_diagonal_from_first_subsystem() {
        let mut op = CompositeOperator::new();
        op.append_subsystem(2, Encoding::std_binary()).unwrap();
        op.append_subsystem(2, Encoding::std_binary()).unwrap();
        op.add_term(c(1.0, 0.0), [(1, "Sz")]).unwrap();
        let m = composite_to_dense(&op, DEFAULT_GUARD).unwrap().into_matrix();
        // subsystem 1 is the slow index: blocks of size 2 on the diagonal
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        assert_eq!(diag, vec![0.5, 0.5, -0.5, -0.5]);
        assert_eq!(m.iter().filter(|z| z.norm() > 0.0).count(), 4);
    }

    #[test]
    fn dense_of_lowering_expansion() {
        let p: PauliSum = [
            ("X0".parse().unwrap(), c(0.5, 0.0)),
            ("Y0".parse().unwrap(), c(0.0, 0.5)),
        ]
        .into_iter()
        .collect();
        let m = pauli_to_dense(&p, 1, DEFAULT_GUARD).unwrap().into_matrix();
        assert_eq!(m, builtin("k0b1", 2).unwrap().matrix);
        let zero = pauli_to_dense(&PauliSum::new(), 2, DEFAULT_GUARD).unwrap();
        assert!(zero.matrix().iter().all(|z| *z == Complex64::default()));
    }

    #[test]
    fn guard_is_enforced() {
        let mut op = CompositeOperator::new();
        for _ in 0..7 {
            op.append_subsystem(4, Encoding::std_binary()).unwrap();
        }
        assert_eq!(
            composite_to_dense(&op, DEFAULT_GUARD),
            Err(OracleError::GuardExceeded {
                required: 16384,
                guard: 4096
            })
        );
        assert!(matches!(
            pauli_to_dense(&PauliSum::new(), 13, DEFAULT_GUARD),
            Err(OracleError::GuardExceeded { .. })
        ));
    }

    #[test]
    fn corrupted_sum_is_caught() {
        let mut op = CompositeOperator::new();
        op.append_subsystem(3, Encoding::unary()).unwrap();
        op.append_subsystem(4, Encoding::gray()).unwrap();
        op.add_term(c(1.3, 0.0), [(0, "ad"), (1, "a")]).unwrap();
        op.add_term(c(0.7, 0.0), [(1, "n")]).unwrap();
        let p = op.to_pauli(CompileOptions::default()).unwrap();
        let good = verify_subspace(&op, &p, 1e-10, DEFAULT_GUARD).unwrap();
        assert!(good.passed, "{good}");
        let (first, coeff) = p.iter().next().map(|(s, c)| (s.clone(), *c)).unwrap();
        let mut bad = p.clone();
        bad.add_term(first, c(1e-3, 0.0));
        let verdict = verify_subspace(&op, &bad, 1e-10, DEFAULT_GUARD).unwrap();
        assert!(!verdict.passed);
        assert!((verdict.max_deviation - 1e-3).abs() < 1e-9);
        assert!(verdict.witness.is_some());
        assert!(coeff.norm() > 0.0);
    }

    #[test]
    fn full_space_for_power_of_two_binary() {
        let mut op = CompositeOperator::new();
        op.append_subsystem(4, Encoding::std_binary()).unwrap();
        op.append_subsystem(4, Encoding::std_binary()).unwrap();
        op.add_term(c(0.3, 0.1), [(0, "ad"), (1, "q2")]).unwrap();
        op.add_term(c(-1.0, 0.0), [(1, "k3b0")]).unwrap();
        let p = op.to_pauli(CompileOptions::default()).unwrap();
        let verdict = verify_full_space(&op, &p, 1e-12, DEFAULT_GUARD).unwrap();
        assert!(verdict.passed, "{verdict}");
    }

    #[test]
    fn reduced_unary_differs_off_subspace() {
        let mut op = CompositeOperator::new();
        op.append_subsystem(3, Encoding::unary()).unwrap();
        op.add_term(c(1.0, 0.0), [(0, "n")]).unwrap();
        let reduced = op.to_pauli(CompileOptions::default()).unwrap();
        let strict = op.to_pauli(CompileOptions::strict()).unwrap();
        assert!(!verify_full_space(&op, &reduced, 1e-12, DEFAULT_GUARD).unwrap().passed);
        assert!(verify_full_space(&op, &strict, 1e-12, DEFAULT_GUARD).unwrap().passed);
        assert!(verify_subspace(&op, &reduced, 1e-12, DEFAULT_GUARD).unwrap().passed);
    }

    #[test]
    fn trace_route_matches_full_mask_compilation() {
        let m = Matrix::from_fn(5, 5, |i, j| c((i * 5 + j) as f64 * 0.1 - 1.0, (i as f64) - (j as f64)));
        for enc in [
            Encoding::std_binary(),
            Encoding::gray(),
            Encoding::unary(),
            Encoding::block_unary(2, LocalCode::Gray).unwrap(),
        ] {
            let direct = compile_local(&m, &enc, 2, MaskMode::Full).unwrap();
            let traced = compile_by_trace(&m, &enc, 2).unwrap();
            assert!(direct.max_abs_diff(&traced) < 1e-12, "{enc}");
        }
    }

    #[test]
    fn unravel_is_subsystem_zero_fastest() {
        assert_eq!(unravel(5, &[2, 3]), vec![1, 2]);
        assert_eq!(ravel(&[1, 2], &[2, 3]), 5);
    }
}
