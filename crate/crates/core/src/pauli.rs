//! Sparse complex-weighted Pauli-string algebra.
//!
//! A [`PauliString`] stores only its non-identity factors, sorted by qubit
//! index. A [`PauliSum`] maps strings to complex coefficients and iterates in
//! canonical order: ascending weight, then lexicographic by `(qubit, axis)`
//! with `X < Y < Z`. The number of qubits is never stored; it is derived as
//! one more than the largest qubit index in use.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::numfmt;

/// Default magnitude below which compiled coefficients are dropped.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// A non-identity single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn letter(self) -> char {
        match self {
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'X' => Some(PauliAxis::X),
            'Y' => Some(PauliAxis::Y),
            'Z' => Some(PauliAxis::Z),
            _ => None,
        }
    }
}

/// A power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    fn quarter_turns(self) -> u8 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    fn from_quarter_turns(n: u8) -> Self {
        match n % 4 {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::One => Complex64::new(1.0, 0.0),
            Phase::I => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_quarter_turns(self.quarter_turns() + rhs.quarter_turns())
    }
}

/// Multiplies two single-qubit operators, `None` standing for the identity.
///
/// Returns the unique `(phase, axis)` with `a · b = phase · axis`.
pub fn mul_axes(a: Option<PauliAxis>, b: Option<PauliAxis>) -> (Phase, Option<PauliAxis>) {
    use PauliAxis::{X, Y, Z};
    match (a, b) {
        (None, b) => (Phase::One, b),
        (a, None) => (Phase::One, a),
        (Some(a), Some(b)) if a == b => (Phase::One, None),
        (Some(X), Some(Y)) => (Phase::I, Some(Z)),
        (Some(Y), Some(Z)) => (Phase::I, Some(X)),
        (Some(Z), Some(X)) => (Phase::I, Some(Y)),
        (Some(Y), Some(X)) => (Phase::MinusI, Some(Z)),
        (Some(Z), Some(Y)) => (Phase::MinusI, Some(X)),
        (Some(X), Some(Z)) => (Phase::MinusI, Some(Y)),
        _ => unreachable!("equal axes handled above"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("qubit {0} appears more than once in a Pauli string")]
    DuplicateQubit(usize),
    #[error("invalid Pauli factor `{0}`")]
    InvalidFactor(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A tensor product of single-qubit Paulis; absent qubits carry the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<(usize, PauliAxis)>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: usize, axis: PauliAxis) -> Self {
        Self {
            ops: vec![(qubit, axis)],
        }
    }

    /// Builds a string from `(qubit, axis)` pairs in any order.
    pub fn from_ops<I>(ops: I) -> Result<Self, PauliError>
    where
        I: IntoIterator<Item = (usize, PauliAxis)>,
    {
        let mut ops: Vec<_> = ops.into_iter().collect();
        ops.sort_unstable_by_key(|&(q, _)| q);
        if let Some(w) = ops.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(PauliError::DuplicateQubit(w[0].0));
        }
        Ok(Self { ops })
    }

    /// Factors must already be sorted by strictly increasing qubit.
    pub(crate) fn from_sorted_unchecked(ops: Vec<(usize, PauliAxis)>) -> Self {
        debug_assert!(ops.windows(2).all(|w| w[0].0 < w[1].0));
        Self { ops }
    }

    pub fn ops(&self) -> &[(usize, PauliAxis)] {
        &self.ops
    }

    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn get(&self, qubit: usize) -> Option<PauliAxis> {
        self.ops
            .binary_search_by_key(&qubit, |&(q, _)| q)
            .ok()
            .map(|i| self.ops[i].1)
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.ops.last().map(|&(q, _)| q)
    }

    /// Only `X`, `Y` and `Z` factors are present here, so "diagonal" means
    /// every factor is `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.ops.iter().all(|&(_, a)| a == PauliAxis::Z)
    }

    /// Product `self · other` as `(phase, string)`.
    pub fn mul(&self, other: &PauliString) -> (Phase, PauliString) {
        let mut phase = Phase::One;
        let mut out = Vec::with_capacity(self.ops.len() + other.ops.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ops.len() && j < other.ops.len() {
            let (qa, aa) = self.ops[i];
            let (qb, ab) = other.ops[j];
            match qa.cmp(&qb) {
                Ordering::Less => {
                    out.push((qa, aa));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((qb, ab));
                    j += 1;
                }
                Ordering::Equal => {
                    let (p, axis) = mul_axes(Some(aa), Some(ab));
                    phase = phase * p;
                    if let Some(axis) = axis {
                        out.push((qa, axis));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.ops[i..]);
        out.extend_from_slice(&other.ops[j..]);
        (phase, PauliString { ops: out })
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.ops.cmp(&other.ops))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Space-separated factors, e.g. `X0 Y3`; the identity renders as an empty string.
impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (q, a)) in self.ops.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", a.letter(), q)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ops = s
            .split_whitespace()
            .map(|tok| {
                let mut chars = tok.chars();
                let axis = chars
                    .next()
                    .and_then(PauliAxis::from_letter)
                    .ok_or_else(|| PauliError::InvalidFactor(tok.to_string()))?;
                let qubit = chars
                    .as_str()
                    .parse::<usize>()
                    .map_err(|_| PauliError::InvalidFactor(tok.to_string()))?;
                Ok((qubit, axis))
            })
            .collect::<Result<Vec<_>, _>>()?;
        PauliString::from_ops(ops)
    }
}

/// A complex-weighted sum of Pauli strings, kept in canonical order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PauliSum {
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(coeff: Complex64) -> Self {
        Self::from_term(PauliString::identity(), coeff)
    }

    pub fn from_term(string: PauliString, coeff: Complex64) -> Self {
        let mut sum = Self::new();
        sum.add_term(string, coeff);
        sum
    }

    /// Adds `coeff · string` in place, merging with an existing entry.
    /// Does not prune; call [`PauliSum::simplify`] afterwards if needed.
    pub fn add_term(&mut self, string: PauliString, coeff: Complex64) {
        *self.terms.entry(string).or_default() += coeff;
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, string: &PauliString) -> Complex64 {
        self.terms.get(string).copied().unwrap_or_default()
    }

    /// One more than the largest qubit index used; zero for an empty or
    /// identity-only sum.
    pub fn n_qubits(&self) -> usize {
        self.terms
            .keys()
            .filter_map(PauliString::max_qubit)
            .max()
            .map_or(0, |q| q + 1)
    }

    pub fn max_weight(&self) -> usize {
        self.terms.keys().map(PauliString::weight).max().unwrap_or(0)
    }

    /// Drops every term with `|coeff| <= tol`. Magnitude is tested as a
    /// whole; real and imaginary parts are never truncated separately.
    pub fn simplify(mut self, tol: f64) -> Self {
        self.prune(tol);
        self
    }

    pub(crate) fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
        self.simplify(0.0)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c.conj())).collect(),
        }
    }

    /// A Pauli sum is Hermitian exactly when every coefficient is real.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Distributive product; phases are accumulated per qubit and exact zeros removed.
    pub fn mul_sum(&self, other: &PauliSum) -> PauliSum {
        let mut acc: HashMap<PauliString, Complex64> =
            HashMap::with_capacity(self.len() * other.len());
        for (s, a) in &self.terms {
            for (t, b) in &other.terms {
                let (phase, st) = s.mul(t);
                *acc.entry(st).or_default() += a * b * phase.to_complex();
            }
        }
        PauliSum {
            terms: acc.into_iter().collect(),
        }
        .simplify(0.0)
    }

    /// Coefficient-wise merge; like strings are combined and exact zeros removed.
    pub fn add_sum(&self, other: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        out.extend_from(other);
        out.simplify(0.0)
    }

    pub(crate) fn extend_from(&mut self, other: &PauliSum) {
        for (s, c) in &other.terms {
            self.add_term(s.clone(), *c);
        }
    }

    /// Largest coefficient deviation over the union of both supports.
    pub fn max_abs_diff(&self, other: &PauliSum) -> f64 {
        let a = self.terms.iter().map(|(s, c)| (c - other.coeff(s)).norm());
        let b = other
            .terms
            .iter()
            .filter(|(s, _)| !self.terms.contains_key(*s))
            .map(|(_, c)| c.norm());
        a.chain(b).fold(0.0, f64::max)
    }

    /// One term per line: `(<re>±<im>j) [A<q> ...]`, canonical order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, c) in &self.terms {
            out.push_str(&numfmt::format_complex(*c));
            out.push_str(" [");
            out.push_str(&s.to_string());
            out.push_str("]\n");
        }
        out
    }

    /// Parses the line format written by [`PauliSum::to_text`]. Blank lines
    /// are skipped; repeated strings are merged.
    pub fn from_text(text: &str) -> Result<Self, PauliError> {
        let mut sum = PauliSum::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| PauliError::Parse {
                line: n + 1,
                message,
            };
            let open = line
                .find('[')
                .ok_or_else(|| err("missing `[`".to_string()))?;
            if !line.ends_with(']') {
                return Err(err("missing closing `]`".to_string()));
            }
            let coeff = numfmt::parse_complex(line[..open].trim())
                .ok_or_else(|| err(format!("bad coefficient `{}`", line[..open].trim())))?;
            let string: PauliString = line[open + 1..line.len() - 1]
                .parse()
                .map_err(|e: PauliError| err(e.to_string()))?;
            sum.add_term(string, coeff);
        }
        Ok(sum)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromIterator<(PauliString, Complex64)> for PauliSum {
    fn from_iter<I: IntoIterator<Item = (PauliString, Complex64)>>(iter: I) -> Self {
        let mut sum = PauliSum::new();
        for (s, c) in iter {
            sum.add_term(s, c);
        }
        sum
    }
}

impl Add for &PauliSum {
    type Output = PauliSum;

    fn add(self, rhs: &PauliSum) -> PauliSum {
        self.add_sum(rhs)
    }
}

impl Add for PauliSum {
    type Output = PauliSum;

    fn add(mut self, rhs: PauliSum) -> PauliSum {
        self.extend_from(&rhs);
        self.simplify(0.0)
    }
}

impl Sub for &PauliSum {
    type Output = PauliSum;

    fn sub(self, rhs: &PauliSum) -> PauliSum {
        self.add_sum(&-rhs)
    }
}

impl Neg for &PauliSum {
    type Output = PauliSum;

    fn neg(self) -> PauliSum {
        self.clone().scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;

    fn mul(self, rhs: &PauliSum) -> PauliSum {
        self.mul_sum(rhs)
    }
}

impl Mul for PauliSum {
    type Output = PauliSum;

    fn mul(self, rhs: PauliSum) -> PauliSum {
        self.mul_sum(&rhs)
    }
}

impl Mul<Complex64> for PauliSum {
    type Output = PauliSum;

    fn mul(self, rhs: Complex64) -> PauliSum {
        self.scale(rhs)
    }
}
