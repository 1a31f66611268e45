//! Symbolic operators: polynomial coefficients, string labels, and the
//! `++` expression grammar.
//!
//! ```text
//! expr    := term ("++" term)*
//! term    := coeff "[" optoken* "]"
//! coeff   := ["-"] factor ("*" factor)*
//! factor  := number | symbol
//! optoken := opname "_" label
//! ```
//!
//! Numbers are decimals with an optional exponent; a trailing `j` makes them
//! imaginary (`2.5j`). Symbols are identifiers. An operator token is split
//! at its first underscore, so `n__b0` is operator `n` on label `_b0`.
//!
//! Factors on different labels commute and are stored per label; factors on
//! the same label keep their multiplication order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::composite::{CompositeError, CompositeOperator};
use crate::encodings::Encoding;
use crate::localops::UserOps;
use crate::numfmt::format_f64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unbound symbol(s): {}", .0.join(", "))]
    UnboundSymbols(Vec<String>),
    #[error("label `{0}` is not in the subsystem layout")]
    UnknownLabel(String),
    #[error("label `{0}` appears twice in the subsystem layout")]
    DuplicateLabel(String),
    #[error(transparent)]
    Composite(#[from] CompositeError),
}

/// Sorted `(symbol, exponent)` pairs; empty for the constant monomial.
pub type Monomial = Vec<(String, u32)>;

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut merged: BTreeMap<String, u32> = a.iter().cloned().collect();
    for (s, e) in b {
        *merged.entry(s.clone()).or_default() += e;
    }
    merged.into_iter().collect()
}

/// A polynomial in commuting symbols with complex coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolicScalar {
    terms: BTreeMap<Monomial, Complex64>,
}

impl SymbolicScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_monomial(Vec::new(), c)
    }

    pub fn symbol(name: &str) -> Self {
        Self::from_monomial(vec![(name.to_string(), 1)], Complex64::new(1.0, 0.0))
    }

    fn from_monomial(m: Monomial, c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if c != Complex64::default() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    /// The value if no symbols remain.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.terms.len() {
            0 => Some(Complex64::default()),
            1 => self.terms.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.iter().map(|(s, _)| s.clone()))
            .collect()
    }

    fn accumulate(&mut self, m: Monomial, c: Complex64) {
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == Complex64::default() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                if c != Complex64::default() {
                    e.insert(c);
                }
            }
        }
    }

    /// Replaces bound symbols by their values; others are left in place.
    pub fn subs(&self, bindings: &HashMap<String, Complex64>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut value = *c;
            let mut rest = Vec::new();
            for (s, e) in m {
                match bindings.get(s) {
                    Some(v) => value *= v.powu(*e),
                    None => rest.push((s.clone(), *e)),
                }
            }
            out.accumulate(rest, value);
        }
        out
    }
}

impl Add for &SymbolicScalar {
    type Output = SymbolicScalar;

    fn add(self, rhs: &SymbolicScalar) -> SymbolicScalar {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.accumulate(m.clone(), *c);
        }
        out
    }
}

impl Neg for &SymbolicScalar {
    type Output = SymbolicScalar;

    fn neg(self) -> SymbolicScalar {
        SymbolicScalar {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub for &SymbolicScalar {
    type Output = SymbolicScalar;

    fn sub(self, rhs: &SymbolicScalar) -> SymbolicScalar {
        self + &-rhs
    }
}

impl Mul for &SymbolicScalar {
    type Output = SymbolicScalar;

    fn mul(self, rhs: &SymbolicScalar) -> SymbolicScalar {
        let mut out = SymbolicScalar::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.accumulate(mul_monomials(ma, mb), ca * cb);
            }
        }
        out
    }
}

/// The operator part of a term: per label, the operator names in
/// multiplication order. Empty for the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    factors: BTreeMap<String, Vec<String>>,
}

impl TermKey {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a key from `(opname, label)` pairs in multiplication order.
    pub fn from_ops<'a, I>(ops: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut key = Self::default();
        for (op, label) in ops {
            key.factors
                .entry(label.to_string())
                .or_default()
                .push(op.to_string());
        }
        key
    }

    pub fn factors(&self) -> &BTreeMap<String, Vec<String>> {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    fn then(&self, rhs: &TermKey) -> TermKey {
        let mut out = self.clone();
        for (label, ops) in &rhs.factors {
            out.factors
                .entry(label.clone())
                .or_default()
                .extend(ops.iter().cloned());
        }
        out
    }
}

impl fmt::Display for TermKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        let mut first = true;
        for (label, ops) in &self.factors {
            for op in ops {
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                write!(f, "{op}_{label}")?;
            }
        }
        f.write_str("]")
    }
}

/// One subsystem of a lowering layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemSpec {
    pub label: String,
    pub dim: usize,
    pub encoding: Encoding,
}

impl SubsystemSpec {
    pub fn new(label: &str, dim: usize, encoding: Encoding) -> Self {
        Self {
            label: label.to_string(),
            dim,
            encoding,
        }
    }
}

/// A sum of symbolic coefficients times operator products, with no
/// duplicate operator keys and no zero coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolicOperator {
    terms: BTreeMap<TermKey, SymbolicScalar>,
}

impl SymbolicOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The single identity term with coefficient 1.
    pub fn identity() -> Self {
        Self::from_term(SymbolicScalar::constant(Complex64::new(1.0, 0.0)), TermKey::identity())
    }

    pub fn from_term(coeff: SymbolicScalar, key: TermKey) -> Self {
        let mut out = Self::zero();
        out.add_term(key, coeff);
        out
    }

    pub fn parse(text: &str) -> Result<Self, SymbolicError> {
        Parser::new(text).expr()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TermKey, &SymbolicScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &TermKey) -> SymbolicScalar {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, key: TermKey, coeff: SymbolicScalar) {
        let merged = match self.terms.remove(&key) {
            Some(existing) => &existing + &coeff,
            None => coeff,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        self.terms.values().flat_map(SymbolicScalar::free_symbols).collect()
    }

    /// Labels used by any term.
    pub fn labels(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|k| k.factors.keys().cloned())
            .collect()
    }

    /// Substitutes numeric values for symbols. Partial bindings are allowed.
    pub fn scalar_subs(&self, bindings: &HashMap<String, Complex64>) -> Self {
        let mut out = Self::zero();
        for (key, coeff) in &self.terms {
            out.add_term(key.clone(), coeff.subs(bindings));
        }
        out
    }

    /// Builds a composite operator with one subsystem per layout entry, in
    /// layout order. Labels in the layout but unused still occupy qubits.
    /// Operator names resolve against `user_ops` first, then the builtins.
    pub fn lower(
        &self,
        layout: &[SubsystemSpec],
        user_ops: &UserOps,
    ) -> Result<CompositeOperator, SymbolicError> {
        let free = self.free_symbols();
        if !free.is_empty() {
            return Err(SymbolicError::UnboundSymbols(free.into_iter().collect()));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut op = CompositeOperator::with_user_ops(user_ops.clone());
        for spec in layout {
            if index.contains_key(spec.label.as_str()) {
                return Err(SymbolicError::DuplicateLabel(spec.label.clone()));
            }
            let i = op.append_subsystem(spec.dim, spec.encoding.clone())?;
            index.insert(&spec.label, i);
        }
        for (key, coeff) in &self.terms {
            let value = coeff.as_constant().expect("no free symbols");
            let mut factors = Vec::new();
            for (label, names) in &key.factors {
                let &i = index
                    .get(label.as_str())
                    .ok_or_else(|| SymbolicError::UnknownLabel(label.clone()))?;
                factors.extend(names.iter().map(|n| (i, n.as_str())));
            }
            op.add_term(value, factors)?;
        }
        Ok(op)
    }
}

impl Add for &SymbolicOperator {
    type Output = SymbolicOperator;

    fn add(self, rhs: &SymbolicOperator) -> SymbolicOperator {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl Neg for &SymbolicOperator {
    type Output = SymbolicOperator;

    fn neg(self) -> SymbolicOperator {
        SymbolicOperator {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
}

impl Sub for &SymbolicOperator {
    type Output = SymbolicOperator;

    fn sub(self, rhs: &SymbolicOperator) -> SymbolicOperator {
        self + &-rhs
    }
}

impl Mul for &SymbolicOperator {
    type Output = SymbolicOperator;

    /// Distributes over terms; on a shared label the left operand's
    /// operators come first.
    fn mul(self, rhs: &SymbolicOperator) -> SymbolicOperator {
        let mut out = SymbolicOperator::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.add_term(ka.then(kb), ca * cb);
            }
        }
        out
    }
}

impl FromStr for SymbolicOperator {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Parses a lone coefficient such as `-0.5*U` or `2.5j`.
pub fn parse_coefficient(text: &str) -> Result<SymbolicScalar, SymbolicError> {
    let mut parser = Parser::new(text);
    parser.skip_ws();
    if parser.peek().is_none() {
        return parser.error("empty coefficient");
    }
    let value = parser.coeff()?;
    parser.skip_ws();
    if let Some(c) = parser.peek() {
        return parser.error(format!("unexpected `{c}` after coefficient"));
    }
    Ok(value)
}

fn coefficient_text(value: f64, imaginary: bool, monomial: &Monomial) -> String {
    let mut out = String::new();
    if value.is_sign_negative() {
        out.push('-');
    }
    let magnitude = value.abs();
    let mut parts: Vec<String> = Vec::new();
    if magnitude != 1.0 || imaginary || monomial.is_empty() {
        let mut n = format_f64(magnitude);
        if imaginary {
            n.push('j');
        }
        parts.push(n);
    }
    for (s, e) in monomial {
        for _ in 0..*e {
            parts.push(s.clone());
        }
    }
    out.push_str(&parts.join("*"));
    out
}

/// Grammar text that parses back to an equal operator. A complex or
/// multi-monomial coefficient is split across several terms with the same
/// operator part; the empty operator prints as `0 []`.
impl fmt::Display for SymbolicOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pieces = Vec::new();
        for (key, coeff) in &self.terms {
            for (m, c) in coeff.monomials() {
                if c.re != 0.0 {
                    pieces.push(format!("{} {key}", coefficient_text(c.re, false, m)));
                }
                if c.im != 0.0 {
                    pieces.push(format!("{} {key}", coefficient_text(c.im, true, m)));
                }
            }
        }
        if pieces.is_empty() {
            return f.write_str("0 []");
        }
        f.write_str(&pieces.join(" ++ "))
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, SymbolicError> {
        Err(SymbolicError::Syntax {
            position: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<SymbolicOperator, SymbolicError> {
        let mut out = SymbolicOperator::zero();
        loop {
            let (coeff, key) = self.term()?;
            out.add_term(key, coeff);
            self.skip_ws();
            if self.peek().is_none() {
                return Ok(out);
            }
            if !self.eat("++") {
                return self.error("expected `++` between terms");
            }
        }
    }

    fn term(&mut self) -> Result<(SymbolicScalar, TermKey), SymbolicError> {
        self.skip_ws();
        match self.peek() {
            None => return self.error("empty term"),
            Some('[') => return self.error("empty coefficient"),
            _ => {}
        }
        let coeff = self.coeff()?;
        if !self.eat("[") {
            return self.error("expected `[`");
        }
        let mut key = TermKey::identity();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return self.error("unclosed `[`"),
                Some(']') => {
                    self.pos += 1;
                    return Ok((coeff, key));
                }
                Some(_) => {
                    let (op, label) = self.op_token()?;
                    key.factors.entry(label).or_default().push(op);
                }
            }
        }
    }

    fn op_token(&mut self) -> Result<(String, String), SymbolicError> {
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| c.is_whitespace() || c == ']' || c == '[')
            .unwrap_or(self.rest().len());
        let token = &self.text[start..start + len];
        let Some((op, label)) = token.split_once('_') else {
            return self.error(format!("operator token `{token}` needs `<op>_<label>`"));
        };
        if op.is_empty() || !op.chars().all(|c| c.is_ascii_alphanumeric()) {
            return self.error(format!("invalid operator name in `{token}`"));
        }
        if label.is_empty() {
            return self.error(format!("missing label in `{token}`"));
        }
        self.pos += len;
        Ok((op.to_string(), label.to_string()))
    }

    fn coeff(&mut self) -> Result<SymbolicScalar, SymbolicError> {
        let negative = self.eat("-");
        let mut value = self.factor()?;
        while self.eat("*") {
            value = &value * &self.factor()?;
        }
        Ok(if negative { -&value } else { value })
    }

    fn factor(&mut self) -> Result<SymbolicScalar, SymbolicError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let len = self
                    .rest()
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(self.rest().len());
                let name = &self.rest()[..len];
                self.pos += len;
                Ok(SymbolicScalar::symbol(name))
            }
            Some(c) => self.error(format!("unexpected `{c}` in coefficient")),
            None => self.error("expected a number or symbol"),
        }
    }

    fn number(&mut self) -> Result<SymbolicScalar, SymbolicError> {
        let bytes = self.rest().as_bytes();
        let mut i = 0;
        let digits = |i: &mut usize| {
            let start = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - start
        };
        let mut count = digits(&mut i);
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            count += digits(&mut i);
        }
        if count == 0 {
            return self.error("malformed number");
        }
        if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
            let mut k = i + 1;
            if k < bytes.len() && matches!(bytes[k], b'+' | b'-') {
                k += 1;
            }
            if digits(&mut k) > 0 {
                i = k;
            } else {
                return self.error("malformed exponent");
            }
        }
        let value: f64 = self.rest()[..i].parse().or_else(|_| self.error("malformed number"))?;
        let imaginary = i < bytes.len() && bytes[i] == b'j';
        if imaginary {
            i += 1;
        }
        if i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
            self.pos += i;
            return self.error("a number must be separated from a symbol by `*`");
        }
        self.pos += i;
        Ok(SymbolicScalar::constant(if imaginary {
            Complex64::new(0.0, value)
        } else {
            Complex64::new(value, 0.0)
        }))
    }
}
