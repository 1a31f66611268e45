//! Problem files and compiled-output documents.
//!
//! A problem file is JSON:
//!
//! ```json
//! {
//!   "subsystems": [{"id": "A", "d": 4, "enc": "unary"},
//!                  {"id": "B", "d": 4, "enc": "gray"}],
//!   "terms": [{"coeff": "-t", "ops": [["ad", "A"], ["a", "B"]]},
//!             {"coeff": [0.5, 0.0], "ops": []}],
//!   "symbols": {"t": [1.0, 0.0]},
//!   "custom_ops": {"W": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}
//! }
//! ```
//!
//! Exactly one of `terms` or `expression` (a `++` grammar string) is given.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composite::{CompositeError, CompositeOperator};
use crate::encodings::{Encoding, EncodingError, EncodingRegistry};
use crate::localops::{LocalOpError, UserOps};
use crate::pauli::{PauliError, PauliString, PauliSum};
use crate::symbolic::{parse_coefficient, SubsystemSpec, SymbolicError, SymbolicOperator, TermKey};

/// Failures while reading or lowering a problem file, split by whether the
/// input is malformed or well-formed but meaningless.
#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{0}")]
    Syntax(String),
    #[error("{0}")]
    Semantic(String),
}

impl From<SymbolicError> for ProblemError {
    fn from(e: SymbolicError) -> Self {
        match e {
            SymbolicError::Syntax { .. } => Self::Syntax(e.to_string()),
            _ => Self::Semantic(e.to_string()),
        }
    }
}

impl From<EncodingError> for ProblemError {
    fn from(e: EncodingError) -> Self {
        Self::Semantic(e.to_string())
    }
}

impl From<LocalOpError> for ProblemError {
    fn from(e: LocalOpError) -> Self {
        Self::Semantic(e.to_string())
    }
}

impl From<CompositeError> for ProblemError {
    fn from(e: CompositeError) -> Self {
        Self::Semantic(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemEntry {
    pub id: String,
    pub d: usize,
    pub enc: String,
}

/// A term coefficient: a number, an `[re, im]` pair, or a coefficient
/// expression such as `"-0.5*U"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Pair([f64; 2]),
    Real(f64),
    Expr(String),
}

impl Coeff {
    pub fn real(x: f64) -> Self {
        Coeff::Pair([x, 0.0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub coeff: Coeff,
    /// `[opname, label]` pairs in multiplication order.
    pub ops: Vec<[String; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub subsystems: Vec<SubsystemEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermEntry>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub symbols: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub custom_ops: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

fn pair(z: [f64; 2]) -> Complex64 {
    Complex64::new(z[0], z[1])
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let file: Self = serde_json::from_str(text).map_err(|e| ProblemError::Syntax(format!("problem file: {e}")))?;
        match (&file.expression, &file.terms) {
            (Some(_), Some(_)) => Err(ProblemError::Syntax(
                "problem file: give either `expression` or `terms`, not both".into(),
            )),
            (None, None) => Err(ProblemError::Syntax(
                "problem file: missing `expression` or `terms`".into(),
            )),
            _ => Ok(file),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("problem files serialize");
        text.push('\n');
        text
    }

    /// The operator with symbols still unbound.
    pub fn symbolic(&self) -> Result<SymbolicOperator, ProblemError> {
        if let Some(expr) = &self.expression {
            return Ok(SymbolicOperator::parse(expr)?);
        }
        let mut op = SymbolicOperator::zero();
        for (i, term) in self.terms.iter().flatten().enumerate() {
            let coeff = match &term.coeff {
                Coeff::Pair(z) => crate::symbolic::SymbolicScalar::constant(pair(*z)),
                Coeff::Real(x) => crate::symbolic::SymbolicScalar::constant(Complex64::new(*x, 0.0)),
                Coeff::Expr(s) => parse_coefficient(s)
                    .map_err(|e| ProblemError::Syntax(format!("term {i}: {e}")))?,
            };
            let key = TermKey::from_ops(term.ops.iter().map(|[op, label]| (op.as_str(), label.as_str())));
            op.add_term(key, coeff);
        }
        Ok(op)
    }

    pub fn bindings(&self) -> HashMap<String, Complex64> {
        self.symbols.iter().map(|(k, v)| (k.clone(), pair(*v))).collect()
    }

    pub fn user_ops(&self) -> Result<UserOps, ProblemError> {
        let mut ops = UserOps::new();
        for (name, rows) in &self.custom_ops {
            let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().copied().map(pair).collect()).collect();
            ops.register_rows(name, &rows)?;
        }
        Ok(ops)
    }

    /// Resolves every subsystem's encoding, replacing those named in
    /// `overrides` (label to encoding).
    pub fn layout(
        &self,
        registry: &EncodingRegistry,
        overrides: &BTreeMap<String, Encoding>,
    ) -> Result<Vec<SubsystemSpec>, ProblemError> {
        for label in overrides.keys() {
            if !self.subsystems.iter().any(|s| &s.id == label) {
                return Err(ProblemError::Semantic(format!("encoding override for undeclared label `{label}`")));
            }
        }
        self.subsystems
            .iter()
            .map(|s| {
                let enc = match overrides.get(&s.id) {
                    Some(e) => e.clone(),
                    None => registry.resolve(&s.enc)?,
                };
                Ok(SubsystemSpec::new(&s.id, s.d, enc))
            })
            .collect()
    }

    /// Binds symbols and builds the composite operator.
    pub fn lower(
        &self,
        registry: &EncodingRegistry,
        overrides: &BTreeMap<String, Encoding>,
    ) -> Result<CompositeOperator, ProblemError> {
        let layout = self.layout(registry, overrides)?;
        let user_ops = self.user_ops()?;
        let op = self.symbolic()?.scalar_subs(&self.bindings());
        Ok(op.lower(&layout, &user_ops)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputTerm {
    pub coeff: [f64; 2],
    /// Space-separated factors such as `"X0 Y3"`; empty for the identity.
    pub paulis: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSubsystem {
    pub id: String,
    pub d: usize,
    pub enc: String,
    pub qubits: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputMetadata {
    /// Per subsystem: label, dimension, encoding, and the half-open qubit range.
    pub encodings: Vec<OutputSubsystem>,
    pub tool_version: String,
}

/// The structured compile output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredOutput {
    pub n_qubits: usize,
    pub terms: Vec<OutputTerm>,
    pub metadata: OutputMetadata,
}

impl StructuredOutput {
    pub fn new(sum: &PauliSum, op: &CompositeOperator, labels: &[String]) -> Self {
        let encodings = op
            .subsystems()
            .iter()
            .zip(labels)
            .map(|(s, id)| OutputSubsystem {
                id: id.clone(),
                d: s.dim(),
                enc: s.encoding().to_string(),
                qubits: [s.qubits().start, s.qubits().end],
            })
            .collect();
        Self {
            n_qubits: op.n_qubits(),
            terms: sum
                .iter()
                .map(|(s, c)| OutputTerm {
                    coeff: [c.re, c.im],
                    paulis: s.to_string(),
                })
                .collect(),
            metadata: OutputMetadata {
                encodings,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("output serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, PauliError> {
        serde_json::from_str(text).map_err(|e| PauliError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn pauli_sum(&self) -> Result<PauliSum, PauliError> {
        let mut sum = PauliSum::new();
        for t in &self.terms {
            sum.add_term(t.paulis.parse::<PauliString>()?, pair(t.coeff));
        }
        Ok(sum.simplify(0.0))
    }
}

/// Reads a compiled sum in either output format.
pub fn read_pauli_output(text: &str) -> Result<PauliSum, PauliError> {
    if text.trim_start().starts_with('{') {
        StructuredOutput::from_json(text)?.pauli_sum()
    } else {
        PauliSum::from_text(text)
    }
}
