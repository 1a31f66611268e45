//! Integer-to-bit codes for d-level subsystems.
//!
//! Each code supplies three things: the codeword of every level, the
//! *bitmask subset* of positions on which an encoded matrix element
//! `|r⟩⟨c|` must act, and the number of qubits used. Outside the bitmask
//! the codewords of `r` and `c` agree, so the element can be compiled with
//! identity there and stays exact on the code subspace.
//!
//! Bit position 0 is the least significant bit of the compact codes. Within
//! a subsystem, positions map to qubits in ascending order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Bits of a codeword, indexed by position; each entry is 0 or 1.
pub type Codeword = Vec<u8>;

/// Default largest `d` exercised by the registration checker.
pub const DEFAULT_CHECK_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("subsystem dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("level {k} out of range for d = {d}")]
    LevelOutOfRange { k: usize, d: usize },
    #[error("block size must be at least 2, got {0}")]
    InvalidBlockSize(usize),
    #[error("unknown local code `{0}` (expected stdbinary or gray)")]
    UnknownLocalCode(String),
    #[error("unknown encoding `{0}`")]
    UnknownEncoding(String),
    #[error("malformed encoding spec `{spec}`: {reason}")]
    MalformedSpec { spec: String, reason: String },
    #[error("encoding `{0}` is already registered")]
    DuplicateName(String),
    #[error("codewords of levels {k1} and {k2} coincide for d = {d}")]
    NotInjective { d: usize, k1: usize, k2: usize },
    #[error("codeword of level {k} has length {found}, expected {expected} (d = {d})")]
    CodewordLength {
        d: usize,
        k: usize,
        expected: usize,
        found: usize,
    },
    #[error("codeword of level {k} contains a non-binary digit (d = {d})")]
    NonBinaryDigit { d: usize, k: usize },
    #[error("bitmask({r}, {c}) omits position {q} where the codewords differ (d = {d})")]
    BitmaskViolation { d: usize, r: usize, c: usize, q: usize },
    #[error("bitmask({r}, {c}) differs from bitmask({c}, {r}) (d = {d})")]
    BitmaskAsymmetric { d: usize, r: usize, c: usize },
    #[error("bitmask({r}, {c}) contains position {q} outside the codeword (d = {d})")]
    BitmaskOutOfRange { d: usize, r: usize, c: usize, q: usize },
}

fn check_dim(d: usize) -> Result<(), EncodingError> {
    if d < 2 {
        Err(EncodingError::InvalidDimension(d))
    } else {
        Ok(())
    }
}

fn check_level(k: usize, d: usize) -> Result<(), EncodingError> {
    check_dim(d)?;
    if k >= d {
        Err(EncodingError::LevelOutOfRange { k, d })
    } else {
        Ok(())
    }
}

/// `⌈log₂ d⌉` for `d ≥ 1`.
pub fn ceil_log2(d: usize) -> usize {
    if d <= 1 {
        0
    } else {
        (usize::BITS - (d - 1).leading_zeros()) as usize
    }
}

fn little_endian_bits(value: usize, width: usize) -> Codeword {
    (0..width).map(|i| ((value >> i) & 1) as u8).collect()
}

/// Little-endian binary digits of `k` over `⌈log₂ d⌉` positions.
pub fn std_binary(k: usize, d: usize) -> Result<Codeword, EncodingError> {
    check_level(k, d)?;
    Ok(little_endian_bits(k, ceil_log2(d)))
}

/// Reflected Gray code `k ⊕ (k ≫ 1)`, little-endian over `⌈log₂ d⌉` positions.
pub fn gray(k: usize, d: usize) -> Result<Codeword, EncodingError> {
    check_level(k, d)?;
    Ok(little_endian_bits(k ^ (k >> 1), ceil_log2(d)))
}

/// One-hot: `d` positions with a single 1 at position `k`.
pub fn unary(k: usize, d: usize) -> Result<Codeword, EncodingError> {
    check_level(k, d)?;
    let mut bits = vec![0; d];
    bits[k] = 1;
    Ok(bits)
}

/// Compact code used inside each block of a block-unary encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalCode {
    StdBinary,
    Gray,
}

impl LocalCode {
    pub fn name(self) -> &'static str {
        match self {
            LocalCode::StdBinary => "stdbinary",
            LocalCode::Gray => "gray",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, EncodingError> {
        match name {
            "stdbinary" => Ok(LocalCode::StdBinary),
            "gray" => Ok(LocalCode::Gray),
            other => Err(EncodingError::UnknownLocalCode(other.to_string())),
        }
    }

    fn codeword(self, k: usize, d: usize) -> Result<Codeword, EncodingError> {
        match self {
            LocalCode::StdBinary => std_binary(k, d),
            LocalCode::Gray => gray(k, d),
        }
    }
}

fn block_width(g: usize) -> usize {
    ceil_log2(g + 1)
}

/// Block unary with block size `g`: `⌈d/g⌉` blocks of `⌈log₂(g+1)⌉`
/// positions. Block `⌊k/g⌋` holds the local code of `(k mod g) + 1` over an
/// alphabet of `g + 1` symbols; every other block holds the local code of 0.
pub fn block_unary(
    k: usize,
    d: usize,
    g: usize,
    local: LocalCode,
) -> Result<Codeword, EncodingError> {
    check_level(k, d)?;
    if g < 2 {
        return Err(EncodingError::InvalidBlockSize(g));
    }
    let blocks = d.div_ceil(g);
    let inactive = local.codeword(0, g + 1)?;
    let active = local.codeword(k % g + 1, g + 1)?;
    let mut bits = Vec::with_capacity(blocks * block_width(g));
    for b in 0..blocks {
        bits.extend_from_slice(if b == k / g { &active } else { &inactive });
    }
    Ok(bits)
}

type CodewordFn = dyn Fn(usize, usize) -> Codeword + Send + Sync;
type BitmaskFn = dyn Fn(usize, usize, usize) -> Vec<usize> + Send + Sync;

struct CustomCode {
    codeword: Box<CodewordFn>,
    bitmask: Box<BitmaskFn>,
}

#[derive(Clone)]
enum Kind {
    Unary,
    StdBinary,
    Gray,
    BlockUnary { block: usize, local: LocalCode },
    Custom(Arc<CustomCode>),
}

/// Parameter value attached to an encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamValue {
    Int(i64),
    Str(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Str(v) => f.write_str(v),
        }
    }
}

/// A named integer-to-bit code, builtin or user-registered.
#[derive(Clone)]
pub struct Encoding {
    name: String,
    params: BTreeMap<String, ParamValue>,
    kind: Kind,
}

impl fmt::Debug for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Encoding({self})")
    }
}

impl PartialEq for Encoding {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.params == other.params
    }
}

/// The spec string: `unary`, `stdbinary`, `gray`,
/// `blockunary:g=<int>:local=<stdbinary|gray>`, or a registered name.
impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::BlockUnary { block, local } => {
                write!(f, "blockunary:g={block}:local={}", local.name())
            }
            _ => f.write_str(&self.name),
        }
    }
}

impl Encoding {
    pub fn unary() -> Self {
        Self::builtin("unary", Kind::Unary)
    }

    pub fn std_binary() -> Self {
        Self::builtin("stdbinary", Kind::StdBinary)
    }

    pub fn gray() -> Self {
        Self::builtin("gray", Kind::Gray)
    }

    pub fn block_unary(block: usize, local: LocalCode) -> Result<Self, EncodingError> {
        if block < 2 {
            return Err(EncodingError::InvalidBlockSize(block));
        }
        let mut enc = Self::builtin("blockunary", Kind::BlockUnary { block, local });
        enc.params
            .insert("g".into(), ParamValue::Int(block as i64));
        enc.params
            .insert("local".into(), ParamValue::Str(local.name().into()));
        Ok(enc)
    }

    fn builtin(name: &str, kind: Kind) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
            kind,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, ParamValue> {
        &self.params
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.kind, Kind::Custom(_))
    }

    pub fn is_unary(&self) -> bool {
        matches!(self.kind, Kind::Unary)
    }

    pub fn codeword(&self, k: usize, d: usize) -> Result<Codeword, EncodingError> {
        match &self.kind {
            Kind::Unary => unary(k, d),
            Kind::StdBinary => std_binary(k, d),
            Kind::Gray => gray(k, d),
            Kind::BlockUnary { block, local } => block_unary(k, d, *block, *local),
            Kind::Custom(code) => {
                check_level(k, d)?;
                Ok((code.codeword)(k, d))
            }
        }
    }

    pub fn qubit_count(&self, d: usize) -> Result<usize, EncodingError> {
        check_dim(d)?;
        Ok(match &self.kind {
            Kind::Unary => d,
            Kind::StdBinary | Kind::Gray => ceil_log2(d),
            Kind::BlockUnary { block, .. } => d.div_ceil(*block) * block_width(*block),
            Kind::Custom(code) => (code.codeword)(0, d).len(),
        })
    }

    /// Sorted positions on which `|r⟩⟨c|` acts non-trivially.
    pub fn bitmask(&self, r: usize, c: usize, d: usize) -> Result<Vec<usize>, EncodingError> {
        check_level(r, d)?;
        check_level(c, d)?;
        Ok(match &self.kind {
            Kind::Unary if r == c => vec![r],
            Kind::Unary => {
                let mut v = vec![r, c];
                v.sort_unstable();
                v
            }
            Kind::StdBinary | Kind::Gray => (0..ceil_log2(d)).collect(),
            Kind::BlockUnary { block, .. } => {
                let w = block_width(*block);
                let (br, bc) = (r / block, c / block);
                let mut blocks = vec![br.min(bc), br.max(bc)];
                blocks.dedup();
                blocks
                    .into_iter()
                    .flat_map(|b| b * w..(b + 1) * w)
                    .collect()
            }
            Kind::Custom(code) => {
                let mut v = (code.bitmask)(r, c, d);
                v.sort_unstable();
                v.dedup();
                v
            }
        })
    }

    /// Exhaustively checks injectivity, codeword length, and bitmask
    /// validity and symmetry for every `d` in `2..=max_d`. Returns the
    /// first violation found.
    pub fn check_invariants(&self, max_d: usize) -> Result<(), EncodingError> {
        for d in 2..=max_d {
            self.check_invariants_at(d)?;
        }
        Ok(())
    }

    fn check_invariants_at(&self, d: usize) -> Result<(), EncodingError> {
        let width = self.qubit_count(d)?;
        let words = (0..d)
            .map(|k| self.codeword(k, d))
            .collect::<Result<Vec<_>, _>>()?;
        for (k, w) in words.iter().enumerate() {
            if w.len() != width {
                return Err(EncodingError::CodewordLength {
                    d,
                    k,
                    expected: width,
                    found: w.len(),
                });
            }
            if w.iter().any(|&b| b > 1) {
                return Err(EncodingError::NonBinaryDigit { d, k });
            }
        }
        let mut seen: BTreeMap<&Codeword, usize> = BTreeMap::new();
        for (k, w) in words.iter().enumerate() {
            if let Some(&k1) = seen.get(w) {
                return Err(EncodingError::NotInjective { d, k1, k2: k });
            }
            seen.insert(w, k);
        }
        for r in 0..d {
            for c in 0..d {
                let mask = self.bitmask(r, c, d)?;
                if let Some(&q) = mask.iter().find(|&&q| q >= width) {
                    return Err(EncodingError::BitmaskOutOfRange { d, r, c, q });
                }
                if c < r && mask != self.bitmask(c, r, d)? {
                    return Err(EncodingError::BitmaskAsymmetric { d, r, c });
                }
                let mut in_mask = vec![false; width];
                for &q in &mask {
                    in_mask[q] = true;
                }
                if let Some(q) = (0..width).find(|&q| !in_mask[q] && words[r][q] != words[c][q]) {
                    return Err(EncodingError::BitmaskViolation { d, r, c, q });
                }
            }
        }
        Ok(())
    }
}

/// Resolves encoding spec strings; holds user-registered codes.
///
/// Registration happens during single-threaded setup; lookups through a
/// shared reference are safe afterwards.
pub struct EncodingRegistry {
    custom: BTreeMap<String, Encoding>,
    check_limit: usize,
}

impl Default for EncodingRegistry {
    fn default() -> Self {
        Self::new()
    }
}

const BUILTIN_NAMES: [&str; 4] = ["unary", "stdbinary", "gray", "blockunary"];

impl EncodingRegistry {
    pub fn new() -> Self {
        Self {
            custom: BTreeMap::new(),
            check_limit: DEFAULT_CHECK_LIMIT,
        }
    }

    /// Sets the largest `d` the registration checker exercises.
    pub fn with_check_limit(mut self, max_d: usize) -> Self {
        self.check_limit = max_d;
        self
    }

    /// Registers a user code. `codeword(k, d)` must return the bits of level
    /// `k`; `bitmask(r, c, d)` the positions an element `|r⟩⟨c|` acts on.
    /// The code is checked for every `d` up to the check limit and rejected
    /// with a witness if it violates an invariant.
    pub fn register<C, B>(
        &mut self,
        name: &str,
        params: BTreeMap<String, ParamValue>,
        codeword: C,
        bitmask: B,
    ) -> Result<(), EncodingError>
    where
        C: Fn(usize, usize) -> Codeword + Send + Sync + 'static,
        B: Fn(usize, usize, usize) -> Vec<usize> + Send + Sync + 'static,
    {
        if self.custom.contains_key(name) {
            return Err(EncodingError::DuplicateName(name.to_string()));
        }
        self.register_overwrite(name, params, codeword, bitmask)
    }

    /// Like [`EncodingRegistry::register`] but replaces an existing user code
    /// of the same name. Builtin names can never be replaced.
    pub fn register_overwrite<C, B>(
        &mut self,
        name: &str,
        params: BTreeMap<String, ParamValue>,
        codeword: C,
        bitmask: B,
    ) -> Result<(), EncodingError>
    where
        C: Fn(usize, usize) -> Codeword + Send + Sync + 'static,
        B: Fn(usize, usize, usize) -> Vec<usize> + Send + Sync + 'static,
    {
        if BUILTIN_NAMES.contains(&name) {
            return Err(EncodingError::DuplicateName(name.to_string()));
        }
        if name.is_empty() || name.contains([':', '=', ',']) || name.contains(char::is_whitespace) {
            return Err(EncodingError::MalformedSpec {
                spec: name.to_string(),
                reason: "names must be non-empty without `:`, `=`, `,` or whitespace".into(),
            });
        }
        let enc = Encoding {
            name: name.to_string(),
            params,
            kind: Kind::Custom(Arc::new(CustomCode {
                codeword: Box::new(codeword),
                bitmask: Box::new(bitmask),
            })),
        };
        enc.check_invariants(self.check_limit)?;
        self.custom.insert(name.to_string(), enc);
        Ok(())
    }

    /// Parses an encoding spec string.
    pub fn resolve(&self, spec: &str) -> Result<Encoding, EncodingError> {
        let spec = spec.trim();
        let malformed = |reason: &str| EncodingError::MalformedSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = spec.split(':');
        let name = parts.next().unwrap_or_default();
        let mut params = BTreeMap::new();
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| malformed("parameters must be `key=value`"))?;
            if params.insert(k.trim(), v.trim()).is_some() {
                return Err(malformed("repeated parameter"));
            }
        }
        match name {
            "unary" | "stdbinary" | "gray" if !params.is_empty() => {
                Err(malformed("this encoding takes no parameters"))
            }
            "unary" => Ok(Encoding::unary()),
            "stdbinary" => Ok(Encoding::std_binary()),
            "gray" => Ok(Encoding::gray()),
            "blockunary" => {
                let g = params
                    .remove("g")
                    .ok_or_else(|| malformed("block unary needs `g=<int>`"))?
                    .parse::<usize>()
                    .map_err(|_| malformed("`g` must be a non-negative integer"))?;
                let local = match params.remove("local") {
                    Some(l) => LocalCode::from_name(l)?,
                    None => LocalCode::StdBinary,
                };
                if let Some(k) = params.keys().next() {
                    return Err(malformed(&format!("unknown parameter `{k}`")));
                }
                Encoding::block_unary(g, local)
            }
            other => match self.custom.get(other) {
                Some(_) if !params.is_empty() => {
                    Err(malformed("registered encodings take no spec parameters"))
                }
                Some(enc) => Ok(enc.clone()),
                None => Err(EncodingError::UnknownEncoding(other.to_string())),
            },
        }
    }
}
