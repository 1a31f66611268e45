//! Problem-file generators for standard model families.
//!
//! | model | subsystems | operator |
//! |---|---|---|
//! | Bose-Hubbard | one per site, `d` levels | `-t Σ (ad_i a_j + ad_j a_i) + (U/2) Σ (n_i n_i - n_i) - mu Σ n_i` |
//! | spin chain | one per site, `d = 2s+1` | `J Σ (Sx_i Sx_j + Sy_i Sy_j + Sz_i Sz_j) + h Σ Sz_i` |
//! | vibrational | one per mode | `Σ (ω_i/2)(q2_i + p2_i) + Σ k_ijk q_i q_j q_k` |
//! | tensor train | one per factor | `Σ_terms Π_s R_ts`, random complex `R_ts` |
//! | graph coloring | one per vertex, `d = k` | `Σ_(u,v) Σ_c Prc_u Prc_v` |
//! | TSP | one per time slot, `d = n` | `Σ_t Σ_(u≠v) D[u][v] Pru_t Prv_(t+1) + A Σ_(t<t') Σ_u Pru_t Pru_t'` |
//! | scheduling | one per job, `d = T` | `A Σ_(j<j') Σ_overlap Prt_j Prt'_j' + Σ_j Σ_t w_j (t + p_j) Prt_j` |
//!
//! Bonds `(i, j)` join neighbouring sites; periodic chains of more than two
//! sites add the bond `(L-1, 0)`. The scheduling model charges each job its
//! weighted completion time and penalizes every pair of overlapping runs.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::problem::{Coeff, ProblemFile, SubsystemEntry, TermEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, GenError> {
    Err(GenError::Invalid(msg.into()))
}

fn subsystems(prefix: &str, dims: &[usize], enc: &str) -> Vec<SubsystemEntry> {
    dims.iter()
        .enumerate()
        .map(|(i, &d)| SubsystemEntry {
            id: format!("{prefix}{i}"),
            d,
            enc: enc.to_string(),
        })
        .collect()
}

fn term(coeff: Coeff, ops: &[(&str, String)]) -> TermEntry {
    TermEntry {
        coeff,
        ops: ops.iter().map(|(op, l)| [op.to_string(), l.clone()]).collect(),
    }
}

fn expr(s: &str) -> Coeff {
    Coeff::Expr(s.to_string())
}

fn bonds(l: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut out: Vec<_> = (0..l.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if periodic && l > 2 {
        out.push((l - 1, 0));
    }
    out
}

fn symbols(pairs: &[(&str, f64)]) -> BTreeMap<String, [f64; 2]> {
    pairs.iter().map(|&(k, v)| (k.to_string(), [v, 0.0])).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoseHubbard {
    pub sites: usize,
    pub d: usize,
    pub t: f64,
    pub u: f64,
    pub mu: f64,
    pub periodic: bool,
}

pub fn bose_hubbard(p: &BoseHubbard, enc: &str) -> Result<ProblemFile, GenError> {
    if p.sites < 1 || p.d < 2 {
        return invalid("bose-hubbard needs sites >= 1 and d >= 2");
    }
    let label = |i: usize| format!("s{i}");
    let mut terms = Vec::new();
    for (i, j) in bonds(p.sites, p.periodic) {
        terms.push(term(expr("-t"), &[("ad", label(i)), ("a", label(j))]));
        terms.push(term(expr("-t"), &[("ad", label(j)), ("a", label(i))]));
    }
    for i in 0..p.sites {
        terms.push(term(expr("0.5*U"), &[("n", label(i)), ("n", label(i))]));
        terms.push(term(expr("-0.5*U"), &[("n", label(i))]));
        terms.push(term(expr("-mu"), &[("n", label(i))]));
    }
    Ok(ProblemFile {
        subsystems: subsystems("s", &vec![p.d; p.sites], enc),
        terms: Some(terms),
        symbols: symbols(&[("t", p.t), ("U", p.u), ("mu", p.mu)]),
        ..Default::default()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinChain {
    pub sites: usize,
    pub d: usize,
    pub j: f64,
    pub h: f64,
    pub periodic: bool,
}

pub fn spin_chain(p: &SpinChain, enc: &str) -> Result<ProblemFile, GenError> {
    if p.sites < 1 || p.d < 2 {
        return invalid("spin-chain needs sites >= 1 and d >= 2");
    }
    let label = |i: usize| format!("s{i}");
    let mut terms = Vec::new();
    for (i, k) in bonds(p.sites, p.periodic) {
        for axis in ["Sx", "Sy", "Sz"] {
            terms.push(term(expr("J"), &[(axis, label(i)), (axis, label(k))]));
        }
    }
    for i in 0..p.sites {
        terms.push(term(expr("h"), &[("Sz", label(i))]));
    }
    Ok(ProblemFile {
        subsystems: subsystems("s", &vec![p.d; p.sites], enc),
        terms: Some(terms),
        symbols: symbols(&[("J", p.j), ("h", p.h)]),
        ..Default::default()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vibrational {
    pub d: usize,
    /// One harmonic frequency per mode.
    pub omegas: Vec<f64>,
    /// `(i, j, k, value)` cubic couplings.
    pub cubic: Vec<(usize, usize, usize, f64)>,
}

pub fn vibrational(p: &Vibrational, enc: &str) -> Result<ProblemFile, GenError> {
    let modes = p.omegas.len();
    if modes == 0 || p.d < 2 {
        return invalid("vibrational needs at least one frequency and d >= 2");
    }
    let label = |i: usize| format!("m{i}");
    let mut terms = Vec::new();
    for (i, w) in p.omegas.iter().enumerate() {
        terms.push(term(Coeff::real(w / 2.0), &[("q2", label(i))]));
        terms.push(term(Coeff::real(w / 2.0), &[("p2", label(i))]));
    }
    for &(i, j, k, v) in &p.cubic {
        if i.max(j).max(k) >= modes {
            return invalid(format!("coupling ({i},{j},{k}) names a mode beyond {}", modes - 1));
        }
        terms.push(term(Coeff::real(v), &[("q", label(i)), ("q", label(j)), ("q", label(k))]));
    }
    Ok(ProblemFile {
        subsystems: subsystems("m", &vec![p.d; modes], enc),
        terms: Some(terms),
        ..Default::default()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorTrain {
    pub dims: Vec<usize>,
    pub terms: usize,
    pub seed: u64,
}

/// Factor `R<t>x<s>` of term `t` on subsystem `s` has entries with real and
/// imaginary parts uniform in `[-1, 1)`.
pub fn tensor_train(p: &TensorTrain, enc: &str) -> Result<ProblemFile, GenError> {
    if p.dims.is_empty() || p.dims.iter().any(|&d| d < 2) {
        return invalid("tensor-train needs at least one subsystem, each with d >= 2");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut custom_ops = BTreeMap::new();
    let mut terms = Vec::new();
    for t in 0..p.terms {
        let mut ops = Vec::new();
        for (s, &d) in p.dims.iter().enumerate() {
            let name = format!("R{t}x{s}");
            let rows: Vec<Vec<[f64; 2]>> = (0..d)
                .map(|_| (0..d).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect())
                .collect();
            custom_ops.insert(name.clone(), rows);
            ops.push([name, format!("f{s}")]);
        }
        terms.push(TermEntry { coeff: Coeff::real(1.0), ops });
    }
    Ok(ProblemFile {
        subsystems: subsystems("f", &p.dims, enc),
        terms: Some(terms),
        custom_ops,
        ..Default::default()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphColoring {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub colors: usize,
}

pub fn graph_coloring(p: &GraphColoring, enc: &str) -> Result<ProblemFile, GenError> {
    if p.colors < 2 {
        return invalid("graph-coloring needs at least 2 colors");
    }
    if p.vertices == 0 {
        return invalid("graph-coloring needs at least one vertex");
    }
    let label = |i: usize| format!("v{i}");
    let mut terms = Vec::new();
    for &(u, v) in &p.edges {
        if u >= p.vertices || v >= p.vertices || u == v {
            return invalid(format!("bad edge {u}-{v}"));
        }
        for c in 0..p.colors {
            let pr = format!("Pr{c}");
            terms.push(term(Coeff::real(1.0), &[(&pr, label(u)), (&pr, label(v))]));
        }
    }
    Ok(ProblemFile {
        subsystems: subsystems("v", &vec![p.colors; p.vertices], enc),
        terms: Some(terms),
        ..Default::default()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tsp {
    pub distances: Vec<Vec<f64>>,
    pub penalty: f64,
}

pub fn tsp(p: &Tsp, enc: &str) -> Result<ProblemFile, GenError> {
    let n = p.distances.len();
    if n < 2 || p.distances.iter().any(|r| r.len() != n) {
        return invalid("tsp needs a square distance matrix with at least 2 cities");
    }
    let label = |t: usize| format!("t{t}");
    let mut terms = Vec::new();
    for t in 0..n {
        for u in 0..n {
            for v in 0..n {
                let dist = p.distances[u][v];
                if u != v && dist != 0.0 {
                    let (pu, pv) = (format!("Pr{u}"), format!("Pr{v}"));
                    terms.push(term(Coeff::real(dist), &[(&pu, label(t)), (&pv, label((t + 1) % n))]));
                }
            }
        }
    }
    for t in 0..n {
        for t2 in t + 1..n {
            for u in 0..n {
                let pu = format!("Pr{u}");
                terms.push(term(Coeff::real(p.penalty), &[(&pu, label(t)), (&pu, label(t2))]));
            }
        }
    }
    Ok(ProblemFile {
        subsystems: subsystems("t", &vec![n; n], enc),
        terms: Some(terms),
        ..Default::default()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scheduling {
    pub durations: Vec<usize>,
    /// Defaults to 1 per job when empty.
    pub weights: Vec<f64>,
    pub horizon: usize,
    pub penalty: f64,
}

pub fn scheduling(p: &Scheduling, enc: &str) -> Result<ProblemFile, GenError> {
    let jobs = p.durations.len();
    if jobs == 0 || p.horizon < 2 {
        return invalid("scheduling needs at least one job and horizon >= 2");
    }
    let weights = if p.weights.is_empty() {
        vec![1.0; jobs]
    } else if p.weights.len() == jobs {
        p.weights.clone()
    } else {
        return invalid("one weight per job");
    };
    let label = |j: usize| format!("j{j}");
    let mut terms = Vec::new();
    for j in 0..jobs {
        for j2 in j + 1..jobs {
            for t in 0..p.horizon {
                for t2 in 0..p.horizon {
                    if t < t2 + p.durations[j2] && t2 < t + p.durations[j] {
                        let (a, b) = (format!("Pr{t}"), format!("Pr{t2}"));
                        terms.push(term(Coeff::real(p.penalty), &[(&a, label(j)), (&b, label(j2))]));
                    }
                }
            }
        }
    }
    for (j, (&w, &dur)) in weights.iter().zip(&p.durations).enumerate() {
        for t in 0..p.horizon {
            let cost = w * (t + dur) as f64;
            if cost != 0.0 {
                terms.push(term(Coeff::real(cost), &[(&format!("Pr{t}"), label(j))]));
            }
        }
    }
    Ok(ProblemFile {
        subsystems: subsystems("j", &vec![p.horizon; jobs], enc),
        terms: Some(terms),
        ..Default::default()
    })
}
