//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Two criteria state properties that the mathematics does not support;
//! they are evaluated as written and listed in `EXPECTED_FAILURES`. The
//! process exits nonzero when any outcome differs from its expectation, so
//! a fix to one of them (or a regression elsewhere) is reported.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dlevel::composite::{CompileOptions, CompositeOperator, OpSpec};
use dlevel::encodings::{Encoding, EncodingRegistry, LocalCode};
use dlevel::generators::{self, BoseHubbard, GraphColoring, Tsp};
use dlevel::localops::{Matrix, UserOps};
use dlevel::oracle::{
    composite_to_dense, compile_by_trace, hermitian_eigenvalues, projected_matrix, projected_spectrum,
    unravel, verify_subspace, DEFAULT_GUARD,
};
use dlevel::pauli::{PauliAxis, PauliString, PauliSum};
use dlevel::symbolic::{SubsystemSpec, SymbolicOperator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXPECTED_FAILURES: &[(u32, &str)] = &[
    (3, "the listed terms (1,ad)(0,a) and (0,a)(1,ad) are the same operator, so the listing is not Hermitian"),
    (5, "a unary hop changes two positions on each of the two sites, so its strings have weight 4"),
];

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ceil_log2(d: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < d {
        bits += 1;
    }
    bits
}

fn all_builtin_encodings() -> Vec<Encoding> {
    let mut out = vec![Encoding::unary(), Encoding::std_binary(), Encoding::gray()];
    for g in [2, 3, 4] {
        for local in [LocalCode::StdBinary, LocalCode::Gray] {
            out.push(Encoding::block_unary(g, local).unwrap());
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for d in 2..=16usize {
        let mut cases = vec![(Encoding::unary(), d), (Encoding::std_binary(), ceil_log2(d)), (Encoding::gray(), ceil_log2(d))];
        for g in [2usize, 3, 4] {
            let expected = d.div_ceil(g) * ceil_log2(g + 1);
            for local in [LocalCode::StdBinary, LocalCode::Gray] {
                cases.push((Encoding::block_unary(g, local).unwrap(), expected));
            }
        }
        for (enc, expected) in cases {
            let mut op = CompositeOperator::new();
            op.append_subsystem(d, enc.clone()).map_err(|e| e.to_string())?;
            op.add_term(c(1.0, 0.0), [(0, "ad")]).map_err(|e| e.to_string())?;
            let sum = op.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
            if op.n_qubits() != expected || sum.n_qubits() > expected {
                return Err(format!("{enc} d={d}: {} qubits, expected {expected}", op.n_qubits()));
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(1) {
        return Err(format!("{checked} cases took {elapsed:?} (limit 1 s)"));
    }
    Ok(format!("{checked} (encoding, d) cases exact in {elapsed:?}"))
}

const RANDOM_BUILTINS: &[&str] = &["a", "ad", "n", "q", "p", "Sz", "Sx", "Sy", "Pr0", "k1b0", "q2", "p3", "ident"];

fn random_composite(rng: &mut ChaCha8Rng, encodings: &[Encoding]) -> CompositeOperator {
    let mut op = CompositeOperator::new();
    let n_sub = rng.gen_range(1..=3);
    let mut dims = Vec::new();
    for _ in 0..n_sub {
        let d = rng.gen_range(2..=6);
        let enc = encodings[rng.gen_range(0..encodings.len())].clone();
        op.append_subsystem(d, enc).unwrap();
        dims.push(d);
    }
    for _ in 0..rng.gen_range(1..=4) {
        let mut factors: Vec<(usize, OpSpec)> = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let s = rng.gen_range(0..n_sub);
            let spec = if rng.gen_bool(0.4) {
                let d = dims[s];
                OpSpec::Matrix(Matrix::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            } else {
                OpSpec::from(RANDOM_BUILTINS[rng.gen_range(0..RANDOM_BUILTINS.len())])
            };
            factors.push((s, spec));
        }
        let coeff = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        op.add_term(coeff, factors).unwrap();
    }
    op
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let encodings = all_builtin_encodings();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let op = random_composite(&mut rng, &encodings);
        let sum = op.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
        let v = verify_subspace(&op, &sum, 1e-10, DEFAULT_GUARD).map_err(|e| e.to_string())?;
        worst = worst.max(v.max_deviation);
        if !v.passed {
            return Err(format!("composite {i} (dims {:?}): {}", op.dims(), v.to_string().replace('\n', "; ")));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {elapsed:?} (limit 60 s)"));
    }
    Ok(format!("200 composites, worst deviation {worst:.1e}, {elapsed:?}"))
}

fn two_site(second: [(usize, &str); 2]) -> CompositeOperator {
    let mut op = CompositeOperator::new();
    op.append_subsystem(4, Encoding::unary()).unwrap();
    op.append_subsystem(4, Encoding::unary()).unwrap();
    op.add_term(c(4.2, 0.0), [(1, "ad"), (0, "a")]).unwrap();
    op.add_term(c(4.2, 0.0), second).unwrap();
    op.add_term(c(0.5, 0.0), [(0, "ident")]).unwrap();
    op
}

fn criterion_3() -> Outcome {
    let mut problems = Vec::new();

    let listing = two_site([(0, "a"), (1, "ad")]);
    let sum = listing.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
    let hermitian = sum.is_hermitian(1e-12);
    let oracle = verify_subspace(&listing, &sum, 1e-10, DEFAULT_GUARD).map_err(|e| e.to_string())?;
    if !hermitian {
        problems.push("listing compiles to a non-Hermitian sum".to_string());
    }
    if !oracle.passed {
        problems.push(format!("listing oracle deviation {:.1e}", oracle.max_deviation));
    }
    let conjugate = two_site([(0, "ad"), (1, "a")]);
    let csum = conjugate.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
    let conj_ok = csum.is_hermitian(1e-12)
        && verify_subspace(&conjugate, &csum, 1e-10, DEFAULT_GUARD).map_err(|e| e.to_string())?.passed;

    let a = SymbolicOperator::parse("k [n_A] ++ j [p_B] ++ r []").map_err(|e| e.to_string())?;
    let b = SymbolicOperator::parse("k [q_A] ++ -r [p_C]").map_err(|e| e.to_string())?;
    let product = &a * &b;
    if product.len() != 6 {
        problems.push(format!("symbolic product has {} terms", product.len()));
    }
    let bindings = [("k", 2.1), ("j", PI), ("r", 3.0)].map(|(k, v)| (k.to_string(), c(v, 0.0))).into();
    let layout = [
        SubsystemSpec::new("A", 4, Encoding::std_binary()),
        SubsystemSpec::new("B", 4, Encoding::gray()),
        SubsystemSpec::new("C", 6, Encoding::std_binary()),
    ];
    let lowered = product.scalar_subs(&bindings).lower(&layout, &UserOps::new()).map_err(|e| e.to_string())?;
    if lowered.n_qubits() != 7 {
        problems.push(format!("lowered product uses {} qubits", lowered.n_qubits()));
    }
    let psum = lowered.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
    let pv = verify_subspace(&lowered, &psum, 1e-10, DEFAULT_GUARD).map_err(|e| e.to_string())?;
    if !pv.passed {
        problems.push(format!("symbolic oracle deviation {:.1e}", pv.max_deviation));
    }

    let summary = format!(
        "listing: hermitian={hermitian}, oracle dev {:.1e}; conjugate-term variant hermitian+oracle={conj_ok}; \
         product {} terms, {} qubits, oracle dev {:.1e}",
        oracle.max_deviation,
        product.len(),
        lowered.n_qubits(),
        pv.max_deviation
    );
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", problems.join("; ")))
    }
}

fn single(d: usize, enc: Encoding, name: &str) -> Result<(CompositeOperator, PauliSum), String> {
    let mut op = CompositeOperator::new();
    op.append_subsystem(d, enc).map_err(|e| e.to_string())?;
    op.add_term(c(1.0, 0.0), [(0, name)]).map_err(|e| e.to_string())?;
    let sum = op.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
    Ok((op, sum))
}

fn criterion_4() -> Outcome {
    let (_, a2) = single(2, Encoding::std_binary(), "a")?;
    let mut expected = PauliSum::new();
    expected.add_term(PauliString::single(0, PauliAxis::X), c(0.5, 0.0));
    expected.add_term(PauliString::single(0, PauliAxis::Y), c(0.0, 0.5));
    if a2 != expected {
        return Err(format!("d=2 a compiled to {a2}"));
    }

    let (op, n4) = single(4, Encoding::std_binary(), "n")?;
    let mut expected = PauliSum::identity(c(1.5, 0.0));
    expected.add_term(PauliString::single(0, PauliAxis::Z), c(-0.5, 0.0));
    expected.add_term(PauliString::single(1, PauliAxis::Z), c(-1.0, 0.0));
    let by_trace = compile_by_trace(&op.terms()[0].factors[0].1.matrix, &Encoding::std_binary(), 0)
        .map_err(|e| e.to_string())?;
    if n4.max_abs_diff(&expected) > 1e-12 || by_trace.max_abs_diff(&expected) > 1e-12 {
        return Err(format!("d=4 n compiled to {n4}, trace route gives {by_trace}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cases = 0;
    for enc in all_builtin_encodings() {
        for d in 2..=8usize {
            let diag = Matrix::from_fn(d, d, |r, col| if r == col { c(rng.gen_range(-1.0..1.0), 0.0) } else { c(0.0, 0.0) });
            let mut op = CompositeOperator::new();
            op.append_subsystem(d, enc.clone()).map_err(|e| e.to_string())?;
            op.add_term(c(1.0, 0.0), [(0, diag)]).map_err(|e| e.to_string())?;
            let sum = op.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
            if let Some((s, _)) = sum.iter().find(|(s, _)| !s.is_diagonal()) {
                return Err(format!("{enc} d={d}: diagonal input produced {s}"));
            }
            cases += 1;
        }
    }
    Ok(format!("a(d=2) and n(d=4) exact; {cases} diagonal cases yield only I/Z"))
}

fn criterion_5() -> Outcome {
    let mut observed: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut per_site: BTreeSet<usize> = BTreeSet::new();
    for d in 2..=8usize {
        let mut op = CompositeOperator::new();
        op.append_subsystem(d, Encoding::unary()).map_err(|e| e.to_string())?;
        op.append_subsystem(d, Encoding::unary()).map_err(|e| e.to_string())?;
        op.add_term(c(1.0, 0.0), [(0, "ad"), (1, "a")]).map_err(|e| e.to_string())?;
        let sum = op.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
        for (s, _) in sum.iter() {
            observed.entry(d).or_default().insert(s.weight());
            for sub in op.subsystems() {
                per_site.insert(s.ops().iter().filter(|(q, _)| sub.qubits().contains(q)).count());
            }
        }
    }
    let all: BTreeSet<usize> = observed.values().flatten().copied().collect();
    let detail = format!("weights over d=2..8: {all:?}; weight per site: {per_site:?}");
    if all == BTreeSet::from([2]) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let p = BoseHubbard { sites: 2, d: 3, t: 1.0, u: 2.0, mu: 0.0, periodic: false };
    let registry = EncodingRegistry::new();
    let mut spectra = Vec::new();
    let mut direct = Vec::new();
    for enc in ["unary", "stdbinary", "gray"] {
        let file = generators::bose_hubbard(&p, enc).map_err(|e| e.to_string())?;
        let op = file.lower(&registry, &BTreeMap::new()).map_err(|e| e.to_string())?;
        let sum = op.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
        spectra.push(projected_spectrum(&op, &sum, DEFAULT_GUARD).map_err(|e| e.to_string())?);
        direct = hermitian_eigenvalues(composite_to_dense(&op, DEFAULT_GUARD).map_err(|e| e.to_string())?.matrix());
    }
    let mut worst = 0.0f64;
    for s in &spectra {
        for (x, y) in s.iter().zip(&direct) {
            worst = worst.max((x - y).abs());
        }
    }
    if worst <= 1e-8 {
        Ok(format!("3 encodings, 9 levels, max spectral deviation {worst:.1e}"))
    } else {
        Err(format!("max spectral deviation {worst:.1e}"))
    }
}

fn ground(op: &CompositeOperator) -> Result<(f64, usize, BTreeSet<Vec<usize>>), String> {
    let sum = op.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
    let m = projected_matrix(op, &sum, DEFAULT_GUARD).map_err(|e| e.to_string())?;
    let ev = hermitian_eigenvalues(&m);
    let min = ev[0];
    let degeneracy = ev.iter().filter(|&&e| (e - min).abs() < 1e-9).count();
    let states = (0..m.nrows())
        .filter(|&i| (m[(i, i)].re - min).abs() < 1e-9)
        .map(|i| unravel(i, &op.dims()))
        .collect();
    Ok((min, degeneracy, states))
}

fn criterion_7() -> Outcome {
    let registry = EncodingRegistry::new();
    let gc = GraphColoring { vertices: 3, edges: vec![(0, 1), (1, 2), (0, 2)], colors: 3 };
    let op = generators::graph_coloring(&gc, "unary")
        .map_err(|e| e.to_string())?
        .lower(&registry, &BTreeMap::new())
        .map_err(|e| e.to_string())?;
    let (min, degeneracy, _) = ground(&op)?;
    if min.abs() > 1e-9 || degeneracy != 6 {
        return Err(format!("K3 ground energy {min}, degeneracy {degeneracy}"));
    }

    let d = vec![vec![0.0, 2.0, 3.0], vec![2.0, 0.0, 4.0], vec![3.0, 4.0, 0.0]];
    let op = generators::tsp(&Tsp { distances: d.clone(), penalty: 50.0 }, "stdbinary")
        .map_err(|e| e.to_string())?
        .lower(&registry, &BTreeMap::new())
        .map_err(|e| e.to_string())?;
    let (tsp_min, _, states) = ground(&op)?;
    let tour = |o: &[usize]| (0..3).map(|t| d[o[t]][o[(t + 1) % 3]]).sum::<f64>();
    let mut best = f64::INFINITY;
    let mut optimal = BTreeSet::new();
    for i in 0..27 {
        let o = unravel(i, &[3, 3, 3]);
        if BTreeSet::from_iter(o.iter().copied()).len() != 3 {
            continue;
        }
        let len = tour(&o);
        if len < best - 1e-9 {
            best = len;
            optimal.clear();
        }
        if (len - best).abs() < 1e-9 {
            optimal.insert(o);
        }
    }
    if (tsp_min - best).abs() > 1e-9 || states != optimal {
        return Err(format!("TSP ground {tsp_min} vs optimal tour {best}; {} ground codewords", states.len()));
    }
    Ok(format!("K3: E0=0 with 6-fold degeneracy; TSP n=3: {} ground codewords = optimal tours (length {best})", states.len()))
}

fn criterion_8() -> Outcome {
    let p = BoseHubbard { sites: 500, d: 4, t: 1.0, u: 1.0, mu: 0.5, periodic: false };
    let start = Instant::now();
    let op = generators::bose_hubbard(&p, "unary")
        .map_err(|e| e.to_string())?
        .lower(&EncodingRegistry::new(), &BTreeMap::new())
        .map_err(|e| e.to_string())?;
    let sum = op.to_pauli(CompileOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let detail = format!("{} qubits, {} terms, {elapsed:?}", op.n_qubits(), sum.len());
    if op.n_qubits() == 2000 && elapsed < Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "qubit-count formulas", criterion_1),
        (2, "oracle subspace equivalence", criterion_2),
        (3, "listing reproduction", criterion_3),
        (4, "known closed forms", criterion_4),
        (5, "unary hop weight", criterion_5),
        (6, "encoding-independent spectrum", criterion_6),
        (7, "optimization ground states", criterion_7),
        (8, "scale", criterion_8),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let outcome = run();
        let expected_failure = EXPECTED_FAILURES.iter().find(|(n, _)| *n == id);
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        println!("criterion {id} [{status}] {name}: {detail}");
        match (outcome.is_ok(), expected_failure) {
            (true, None) | (false, Some(_)) => {}
            (false, None) => unexpected += 1,
            (true, Some(_)) => {
                println!("  criterion {id} passed but is listed as an expected failure");
                unexpected += 1;
            }
        }
        if let (Err(_), Some((_, why))) = (&outcome, expected_failure) {
            println!("  expected failure: {why}");
        }
    }
    if unexpected == 0 {
        println!("acceptance: all outcomes as expected ({} expected failures)", EXPECTED_FAILURES.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} unexpected outcome(s)");
        ExitCode::FAILURE
    }
}
