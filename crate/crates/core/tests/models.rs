use std::collections::{BTreeMap, BTreeSet};

use dlevel::composite::{CompileOptions, CompositeOperator};
use dlevel::encodings::EncodingRegistry;
use dlevel::generators::{self, BoseHubbard, GraphColoring, Scheduling, SpinChain, Tsp};
use dlevel::localops::Matrix;
use dlevel::oracle::{
    composite_to_dense, hermitian_eigenvalues, projected_matrix, projected_spectrum, unravel,
    DEFAULT_GUARD,
};
use dlevel::problem::ProblemFile;

fn lower(file: &ProblemFile) -> CompositeOperator {
    file.lower(&EncodingRegistry::new(), &BTreeMap::new()).unwrap()
}

/// Level tuples minimizing the diagonal of a diagonal code-space matrix.
fn ground_tuples(m: &Matrix, dims: &[usize]) -> (f64, BTreeSet<Vec<usize>>) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r != c {
                assert!(m[(r, c)].norm() < 1e-12, "off-diagonal entry at ({r}, {c})");
            }
        }
    }
    let min = (0..m.nrows()).map(|i| m[(i, i)].re).fold(f64::INFINITY, f64::min);
    let ground = (0..m.nrows())
        .filter(|&i| (m[(i, i)].re - min).abs() < 1e-9)
        .map(|i| unravel(i, dims))
        .collect();
    (min, ground)
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn k3_coloring_ground_states_are_proper_colorings() {
    for enc in ["unary", "stdbinary", "gray"] {
        let p = GraphColoring { vertices: 3, edges: vec![(0, 1), (1, 2), (0, 2)], colors: 3 };
        let op = lower(&generators::graph_coloring(&p, enc).unwrap());
        let sum = op.to_pauli(CompileOptions::default()).unwrap();
        assert!(sum.iter().all(|(s, _)| s.is_diagonal()));
        let m = projected_matrix(&op, &sum, DEFAULT_GUARD).unwrap();
        assert_eq!(m.nrows(), 27);
        let (min, ground) = ground_tuples(&m, &op.dims());
        assert_eq!(min, 0.0);
        let proper: BTreeSet<Vec<usize>> = (0..27)
            .map(|i| unravel(i, &[3, 3, 3]))
            .filter(|c| c[0] != c[1] && c[1] != c[2] && c[0] != c[2])
            .collect();
        assert_eq!(proper.len(), 6);
        assert_eq!(ground, proper);
        let spectrum = hermitian_eigenvalues(&m);
        assert_eq!(spectrum.iter().filter(|&&e| e.abs() < 1e-9).count(), 6);
    }
}

fn tour_length(d: &[Vec<f64>], order: &[usize]) -> f64 {
    (0..order.len()).map(|t| d[order[t]][order[(t + 1) % order.len()]]).sum()
}

fn check_tsp(distances: Vec<Vec<f64>>, enc: &str) {
    let n = distances.len();
    let penalty = 10.0 * distances.iter().flatten().sum::<f64>();
    let file = generators::tsp(&Tsp { distances: distances.clone(), penalty }, enc).unwrap();
    let op = lower(&file);
    let sum = op.to_pauli(CompileOptions::default()).unwrap();
    let m = projected_matrix(&op, &sum, DEFAULT_GUARD).unwrap();
    let (min, ground) = ground_tuples(&m, &op.dims());
    let tours = permutations(n);
    let best = tours.iter().map(|t| tour_length(&distances, t)).fold(f64::INFINITY, f64::min);
    let optimal: BTreeSet<Vec<usize>> = tours
        .into_iter()
        .filter(|t| (tour_length(&distances, t) - best).abs() < 1e-9)
        .collect();
    assert!((min - best).abs() < 1e-9, "{min} vs {best}");
    assert_eq!(ground, optimal);
}

#[test]
fn tsp_ground_codewords_are_optimal_tours() {
    check_tsp(vec![vec![0.0, 1.0, 4.0], vec![1.0, 0.0, 2.0], vec![4.0, 2.0, 0.0]], "unary");
    check_tsp(vec![vec![0.0, 1.0, 4.0], vec![1.0, 0.0, 2.0], vec![4.0, 2.0, 0.0]], "gray");
    let d4 = vec![
        vec![0.0, 1.0, 5.0, 2.0],
        vec![1.0, 0.0, 1.5, 4.0],
        vec![5.0, 1.5, 0.0, 1.0],
        vec![2.0, 4.0, 1.0, 0.0],
    ];
    check_tsp(d4, "stdbinary");
}

#[test]
fn scheduling_ground_state_is_best_feasible_schedule() {
    let p = Scheduling { durations: vec![1, 2, 1], weights: vec![3.0, 1.0, 2.0], horizon: 4, penalty: 100.0 };
    let op = lower(&generators::scheduling(&p, "gray").unwrap());
    let sum = op.to_pauli(CompileOptions::default()).unwrap();
    let m = projected_matrix(&op, &sum, DEFAULT_GUARD).unwrap();
    let (min, ground) = ground_tuples(&m, &op.dims());

    let mut best = f64::INFINITY;
    let mut argmin = BTreeSet::new();
    for i in 0..64 {
        let starts = unravel(i, &[4, 4, 4]);
        let feasible = (0..3).all(|a| {
            (a + 1..3).all(|b| {
                let (sa, sb) = (starts[a], starts[b]);
                sa + p.durations[a] <= sb || sb + p.durations[b] <= sa
            })
        });
        if !feasible {
            continue;
        }
        let cost: f64 = (0..3).map(|j| p.weights[j] * (starts[j] + p.durations[j]) as f64).sum();
        if cost < best - 1e-9 {
            best = cost;
            argmin.clear();
        }
        if (cost - best).abs() < 1e-9 {
            argmin.insert(starts);
        }
    }
    assert!((min - best).abs() < 1e-9);
    assert_eq!(ground, argmin);
}

#[test]
fn bose_hubbard_spectrum_is_encoding_independent() {
    let p = BoseHubbard { sites: 2, d: 3, t: 1.0, u: 2.0, mu: 0.0, periodic: false };
    let mut spectra = Vec::new();
    for enc in ["unary", "stdbinary", "gray", "blockunary:g=2:local=gray"] {
        let op = lower(&generators::bose_hubbard(&p, enc).unwrap());
        let sum = op.to_pauli(CompileOptions::default()).unwrap();
        let direct = hermitian_eigenvalues(composite_to_dense(&op, DEFAULT_GUARD).unwrap().matrix());
        let projected = projected_spectrum(&op, &sum, DEFAULT_GUARD).unwrap();
        assert_close(&projected, &direct, 1e-8);
        spectra.push(projected);
    }
    for s in &spectra[1..] {
        assert_close(s, &spectra[0], 1e-8);
    }
}

#[test]
fn bose_hubbard_two_site_closed_form() {
    // Truncation at d = 3 keeps every state with up to two bosons per site,
    // so the N = 1 sector is exact: energies -t and +t.
    let p = BoseHubbard { sites: 2, d: 3, t: 0.7, u: 5.0, mu: 0.0, periodic: false };
    let op = lower(&generators::bose_hubbard(&p, "gray").unwrap());
    let sum = op.to_pauli(CompileOptions::default()).unwrap();
    let spectrum = projected_spectrum(&op, &sum, DEFAULT_GUARD).unwrap();
    for e in [-0.7, 0.0, 0.7] {
        assert!(spectrum.iter().any(|x| (x - e).abs() < 1e-10), "{e} missing from {spectrum:?}");
    }
}

#[test]
fn spin_three_halves_dimer_matches_total_spin_levels() {
    let p = SpinChain { sites: 2, d: 4, j: 1.0, h: 0.0, periodic: false };
    for enc in ["unary", "stdbinary"] {
        let op = lower(&generators::spin_chain(&p, enc).unwrap());
        let sum = op.to_pauli(CompileOptions::default()).unwrap();
        let spectrum = projected_spectrum(&op, &sum, DEFAULT_GUARD).unwrap();
        // S1.S2 = (S(S+1) - 2 s(s+1)) / 2 with s = 3/2 and S = 0..3.
        let mut expected = Vec::new();
        for total in 0..=3 {
            let s = total as f64;
            let e = (s * (s + 1.0) - 2.0 * 3.75) / 2.0;
            expected.extend(std::iter::repeat_n(e, 2 * total + 1));
        }
        assert_close(&spectrum, &expected, 1e-9);
    }
}

#[test]
fn spin_five_halves_field_term() {
    let p = SpinChain { sites: 1, d: 6, j: 0.0, h: 0.4, periodic: false };
    let op = lower(&generators::spin_chain(&p, "gray").unwrap());
    let sum = op.to_pauli(CompileOptions::default()).unwrap();
    let spectrum = projected_spectrum(&op, &sum, DEFAULT_GUARD).unwrap();
    let expected: Vec<f64> = [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5].iter().map(|m| 0.4 * m).collect();
    assert_close(&spectrum, &expected, 1e-12);
}
