//! Shared fixtures for the integration suites: the two bundled six-agent
//! digraphs with their independently tabulated reference matrices, seeded
//! random graph families, and a matrix-exponential oracle that is
//! independent of the simulator's integrator.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use edge_consensus::{parse_digraph, Digraph, TreeSelection};

/// Strongly connected six-agent digraph of the bundled strong scenario.
pub fn strong6_graph() -> Digraph {
    parse_digraph(
        6,
        &[(2, 1), (1, 3), (4, 2), (2, 4), (5, 2), (3, 5), (6, 3), (3, 6)],
    )
    .unwrap()
}

/// Quasi-strongly connected six-agent digraph of the bundled quasi scenario.
pub fn quasi6_graph() -> Digraph {
    parse_digraph(
        6,
        &[(1, 2), (1, 5), (1, 3), (2, 4), (5, 2), (3, 5), (3, 6)],
    )
    .unwrap()
}

/// The spanning tree of [`quasi6_graph`] used throughout: root 1, tree
/// edges 1, 2, 3, 4, 7, cotree edges 5, 6.
pub fn quasi6_tree() -> TreeSelection {
    TreeSelection {
        root: 1,
        tree_edges: vec![1, 2, 3, 4, 7],
        cotree_edges: vec![5, 6],
    }
}

/// Reference 6x8 incidence matrix of [`strong6_graph`], tabulated by hand:
/// +1 at the initial node of each edge column, -1 at the terminal node.
pub fn strong6_reference_incidence() -> DMatrix<i64> {
    DMatrix::from_row_slice(
        6,
        8,
        &[
            -1, 1, 0, 0, 0, 0, 0, 0, //
            1, 0, -1, 1, -1, 0, 0, 0, //
            0, -1, 0, 0, 0, 1, -1, 1, //
            0, 0, 1, -1, 0, 0, 0, 0, //
            0, 0, 0, 0, 1, -1, 0, 0, //
            0, 0, 0, 0, 0, 0, 1, -1, //
        ],
    )
}

/// Reference 8x8 edge adjacency of [`strong6_graph`], tabulated by hand
/// from the sibling (+1) and terminal-feed (-1) rules.
pub fn strong6_reference_edge_adjacency() -> DMatrix<i64> {
    DMatrix::from_row_slice(
        8,
        8,
        &[
            0, -1, 0, 1, 0, 0, 0, 0, //
            0, 0, 0, 0, 0, -1, 0, -1, //
            -1, 0, 0, -1, 0, 0, 0, 0, //
            1, 0, -1, 0, 0, 0, 0, 0, //
            -1, 0, 0, -1, 0, 0, 0, 0, //
            0, 0, 0, 0, -1, 0, 0, 1, //
            0, 0, 0, 0, 0, -1, 0, -1, //
            0, 0, 0, 0, 0, 1, -1, 0, //
        ],
    )
}

/// Reference 6x5 tree incidence of [`quasi6_graph`] with columns in tree
/// order e1, e2, e3, e4, e7.
pub fn quasi6_reference_tree_incidence() -> DMatrix<i64> {
    DMatrix::from_row_slice(
        6,
        5,
        &[
            1, 1, 1, 0, 0, //
            -1, 0, 0, 1, 0, //
            0, 0, -1, 0, 1, //
            0, 0, 0, -1, 0, //
            0, -1, 0, 0, 0, //
            0, 0, 0, 0, -1, //
        ],
    )
}

/// Reference 6x2 cotree incidence of [`quasi6_graph`] with columns e5, e6.
pub fn quasi6_reference_cotree_incidence() -> DMatrix<i64> {
    DMatrix::from_row_slice(
        6,
        2,
        &[
            0, 0, //
            -1, 0, //
            0, 1, //
            0, 0, //
            1, -1, //
            0, 0, //
        ],
    )
}

/// Reference 7x7 edge adjacency of [`quasi6_graph`] permuted tree-first
/// (rows and columns ordered e1, e2, e3, e4, e7, e5, e6).
pub fn quasi6_reference_edge_adjacency_tree_first() -> DMatrix<i64> {
    DMatrix::from_row_slice(
        7,
        7,
        &[
            0, 1, 1, -1, 0, 0, 0, //
            1, 0, 1, 0, 0, -1, 0, //
            1, 1, 0, 0, -1, 0, -1, //
            0, 0, 0, 0, 0, 0, 0, //
            0, 0, 0, 0, 0, 0, 1, //
            0, 0, 0, -1, 0, 0, 0, //
            0, 0, 0, 0, 1, -1, 0, //
        ],
    )
}

/// Reference 5x2 tree-to-cotree map of [`quasi6_graph`]: each cotree edge
/// as a signed path through the tree.
pub fn quasi6_reference_tree_to_cotree() -> DMatrix<f64> {
    DMatrix::from_row_slice(5, 2, &[1.0, 0.0, -1.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0])
}

/// Deterministic generator for the random families below.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed rooted tree on nodes 1..=n: every node except root 1
/// gets one in-edge from a lower-numbered parent, so node 1 reaches all.
pub fn random_rooted_tree(rng: &mut ChaCha8Rng, n: usize) -> Digraph {
    assert!(n >= 2, "a tree with edges needs at least 2 nodes");
    let pairs: Vec<(usize, usize)> = (2..=n).map(|v| (rng.gen_range(1..v), v)).collect();
    parse_digraph(n, &pairs).unwrap()
}

fn add_extra_edges(
    rng: &mut ChaCha8Rng,
    n: usize,
    pairs: &mut Vec<(usize, usize)>,
    max_edges: usize,
) {
    let mut existing: BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
    let possible = n * (n - 1);
    let budget = max_edges.min(possible).saturating_sub(pairs.len());
    let extras = rng.gen_range(0..=budget);
    let mut added = 0;
    // Rejection sampling terminates quickly: the budget keeps the graph
    // well below the complete digraph.
    while added < extras {
        let i = rng.gen_range(1..=n);
        let j = rng.gen_range(1..=n);
        if i != j && existing.insert((i, j)) {
            pairs.push((i, j));
            added += 1;
        }
    }
    pairs.shuffle(rng);
}

/// Random quasi-strongly connected digraph: a rooted tree plus extra
/// edges, N in 3..=8, L <= 14, edge order shuffled.
pub fn random_qsc_digraph(rng: &mut ChaCha8Rng) -> Digraph {
    let n = rng.gen_range(3..=8);
    let mut pairs: Vec<(usize, usize)> = (2..=n).map(|v| (rng.gen_range(1..v), v)).collect();
    add_extra_edges(rng, n, &mut pairs, 14);
    parse_digraph(n, &pairs).unwrap()
}

/// Random strongly connected digraph: a Hamiltonian cycle through a random
/// node permutation plus extra edges, N in 3..=8, L <= 14.
pub fn random_sc_digraph(rng: &mut ChaCha8Rng) -> Digraph {
    let n = rng.gen_range(3..=8);
    let mut perm: Vec<usize> = (1..=n).collect();
    perm.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> =
        (0..n).map(|i| (perm[i], perm[(i + 1) % n])).collect();
    add_extra_edges(rng, n, &mut pairs, 14);
    parse_digraph(n, &pairs).unwrap()
}

/// Random digraph made of two node-disjoint edge-bearing components; never
/// strongly connected, and its edge interconnection splits the same way
/// because edges in different components share no nodes.
pub fn random_disconnected_digraph(rng: &mut ChaCha8Rng) -> Digraph {
    let n1 = rng.gen_range(2..=4);
    let n2 = rng.gen_range(2..=4);
    let mut pairs: Vec<(usize, usize)> =
        (2..=n1).map(|v| (rng.gen_range(1..v), v)).collect();
    pairs.extend((2..=n2).map(|v| (n1 + rng.gen_range(1..v), n1 + v)));
    parse_digraph(n1 + n2, &pairs).unwrap()
}

/// Directed path 1 -> 2 -> ... -> n; its edge interconnection is an
/// acyclic cascade, so it is never strongly connected for n >= 3.
pub fn path_digraph(n: usize) -> Digraph {
    let pairs: Vec<(usize, usize)> = (1..n).map(|i| (i, i + 1)).collect();
    parse_digraph(n, &pairs).unwrap()
}

/// Edge ids (1-based) grouped by their initial node; each group sorted
/// ascending, groups sorted by their first edge. For a rooted tree these
/// must coincide with the strongly connected components of the edge
/// interconnection digraph.
pub fn sibling_groups(g: &Digraph) -> Vec<Vec<usize>> {
    let mut by_initial: std::collections::BTreeMap<usize, Vec<usize>> =
        std::collections::BTreeMap::new();
    for (idx, edge) in g.edges().iter().enumerate() {
        by_initial.entry(edge.initial).or_default().push(idx + 1);
    }
    let mut groups: Vec<Vec<usize>> = by_initial.into_values().collect();
    groups.sort_by_key(|grp| grp[0]);
    groups
}

/// Sorts a component list into the canonical form used for comparisons:
/// each component ascending, components ordered by first element.
pub fn normalize_components(mut components: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for c in &mut components {
        c.sort_unstable();
    }
    components.sort_by_key(|c| c[0]);
    components
}

/// Matrix exponential by scaling and squaring with a Taylor tail: scale
/// `m` until its max-abs-row-sum norm is at most 1/4, sum 20 Taylor terms
/// (remainder below 1e-30 at that norm), then square back. Independent of
/// the simulator's integrator in both algorithm and code path.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = m.nrows();
    assert_eq!(dim, m.ncols(), "exponential of a square matrix only");
    let norm = (0..dim)
        .map(|r| (0..dim).map(|c| m[(r, c)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let b = m * scale;
    let mut term = DMatrix::<f64>::identity(dim, dim);
    let mut sum = DMatrix::<f64>::identity(dim, dim);
    for k in 1..=20 {
        term = (&term * &b) / (k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod self_checks {
    use super::expm;
    use nalgebra::DMatrix;

    #[test]
    fn exponential_matches_closed_forms() {
        // Diagonal: entrywise exponentials.
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[
            -3.0, 0.5, 2.0,
        ]));
        let e = expm(&d);
        for (i, lambda) in [-3.0f64, 0.5, 2.0].into_iter().enumerate() {
            assert!((e[(i, i)] - lambda.exp()).abs() < 1e-12);
        }
        // Nilpotent: the series terminates, exp(N) = I + N.
        let n = DMatrix::from_row_slice(2, 2, &[0.0, 7.0, 0.0, 0.0]);
        let e = expm(&n);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 7.0, 0.0, 1.0]);
        assert!((e - expected).abs().max() < 1e-12);
    }
}
