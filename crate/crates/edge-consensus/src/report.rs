//! Executable verification report for a digraph: every structural identity
//! behind the edge-Laplacian construction is recomputed and graded.
//!
//! The report checks the incidence split, both graph-Laplacian
//! factorizations, the edge-Laplacian identity, agreement of the nonzero
//! Laplacian spectra (exact integer traces plus a floating-point
//! cross-check), the combinatorial prediction of the zero eigenvalue's rank,
//! nullity, and semisimplicity, the spanning-tree factorization and
//! pseudoinverse when a tree exists, and the connectivity transfer from the
//! graph to its edge interconnection.

use thiserror::Error;

use crate::algebra::{
    build_edge_algebra, matrix_to_real, max_abs_entry, nonzero_spectra_match_exactly,
    nonzero_spectrum, penrose_residuals, predicted_zero_eigen_structure, tree_partition,
    zero_eigen_structure, AlgebraError, complex_multisets_match,
};
use crate::graph::{
    find_directed_spanning_tree, incidence_decomposition, is_quasi_strongly_connected,
    is_strongly_connected, sink_nodes, terminal_component_count, weakly_connected_components,
    Digraph, GraphError, TreeSelection,
};
use crate::interconnect::{
    build_edge_interconnection, enumerate_simple_cycles_capped, strongly_connected_components,
    InterconnectError, DEFAULT_CYCLE_CAP,
};
use crate::scalar::{real, to_f64, Real};

/// Tolerance for the spanning-tree factorization residual.
pub const TREE_FACTORIZATION_TOL: f64 = 1e-10;
/// Tolerance for the four pseudoinverse defining identities.
pub const PENROSE_TOL: f64 = 1e-8;
/// Tolerance for the floating-point spectrum comparison. Defective
/// eigenvalues split under rounding on the order of the float epsilon taken
/// to the reciprocal of the block size, which exceeds any fixed tolerance
/// once blocks reach size three; the exact integer-trace comparison is the
/// authoritative check, and a float miss with exact agreement is graded as
/// skipped rather than failed.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-6;

/// Errors preparing a report (the checks themselves never error: failures
/// are report content).
#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One graded check with a human-readable explanation.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

/// Structured verification result.
#[derive(Clone, Debug)]
pub struct VerifyReport<T: Real> {
    pub node_count: usize,
    pub edge_count: usize,
    pub strongly_connected: bool,
    pub quasi_strongly_connected: bool,
    pub weak_component_count: usize,
    pub terminal_component_count: usize,
    pub sink_count: usize,
    /// The spanning tree the tree checks ran against, if any exists.
    pub tree: Option<TreeSelection>,
    /// Smallest nonzero eigenvalue of the tree-to-cotree coupling, when a
    /// tree with a nonempty cotree exists.
    pub lambda_bar_1: Option<T>,
    /// Sizes of the interconnection's strongly connected components.
    pub interconnection_component_sizes: Vec<usize>,
    /// Simple cycle count of the interconnection; `None` above the cap.
    pub simple_cycle_count: Option<usize>,
    pub checks: Vec<CheckOutcome>,
}

impl<T: Real> VerifyReport<T> {
    /// True when no check failed (skipped checks do not fail).
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    /// Renders the report as plain text, one line per check.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "digraph: {} nodes, {} edges\n",
            self.node_count, self.edge_count
        ));
        let class = if self.strongly_connected {
            "strongly connected"
        } else if self.quasi_strongly_connected {
            "quasi-strongly connected"
        } else {
            "neither strongly nor quasi-strongly connected"
        };
        out.push_str(&format!(
            "connectivity: {class}; {} weak component(s), {} terminal component(s), {} sink(s)\n",
            self.weak_component_count, self.terminal_component_count, self.sink_count
        ));
        match &self.tree {
            Some(sel) => out.push_str(&format!(
                "tree: root {}, edges {:?}, cotree {:?}\n",
                sel.root, sel.tree_edges, sel.cotree_edges
            )),
            None => out.push_str("tree: none\n"),
        }
        let cycles = match self.simple_cycle_count {
            Some(c) => c.to_string(),
            None => format!("more than {DEFAULT_CYCLE_CAP}"),
        };
        out.push_str(&format!(
            "interconnection: {} nodes, component sizes {:?}, simple cycles: {cycles}\n",
            self.edge_count, self.interconnection_component_sizes
        ));
        for check in &self.checks {
            let tag = match check.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "SKIP",
            };
            out.push_str(&format!("{tag} {}: {}\n", check.name, check.detail));
        }
        let failed = self
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .count();
        if failed == 0 {
            out.push_str("result: all checks passed\n");
        } else {
            out.push_str(&format!("result: {failed} check(s) failed\n"));
        }
        out
    }
}

fn graded(ok: bool, name: &'static str, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        detail,
    }
}

fn skipped(name: &'static str, reason: String) -> CheckOutcome {
    CheckOutcome {
        name,
        status: CheckStatus::Skipped,
        detail: reason,
    }
}

/// Recomputes and grades every structural identity for `g`.
///
/// `forced_tree` pins the spanning tree by edge ids; otherwise one is
/// searched automatically. An invalid forced tree is a hard error, not a
/// failed check.
pub fn verify_graph<T: Real>(
    g: &Digraph,
    forced_tree: Option<&[usize]>,
) -> Result<VerifyReport<T>, ReportError> {
    let inc = incidence_decomposition(g);
    let alg = build_edge_algebra::<T>(&inc)?;
    let n = g.node_count();
    let l = g.edge_count();

    let strongly = is_strongly_connected(g);
    let quasi = is_quasi_strongly_connected(g);
    let weak = weakly_connected_components(g);
    let terminal = terminal_component_count(g);
    let sinks = sink_nodes(g);

    let selection = match forced_tree {
        Some(ids) => find_directed_spanning_tree(g, None, Some(ids))?,
        None => find_directed_spanning_tree(g, None, None)?,
    };
    let partition = match &selection {
        Some(sel) => Some(tree_partition(&inc, sel)?),
        None => None,
    };

    let ig = build_edge_interconnection(g, &alg);
    let component_sizes: Vec<usize> = strongly_connected_components(&ig)
        .iter()
        .map(|c| c.len())
        .collect();
    // The length bound is always valid here, so the only possible error is
    // the cycle cap; reported as an open count rather than a failure.
    let cycle_count = match enumerate_simple_cycles_capped(&ig, l.max(2), DEFAULT_CYCLE_CAP) {
        Ok(cycles) => Some(cycles.len()),
        Err(InterconnectError::CycleCapExceeded { .. }) => None,
        Err(other) => unreachable!("cycle enumeration cannot fail otherwise: {other}"),
    };

    let mut checks = Vec::new();

    checks.push(graded(
        quasi,
        "quasi-strong connectivity",
        match &selection {
            Some(sel) => format!(
                "directed spanning tree from root {} using edges {:?}",
                sel.root, sel.tree_edges
            ),
            None => format!(
                "no directed spanning tree exists; {} weak component(s)",
                weak.len()
            ),
        },
    ));

    let split = &inc.in_incidence + &inc.out_incidence;
    checks.push(graded(
        split == inc.incidence,
        "incidence split",
        "E equals the sum of its in- and out-incidence parts entrywise".to_string(),
    ));

    let lg_outer = &inc.out_incidence * inc.incidence.transpose();
    let lg_degree = &inc.degree - &inc.adjacency;
    checks.push(graded(
        lg_outer == lg_degree,
        "graph laplacian factorization",
        "out-incidence times incidence transpose equals out-degree minus adjacency".to_string(),
    ));

    let le = inc.incidence.transpose() * &inc.out_incidence;
    let mut identity_plus_ae = alg.edge_adjacency.clone();
    for k in 0..l {
        identity_plus_ae[(k, k)] += 1;
    }
    checks.push(graded(
        le == identity_plus_ae,
        "edge laplacian identity",
        "edge Laplacian equals identity plus edge adjacency entrywise".to_string(),
    ));

    let disconnected_reason = (weak.len() > 1).then(|| {
        format!(
            "spectrum comparison assumes a weakly connected graph; this one has {} components",
            weak.len()
        )
    });
    match &disconnected_reason {
        Some(reason) => {
            checks.push(skipped("nonzero spectrum equality (exact)", reason.clone()));
            checks.push(skipped("nonzero spectrum equality (float)", reason.clone()));
        }
        None => {
            let exact = nonzero_spectra_match_exactly(&inc)?;
            checks.push(graded(
                exact,
                "nonzero spectrum equality (exact)",
                "power-sum traces of both Laplacians agree through the maximum matrix size"
                    .to_string(),
            ));
            let tol = real::<T>(crate::algebra::DEFAULT_EIGEN_TOL);
            match (
                nonzero_spectrum(&alg.graph_laplacian, tol),
                nonzero_spectrum(&alg.edge_laplacian, tol),
            ) {
                (Ok(sg), Ok(se)) => {
                    let matched =
                        complex_multisets_match(&sg, &se, real::<T>(SPECTRUM_MATCH_TOL));
                    // Defective eigenvalues of multiplicity m split by roughly
                    // eps^(1/m) under finite precision, which exceeds the
                    // tolerance for m >= 3; the exact check above is the
                    // authority, so a miss with exact agreement is inconclusive
                    // rather than a failure.
                    if !matched && exact {
                        checks.push(skipped(
                            "nonzero spectrum equality (float)",
                            format!(
                                "clustered eigenvalues split beyond {SPECTRUM_MATCH_TOL:e} \
                                 under finite precision; the exact check is authoritative"
                            ),
                        ));
                    } else {
                        checks.push(graded(
                            matched,
                            "nonzero spectrum equality (float)",
                            format!(
                                "{} vs {} nonzero eigenvalues matched within {SPECTRUM_MATCH_TOL:e}",
                                sg.len(),
                                se.len()
                            ),
                        ));
                    }
                }
                _ => checks.push(skipped(
                    "nonzero spectrum equality (float)",
                    "eigendecomposition did not converge".to_string(),
                )),
            }
        }
    }

    let predicted = predicted_zero_eigen_structure(g);
    let measured = zero_eigen_structure(&alg);
    let graph_rank = n - terminal;
    let rank_note = if terminal == 1 {
        format!(" (equals N - 1 = {} by the unique terminal component)", n - 1)
    } else {
        String::new()
    };
    checks.push(graded(
        measured.rank == predicted.rank && measured.nullity == predicted.nullity,
        "zero eigenvalue structure",
        format!(
            "edge Laplacian rank {} nullity {} (predicted {} and {}); graph Laplacian rank {graph_rank}{rank_note}",
            measured.rank, measured.nullity, predicted.rank, predicted.nullity
        ),
    ));
    checks.push(graded(
        measured.semisimple == predicted.semisimple,
        "zero eigenvalue semisimplicity",
        format!(
            "rank of the squared edge Laplacian {} the rank of the edge Laplacian; predicted {}",
            if measured.semisimple { "matches" } else { "drops below" },
            if predicted.semisimple { "semisimple" } else { "defective" }
        ),
    ));

    let mut lambda_bar_1 = None;
    match &partition {
        Some(tp) => {
            let residual = max_abs_entry(
                &(&tp.tree_incidence * &tp.tree_to_cotree - &tp.cotree_incidence),
            );
            checks.push(graded(
                residual <= real::<T>(TREE_FACTORIZATION_TOL),
                "spanning tree factorization",
                format!(
                    "cotree incidence reconstruction residual {:.3e} (tolerance {TREE_FACTORIZATION_TOL:e})",
                    to_f64(residual)
                ),
            ));
            let e_real = matrix_to_real::<T>(&inc.incidence);
            let worst = penrose_residuals(&e_real, &tp.incidence_pinv)
                .into_iter()
                .fold(T::zero(), |a, r| a.max(r));
            checks.push(graded(
                worst <= real::<T>(PENROSE_TOL),
                "incidence pseudoinverse",
                format!(
                    "worst of the four defining residuals {:.3e} (tolerance {PENROSE_TOL:e})",
                    to_f64(worst)
                ),
            ));
            lambda_bar_1 = tp.lambda_bar_1;
            checks.push(CheckOutcome {
                name: "tree-to-cotree coupling",
                status: CheckStatus::Pass,
                detail: match tp.lambda_bar_1 {
                    Some(v) => format!("smallest nonzero coupling eigenvalue {}", to_f64(v)),
                    None => "empty cotree: every edge is a tree edge".to_string(),
                },
            });
        }
        None => {
            let reason = "no directed spanning tree exists".to_string();
            checks.push(skipped("spanning tree factorization", reason.clone()));
            checks.push(skipped("incidence pseudoinverse", reason.clone()));
            checks.push(skipped("tree-to-cotree coupling", reason));
        }
    }

    checks.push(CheckOutcome {
        name: "interconnection structure",
        status: CheckStatus::Pass,
        detail: format!(
            "{} strongly connected component(s) of sizes {:?}; simple cycles: {}",
            component_sizes.len(),
            component_sizes,
            match cycle_count {
                Some(c) => c.to_string(),
                None => format!("more than {DEFAULT_CYCLE_CAP}"),
            }
        ),
    });

    let ig_strong = component_sizes.len() == 1;
    if strongly {
        checks.push(graded(
            ig_strong,
            "strong connectivity transfer",
            "a strongly connected graph must yield a strongly connected interconnection"
                .to_string(),
        ));
    } else {
        checks.push(skipped(
            "strong connectivity transfer",
            format!(
                "graph is not strongly connected; the implication only runs forward \
                 (interconnection has {} component(s))",
                component_sizes.len()
            ),
        ));
    }

    Ok(VerifyReport {
        node_count: n,
        edge_count: l,
        strongly_connected: strongly,
        quasi_strongly_connected: quasi,
        weak_component_count: weak.len(),
        terminal_component_count: terminal,
        sink_count: sinks.len(),
        tree: selection,
        lambda_bar_1,
        interconnection_component_sizes: component_sizes,
        simple_cycle_count: cycle_count,
        checks,
    })
}
