//! Edge-interconnection digraph and the cyclic small-gain condition.
//!
//! Each edge `e_k` of the original digraph becomes a subsystem node `π_k`.
//! A directed arc `π_l -> π_k` records that the state of edge `l` enters the
//! agreement dynamics of edge `k`, which happens exactly when the edge
//! adjacency entry `A_e[k][l]` is nonzero: sibling edges influence each other
//! in both directions, while a child edge feeds only its parent. Robustness
//! of the interconnected system reduces to a condition on this digraph: the
//! composition of gains along every simple cycle must stay below identity,
//! which for linear gains `γ(s) = c·s` is a product of coefficients `< 1`.

use std::collections::BTreeMap;

use crate::algebra::EdgeAlgebra;
use crate::graph::{outgoing_edge_neighbors, tarjan_scc, Digraph};
use crate::scalar::{to_f64, Real};

/// Default bound on the number of simple cycles enumerated before aborting.
pub const DEFAULT_CYCLE_CAP: usize = 1_000_000;

/// Errors from interconnection analysis.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterconnectError {
    /// Cycle enumeration found more cycles than the configured cap.
    #[error("cycle enumeration aborted: more than {cap} simple cycles")]
    CycleCapExceeded { cap: usize },
    /// A gain lookup failed for an interconnection arc.
    #[error("no gain assigned to interconnection arc ({from} -> {to})")]
    MissingGain { from: usize, to: usize },
    /// A gain coefficient was zero, negative, or non-finite.
    #[error("invalid gain coefficient: {0}")]
    InvalidGain(String),
    /// Simple cycles have at least two nodes, so smaller bounds are misuse.
    #[error("cycle length bound must be at least 2, got {max_len}")]
    InvalidCycleLength { max_len: usize },
    /// The small-gain safety margin must leave a nonempty feasible set.
    #[error("small-gain margin must lie in [0, 1), got {margin}")]
    InvalidMargin { margin: f64 },
}

/// Digraph of edge subsystems: one node `π_k` per edge `e_k` of the origin.
///
/// `directed_edges` holds `(from, to)` pairs, 1-based in edge index, meaning
/// the dynamics of edge `to` depend on the state of edge `from`. The pair
/// `(l, k)` is present iff `A_e[k][l] != 0` with `l != k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeInterconnectionGraph {
    /// Number of subsystem nodes; equals the edge count of `origin`.
    pub node_count: usize,
    /// Influence arcs `(from, to)`, sorted lexicographically.
    pub directed_edges: Vec<(usize, usize)>,
    /// The digraph whose edges are the subsystem nodes.
    pub origin: Digraph,
}

impl EdgeInterconnectionGraph {
    /// Subsystems whose state enters the dynamics of `π_k`, ascending.
    pub fn in_neighbors(&self, k: usize) -> Vec<usize> {
        self.directed_edges
            .iter()
            .filter(|&&(_, to)| to == k)
            .map(|&(from, _)| from)
            .collect()
    }

    /// Subsystems influenced by the state of `π_l`, ascending.
    pub fn out_neighbors(&self, l: usize) -> Vec<usize> {
        self.directed_edges
            .iter()
            .filter(|&&(from, _)| from == l)
            .map(|&(_, to)| to)
            .collect()
    }

    /// 0-based out-adjacency lists with ascending targets.
    pub(crate) fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(from, to) in &self.directed_edges {
            adj[from - 1].push(to - 1);
        }
        adj
    }
}

/// Builds the edge-interconnection digraph of `g`.
///
/// The arc set is derived twice, once from the combinatorial sibling/child
/// rule and once from the off-diagonal support of the edge adjacency matrix,
/// and the two derivations are required to agree.
pub fn build_edge_interconnection<T: Real>(
    g: &Digraph,
    alg: &EdgeAlgebra<T>,
) -> EdgeInterconnectionGraph {
    let l = g.edge_count();
    assert_eq!(
        alg.edge_adjacency.nrows(),
        l,
        "edge algebra does not match the digraph"
    );
    let mut directed_edges = Vec::new();
    for k in 1..=l {
        for from in outgoing_edge_neighbors(g, k) {
            directed_edges.push((from, k));
        }
    }
    directed_edges.sort_unstable();
    let mut from_adjacency = Vec::new();
    for from in 1..=l {
        for to in 1..=l {
            if from != to && alg.edge_adjacency[(to - 1, from - 1)] != 0 {
                from_adjacency.push((from, to));
            }
        }
    }
    assert_eq!(
        directed_edges, from_adjacency,
        "edge adjacency support disagrees with the sibling/child rule"
    );
    EdgeInterconnectionGraph {
        node_count: l,
        directed_edges,
        origin: g.clone(),
    }
}

/// Strongly connected components of the interconnection digraph.
///
/// Components are listed in topological order of the condensation (sources
/// first), each as an ascending list of 1-based subsystem indices.
pub fn strongly_connected_components(ig: &EdgeInterconnectionGraph) -> Vec<Vec<usize>> {
    let mut components = tarjan_scc(&ig.out_adjacency());
    components.reverse();
    components
        .into_iter()
        .map(|mut c| {
            c.iter_mut().for_each(|v| *v += 1);
            c.sort_unstable();
            c
        })
        .collect()
}

/// Enumerates every simple cycle of length at most `max_len`, with the
/// default cap of [`DEFAULT_CYCLE_CAP`] on the total number of cycles found.
pub fn enumerate_simple_cycles(
    ig: &EdgeInterconnectionGraph,
    max_len: usize,
) -> Result<Vec<Vec<usize>>, InterconnectError> {
    enumerate_simple_cycles_capped(ig, max_len, DEFAULT_CYCLE_CAP)
}

/// Enumerates simple cycles by Johnson's elementary-circuit algorithm.
///
/// Cycles are emitted as 1-based node sequences starting at their smallest
/// node, grouped by that node in ascending order, so the output order is
/// deterministic and each cycle appears once up to rotation. `max_len` only
/// filters the output; the cap counts every cycle the graph contains, so an
/// `Err` means the graph itself has more than `cap` simple cycles.
pub fn enumerate_simple_cycles_capped(
    ig: &EdgeInterconnectionGraph,
    max_len: usize,
    cap: usize,
) -> Result<Vec<Vec<usize>>, InterconnectError> {
    if max_len < 2 {
        return Err(InterconnectError::InvalidCycleLength { max_len });
    }
    struct Frame {
        v: usize,
        next: usize,
        found: bool,
    }
    let n = ig.node_count;
    let adj = ig.out_adjacency();
    let mut cycles = Vec::new();
    let mut found_total = 0usize;
    for s in 0..n {
        // Induced subgraph on {s, ..., n-1}; lower nodes keep empty rows so
        // all indices stay global.
        let mut sub = vec![Vec::new(); n];
        for v in s..n {
            sub[v] = adj[v].iter().copied().filter(|&w| w >= s).collect();
        }
        let component = tarjan_scc(&sub)
            .into_iter()
            .find(|c| c.contains(&s))
            .expect("every node lies in one component");
        if component.len() < 2 {
            continue;
        }
        let mut in_component = vec![false; n];
        for &v in &component {
            in_component[v] = true;
        }
        let cadj: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if in_component[v] {
                    sub[v]
                        .iter()
                        .copied()
                        .filter(|&w| in_component[w])
                        .collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        // Johnson's blocked search: every cycle through s inside the
        // component, each visited node blocked until a cycle is confirmed
        // reachable through it again.
        let mut blocked = vec![false; n];
        let mut blocked_by: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut path = vec![s];
        blocked[s] = true;
        let mut frames = vec![Frame {
            v: s,
            next: 0,
            found: false,
        }];
        while let Some(top) = frames.last_mut() {
            let v = top.v;
            if top.next < cadj[v].len() {
                let w = cadj[v][top.next];
                top.next += 1;
                if w == s {
                    found_total += 1;
                    if found_total > cap {
                        return Err(InterconnectError::CycleCapExceeded { cap });
                    }
                    if path.len() <= max_len {
                        cycles.push(path.iter().map(|&u| u + 1).collect());
                    }
                    top.found = true;
                } else if !blocked[w] {
                    blocked[w] = true;
                    path.push(w);
                    frames.push(Frame {
                        v: w,
                        next: 0,
                        found: false,
                    });
                }
            } else {
                let found_here = top.found;
                if found_here {
                    unblock(v, &mut blocked, &mut blocked_by);
                } else {
                    for &w in &cadj[v] {
                        if !blocked_by[w].contains(&v) {
                            blocked_by[w].push(v);
                        }
                    }
                }
                path.pop();
                frames.pop();
                if let Some(parent) = frames.last_mut() {
                    parent.found |= found_here;
                }
            }
        }
    }
    Ok(cycles)
}

/// Unblocks `v` and, transitively, every node whose unblocking was deferred
/// until a cycle through `v` became possible again.
fn unblock(v: usize, blocked: &mut [bool], blocked_by: &mut [Vec<usize>]) {
    let mut work = vec![v];
    while let Some(u) = work.pop() {
        if !blocked[u] {
            continue;
        }
        blocked[u] = false;
        work.append(&mut blocked_by[u]);
    }
}

/// Linear gain coefficients on interconnection arcs: the arc `(l, k)` with
/// coefficient `c` represents the class-K gain `γ(s) = c·s` from the state
/// of subsystem `l` into subsystem `k`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GainAssignment<T: Real> {
    coefficients: BTreeMap<(usize, usize), T>,
}

impl<T: Real> GainAssignment<T> {
    /// Empty assignment.
    pub fn new() -> Self {
        Self {
            coefficients: BTreeMap::new(),
        }
    }

    /// Assigns the same coefficient to every arc of `ig`.
    pub fn uniform(ig: &EdgeInterconnectionGraph, c: T) -> Result<Self, InterconnectError> {
        validate_gain(c, || "uniform gain".to_string())?;
        Ok(Self {
            coefficients: ig
                .directed_edges
                .iter()
                .map(|&(from, to)| ((from, to), c))
                .collect(),
        })
    }

    /// Sets the coefficient on one arc, replacing any previous value.
    pub fn set(&mut self, from: usize, to: usize, c: T) -> Result<(), InterconnectError> {
        validate_gain(c, || format!("gain for ({from} -> {to})"))?;
        self.coefficients.insert((from, to), c);
        Ok(())
    }

    /// Coefficient on an arc, if assigned.
    pub fn get(&self, from: usize, to: usize) -> Option<T> {
        self.coefficients.get(&(from, to)).copied()
    }

    /// Coefficient on an arc, failing loudly when unassigned.
    pub fn coefficient(&self, from: usize, to: usize) -> Result<T, InterconnectError> {
        self.get(from, to)
            .ok_or(InterconnectError::MissingGain { from, to })
    }

    /// Number of assigned arcs.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    /// Whether no arc has a coefficient yet.
    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Iterates `((from, to), coefficient)` in ascending arc order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), T)> + '_ {
        self.coefficients.iter().map(|(&arc, &c)| (arc, c))
    }
}

fn validate_gain<T: Real>(
    c: T,
    describe: impl FnOnce() -> String,
) -> Result<(), InterconnectError> {
    if c > T::zero() && c.is_finite() {
        Ok(())
    } else {
        Err(InterconnectError::InvalidGain(format!(
            "{} must be strictly positive and finite",
            describe()
        )))
    }
}

/// Outcome of the cyclic small-gain check.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallGainReport<T: Real> {
    /// Whether every cycle product stays below `1 - margin`.
    pub satisfied: bool,
    /// The cycle with the largest gain product, if any cycle exists.
    pub worst_cycle: Option<Vec<usize>>,
    /// The largest gain product over all simple cycles.
    pub worst_product: Option<T>,
    /// Total number of simple cycles examined.
    pub cycle_count: usize,
}

/// Checks the cyclic small-gain condition: along every simple cycle of the
/// interconnection the product of gain coefficients must stay strictly below
/// `1 - margin`. An interconnection without cycles satisfies the condition
/// vacuously.
pub fn check_cyclic_small_gain<T: Real>(
    ig: &EdgeInterconnectionGraph,
    gains: &GainAssignment<T>,
    margin: T,
) -> Result<SmallGainReport<T>, InterconnectError> {
    if !(margin >= T::zero() && margin < T::one()) {
        return Err(InterconnectError::InvalidMargin {
            margin: to_f64(margin),
        });
    }
    for &(from, to) in &ig.directed_edges {
        gains.coefficient(from, to)?;
    }
    let cycles = enumerate_simple_cycles(ig, ig.node_count.max(2))?;
    let mut worst: Option<(Vec<usize>, T)> = None;
    for cycle in &cycles {
        let mut product = T::one();
        for (i, &from) in cycle.iter().enumerate() {
            let to = cycle[(i + 1) % cycle.len()];
            product *= gains.coefficient(from, to)?;
        }
        if worst.as_ref().is_none_or(|(_, best)| product > *best) {
            worst = Some((cycle.clone(), product));
        }
    }
    let (worst_cycle, worst_product) = match worst {
        Some((cycle, product)) => (Some(cycle), Some(product)),
        None => (None, None),
    };
    Ok(SmallGainReport {
        satisfied: worst_product.is_none_or(|p| p < T::one() - margin),
        worst_cycle,
        worst_product,
        cycle_count: cycles.len(),
    })
}
