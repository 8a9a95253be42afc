//! Digraph representation, incidence matrices, connectivity classification,
//! spanning-tree selection, and edge-neighborhood queries.
//!
//! Nodes are numbered `1..=N` and edges `1..=L` in input order; every matrix
//! in this crate indexes rows and columns by that order. All operations are
//! pure and deterministic.

use std::collections::{BTreeSet, HashMap, VecDeque};

use nalgebra::DMatrix;
use thiserror::Error;

/// A directed edge from `initial` to `terminal` (1-based node ids).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub initial: usize,
    pub terminal: usize,
}

/// Finite digraph with stable 1-based edge indexing.
///
/// Construction rejects self-loops, duplicate directed edges, and node ids
/// outside `1..=node_count`; adjacency entries are therefore 0/1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    node_count: usize,
    edges: Vec<Edge>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("node count must be at least 1")]
    EmptyNodeSet,
    #[error("edge {index} is a self-loop at node {node}")]
    SelfLoop { index: usize, node: usize },
    #[error("edge {index} duplicates edge {first} ({initial} -> {terminal})")]
    DuplicateEdge {
        index: usize,
        first: usize,
        initial: usize,
        terminal: usize,
    },
    #[error("edge {index} references node {node} outside 1..={node_count}")]
    NodeOutOfRange {
        index: usize,
        node: usize,
        node_count: usize,
    },
    #[error("node {node} outside 1..={node_count}")]
    RootOutOfRange { node: usize, node_count: usize },
    #[error("edge index {index} outside 1..={edge_count}")]
    EdgeIndexOutOfRange { index: usize, edge_count: usize },
    #[error("a spanning tree needs {expected} edges, got {got}")]
    WrongTreeSize { expected: usize, got: usize },
    #[error("tree repeats edge {index}")]
    RepeatedTreeEdge { index: usize },
    #[error("edges do not span the graph: node {node} is unreachable")]
    NotSpanning { node: usize },
    #[error("graph text line {line}: {message}")]
    Text { line: usize, message: String },
}

/// Builds a digraph, validating every edge and reporting the first offender.
pub fn parse_digraph(
    node_count: usize,
    edge_pairs: &[(usize, usize)],
) -> Result<Digraph, GraphError> {
    if node_count == 0 {
        return Err(GraphError::EmptyNodeSet);
    }
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::with_capacity(edge_pairs.len());
    for (pos, &(initial, terminal)) in edge_pairs.iter().enumerate() {
        let index = pos + 1;
        for node in [initial, terminal] {
            if node == 0 || node > node_count {
                return Err(GraphError::NodeOutOfRange {
                    index,
                    node,
                    node_count,
                });
            }
        }
        if initial == terminal {
            return Err(GraphError::SelfLoop {
                index,
                node: initial,
            });
        }
        if let Some(&first) = seen.get(&(initial, terminal)) {
            return Err(GraphError::DuplicateEdge {
                index,
                first,
                initial,
                terminal,
            });
        }
        seen.insert((initial, terminal), index);
        edges.push(Edge { initial, terminal });
    }
    Ok(Digraph { node_count, edges })
}

impl Digraph {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Returns edge `k` (1-based). Panics outside `1..=edge_count`.
    pub fn edge(&self, k: usize) -> Edge {
        assert!(
            k >= 1 && k <= self.edges.len(),
            "edge index {k} outside 1..={}",
            self.edges.len()
        );
        self.edges[k - 1]
    }

    /// Parses the graph text format: first line `N L`, then `L` lines
    /// `initial terminal`, 1-based. `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Digraph, GraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(GraphError::Text {
                    line,
                    message: format!("expected two integers, got {:?}", content),
                });
            }
            let a = fields[0].parse::<usize>().map_err(|_| GraphError::Text {
                line,
                message: format!("not a nonnegative integer: {:?}", fields[0]),
            })?;
            let b = fields[1].parse::<usize>().map_err(|_| GraphError::Text {
                line,
                message: format!("not a nonnegative integer: {:?}", fields[1]),
            })?;
            if header.is_none() {
                header = Some((a, b));
            } else {
                pairs.push((a, b));
            }
        }
        let (n, l) = header.ok_or(GraphError::Text {
            line: 0,
            message: "missing `N L` header line".to_string(),
        })?;
        if pairs.len() != l {
            return Err(GraphError::Text {
                line: 0,
                message: format!("header declares {l} edges, found {}", pairs.len()),
            });
        }
        parse_digraph(n, &pairs)
    }

    /// Renders the graph text format parsed by [`Digraph::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.node_count, self.edges.len());
        for e in &self.edges {
            out.push_str(&format!("{} {}\n", e.initial, e.terminal));
        }
        out
    }

    fn out_edges_by_node(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.node_count + 1];
        for (pos, e) in self.edges.iter().enumerate() {
            out[e.initial].push(pos + 1);
        }
        out
    }
}

/// Incidence matrices and degree/adjacency data of a digraph.
///
/// All entries are exact integers. The set keeps a copy of the edge list so
/// downstream constructions need no separate [`Digraph`] reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceSet {
    node_count: usize,
    edges: Vec<Edge>,
    /// E: one +1 (initial node) and one -1 (terminal node) per column.
    pub incidence: DMatrix<i64>,
    /// In-incidence E_in: the -1 part of E.
    pub in_incidence: DMatrix<i64>,
    /// Out-incidence E_out: the +1 part of E.
    pub out_incidence: DMatrix<i64>,
    /// Diagonal out-degree matrix.
    pub degree: DMatrix<i64>,
    /// 0/1 adjacency, `adjacency[(i,j)] = 1` iff edge (i+1) -> (j+1) exists.
    pub adjacency: DMatrix<i64>,
}

impl IncidenceSet {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
}

/// Splits the incidence matrix of `g` into its in/out parts and derives the
/// degree and adjacency matrices.
pub fn incidence_decomposition(g: &Digraph) -> IncidenceSet {
    let n = g.node_count();
    let l = g.edge_count();
    let mut incidence = DMatrix::<i64>::zeros(n, l);
    let mut in_incidence = DMatrix::<i64>::zeros(n, l);
    let mut out_incidence = DMatrix::<i64>::zeros(n, l);
    let mut degree = DMatrix::<i64>::zeros(n, n);
    let mut adjacency = DMatrix::<i64>::zeros(n, n);
    for (pos, e) in g.edges().iter().enumerate() {
        let (i, j) = (e.initial - 1, e.terminal - 1);
        incidence[(i, pos)] = 1;
        incidence[(j, pos)] = -1;
        out_incidence[(i, pos)] = 1;
        in_incidence[(j, pos)] = -1;
        degree[(i, i)] += 1;
        adjacency[(i, j)] = 1;
    }
    IncidenceSet {
        node_count: n,
        edges: g.edges().to_vec(),
        incidence,
        in_incidence,
        out_incidence,
        degree,
        adjacency,
    }
}

fn reachable_count(n: usize, adj: &[Vec<usize>], start: usize) -> usize {
    let mut seen = vec![false; n + 1];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count
}

/// True iff every node reaches every other node along directed paths.
pub fn is_strongly_connected(g: &Digraph) -> bool {
    let n = g.node_count();
    if n == 1 {
        return true;
    }
    let mut fwd = vec![Vec::new(); n + 1];
    let mut rev = vec![Vec::new(); n + 1];
    for e in g.edges() {
        fwd[e.initial].push(e.terminal);
        rev[e.terminal].push(e.initial);
    }
    reachable_count(n, &fwd, 1) == n && reachable_count(n, &rev, 1) == n
}

/// True iff the graph has a directed spanning tree (some root reaches all).
pub fn is_quasi_strongly_connected(g: &Digraph) -> bool {
    matches!(find_directed_spanning_tree(g, None, None), Ok(Some(_)))
}

/// A directed spanning tree: `tree_edges` reach every node from `root`;
/// `cotree_edges` is the complement in original edge order. Indices 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSelection {
    pub root: usize,
    pub tree_edges: Vec<usize>,
    pub cotree_edges: Vec<usize>,
}

/// Finds a directed spanning tree.
///
/// With `forced_tree`, validates that those edges span from some root (or
/// from `root` if given) and returns them in the given order. Otherwise
/// searches roots in ascending node order (or only `root`), growing the tree
/// breadth-first and taking the lowest-index usable edge first, so identical
/// inputs always yield identical selections. Returns `Ok(None)` iff no root
/// spans the graph, i.e. the graph is not quasi-strongly connected.
pub fn find_directed_spanning_tree(
    g: &Digraph,
    root: Option<usize>,
    forced_tree: Option<&[usize]>,
) -> Result<Option<TreeSelection>, GraphError> {
    let n = g.node_count();
    if let Some(r) = root {
        if r == 0 || r > n {
            return Err(GraphError::RootOutOfRange {
                node: r,
                node_count: n,
            });
        }
    }
    if let Some(tree) = forced_tree {
        return validate_forced_tree(g, root, tree).map(Some);
    }
    let out_edges = g.out_edges_by_node();
    let roots: Vec<usize> = match root {
        Some(r) => vec![r],
        None => (1..=n).collect(),
    };
    for r in roots {
        if let Some(sel) = bfs_tree(g, &out_edges, r) {
            return Ok(Some(sel));
        }
    }
    Ok(None)
}

fn bfs_tree(g: &Digraph, out_edges: &[Vec<usize>], root: usize) -> Option<TreeSelection> {
    let n = g.node_count();
    let mut visited = vec![false; n + 1];
    visited[root] = true;
    let mut queue = VecDeque::from([root]);
    let mut tree_edges = Vec::with_capacity(n - 1);
    while let Some(u) = queue.pop_front() {
        for &k in &out_edges[u] {
            let v = g.edge(k).terminal;
            if !visited[v] {
                visited[v] = true;
                tree_edges.push(k);
                queue.push_back(v);
            }
        }
    }
    if tree_edges.len() != n - 1 {
        return None;
    }
    Some(TreeSelection {
        root,
        tree_edges: tree_edges.clone(),
        cotree_edges: complement(g.edge_count(), &tree_edges),
    })
}

fn complement(edge_count: usize, tree_edges: &[usize]) -> Vec<usize> {
    let in_tree: BTreeSet<usize> = tree_edges.iter().copied().collect();
    (1..=edge_count).filter(|k| !in_tree.contains(k)).collect()
}

fn validate_forced_tree(
    g: &Digraph,
    root: Option<usize>,
    tree: &[usize],
) -> Result<TreeSelection, GraphError> {
    let n = g.node_count();
    let l = g.edge_count();
    if tree.len() != n - 1 {
        return Err(GraphError::WrongTreeSize {
            expected: n - 1,
            got: tree.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for &k in tree {
        if k == 0 || k > l {
            return Err(GraphError::EdgeIndexOutOfRange {
                index: k,
                edge_count: l,
            });
        }
        if !seen.insert(k) {
            return Err(GraphError::RepeatedTreeEdge { index: k });
        }
    }
    // The root must have no incoming tree edge; with N-1 edges at least one
    // such node exists. BFS from it finds every unreachable node.
    let start = match root {
        Some(r) => r,
        None => {
            let mut in_deg = vec![0usize; n + 1];
            for &k in tree {
                in_deg[g.edge(k).terminal] += 1;
            }
            (1..=n)
                .find(|&v| in_deg[v] == 0)
                .expect("a node without incoming tree edges always exists")
        }
    };
    let mut adj = vec![Vec::new(); n + 1];
    for &k in tree {
        let e = g.edge(k);
        adj[e.initial].push(e.terminal);
    }
    let mut visited = vec![false; n + 1];
    visited[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    if let Some(node) = (1..=n).find(|&v| !visited[v]) {
        return Err(GraphError::NotSpanning { node });
    }
    Ok(TreeSelection {
        root: start,
        tree_edges: tree.to_vec(),
        cotree_edges: complement(l, tree),
    })
}

/// Outgoing edge neighbors of edge `k` (1-based): edges sharing the initial
/// node of `e_k` (siblings) plus edges leaving the terminal node of `e_k`
/// (children). These are exactly the off-diagonal nonzero columns of row `k`
/// of the edge adjacency matrix.
///
/// Panics if `k` is outside `1..=edge_count`.
pub fn outgoing_edge_neighbors(g: &Digraph, k: usize) -> BTreeSet<usize> {
    let ek = g.edge(k);
    let mut neighbors = BTreeSet::new();
    for (pos, el) in g.edges().iter().enumerate() {
        let l = pos + 1;
        if l == k {
            continue;
        }
        if el.initial == ek.initial || el.initial == ek.terminal {
            neighbors.insert(l);
        }
    }
    neighbors
}

/// Tarjan's algorithm over a 0-based adjacency list, iterative so deep
/// graphs cannot overflow the call stack. Components are emitted in reverse
/// topological order of the condensation.
pub(crate) fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSET: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut frames: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0usize;
    let mut components = Vec::new();
    for start in 0..n {
        if index[start] != UNSET {
            continue;
        }
        index[start] = next_index;
        low[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;
        frames.push((start, 0));
        while let Some(&(v, child)) = frames.last() {
            if child < adj[v].len() {
                frames.last_mut().unwrap().1 += 1;
                let w = adj[v][child];
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    components.push(component);
                }
            }
        }
    }
    components
}

/// Strongly connected components of the node set, each sorted ascending,
/// listed in a topological order of the condensation: every edge between
/// distinct components goes from an earlier component to a later one.
pub fn node_strongly_connected_components(g: &Digraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.node_count()];
    for e in g.edges() {
        adj[e.initial - 1].push(e.terminal - 1);
    }
    let mut components = tarjan_scc(&adj);
    components.reverse();
    for c in &mut components {
        c.iter_mut().for_each(|v| *v += 1);
        c.sort_unstable();
    }
    components
}

/// Number of strongly connected components with no edge leaving them. These
/// trap the dynamics `dx = -L_G x`: the rank of both Laplacians is governed
/// by this count, not by connectivity alone.
pub fn terminal_component_count(g: &Digraph) -> usize {
    let components = node_strongly_connected_components(g);
    let mut membership = vec![0usize; g.node_count() + 1];
    for (ci, c) in components.iter().enumerate() {
        for &v in c {
            membership[v] = ci;
        }
    }
    let mut terminal = vec![true; components.len()];
    for e in g.edges() {
        if membership[e.initial] != membership[e.terminal] {
            terminal[membership[e.initial]] = false;
        }
    }
    terminal.iter().filter(|&&t| t).count()
}

/// Nodes with no outgoing edge, ascending.
pub fn sink_nodes(g: &Digraph) -> Vec<usize> {
    let mut has_out = vec![false; g.node_count() + 1];
    for e in g.edges() {
        has_out[e.initial] = true;
    }
    (1..=g.node_count()).filter(|&v| !has_out[v]).collect()
}

/// Weakly connected components (edge direction ignored), each sorted
/// ascending, ordered by smallest member.
pub fn weakly_connected_components(g: &Digraph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n + 1];
    for e in g.edges() {
        adj[e.initial].push(e.terminal);
        adj[e.terminal].push(e.initial);
    }
    let mut visited = vec![false; n + 1];
    let mut components = Vec::new();
    for start in 1..=n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut component = vec![start];
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !visited[v] {
                    visited[v] = true;
                    component.push(v);
                    queue.push_back(v);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{quasi6_graph, strong6_graph, two_cycle_with_leaves_graph};

    #[test]
    fn single_edge_parses() {
        let g = parse_digraph(2, &[(1, 2)]).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge(1), Edge { initial: 1, terminal: 2 });
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert_eq!(
            parse_digraph(3, &[(1, 1)]),
            Err(GraphError::SelfLoop { index: 1, node: 1 })
        );
        assert_eq!(
            parse_digraph(3, &[(1, 2), (1, 2)]),
            Err(GraphError::DuplicateEdge {
                index: 2,
                first: 1,
                initial: 1,
                terminal: 2
            })
        );
        assert_eq!(
            parse_digraph(3, &[(1, 4)]),
            Err(GraphError::NodeOutOfRange {
                index: 1,
                node: 4,
                node_count: 3
            })
        );
        assert_eq!(parse_digraph(0, &[]), Err(GraphError::EmptyNodeSet));
    }

    #[test]
    fn six_agent_fixtures_parse() {
        let strong = strong6_graph();
        assert_eq!(strong.node_count(), 6);
        assert_eq!(strong.edge_count(), 8);
        let quasi = quasi6_graph();
        assert_eq!(quasi.node_count(), 6);
        assert_eq!(quasi.edge_count(), 7);
    }

    #[test]
    fn incidence_of_single_edge() {
        let g = parse_digraph(2, &[(1, 2)]).unwrap();
        let inc = incidence_decomposition(&g);
        assert_eq!(inc.incidence, DMatrix::from_column_slice(2, 1, &[1, -1]));
        assert_eq!(inc.out_incidence, DMatrix::from_column_slice(2, 1, &[1, 0]));
        assert_eq!(inc.in_incidence, DMatrix::from_column_slice(2, 1, &[0, -1]));
    }

    #[test]
    fn incidence_split_recomposes() {
        for g in [strong6_graph(), quasi6_graph(), two_cycle_with_leaves_graph()] {
            let inc = incidence_decomposition(&g);
            assert_eq!(&inc.in_incidence + &inc.out_incidence, inc.incidence);
            for k in 0..g.edge_count() {
                let col = inc.incidence.column(k);
                assert_eq!(col.iter().sum::<i64>(), 0);
                assert_eq!(inc.out_incidence.column(k).iter().sum::<i64>(), 1);
                assert_eq!(inc.in_incidence.column(k).iter().sum::<i64>(), -1);
            }
            for i in 0..g.node_count() {
                assert_eq!(
                    inc.degree[(i, i)],
                    inc.out_incidence.row(i).iter().sum::<i64>()
                );
            }
        }
    }

    #[test]
    fn strong_connectivity_classification() {
        assert!(is_strongly_connected(&strong6_graph()));
        // Node 4 has no outgoing edge.
        assert!(!is_strongly_connected(&quasi6_graph()));
        assert!(is_strongly_connected(&parse_digraph(1, &[]).unwrap()));
        assert!(!is_strongly_connected(&two_cycle_with_leaves_graph()));
        assert!(is_quasi_strongly_connected(&quasi6_graph()));
        assert!(is_quasi_strongly_connected(&two_cycle_with_leaves_graph()));
    }

    #[test]
    fn spanning_tree_of_path_is_itself() {
        let g = parse_digraph(3, &[(1, 2), (2, 3)]).unwrap();
        let sel = find_directed_spanning_tree(&g, None, None).unwrap().unwrap();
        assert_eq!(sel.root, 1);
        assert_eq!(sel.tree_edges, vec![1, 2]);
        assert!(sel.cotree_edges.is_empty());
    }

    #[test]
    fn spanning_tree_absent_for_disconnected_graph() {
        let g = parse_digraph(2, &[]).unwrap();
        assert_eq!(find_directed_spanning_tree(&g, None, None).unwrap(), None);
    }

    #[test]
    fn quasi6_default_tree_matches_forced_tree() {
        let g = quasi6_graph();
        let auto = find_directed_spanning_tree(&g, None, None).unwrap().unwrap();
        assert_eq!(auto.root, 1);
        assert_eq!(auto.tree_edges, vec![1, 2, 3, 4, 7]);
        assert_eq!(auto.cotree_edges, vec![5, 6]);
        let forced = find_directed_spanning_tree(&g, None, Some(&[1, 2, 3, 4, 7]))
            .unwrap()
            .unwrap();
        assert_eq!(forced, auto);
    }

    #[test]
    fn forced_tree_rejection_names_unreachable_node() {
        let g = quasi6_graph();
        // Dropping e1 = (1,2) for e6 = (3,5) leaves nodes 2 and 4 without an
        // incoming path from the candidate root 1.
        let err = find_directed_spanning_tree(&g, None, Some(&[2, 3, 4, 6, 7])).unwrap_err();
        assert_eq!(err, GraphError::NotSpanning { node: 2 });
        let err = find_directed_spanning_tree(&g, None, Some(&[1, 2, 3])).unwrap_err();
        assert_eq!(err, GraphError::WrongTreeSize { expected: 5, got: 3 });
        let err = find_directed_spanning_tree(&g, None, Some(&[1, 1, 3, 4, 7])).unwrap_err();
        assert_eq!(err, GraphError::RepeatedTreeEdge { index: 1 });
    }

    #[test]
    fn deterministic_tree_selection() {
        let g = strong6_graph();
        let a = find_directed_spanning_tree(&g, None, None).unwrap().unwrap();
        let b = find_directed_spanning_tree(&g, None, None).unwrap().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_neighbors_parent_child_and_siblings() {
        let path = parse_digraph(3, &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(outgoing_edge_neighbors(&path, 1), BTreeSet::from([2]));
        assert_eq!(outgoing_edge_neighbors(&path, 2), BTreeSet::new());

        let star = parse_digraph(3, &[(1, 2), (1, 3)]).unwrap();
        assert_eq!(outgoing_edge_neighbors(&star, 1), BTreeSet::from([2]));
        assert_eq!(outgoing_edge_neighbors(&star, 2), BTreeSet::from([1]));

        assert_eq!(
            outgoing_edge_neighbors(&strong6_graph(), 1),
            BTreeSet::from([2, 4])
        );
    }

    #[test]
    fn components_of_fixtures() {
        let comps = node_strongly_connected_components(&strong6_graph());
        assert_eq!(comps, vec![vec![1, 2, 3, 4, 5, 6]]);
        assert_eq!(terminal_component_count(&strong6_graph()), 1);

        // The quasi fixture is acyclic, so components are singletons and the
        // listing must be a topological order.
        let quasi = quasi6_graph();
        let comps = node_strongly_connected_components(&quasi);
        assert_eq!(comps.len(), 6);
        let mut position = [0usize; 7];
        for (ci, c) in comps.iter().enumerate() {
            assert_eq!(c.len(), 1);
            position[c[0]] = ci;
        }
        for e in quasi.edges() {
            assert!(position[e.initial] < position[e.terminal]);
        }
        assert_eq!(terminal_component_count(&quasi), 2);
        assert_eq!(sink_nodes(&quasi), vec![4, 6]);
        assert_eq!(sink_nodes(&strong6_graph()), Vec::<usize>::new());

        let split = parse_digraph(4, &[(1, 2), (3, 4)]).unwrap();
        assert_eq!(
            weakly_connected_components(&split),
            vec![vec![1, 2], vec![3, 4]]
        );
        assert_eq!(
            weakly_connected_components(&quasi),
            vec![vec![1, 2, 3, 4, 5, 6]]
        );
    }

    #[test]
    fn two_cycle_components() {
        let g = two_cycle_with_leaves_graph();
        let comps = node_strongly_connected_components(&g);
        assert!(comps.contains(&vec![1, 2]));
        assert_eq!(comps.len(), 3);
        // Leaves 3 and 4 are terminal; the {1,2} cycle drains into them.
        assert_eq!(terminal_component_count(&g), 2);
    }

    #[test]
    fn text_format_round_trips() {
        let g = strong6_graph();
        let text = g.to_text();
        assert_eq!(Digraph::from_text(&text).unwrap(), g);
        let commented = "# header\n3 2 # N L\n1 2\n# middle\n2 3\n";
        let parsed = Digraph::from_text(commented).unwrap();
        assert_eq!(parsed, parse_digraph(3, &[(1, 2), (2, 3)]).unwrap());
    }

    #[test]
    fn text_format_rejects_malformed_input() {
        assert!(matches!(
            Digraph::from_text("3\n1 2\n"),
            Err(GraphError::Text { line: 1, .. })
        ));
        assert!(matches!(
            Digraph::from_text("2 2\n1 2\n"),
            Err(GraphError::Text { .. })
        ));
        assert!(matches!(
            Digraph::from_text("2 1\n1 two\n"),
            Err(GraphError::Text { line: 2, .. })
        ));
    }
}
