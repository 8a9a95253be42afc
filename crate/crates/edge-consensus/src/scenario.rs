//! Scenario text format: parsing, validation, canonical rendering, bundled
//! reference configurations, and the JSON run summary.
//!
//! # Grammar
//!
//! Scenarios are line-oriented text. `#` starts a comment anywhere on a
//! line; blank lines are ignored. A line is either a section header
//! `[name]` or an assignment `key = value` belonging to the most recent
//! section. Sections and keys may appear in any order but never twice;
//! unknown sections and keys are rejected with their line number.
//!
//! Sections and keys (`*` marks optional):
//!
//! ```text
//! [graph]        nodes = N and edges = (a,b) (c,d) ...; or file = path to
//!                a graph text file ("N L" header, then one "a b" per line),
//!                resolved relative to the scenario file
//! [mode]         mode = strong | quasi | open
//! [tree]*        edges = k1 k2 ... (edge ids); root* = node id
//! [dynamics]     kind = zero | linear | chua
//!                zero:   state_dim = n
//!                linear: state_dim = n, matrix = row; row; ... (n*n entries)
//!                chua:   zeta, chi, a, b (state dimension 3 implied)
//! [controller]*  eta, xi (number, or auto = noise bound * sqrt(state_dim)),
//!                sigma (one value broadcast to all edges, or one per edge),
//!                gain (uniform) or gains = (l,k):c ... (per ordered pair),
//!                tree_to_cotree_gain*, epsilon* (default 1e-6),
//!                alpha_lower* / alpha_upper* (default 1);
//!                the whole section may be omitted in open mode
//! [noise]        bound, seed
//! [integrator]   dt, t_final
//! [initial]      kind = random_box (low, high, seed)
//!                or kind = explicit (agent_1 = v1 v2 ..., one key per agent)
//! [output]*      path*; format* = csv | json (default csv)
//! ```
//!
//! Numbers must be finite; seeds and ids are nonnegative integers. Loading
//! validates the scenario end to end, including connectivity, gain
//! coverage, cyclic small-gain, and the tree-to-cotree gain bound.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde_json::{json, Value};
use thiserror::Error;

use crate::controller::ControllerConfig;
use crate::dynamics::{DynamicsKind, DynamicsSpec};
use crate::graph::{find_directed_spanning_tree, parse_digraph, Digraph};
use crate::interconnect::GainAssignment;
use crate::sim::{
    prepare, steady_state_max_edge_norm, ConsensusMetrics, InitialSpec, IntegratorSpec, Mode,
    NoiseSpec, Scenario, SimError, SimResult,
};

/// Bundled strongly connected six-agent reference scenario.
pub const STRONG_6AGENT: &str = include_str!("../../../scenarios/strong_6agent.scn");
/// Bundled quasi-strongly connected six-agent reference scenario.
pub const QUASI_6AGENT: &str = include_str!("../../../scenarios/quasi_6agent.scn");

/// Resolves a bundled scenario by name.
pub fn bundled_scenario(name: &str) -> Option<&'static str> {
    match name {
        "strong_6agent" => Some(STRONG_6AGENT),
        "quasi_6agent" => Some(QUASI_6AGENT),
        _ => None,
    }
}

/// Names accepted by [`bundled_scenario`].
pub const BUNDLED_SCENARIO_NAMES: [&str; 2] = ["strong_6agent", "quasi_6agent"];

/// Result serialization format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Output preferences from the `[output]` section.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: OutputFormat,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            path: None,
            format: OutputFormat::Csv,
        }
    }
}

/// A parsed and fully validated scenario file.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioDocument {
    pub scenario: Scenario<f64>,
    pub output: OutputSpec,
}

/// Errors from loading scenario text.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{field}: {message}")]
    Semantic { field: String, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn parse_err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

fn sem(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Semantic {
        field: field.into(),
        message: message.into(),
    }
}

const SECTION_NAMES: [&str; 9] = [
    "graph",
    "mode",
    "tree",
    "dynamics",
    "controller",
    "noise",
    "integrator",
    "initial",
    "output",
];

type Entries = BTreeMap<String, (usize, String)>;

struct Section {
    name: &'static str,
    entries: Entries,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, value)| value)
    }

    fn take_required(&mut self, key: &str) -> Result<String, ScenarioError> {
        self.take(key)
            .ok_or_else(|| sem(format!("{}.{key}", self.name), "missing required key"))
    }

    /// Rejects any key not consumed by the section's resolver.
    fn finish(self) -> Result<(), ScenarioError> {
        match self.entries.into_iter().next() {
            Some((key, (line, _))) => Err(parse_err(
                line,
                format!("unknown key {key:?} in [{}]", self.name),
            )),
            None => Ok(()),
        }
    }
}

fn split_sections(text: &str) -> Result<BTreeMap<&'static str, Entries>, ScenarioError> {
    let mut sections: BTreeMap<&'static str, Entries> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line, "section header must look like [name]"))?
                .trim();
            let Some(&known) = SECTION_NAMES.iter().find(|&&s| s == name) else {
                return Err(parse_err(line, format!("unknown section [{name}]")));
            };
            if sections.contains_key(known) {
                return Err(parse_err(line, format!("duplicate section [{known}]")));
            }
            sections.insert(known, Entries::new());
            current = Some(known);
        } else if let Some((key, value)) = content.split_once('=') {
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(parse_err(line, "empty key"));
            }
            let Some(section) = current else {
                return Err(parse_err(line, "assignment before any [section] header"));
            };
            let entries = sections.get_mut(section).expect("current section exists");
            if entries
                .insert(key.to_string(), (line, value.to_string()))
                .is_some()
            {
                return Err(parse_err(
                    line,
                    format!("duplicate key {key:?} in [{section}]"),
                ));
            }
        } else {
            return Err(parse_err(line, "expected [section] or key = value"));
        }
    }
    Ok(sections)
}

fn parse_f64(field: &str, s: &str) -> Result<f64, ScenarioError> {
    let v: f64 = s
        .parse()
        .map_err(|_| sem(field, format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(sem(field, format!("must be finite, got {s:?}")));
    }
    Ok(v)
}

fn parse_usize(field: &str, s: &str) -> Result<usize, ScenarioError> {
    s.parse()
        .map_err(|_| sem(field, format!("not a nonnegative integer: {s:?}")))
}

fn parse_u64(field: &str, s: &str) -> Result<u64, ScenarioError> {
    s.parse()
        .map_err(|_| sem(field, format!("not a nonnegative integer: {s:?}")))
}

fn parse_f64_list(field: &str, s: &str) -> Result<Vec<f64>, ScenarioError> {
    s.split_whitespace().map(|tok| parse_f64(field, tok)).collect()
}

fn parse_usize_list(field: &str, s: &str) -> Result<Vec<usize>, ScenarioError> {
    s.split_whitespace()
        .map(|tok| parse_usize(field, tok))
        .collect()
}

fn parse_pair(field: &str, tok: &str) -> Result<(usize, usize), ScenarioError> {
    let inner = tok
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| sem(field, format!("token {tok:?} must look like (a,b)")))?;
    let (a, b) = inner
        .split_once(',')
        .ok_or_else(|| sem(field, format!("token {tok:?} must look like (a,b)")))?;
    Ok((
        parse_usize(field, a.trim())?,
        parse_usize(field, b.trim())?,
    ))
}

fn parse_pair_list(field: &str, s: &str) -> Result<Vec<(usize, usize)>, ScenarioError> {
    s.split_whitespace()
        .map(|tok| parse_pair(field, tok))
        .collect()
}

type ArcGain = ((usize, usize), f64);

fn parse_arc_gains(field: &str, s: &str) -> Result<Vec<ArcGain>, ScenarioError> {
    s.split_whitespace()
        .map(|tok| {
            let (pair, value) = tok
                .split_once(':')
                .ok_or_else(|| sem(field, format!("token {tok:?} must look like (l,k):c")))?;
            Ok((parse_pair(field, pair)?, parse_f64(field, value)?))
        })
        .collect()
}

/// Renders a [`Mode`] as its scenario keyword.
pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Strong => "strong",
        Mode::Quasi => "quasi",
        Mode::Open => "open",
    }
}

fn parse_mode(field: &str, s: &str) -> Result<Mode, ScenarioError> {
    match s {
        "strong" => Ok(Mode::Strong),
        "quasi" => Ok(Mode::Quasi),
        "open" => Ok(Mode::Open),
        other => Err(sem(field, format!("must be strong, quasi, or open, got {other:?}"))),
    }
}

fn section(
    sections: &mut BTreeMap<&'static str, Entries>,
    name: &'static str,
) -> Option<Section> {
    sections.remove(name).map(|entries| Section { name, entries })
}

fn required(
    sections: &mut BTreeMap<&'static str, Entries>,
    name: &'static str,
) -> Result<Section, ScenarioError> {
    section(sections, name).ok_or_else(|| sem(name, "missing required section"))
}

/// Parses and fully validates scenario text. `base_dir` resolves relative
/// graph file references; pass `None` when the text cannot reference files.
pub fn parse_scenario_text(
    text: &str,
    base_dir: Option<&Path>,
) -> Result<ScenarioDocument, ScenarioError> {
    let mut sections = split_sections(text)?;

    // Graph first: almost every later section is sized by it.
    let mut s = required(&mut sections, "graph")?;
    let graph = match (s.take("file"), s.take("nodes"), s.take("edges")) {
        (Some(path), None, None) => {
            let base = base_dir.ok_or_else(|| {
                sem("graph.file", "graph file references are not available here")
            })?;
            let full = base.join(&path);
            let text = std::fs::read_to_string(&full).map_err(|source| ScenarioError::Io {
                path: full.display().to_string(),
                source,
            })?;
            Digraph::from_text(&text).map_err(|e| sem("graph.file", e.to_string()))?
        }
        (None, Some(nodes), Some(edges)) => {
            let n = parse_usize("graph.nodes", &nodes)?;
            let pairs = parse_pair_list("graph.edges", &edges)?;
            parse_digraph(n, &pairs).map_err(|e| sem("graph.edges", e.to_string()))?
        }
        _ => {
            return Err(sem(
                "graph",
                "provide either file, or both nodes and edges",
            ))
        }
    };
    s.finish()?;
    let node_count = graph.node_count();
    let edge_count = graph.edge_count();

    let mut s = required(&mut sections, "mode")?;
    let mode = parse_mode("mode.mode", &s.take_required("mode")?)?;
    s.finish()?;

    let mut s = required(&mut sections, "dynamics")?;
    let kind_word = s.take_required("kind")?;
    let dynamics = match kind_word.as_str() {
        "zero" => DynamicsSpec {
            kind: DynamicsKind::Zero,
            state_dim: parse_usize("dynamics.state_dim", &s.take_required("state_dim")?)?,
        },
        "linear" => {
            let dim = parse_usize("dynamics.state_dim", &s.take_required("state_dim")?)?;
            let text = s.take_required("matrix")?;
            let rows: Vec<Vec<f64>> = text
                .split(';')
                .map(|row| parse_f64_list("dynamics.matrix", row))
                .collect::<Result<_, _>>()?;
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(sem(
                    "dynamics.matrix",
                    format!("need {dim} rows of {dim} entries separated by ';'"),
                ));
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            DynamicsSpec {
                kind: DynamicsKind::Linear(DMatrix::from_row_slice(dim, dim, &flat)),
                state_dim: dim,
            }
        }
        "chua" => {
            if let Some(dim) = s.take("state_dim") {
                if parse_usize("dynamics.state_dim", &dim)? != 3 {
                    return Err(sem("dynamics.state_dim", "chua dynamics are 3-dimensional"));
                }
            }
            DynamicsSpec {
                kind: DynamicsKind::Chua {
                    zeta: parse_f64("dynamics.zeta", &s.take_required("zeta")?)?,
                    chi: parse_f64("dynamics.chi", &s.take_required("chi")?)?,
                    a: parse_f64("dynamics.a", &s.take_required("a")?)?,
                    b: parse_f64("dynamics.b", &s.take_required("b")?)?,
                },
                state_dim: 3,
            }
        }
        other => {
            return Err(sem(
                "dynamics.kind",
                format!("must be zero, linear, or chua, got {other:?}"),
            ))
        }
    };
    s.finish()?;

    let mut s = required(&mut sections, "noise")?;
    let noise = NoiseSpec {
        per_component_bound: parse_f64("noise.bound", &s.take_required("bound")?)?,
        seed: parse_u64("noise.seed", &s.take_required("seed")?)?,
    };
    s.finish()?;

    let controller = match section(&mut sections, "controller") {
        None => {
            if mode != Mode::Open {
                return Err(sem(
                    "controller",
                    "section required unless mode = open",
                ));
            }
            ControllerConfig::new(0.0, 0.0, vec![1.0; edge_count], GainAssignment::new())
        }
        Some(mut s) => {
            let eta = parse_f64("controller.eta", &s.take_required("eta")?)?;
            let xi_word = s.take_required("xi")?;
            let xi = if xi_word == "auto" {
                noise.per_component_bound * (dynamics.state_dim as f64).sqrt()
            } else {
                parse_f64("controller.xi", &xi_word)?
            };
            let sigma_values = parse_f64_list("controller.sigma", &s.take_required("sigma")?)?;
            let sigma = match sigma_values.len() {
                1 => vec![sigma_values[0]; edge_count],
                n if n == edge_count => sigma_values,
                n => {
                    return Err(sem(
                        "controller.sigma",
                        format!("need 1 or {edge_count} values, got {n}"),
                    ))
                }
            };
            let mut gains = GainAssignment::new();
            match (s.take("gain"), s.take("gains")) {
                (Some(_), Some(_)) => {
                    return Err(sem("controller.gain", "give either gain or gains, not both"))
                }
                (Some(c), None) => {
                    let c = parse_f64("controller.gain", &c)?;
                    for from in 1..=edge_count {
                        for to in 1..=edge_count {
                            if from != to {
                                gains
                                    .set(from, to, c)
                                    .map_err(|e| sem("controller.gain", e.to_string()))?;
                            }
                        }
                    }
                }
                (None, Some(list)) => {
                    for ((from, to), c) in parse_arc_gains("controller.gains", &list)? {
                        gains
                            .set(from, to, c)
                            .map_err(|e| sem("controller.gains", e.to_string()))?;
                    }
                }
                (None, None) => {}
            }
            let mut cfg = ControllerConfig::new(eta, xi, sigma, gains);
            if let Some(value) = s.take("tree_to_cotree_gain") {
                cfg.tree_to_cotree_gain =
                    Some(parse_f64("controller.tree_to_cotree_gain", &value)?);
            }
            if let Some(value) = s.take("epsilon") {
                cfg.epsilon = parse_f64("controller.epsilon", &value)?;
            }
            if let Some(value) = s.take("alpha_lower") {
                cfg.alpha_lower = parse_f64("controller.alpha_lower", &value)?;
            }
            if let Some(value) = s.take("alpha_upper") {
                cfg.alpha_upper = parse_f64("controller.alpha_upper", &value)?;
            }
            s.finish()?;
            cfg
        }
    };

    let tree = match section(&mut sections, "tree") {
        None => None,
        Some(mut s) => {
            let ids = parse_usize_list("tree.edges", &s.take_required("edges")?)?;
            let root = match s.take("root") {
                Some(r) => Some(parse_usize("tree.root", &r)?),
                None => None,
            };
            s.finish()?;
            let selection = find_directed_spanning_tree(&graph, root, Some(&ids))
                .map_err(|e| sem("tree.edges", e.to_string()))?
                .expect("a forced tree validates to a selection");
            Some(selection)
        }
    };

    let mut s = required(&mut sections, "integrator")?;
    let integrator = IntegratorSpec {
        dt: parse_f64("integrator.dt", &s.take_required("dt")?)?,
        t_final: parse_f64("integrator.t_final", &s.take_required("t_final")?)?,
    };
    s.finish()?;

    let mut s = required(&mut sections, "initial")?;
    let kind_word = s.take_required("kind")?;
    let initial = match kind_word.as_str() {
        "random_box" => InitialSpec::RandomBox {
            low: parse_f64("initial.low", &s.take_required("low")?)?,
            high: parse_f64("initial.high", &s.take_required("high")?)?,
            seed: parse_u64("initial.seed", &s.take_required("seed")?)?,
        },
        "explicit" => {
            let dim = dynamics.state_dim;
            let mut flat = Vec::with_capacity(node_count * dim);
            for agent in 1..=node_count {
                let field = format!("initial.agent_{agent}");
                let row = s
                    .take(&format!("agent_{agent}"))
                    .ok_or_else(|| sem(field.clone(), "missing agent row"))?;
                let values = parse_f64_list(&field, &row)?;
                if values.len() != dim {
                    return Err(sem(field, format!("need {dim} values, got {}", values.len())));
                }
                flat.extend(values);
            }
            InitialSpec::Explicit(DMatrix::from_row_slice(node_count, dim, &flat))
        }
        other => {
            return Err(sem(
                "initial.kind",
                format!("must be random_box or explicit, got {other:?}"),
            ))
        }
    };
    s.finish()?;

    let output = match section(&mut sections, "output") {
        None => OutputSpec::default(),
        Some(mut s) => {
            let path = s.take("path");
            let format = match s.take("format") {
                None => OutputFormat::Csv,
                Some(word) => match word.as_str() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => {
                        return Err(sem(
                            "output.format",
                            format!("must be csv or json, got {other:?}"),
                        ))
                    }
                },
            };
            s.finish()?;
            OutputSpec { path, format }
        }
    };

    let scenario = Scenario {
        graph,
        tree,
        mode,
        dynamics,
        controller,
        noise,
        integrator,
        initial,
    };
    // Full semantic validation: connectivity, gain coverage, cyclic
    // small-gain, tree-gain bound, dimensions.
    prepare(scenario.clone())?;
    Ok(ScenarioDocument { scenario, output })
}

/// Reads and validates a scenario file; graph file references resolve
/// relative to its directory.
pub fn load_scenario(path: &Path) -> Result<ScenarioDocument, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_text(&text, path.parent())
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Renders a document in canonical form: fixed section order, graph always
/// inline, `xi` resolved to its number. Reparsing the canonical text yields
/// an identical scenario.
pub fn canonical_text(doc: &ScenarioDocument) -> String {
    let s = &doc.scenario;
    let mut out = String::new();
    let _ = writeln!(out, "[graph]");
    let _ = writeln!(out, "nodes = {}", s.graph.node_count());
    let edge_list: Vec<String> = s
        .graph
        .edges()
        .iter()
        .map(|e| format!("({},{})", e.initial, e.terminal))
        .collect();
    let _ = writeln!(out, "edges = {}", edge_list.join(" "));

    let _ = writeln!(out, "\n[mode]");
    let _ = writeln!(out, "mode = {}", mode_name(s.mode));

    if let Some(sel) = &s.tree {
        let _ = writeln!(out, "\n[tree]");
        let ids: Vec<String> = sel.tree_edges.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(out, "edges = {}", ids.join(" "));
        let _ = writeln!(out, "root = {}", sel.root);
    }

    let _ = writeln!(out, "\n[dynamics]");
    match &s.dynamics.kind {
        DynamicsKind::Zero => {
            let _ = writeln!(out, "kind = zero");
            let _ = writeln!(out, "state_dim = {}", s.dynamics.state_dim);
        }
        DynamicsKind::Linear(m) => {
            let _ = writeln!(out, "kind = linear");
            let _ = writeln!(out, "state_dim = {}", s.dynamics.state_dim);
            let rows: Vec<String> = (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| num(m[(i, j)]))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let _ = writeln!(out, "matrix = {}", rows.join("; "));
        }
        DynamicsKind::Chua { zeta, chi, a, b } => {
            let _ = writeln!(out, "kind = chua");
            let _ = writeln!(out, "zeta = {}", num(*zeta));
            let _ = writeln!(out, "chi = {}", num(*chi));
            let _ = writeln!(out, "a = {}", num(*a));
            let _ = writeln!(out, "b = {}", num(*b));
        }
    }

    let c = &s.controller;
    let _ = writeln!(out, "\n[controller]");
    let _ = writeln!(out, "eta = {}", num(c.eta));
    let _ = writeln!(out, "xi = {}", num(c.xi));
    if c.sigma.iter().all(|&v| v == c.sigma[0]) {
        let _ = writeln!(out, "sigma = {}", num(c.sigma[0]));
    } else {
        let values: Vec<String> = c.sigma.iter().map(|&v| num(v)).collect();
        let _ = writeln!(out, "sigma = {}", values.join(" "));
    }
    let l = s.graph.edge_count();
    let pairs: Vec<((usize, usize), f64)> = c.gains.iter().collect();
    if !pairs.is_empty() {
        let uniform = pairs.len() == l * (l.saturating_sub(1))
            && pairs.iter().all(|&(_, v)| v == pairs[0].1);
        if uniform {
            let _ = writeln!(out, "gain = {}", num(pairs[0].1));
        } else {
            let items: Vec<String> = pairs
                .iter()
                .map(|&((from, to), v)| format!("({from},{to}):{}", num(v)))
                .collect();
            let _ = writeln!(out, "gains = {}", items.join(" "));
        }
    }
    if let Some(g) = c.tree_to_cotree_gain {
        let _ = writeln!(out, "tree_to_cotree_gain = {}", num(g));
    }
    let _ = writeln!(out, "epsilon = {}", num(c.epsilon));
    let _ = writeln!(out, "alpha_lower = {}", num(c.alpha_lower));
    let _ = writeln!(out, "alpha_upper = {}", num(c.alpha_upper));

    let _ = writeln!(out, "\n[noise]");
    let _ = writeln!(out, "bound = {}", num(s.noise.per_component_bound));
    let _ = writeln!(out, "seed = {}", s.noise.seed);

    let _ = writeln!(out, "\n[integrator]");
    let _ = writeln!(out, "dt = {}", num(s.integrator.dt));
    let _ = writeln!(out, "t_final = {}", num(s.integrator.t_final));

    let _ = writeln!(out, "\n[initial]");
    match &s.initial {
        InitialSpec::RandomBox { low, high, seed } => {
            let _ = writeln!(out, "kind = random_box");
            let _ = writeln!(out, "low = {}", num(*low));
            let _ = writeln!(out, "high = {}", num(*high));
            let _ = writeln!(out, "seed = {seed}");
        }
        InitialSpec::Explicit(m) => {
            let _ = writeln!(out, "kind = explicit");
            for i in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|d| num(m[(i, d)])).collect();
                let _ = writeln!(out, "agent_{} = {}", i + 1, row.join(" "));
            }
        }
    }

    let _ = writeln!(out, "\n[output]");
    if let Some(path) = &doc.output.path {
        let _ = writeln!(out, "path = {path}");
    }
    let _ = writeln!(out, "format = {}", doc.output.format.as_str());
    out
}

/// Structured run summary: counts, settings, disparity metrics, abort
/// state, and the canonical config echo.
pub fn summary_json(
    doc: &ScenarioDocument,
    result: &SimResult<f64>,
    metrics: &ConsensusMetrics<f64>,
    convergence_threshold: f64,
) -> Value {
    let s = &doc.scenario;
    json!({
        "mode": mode_name(s.mode),
        "agent_count": result.agent_count,
        "state_dim": result.state_dim,
        "edge_count": result.edge_count,
        "samples": result.times.len(),
        "dt": s.integrator.dt,
        "t_final": s.integrator.t_final,
        "noise": { "bound": s.noise.per_component_bound, "seed": s.noise.seed },
        "metrics": {
            "max_disparity": metrics.max_disparity,
            "steady_state_disparity": metrics.steady_state_disparity,
            "final_disparity": metrics.final_disparity,
            "convergence_threshold": convergence_threshold,
            "convergence_time": metrics.convergence_time,
        },
        "steady_state_max_edge_norm": steady_state_max_edge_norm(result),
        "max_lift_residual": result.max_lift_residual,
        "aborted": result.aborted.as_ref().map(|a| json!({
            "time": a.time,
            "reason": a.reason,
        })),
        "config": canonical_text(doc),
    })
}
