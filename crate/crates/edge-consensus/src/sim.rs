//! Deterministic closed-loop simulation of networked agents.
//!
//! The node dynamics are `dx/dt = F(t, x) - L_G x + w + u` with per-agent
//! drift `F`, graph-Laplacian diffusion applied per state dimension,
//! zero-order-hold bounded disturbances `w`, and the edge controller lifted
//! to node space. Integration is classical fixed-step RK4 with a blow-up
//! guard; every random draw comes from counter-based generators seeded by
//! the scenario, so a run is reproducible byte for byte.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{
    build_edge_algebra, matrix_to_real, max_abs_entry, tree_partition, AlgebraError, EdgeAlgebra,
    TreePartition,
};
use crate::controller::{
    apply_edge_law, strong_bracket_coefficient, tree_bracket_coefficient, ControllerConfig,
    ControllerError,
};
use crate::dynamics::{sample_disturbance, DynamicsError, DynamicsSpec};
use crate::graph::{
    find_directed_spanning_tree, incidence_decomposition, is_strongly_connected, parse_digraph,
    Digraph, GraphError, IncidenceSet, TreeSelection,
};
use crate::interconnect::{
    build_edge_interconnection, check_cyclic_small_gain, GainAssignment, InterconnectError,
};
use crate::scalar::{real, to_f64, Real};

/// State-magnitude threshold that aborts a run as divergent.
pub const BLOW_UP_GUARD: f64 = 1e12;

/// Errors from scenario preparation and simulation.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Interconnect(#[from] InterconnectError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(
        "cyclic small-gain condition violated: cycle {worst_cycle:?} has gain product {worst_product}"
    )]
    SmallGainViolated {
        worst_cycle: Vec<usize>,
        worst_product: f64,
    },
}

/// Which control pathway closes the loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Full edge law on a strongly connected graph.
    Strong,
    /// Spanning tree law; cotree control identically zero.
    Quasi,
    /// No control input.
    Open,
}

/// Bounded disturbance description.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec<T: Real> {
    /// Uniform bound for each disturbance component, `>= 0`.
    pub per_component_bound: T,
    /// Seed of the disturbance stream.
    pub seed: u64,
}

/// Fixed-step integrator settings.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorSpec<T: Real> {
    pub dt: T,
    pub t_final: T,
}

/// Initial node states.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec<T: Real> {
    /// N x n matrix, one row per agent.
    Explicit(DMatrix<T>),
    /// Independent uniform draws from `[low, high]` per component.
    RandomBox { low: T, high: T, seed: u64 },
}

/// A complete simulation description.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<T: Real> {
    pub graph: Digraph,
    /// Spanning tree selection; found automatically when absent.
    pub tree: Option<TreeSelection>,
    pub mode: Mode,
    pub dynamics: DynamicsSpec<T>,
    pub controller: ControllerConfig<T>,
    pub noise: NoiseSpec<T>,
    pub integrator: IntegratorSpec<T>,
    pub initial: InitialSpec<T>,
}

/// A validated scenario with everything precomputed for the run loop.
///
/// `bracket_coefficients` follow original edge order in strong mode and the
/// tree-first order of the partition in quasi mode; empty in open mode.
#[derive(Clone, Debug)]
pub struct PreparedScenario<T: Real> {
    pub scenario: Scenario<T>,
    pub incidence: IncidenceSet,
    pub incidence_real: DMatrix<T>,
    pub algebra: EdgeAlgebra<T>,
    pub partition: Option<TreePartition<T>>,
    /// Small-gain report for the mode's interconnection, cycles in original
    /// edge ids; `None` in open mode.
    pub small_gain: Option<crate::interconnect::SmallGainReport<T>>,
    pub bracket_coefficients: Vec<T>,
}

/// Why and when a run stopped early.
#[derive(Clone, Debug, PartialEq)]
pub struct AbortInfo<T: Real> {
    /// Last valid sample time.
    pub time: T,
    pub reason: String,
}

/// Full trajectory record of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimResult<T: Real> {
    pub times: Vec<T>,
    /// N x n node states per sample.
    pub node_states: Vec<DMatrix<T>>,
    /// L x n edge states per sample, rows in original edge order.
    pub edge_states: Vec<DMatrix<T>>,
    /// Per-sample, per-edge values of `|x_e|^2 / 2`.
    pub edge_lyapunov: Vec<Vec<T>>,
    /// Per-sample sum of tree-edge Lyapunov values, when a tree is known.
    pub tree_lyapunov: Option<Vec<T>>,
    /// Per-sample cotree stack Lyapunov value, when a tree is known.
    pub cotree_lyapunov: Option<Vec<T>>,
    /// Per-sample maximum pairwise agent distance.
    pub disparity: Vec<T>,
    /// Largest `|E^T u - u_e|` (resp. tree variant) seen at any field
    /// evaluation: how exactly the lifted control realizes the edge law.
    pub max_lift_residual: T,
    pub aborted: Option<AbortInfo<T>>,
    pub agent_count: usize,
    pub state_dim: usize,
    pub edge_count: usize,
}

/// Disparity-based consensus metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsensusMetrics<T: Real> {
    /// Largest disparity over the whole run.
    pub max_disparity: T,
    /// Largest disparity over the final 10% of samples.
    pub steady_state_disparity: T,
    /// Disparity at the last sample.
    pub final_disparity: T,
    /// First time after which disparity stays below the threshold.
    pub convergence_time: Option<T>,
}

fn require(ok: bool, message: &str) -> Result<(), SimError> {
    if ok {
        Ok(())
    } else {
        Err(SimError::Validation(message.to_string()))
    }
}

/// Validates a scenario and precomputes run-loop data.
pub fn prepare<T: Real>(scenario: Scenario<T>) -> Result<PreparedScenario<T>, SimError> {
    scenario.dynamics.validate()?;
    let g = &scenario.graph;
    let n = g.node_count();
    let l = g.edge_count();
    let dim = scenario.dynamics.state_dim;

    let dt = scenario.integrator.dt;
    require(
        dt > T::zero() && dt.is_finite(),
        "integrator dt must be strictly positive and finite",
    )?;
    let tf = scenario.integrator.t_final;
    require(
        tf >= T::zero() && tf.is_finite(),
        "integrator t_final must be nonnegative and finite",
    )?;
    let bound = scenario.noise.per_component_bound;
    require(
        bound >= T::zero() && bound.is_finite(),
        "noise bound must be nonnegative and finite",
    )?;
    match &scenario.initial {
        InitialSpec::Explicit(m) => {
            require(
                m.nrows() == n && m.ncols() == dim,
                "explicit initial states must be one row per agent, one column per dimension",
            )?;
            require(
                m.iter().all(|v| v.is_finite()),
                "explicit initial states must be finite",
            )?;
        }
        InitialSpec::RandomBox { low, high, .. } => {
            require(
                low.is_finite() && high.is_finite() && low <= high,
                "initial random box must have finite low <= high",
            )?;
        }
    }

    let incidence = incidence_decomposition(g);
    let algebra = build_edge_algebra(&incidence)?;
    let incidence_real = matrix_to_real::<T>(&incidence.incidence);

    let selection = match &scenario.tree {
        Some(sel) => Some(sel.clone()),
        None => find_directed_spanning_tree(g, None, None)?,
    };

    let mut small_gain = None;
    let mut bracket_coefficients = Vec::new();
    let partition = match scenario.mode {
        Mode::Open => match selection {
            Some(sel) => Some(tree_partition(&incidence, &sel)?),
            None => None,
        },
        Mode::Strong => {
            require(
                is_strongly_connected(g),
                "strong mode requires a strongly connected graph",
            )?;
            scenario.controller.validate(l)?;
            let ig = build_edge_interconnection(g, &algebra);
            let report = check_cyclic_small_gain(&ig, &scenario.controller.gains, T::zero())?;
            if !report.satisfied {
                return Err(SimError::SmallGainViolated {
                    worst_cycle: report.worst_cycle.unwrap_or_default(),
                    worst_product: report.worst_product.map_or(f64::NAN, to_f64),
                });
            }
            small_gain = Some(report);
            for k in 1..=l {
                bracket_coefficients.push(strong_bracket_coefficient(
                    k,
                    &scenario.controller,
                    &algebra,
                )?);
            }
            let sel = selection
                .expect("a strongly connected graph has a spanning tree from every root");
            Some(tree_partition(&incidence, &sel)?)
        }
        Mode::Quasi => {
            let Some(sel) = selection else {
                return Err(SimError::Validation(
                    "quasi mode requires a quasi-strongly connected graph".to_string(),
                ));
            };
            scenario.controller.validate(l)?;
            let tp = tree_partition(&incidence, &sel)?;
            scenario
                .controller
                .validate_tree_gain(tp.lambda_bar_1, n)?;

            // Small-gain condition on the tree-edge interconnection. The
            // tree edges form a digraph of their own whose edge adjacency
            // must equal the tree-tree block of the full one.
            let pairs: Vec<(usize, usize)> = sel
                .tree_edges
                .iter()
                .map(|&k| {
                    let e = &incidence.edges()[k - 1];
                    (e.initial, e.terminal)
                })
                .collect();
            let tree_graph = parse_digraph(n, &pairs)?;
            let tree_algebra: EdgeAlgebra<T> =
                build_edge_algebra(&incidence_decomposition(&tree_graph))?;
            assert_eq!(
                tree_algebra.edge_adjacency, tp.blocks.ae1,
                "tree subgraph adjacency disagrees with the tree-tree block"
            );
            let ig = build_edge_interconnection(&tree_graph, &tree_algebra);
            let mut positional = GainAssignment::new();
            for &(from, to) in &ig.directed_edges {
                let c = scenario
                    .controller
                    .gains
                    .coefficient(sel.tree_edges[from - 1], sel.tree_edges[to - 1])?;
                positional.set(from, to, c)?;
            }
            let mut report = check_cyclic_small_gain(&ig, &positional, T::zero())?;
            report.worst_cycle = report
                .worst_cycle
                .map(|c| c.into_iter().map(|p| sel.tree_edges[p - 1]).collect());
            if !report.satisfied {
                return Err(SimError::SmallGainViolated {
                    worst_cycle: report.worst_cycle.unwrap_or_default(),
                    worst_product: report.worst_product.map_or(f64::NAN, to_f64),
                });
            }
            small_gain = Some(report);
            for &k in &sel.tree_edges {
                bracket_coefficients.push(tree_bracket_coefficient(
                    k,
                    &scenario.controller,
                    &tp,
                )?);
            }
            Some(tp)
        }
    };

    Ok(PreparedScenario {
        scenario,
        incidence,
        incidence_real,
        algebra,
        partition,
        small_gain,
        bracket_coefficients,
    })
}

fn initial_states<T: Real>(prep: &PreparedScenario<T>) -> DMatrix<T> {
    let n = prep.scenario.graph.node_count();
    let dim = prep.scenario.dynamics.state_dim;
    match &prep.scenario.initial {
        InitialSpec::Explicit(m) => m.clone(),
        InitialSpec::RandomBox { low, high, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rng.set_stream(1);
            let span = *high - *low;
            let mut m = DMatrix::zeros(n, dim);
            for i in 0..n {
                for d in 0..dim {
                    m[(i, d)] = *low + span * real::<T>(rng.gen::<f64>());
                }
            }
            m
        }
    }
}

struct FieldEval<T: Real> {
    field: DMatrix<T>,
    lift_residual: T,
}

/// One evaluation of `F(t, x) - L_G x + w + u(x)`.
fn eval_field<T: Real>(
    prep: &PreparedScenario<T>,
    t: T,
    x: &DMatrix<T>,
    w: &DMatrix<T>,
) -> FieldEval<T> {
    let n = x.nrows();
    let dim = x.ncols();
    let cfg = &prep.scenario.controller;
    let mut field = DMatrix::<T>::zeros(n, dim);
    for i in 0..n {
        field
            .row_mut(i)
            .copy_from(&prep.scenario.dynamics.eval(t, &x.row(i).into_owned()));
    }
    field -= &prep.algebra.graph_laplacian * x;
    field += w;
    let mut lift_residual = T::zero();
    match prep.scenario.mode {
        Mode::Open => {}
        Mode::Strong => {
            let edge_states = prep.incidence_real.transpose() * x;
            let mut u_edge = DMatrix::<T>::zeros(edge_states.nrows(), dim);
            for k in 0..edge_states.nrows() {
                u_edge.row_mut(k).copy_from(&apply_edge_law(
                    &edge_states.row(k).into_owned(),
                    prep.bracket_coefficients[k],
                    cfg.sigma[k],
                    cfg,
                ));
            }
            let tp = prep.partition.as_ref().expect("strong mode has a partition");
            let u = tp.incidence_pinv.transpose() * &u_edge;
            lift_residual =
                max_abs_entry(&(prep.incidence_real.transpose() * &u - &u_edge));
            field += u;
        }
        Mode::Quasi => {
            let tp = prep.partition.as_ref().expect("quasi mode has a partition");
            let tree_states = tp.tree_incidence.transpose() * x;
            let mut u_tree = DMatrix::<T>::zeros(tree_states.nrows(), dim);
            for (i, &k) in tp.selection.tree_edges.iter().enumerate() {
                u_tree.row_mut(i).copy_from(&apply_edge_law(
                    &tree_states.row(i).into_owned(),
                    prep.bracket_coefficients[i],
                    cfg.sigma[k - 1],
                    cfg,
                ));
            }
            let u = tp.tree_left_inverse.transpose() * &u_tree;
            lift_residual =
                max_abs_entry(&(tp.tree_incidence.transpose() * &u - &u_tree));
            field += u;
        }
    }
    FieldEval {
        field,
        lift_residual,
    }
}

/// Integrates the prepared scenario with classical RK4 and zero-order-hold
/// disturbances, recording every step. A state beyond [`BLOW_UP_GUARD`] (or
/// a non-finite one) aborts the run, keeping the samples up to the last
/// valid time.
pub fn integrate<T: Real>(prep: &PreparedScenario<T>) -> SimResult<T> {
    let n = prep.scenario.graph.node_count();
    let l = prep.scenario.graph.edge_count();
    let dim = prep.scenario.dynamics.state_dim;
    let dt = prep.scenario.integrator.dt;
    let half = real::<T>(0.5);
    let sixth = T::one() / real::<T>(6.0);
    let two = real::<T>(2.0);
    let n_steps = to_f64(prep.scenario.integrator.t_final / dt).round() as usize;
    let bound = prep.scenario.noise.per_component_bound;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(prep.scenario.noise.seed);
    noise_rng.set_stream(2);

    let tree_edges = prep
        .partition
        .as_ref()
        .map(|tp| tp.selection.tree_edges.clone());

    let mut result = SimResult {
        times: Vec::with_capacity(n_steps + 1),
        node_states: Vec::with_capacity(n_steps + 1),
        edge_states: Vec::with_capacity(n_steps + 1),
        edge_lyapunov: Vec::with_capacity(n_steps + 1),
        tree_lyapunov: tree_edges.as_ref().map(|_| Vec::with_capacity(n_steps + 1)),
        cotree_lyapunov: tree_edges.as_ref().map(|_| Vec::with_capacity(n_steps + 1)),
        disparity: Vec::with_capacity(n_steps + 1),
        max_lift_residual: T::zero(),
        aborted: None,
        agent_count: n,
        state_dim: dim,
        edge_count: l,
    };

    let record = |result: &mut SimResult<T>, t: T, x: &DMatrix<T>| {
        let edge = prep.incidence_real.transpose() * x;
        let v: Vec<T> = (0..l).map(|k| half * edge.row(k).norm_squared()).collect();
        if let Some(tree) = &tree_edges {
            let vt = tree.iter().fold(T::zero(), |acc, &k| acc + v[k - 1]);
            let vc = (0..l)
                .filter(|k| !tree.contains(&(k + 1)))
                .fold(T::zero(), |acc, k| acc + v[k]);
            result.tree_lyapunov.as_mut().unwrap().push(vt);
            result.cotree_lyapunov.as_mut().unwrap().push(vc);
        }
        let mut disparity = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                disparity = disparity.max((x.row(i) - x.row(j)).norm());
            }
        }
        result.times.push(t);
        result.node_states.push(x.clone());
        result.edge_states.push(edge);
        result.edge_lyapunov.push(v);
        result.disparity.push(disparity);
    };

    let guard = real::<T>(BLOW_UP_GUARD);
    let mut x = initial_states(prep);
    record(&mut result, T::zero(), &x);

    for step in 0..n_steps {
        let t = dt * real::<T>(step as f64);
        let mut w = DMatrix::<T>::zeros(n, dim);
        for i in 0..n {
            w.row_mut(i)
                .copy_from(&sample_disturbance(&mut noise_rng, bound, dim));
        }
        let k1 = eval_field(prep, t, &x, &w);
        let k2 = eval_field(prep, t + dt * half, &(&x + &k1.field * (dt * half)), &w);
        let k3 = eval_field(prep, t + dt * half, &(&x + &k2.field * (dt * half)), &w);
        let k4 = eval_field(prep, t + dt, &(&x + &k3.field * dt), &w);
        for stage in [&k1, &k2, &k3, &k4] {
            result.max_lift_residual = result.max_lift_residual.max(stage.lift_residual);
        }
        let next =
            &x + (k1.field + &k2.field * two + &k3.field * two + k4.field) * (dt * sixth);
        if !next.iter().all(|v| v.is_finite() && v.abs() <= guard) {
            result.aborted = Some(AbortInfo {
                time: t,
                reason: format!(
                    "state magnitude exceeded {BLOW_UP_GUARD:e} or became non-finite at t = {}",
                    to_f64(t + dt)
                ),
            });
            break;
        }
        x = next;
        record(&mut result, dt * real::<T>((step + 1) as f64), &x);
    }
    result
}

/// Prepares and integrates in one call.
pub fn run<T: Real>(scenario: Scenario<T>) -> Result<SimResult<T>, SimError> {
    Ok(integrate(&prepare(scenario)?))
}

/// Disparity metrics of a finished run. `threshold` feeds the convergence
/// time: the first sample time after which disparity stays strictly below
/// it through the end of the run.
pub fn consensus_metrics<T: Real>(result: &SimResult<T>, threshold: T) -> ConsensusMetrics<T> {
    assert!(!result.times.is_empty(), "empty simulation result");
    let len = result.disparity.len();
    let tail_start = len - len.div_ceil(10);
    let max_of = |range: std::ops::Range<usize>| {
        result.disparity[range]
            .iter()
            .fold(T::zero(), |acc, &d| acc.max(d))
    };
    let mut convergence_time = None;
    for (i, &d) in result.disparity.iter().enumerate().rev() {
        if d < threshold {
            convergence_time = Some(result.times[i]);
        } else {
            break;
        }
    }
    ConsensusMetrics {
        max_disparity: max_of(0..len),
        steady_state_disparity: max_of(tail_start..len),
        final_disparity: result.disparity[len - 1],
        convergence_time,
    }
}

/// Largest edge-state row norm over the final 10% of samples.
pub fn steady_state_max_edge_norm<T: Real>(result: &SimResult<T>) -> T {
    assert!(!result.times.is_empty(), "empty simulation result");
    let len = result.edge_states.len();
    let tail_start = len - len.div_ceil(10);
    result.edge_states[tail_start..]
        .iter()
        .fold(T::zero(), |acc, xt| {
            (0..xt.nrows()).fold(acc, |a, k| a.max(xt.row(k).norm()))
        })
}

/// Renders the run as CSV: `t`, one column per agent state component
/// (`x_<agent>_<dim>`), one per edge state norm (`edge_norm_<k>`), then
/// `disparity`. Exactly `1 + N*n + L + 1` columns per row.
pub fn to_csv<T: Real>(result: &SimResult<T>) -> String {
    let mut out = String::from("t");
    for i in 1..=result.agent_count {
        for d in 1..=result.state_dim {
            out.push_str(&format!(",x_{i}_{d}"));
        }
    }
    for k in 1..=result.edge_count {
        out.push_str(&format!(",edge_norm_{k}"));
    }
    out.push_str(",disparity\n");
    for (s, &t) in result.times.iter().enumerate() {
        out.push_str(&to_f64(t).to_string());
        let x = &result.node_states[s];
        for i in 0..result.agent_count {
            for d in 0..result.state_dim {
                out.push(',');
                out.push_str(&to_f64(x[(i, d)]).to_string());
            }
        }
        let edge = &result.edge_states[s];
        for k in 0..result.edge_count {
            out.push(',');
            out.push_str(&to_f64(edge.row(k).norm()).to_string());
        }
        out.push(',');
        out.push_str(&to_f64(result.disparity[s]).to_string());
        out.push('\n');
    }
    out
}
