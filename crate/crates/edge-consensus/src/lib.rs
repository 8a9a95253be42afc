//! Edge-Laplacian tools for consensus on directed graphs.
//!
//! The crate builds the incidence decomposition, graph Laplacian, and edge
//! Laplacian of a digraph, partitions the edge space along a directed
//! spanning tree, derives the interconnection structure between edge error
//! subsystems, synthesizes robust consensus controllers from cyclic
//! small-gain conditions, and integrates the resulting closed loop under
//! bounded disturbances with a deterministic fixed-step integrator.
//!
//! Everything is generic over the scalar type through [`scalar::Real`];
//! `f64` aliases for the main types are exported at the crate root.

pub mod algebra;
pub mod controller;
pub mod dynamics;
pub mod graph;
pub mod interconnect;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod sim;

pub use algebra::{
    build_edge_algebra, complex_multisets_match, edge_laplacian_blocks, matrix_rank,
    matrix_to_real, nonzero_spectra_match_exactly, nonzero_spectrum, penrose_residuals,
    predicted_zero_eigen_structure, tree_partition, zero_eigen_structure, AlgebraError,
    EdgeAlgebra, EdgeLaplacianBlocks, TreePartition, ZeroEigenStructure,
};
pub use controller::{
    apply_edge_law, edge_control_strong, edge_control_tree, edge_controls_strong,
    edge_controls_tree, lift_node_control, lift_residual, quasi_gain_bound, rho_from_gain,
    strong_bracket_coefficient, tree_bracket_coefficient, ControllerConfig, ControllerError,
    DEFAULT_BOUNDARY_LAYER,
};
pub use dynamics::{chua_vector_field, sample_disturbance, DynamicsError, DynamicsKind, DynamicsSpec};
pub use interconnect::{
    build_edge_interconnection, check_cyclic_small_gain, enumerate_simple_cycles,
    enumerate_simple_cycles_capped, strongly_connected_components, EdgeInterconnectionGraph,
    GainAssignment, InterconnectError, SmallGainReport, DEFAULT_CYCLE_CAP,
};
pub use graph::{
    find_directed_spanning_tree, incidence_decomposition, is_quasi_strongly_connected,
    is_strongly_connected, node_strongly_connected_components, outgoing_edge_neighbors,
    parse_digraph, sink_nodes, terminal_component_count, weakly_connected_components, Digraph,
    Edge, GraphError, IncidenceSet, TreeSelection,
};
pub use report::{
    verify_graph, CheckOutcome, CheckStatus, ReportError, VerifyReport, PENROSE_TOL,
    SPECTRUM_MATCH_TOL, TREE_FACTORIZATION_TOL,
};
pub use scalar::Real;
pub use scenario::{
    bundled_scenario, canonical_text, load_scenario, mode_name, parse_scenario_text,
    summary_json, OutputFormat, OutputSpec, ScenarioDocument, ScenarioError,
    BUNDLED_SCENARIO_NAMES, QUASI_6AGENT, STRONG_6AGENT,
};
pub use sim::{
    consensus_metrics, integrate, prepare, run, steady_state_max_edge_norm, to_csv, AbortInfo,
    ConsensusMetrics, InitialSpec, IntegratorSpec, Mode, NoiseSpec, PreparedScenario, Scenario,
    SimError, SimResult, BLOW_UP_GUARD,
};

/// `f64` edge algebra.
pub type EdgeAlgebra64 = algebra::EdgeAlgebra<f64>;
/// `f64` spanning-tree partition.
pub type TreePartition64 = algebra::TreePartition<f64>;
/// `f64` tree/cotree blocks of the edge Laplacian.
pub type EdgeLaplacianBlocks64 = algebra::EdgeLaplacianBlocks<f64>;
/// `f64` linear gain assignment.
pub type GainAssignment64 = interconnect::GainAssignment<f64>;
/// `f64` controller configuration.
pub type ControllerConfig64 = controller::ControllerConfig<f64>;
/// `f64` cyclic small-gain report.
pub type SmallGainReport64 = interconnect::SmallGainReport<f64>;
/// `f64` simulation scenario.
pub type Scenario64 = sim::Scenario<f64>;
/// `f64` simulation result.
pub type SimResult64 = sim::SimResult<f64>;
