//! Robust edge-consensus controller synthesis.
//!
//! Each edge subsystem gets a feedback law built from four ingredients: the
//! Lipschitz constant `eta` of the agent drift, the disturbance bound `xi`,
//! a convergence-rate constant `sigma` per edge, and gain coefficients on
//! the interconnection arcs. Gains convert to robustness coefficients via
//! `rho = alpha_upper / (gamma * alpha_lower)`, and the law for edge `k` is
//!
//! `u_k = -(x / max(|x|, eps)) * [(eta + c_k)|x| + sqrt(2) xi] + (1 - sigma_k/2) x`
//!
//! with `x` the edge state and `c_k` a bracket coefficient summing the
//! rho-weighted influence of the in-neighbor subsystems. On a spanning tree
//! the same law runs on tree edges only, with the cotree influence entering
//! through the Euclidean norm of the corresponding tree-to-cotree Laplacian
//! row; the cotree control is identically zero. Edge controls lift to node
//! controls through the transposed pseudoinverse of the incidence matrix.

use nalgebra::{DMatrix, RowDVector};
use thiserror::Error;

use crate::algebra::{max_abs_entry, EdgeAlgebra, TreePartition};
use crate::interconnect::{GainAssignment, InterconnectError};
use crate::scalar::{real, to_f64, Real};

/// Default boundary-layer radius smoothing the unit vector at the origin.
pub const DEFAULT_BOUNDARY_LAYER: f64 = 1e-6;

/// Errors from controller configuration and synthesis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    /// A scalar parameter violates its sign/finiteness invariant.
    #[error("invalid controller parameter: {0}")]
    InvalidParameter(String),
    /// The tree-to-cotree gain is not strictly below the admissible bound.
    #[error("tree-to-cotree gain {chosen} must be strictly below the bound {bound}")]
    GainBoundViolated { chosen: f64, bound: f64 },
    /// Mismatched matrix dimensions in a lift.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A gain lookup or gain validation failed.
    #[error(transparent)]
    Gain(#[from] InterconnectError),
}

/// Parameters of the edge control laws.
///
/// `sigma` is indexed by original edge id (entry `k - 1` for edge `e_k`) and
/// must cover every edge even in tree mode, where only tree entries are
/// read. `gains` assigns coefficients to interconnection arcs keyed by
/// original edge ids; `tree_to_cotree_gain` is the single coefficient
/// bounding the cotree influence on tree edges and may stay `None` when the
/// graph is its own spanning tree.
#[derive(Clone, Debug, PartialEq)]
pub struct ControllerConfig<T: Real> {
    /// Lipschitz constant of the agent drift, `>= 0`.
    pub eta: T,
    /// Per-agent disturbance norm bound, `>= 0`.
    pub xi: T,
    /// Per-edge convergence-rate constants, all `> 0`.
    pub sigma: Vec<T>,
    /// Gain coefficients on interconnection arcs.
    pub gains: GainAssignment<T>,
    /// Gain coefficient from the cotree stack into each tree edge.
    pub tree_to_cotree_gain: Option<T>,
    /// Lower comparison coefficient, `> 0` (default 1).
    pub alpha_lower: T,
    /// Upper comparison coefficient, `> 0` (default 1).
    pub alpha_upper: T,
    /// Boundary-layer radius, `> 0` (default 1e-6).
    pub epsilon: T,
}

impl<T: Real> ControllerConfig<T> {
    /// Config with the default comparison coefficients (1) and boundary
    /// layer (1e-6), no tree-to-cotree gain.
    pub fn new(eta: T, xi: T, sigma: Vec<T>, gains: GainAssignment<T>) -> Self {
        Self {
            eta,
            xi,
            sigma,
            gains,
            tree_to_cotree_gain: None,
            alpha_lower: T::one(),
            alpha_upper: T::one(),
            epsilon: real(DEFAULT_BOUNDARY_LAYER),
        }
    }

    /// Checks scalar invariants and the `sigma` length against the edge
    /// count. Gain coverage is checked where gains are consumed.
    pub fn validate(&self, edge_count: usize) -> Result<(), ControllerError> {
        let nonneg = [("eta", self.eta), ("xi", self.xi)];
        for (name, v) in nonneg {
            if !(v >= T::zero() && v.is_finite()) {
                return Err(ControllerError::InvalidParameter(format!(
                    "{name} must be nonnegative and finite"
                )));
            }
        }
        let mut positive = vec![
            ("alpha_lower", self.alpha_lower),
            ("alpha_upper", self.alpha_upper),
            ("epsilon", self.epsilon),
        ];
        if let Some(g) = self.tree_to_cotree_gain {
            positive.push(("tree-to-cotree gain", g));
        }
        for (name, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                return Err(ControllerError::InvalidParameter(format!(
                    "{name} must be strictly positive and finite"
                )));
            }
        }
        if self.sigma.len() != edge_count {
            return Err(ControllerError::DimensionMismatch(format!(
                "sigma has {} entries but the graph has {} edges",
                self.sigma.len(),
                edge_count
            )));
        }
        if self.sigma.iter().any(|&s| !(s > T::zero() && s.is_finite())) {
            return Err(ControllerError::InvalidParameter(
                "every sigma must be strictly positive and finite".to_string(),
            ));
        }
        Ok(())
    }

    /// Enforces the small-gain bound on the tree-to-cotree coefficient.
    ///
    /// `lambda_bar_1` is the smallest nonzero eigenvalue of `T T^T`, absent
    /// exactly when the cotree is empty, in which case no bound applies.
    pub fn validate_tree_gain(
        &self,
        lambda_bar_1: Option<T>,
        node_count: usize,
    ) -> Result<(), ControllerError> {
        let Some(lambda) = lambda_bar_1 else {
            return Ok(());
        };
        let bound = quasi_gain_bound(lambda, node_count)?;
        let Some(chosen) = self.tree_to_cotree_gain else {
            return Err(ControllerError::InvalidParameter(
                "tree-to-cotree gain required when the cotree is nonempty".to_string(),
            ));
        };
        if chosen >= bound {
            return Err(ControllerError::GainBoundViolated {
                chosen: to_f64(chosen),
                bound: to_f64(bound),
            });
        }
        Ok(())
    }

    /// Robustness coefficient for the interconnection arc `from -> to`.
    fn rho(&self, from: usize, to: usize) -> Result<T, ControllerError> {
        rho_from_gain(
            self.gains.coefficient(from, to)?,
            self.alpha_lower,
            self.alpha_upper,
        )
    }

    /// Robustness coefficient for the cotree influence.
    fn cotree_rho(&self) -> Result<T, ControllerError> {
        let gain = self.tree_to_cotree_gain.ok_or_else(|| {
            ControllerError::InvalidParameter(
                "tree-to-cotree gain required for an edge with cotree coupling".to_string(),
            )
        })?;
        rho_from_gain(gain, self.alpha_lower, self.alpha_upper)
    }
}

/// Converts a linear gain coefficient into its robustness coefficient
/// `rho = alpha_upper / (gamma * alpha_lower)`: under the comparison premise
/// a neighbor norm is at most `rho` times the edge's own norm.
pub fn rho_from_gain<T: Real>(
    gamma_coeff: T,
    alpha_lower: T,
    alpha_upper: T,
) -> Result<T, ControllerError> {
    let inputs = [
        ("gain coefficient", gamma_coeff),
        ("alpha_lower", alpha_lower),
        ("alpha_upper", alpha_upper),
    ];
    for (name, v) in inputs {
        if !(v > T::zero() && v.is_finite()) {
            return Err(ControllerError::InvalidParameter(format!(
                "{name} must be strictly positive and finite"
            )));
        }
    }
    Ok(alpha_upper / (gamma_coeff * alpha_lower))
}

/// Admissible upper bound `1 / (lambda_bar_1 (N - 1))` for the tree-to-cotree
/// gain coefficient; any chosen coefficient must be strictly below it.
pub fn quasi_gain_bound<T: Real>(lambda_bar_1: T, node_count: usize) -> Result<T, ControllerError> {
    if !(lambda_bar_1 > T::zero() && lambda_bar_1.is_finite()) {
        return Err(ControllerError::InvalidParameter(
            "lambda_bar_1 must be strictly positive and finite".to_string(),
        ));
    }
    if node_count < 2 {
        return Err(ControllerError::InvalidParameter(format!(
            "node count must be at least 2, got {node_count}"
        )));
    }
    Ok(T::one() / (lambda_bar_1 * real::<T>((node_count - 1) as f64)))
}

/// Bracket coefficient of edge `k` in the strongly connected law: the sum of
/// `|A_e[k][l]| * rho(l -> k)` over the in-neighbor subsystems of `k`.
pub fn strong_bracket_coefficient<T: Real>(
    k: usize,
    cfg: &ControllerConfig<T>,
    alg: &EdgeAlgebra<T>,
) -> Result<T, ControllerError> {
    let l = alg.edge_count();
    assert!(k >= 1 && k <= l, "edge index {k} out of range 1..={l}");
    let mut coeff = T::zero();
    for from in 1..=l {
        let a = alg.edge_adjacency[(k - 1, from - 1)];
        if from != k && a != 0 {
            coeff += real::<T>(a.abs() as f64) * cfg.rho(from, k)?;
        }
    }
    Ok(coeff)
}

/// Bracket coefficient of tree edge `k` (original edge id) in the spanning
/// tree law: the rho-weighted tree in-neighbor sum plus the Euclidean norm
/// of row `k` of the tree-to-cotree Laplacian block times the cotree rho.
pub fn tree_bracket_coefficient<T: Real>(
    k: usize,
    cfg: &ControllerConfig<T>,
    tp: &TreePartition<T>,
) -> Result<T, ControllerError> {
    let tree = &tp.selection.tree_edges;
    let i = tree.iter().position(|&e| e == k).ok_or_else(|| {
        ControllerError::InvalidParameter(format!("edge {k} is not a tree edge"))
    })?;
    let mut coeff = T::zero();
    for (j, &from) in tree.iter().enumerate() {
        let a = tp.blocks.ae1[(i, j)];
        if j != i && a != 0 {
            coeff += real::<T>(a.abs() as f64) * cfg.rho(from, k)?;
        }
    }
    let cotree_norm = tp.blocks.le2.row(i).norm();
    if cotree_norm > T::zero() {
        coeff += cotree_norm * cfg.cotree_rho()?;
    }
    Ok(coeff)
}

/// Evaluates the common law shape on one edge state row:
/// `x * ((1 - sigma/2) - [(eta + c)|x| + sqrt(2) xi] / max(|x|, eps))`.
///
/// Exactly zero at `x = 0`, with the boundary layer removing the unit-vector
/// singularity elsewhere.
pub fn apply_edge_law<T: Real>(
    state: &RowDVector<T>,
    bracket_coefficient: T,
    sigma: T,
    cfg: &ControllerConfig<T>,
) -> RowDVector<T> {
    let two = real::<T>(2.0);
    let norm = state.norm();
    let bracket = (cfg.eta + bracket_coefficient) * norm + two.sqrt() * cfg.xi;
    let scale = T::one() - sigma / two - bracket / norm.max(cfg.epsilon);
    state.map(|v| v * scale)
}

/// Control for edge `k` under the strongly connected law. `edge_states` is
/// the L x n stack of edge states in original edge order.
pub fn edge_control_strong<T: Real>(
    k: usize,
    edge_states: &DMatrix<T>,
    cfg: &ControllerConfig<T>,
    alg: &EdgeAlgebra<T>,
) -> Result<RowDVector<T>, ControllerError> {
    assert_eq!(
        edge_states.nrows(),
        alg.edge_count(),
        "edge state stack does not match the edge count"
    );
    let coeff = strong_bracket_coefficient(k, cfg, alg)?;
    Ok(apply_edge_law(
        &edge_states.row(k - 1).into_owned(),
        coeff,
        cfg.sigma[k - 1],
        cfg,
    ))
}

/// Control for tree edge `k` (original edge id) under the spanning tree law.
/// `tree_states` is the (N-1) x n stack of tree-edge states in the tree-first
/// order of `tp.selection.tree_edges`.
pub fn edge_control_tree<T: Real>(
    k: usize,
    tree_states: &DMatrix<T>,
    cfg: &ControllerConfig<T>,
    tp: &TreePartition<T>,
) -> Result<RowDVector<T>, ControllerError> {
    let tree = &tp.selection.tree_edges;
    assert_eq!(
        tree_states.nrows(),
        tree.len(),
        "tree state stack does not match the tree size"
    );
    let i = tree.iter().position(|&e| e == k).ok_or_else(|| {
        ControllerError::InvalidParameter(format!("edge {k} is not a tree edge"))
    })?;
    let coeff = tree_bracket_coefficient(k, cfg, tp)?;
    Ok(apply_edge_law(
        &tree_states.row(i).into_owned(),
        coeff,
        cfg.sigma[k - 1],
        cfg,
    ))
}

/// Stacked strong-law controls for all edges, L x n.
pub fn edge_controls_strong<T: Real>(
    edge_states: &DMatrix<T>,
    cfg: &ControllerConfig<T>,
    alg: &EdgeAlgebra<T>,
) -> Result<DMatrix<T>, ControllerError> {
    let mut u = DMatrix::zeros(edge_states.nrows(), edge_states.ncols());
    for k in 1..=alg.edge_count() {
        u.row_mut(k - 1)
            .copy_from(&edge_control_strong(k, edge_states, cfg, alg)?);
    }
    Ok(u)
}

/// Stacked tree-law controls for all tree edges, (N-1) x n in tree-first
/// order.
pub fn edge_controls_tree<T: Real>(
    tree_states: &DMatrix<T>,
    cfg: &ControllerConfig<T>,
    tp: &TreePartition<T>,
) -> Result<DMatrix<T>, ControllerError> {
    let mut u = DMatrix::zeros(tree_states.nrows(), tree_states.ncols());
    for (i, &k) in tp.selection.tree_edges.iter().enumerate() {
        u.row_mut(i)
            .copy_from(&edge_control_tree(k, tree_states, cfg, tp)?);
    }
    Ok(u)
}

/// Lifts stacked edge controls to node controls through the transposed
/// pseudoinverse: `u = pinv^T * u_edge`. For the strong law pass the
/// incidence pseudoinverse (L x N); for the tree law pass the tree left
/// inverse ((N-1) x N), for which the lift is exact.
pub fn lift_node_control<T: Real>(
    pinv: &DMatrix<T>,
    edge_controls: &DMatrix<T>,
) -> Result<DMatrix<T>, ControllerError> {
    if pinv.nrows() != edge_controls.nrows() {
        return Err(ControllerError::DimensionMismatch(format!(
            "pseudoinverse has {} rows but the edge control stack has {}",
            pinv.nrows(),
            edge_controls.nrows()
        )));
    }
    Ok(pinv.transpose() * edge_controls)
}

/// Largest absolute entry of `incidence^T * node_controls - edge_controls`:
/// how far the lifted node control is from realizing the prescribed edge
/// controls. Zero (to rounding) for the tree law; for the strong law it
/// measures the part of the prescription outside the realizable range.
pub fn lift_residual<T: Real>(
    incidence: &DMatrix<T>,
    node_controls: &DMatrix<T>,
    edge_controls: &DMatrix<T>,
) -> T {
    max_abs_entry(&(incidence.transpose() * node_controls - edge_controls))
}
