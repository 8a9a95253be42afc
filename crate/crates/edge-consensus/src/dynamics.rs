//! Agent drift dynamics and bounded disturbance sampling.
//!
//! Agents share one drift field `f(t, x_i)`: identically zero, linear
//! `f = M x`, or the Chua circuit, a three-dimensional chaotic oscillator
//! whose piecewise-linear diode keeps the drift globally Lipschitz. The
//! disturbance model draws each component uniformly from a symmetric
//! interval, so the per-agent disturbance norm is bounded by
//! `bound * sqrt(n)` and the boundedness assumption behind the controller
//! holds exactly.

use nalgebra::{DMatrix, RowDVector};
use rand::Rng;
use thiserror::Error;

use crate::scalar::{real, Real};

/// Errors from dynamics validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid dynamics: {0}")]
    InvalidDimension(String),
}

/// The drift field variants.
#[derive(Clone, Debug, PartialEq)]
pub enum DynamicsKind<T: Real> {
    /// `f = 0`.
    Zero,
    /// `f(x) = M x` with a square coefficient matrix.
    Linear(DMatrix<T>),
    /// Chua's circuit with diode slopes `a` (inner) and `b` (outer):
    /// `f(x) = (zeta (-x1 + x2 - l(x1)), x1 - x2 + x3, -chi x2)` where
    /// `l(x1) = b x1 + (a - b)(|x1 + 1| - |x1 - 1|)/2`.
    Chua { zeta: T, chi: T, a: T, b: T },
}

/// A drift field together with the per-agent state dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsSpec<T: Real> {
    pub kind: DynamicsKind<T>,
    pub state_dim: usize,
}

impl<T: Real> DynamicsSpec<T> {
    /// Checks dimensional coherence: positive state dimension, a square
    /// matching matrix for the linear kind, dimension 3 for Chua.
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.state_dim == 0 {
            return Err(DynamicsError::InvalidDimension(
                "state dimension must be at least 1".to_string(),
            ));
        }
        match &self.kind {
            DynamicsKind::Zero => Ok(()),
            DynamicsKind::Linear(m) => {
                if m.nrows() != self.state_dim || m.ncols() != self.state_dim {
                    return Err(DynamicsError::InvalidDimension(format!(
                        "linear dynamics matrix is {}x{} but the state dimension is {}",
                        m.nrows(),
                        m.ncols(),
                        self.state_dim
                    )));
                }
                Ok(())
            }
            DynamicsKind::Chua { .. } => {
                if self.state_dim != 3 {
                    return Err(DynamicsError::InvalidDimension(format!(
                        "chua dynamics require state dimension 3, got {}",
                        self.state_dim
                    )));
                }
                Ok(())
            }
        }
    }

    /// Drift at one agent state (a row of length `state_dim`). The field is
    /// time-invariant for every kind; `_t` keeps the closed-loop signature.
    pub fn eval(&self, _t: T, x: &RowDVector<T>) -> RowDVector<T> {
        debug_assert_eq!(x.len(), self.state_dim);
        match &self.kind {
            DynamicsKind::Zero => RowDVector::zeros(self.state_dim),
            DynamicsKind::Linear(m) => x * m.transpose(),
            DynamicsKind::Chua { zeta, chi, a, b } => {
                let f = chua_vector_field([x[0], x[1], x[2]], *zeta, *chi, *a, *b);
                RowDVector::from_row_slice(&f)
            }
        }
    }
}

/// Chua's circuit field at `x = (x1, x2, x3)`.
pub fn chua_vector_field<T: Real>(x: [T; 3], zeta: T, chi: T, a: T, b: T) -> [T; 3] {
    let [x1, x2, x3] = x;
    let half = real::<T>(0.5);
    let one = T::one();
    let diode = b * x1 + half * (a - b) * ((x1 + one).abs() - (x1 - one).abs());
    [zeta * (-x1 + x2 - diode), x1 - x2 + x3, -chi * x2]
}

/// One per-agent disturbance draw: each component uniform in
/// `[-bound, bound]`. The draw consumes exactly `n` samples from `rng`, and
/// the underlying unit samples are scaled by `bound`, so runs that differ
/// only in `bound` see proportional disturbances.
pub fn sample_disturbance<T: Real, R: Rng>(rng: &mut R, bound: T, n: usize) -> RowDVector<T> {
    RowDVector::from_fn(n, |_, _| real::<T>(rng.gen_range(-1.0..=1.0)) * bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference_chua() -> DynamicsSpec<f64> {
        DynamicsSpec {
            kind: DynamicsKind::Chua {
                zeta: 10.0,
                chi: 18.0,
                a: -4.0 / 3.0,
                b: -0.75,
            },
            state_dim: 3,
        }
    }

    #[test]
    fn chua_field_matches_hand_evaluations() {
        let spec = reference_chua();
        spec.validate().unwrap();
        let at = |x: [f64; 3]| spec.eval(0.0, &RowDVector::from_row_slice(&x));
        // Odd field: zero at the origin.
        assert_eq!(at([0.0, 0.0, 0.0]), RowDVector::from_row_slice(&[0.0; 3]));
        // At (1,0,0) the diode sits at its inner-slope corner: l(1) = a.
        let f = at([1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(f[0], 10.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f[2], 0.0, epsilon = 1e-12);
        // At (0,1,0) the diode vanishes.
        let f = at([0.0, 1.0, 0.0]);
        assert_abs_diff_eq!(f[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f[2], -18.0, epsilon = 1e-12);
    }

    #[test]
    fn chua_field_is_odd_on_samples() {
        let spec = reference_chua();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = sample_disturbance(&mut rng, 3.0, 3);
            let fx = spec.eval(0.0, &x);
            let fmx = spec.eval(0.0, &(-x));
            assert_abs_diff_eq!((fx + fmx).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn linear_dynamics_apply_the_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let spec = DynamicsSpec {
            kind: DynamicsKind::Linear(m),
            state_dim: 2,
        };
        spec.validate().unwrap();
        let f = spec.eval(0.0, &RowDVector::from_row_slice(&[2.0, 3.0]));
        assert_eq!(f, RowDVector::from_row_slice(&[3.0, -2.0]));
    }

    #[test]
    fn validation_rejects_dimension_mismatches() {
        let bad_chua = DynamicsSpec {
            kind: reference_chua().kind,
            state_dim: 2,
        };
        assert!(bad_chua.validate().is_err());
        let bad_linear = DynamicsSpec::<f64> {
            kind: DynamicsKind::Linear(DMatrix::zeros(2, 3)),
            state_dim: 2,
        };
        assert!(bad_linear.validate().is_err());
        let empty = DynamicsSpec::<f64> {
            kind: DynamicsKind::Zero,
            state_dim: 0,
        };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn disturbances_are_bounded_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bound = 0.25;
        let cap = bound * 3.0_f64.sqrt();
        for _ in 0..100_000 {
            let w = sample_disturbance(&mut rng, bound, 3);
            assert!(w.iter().all(|v| v.abs() <= bound));
            assert!(w.norm() <= cap + 1e-15);
        }
        // Same seed, same sequence.
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            assert_eq!(
                sample_disturbance::<f64, _>(&mut a, 0.25, 3),
                sample_disturbance::<f64, _>(&mut b, 0.25, 3)
            );
        }
        // Zero bound collapses to the zero vector but still consumes draws.
        let mut c = ChaCha8Rng::seed_from_u64(42);
        assert_eq!(
            sample_disturbance::<f64, _>(&mut c, 0.0, 4),
            RowDVector::zeros(4)
        );
        // Halving the bound exactly halves the draw for the same rng state.
        let mut d1 = ChaCha8Rng::seed_from_u64(9);
        let mut d2 = ChaCha8Rng::seed_from_u64(9);
        let full = sample_disturbance::<f64, _>(&mut d1, 0.5, 3);
        let half = sample_disturbance::<f64, _>(&mut d2, 0.25, 3);
        assert_abs_diff_eq!((full * 0.5 - half).norm(), 0.0, epsilon = 0.0);
    }
}
