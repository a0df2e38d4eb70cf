//! Brute-force discretization of the full three-sector operator on
//! `C + grid + sym(grid^2)`, with direct eigenvalue counting below a shift.
//!
//! This is the independent oracle for the Birman-Schwinger route: both act on
//! the same grid data, but this module never forms the determinant or the
//! reduced kernel; it assembles the whole operator and counts by inertia of
//! the tridiagonalized matrix.
//!
//! Basis conventions (weighted coordinates, so the matrix is the exact
//! compression of the quadrature model):
//!
//! * 1-sector coordinate at node j carries sqrt(w_j);
//! * 2-sector pair (a, b), a < b carries sqrt(2 w_a w_b), the diagonal pair
//!   (a, a) carries w_a. The annihilation block then couples node i to pair
//!   (i, j) with v(q_j) sqrt(w_j / 2), and to the diagonal pair (i, i) with
//!   v(q_i) sqrt(w_i) -- the sqrt(2) enhancement on diagonal pairs.

use crate::bs::{CountMethod, EigencountReport};
use crate::grid::TorusGrid;
use crate::linalg::{SymMatrix, SymTridiag};
use crate::model::ModelSpec;
use std::sync::OnceLock;

/// Hard cap on the assembled dimension 1 + n + n(n+1)/2.
pub const MAX_DIMENSION: usize = 40_000;

#[derive(Debug, Clone, thiserror::Error)]
pub enum FockError {
    #[error("assembled dimension {dim} exceeds the {MAX_DIMENSION} guard; use a smaller grid")]
    DimensionGuard { dim: usize },
    #[error("an eigenvalue lies within {atol:e} of z = {z}; perturb z and retry")]
    ShiftOnEigenvalue { z: f64, atol: f64 },
    #[error("requested {k} eigenvalues from a dimension-{dim} matrix")]
    NotEnoughEigenvalues { k: usize, dim: usize },
}

/// Dense symmetric discretization of the full operator.
pub struct FockMatrix {
    dim: usize,
    n_nodes: usize,
    matrix: SymMatrix,
    tridiag: OnceLock<SymTridiag>,
}

impl FockMatrix {
    pub fn assemble(model: &ModelSpec, grid: &TorusGrid) -> Result<Self, FockError> {
        let n = grid.len();
        let dim = 1 + n + n * (n + 1) / 2;
        if dim > MAX_DIMENSION {
            return Err(FockError::DimensionGuard { dim });
        }
        let nodes = grid.nodes();
        let weights = grid.weights();
        let v: Vec<f64> = nodes.iter().map(|q| model.v().eval(*q)).collect();
        let sqw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let u: Vec<f64> = nodes.iter().map(|q| model.u(*q)).collect();

        // pair index: (a, b) with a <= b -> offset + rank
        let pair_index = |a: usize, b: usize| -> usize {
            debug_assert!(a <= b);
            1 + n + a * n - a * (a + 1) / 2 + b
        };

        let mut m = SymMatrix::zeros(dim);
        m.set_sym(0, 0, model.u0());
        for j in 0..n {
            m.set_sym(0, 1 + j, sqw[j] * v[j]);
            m.set_sym(1 + j, 1 + j, u[j]);
        }
        for a in 0..n {
            for b in a..n {
                let idx = pair_index(a, b);
                m.set_sym(idx, idx, model.w(nodes[a], nodes[b]));
            }
        }
        // annihilation block: row i couples to pairs containing node i
        for i in 0..n {
            for j in 0..n {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                let idx = pair_index(a, b);
                let coupling = if i == j {
                    v[i] * sqw[i]
                } else {
                    v[j] * (0.5 * weights[j]).sqrt()
                };
                m.set_sym(1 + i, idx, coupling);
            }
        }
        Ok(Self {
            dim,
            n_nodes: n,
            matrix: m,
            tridiag: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    fn tri(&self) -> &SymTridiag {
        self.tridiag.get_or_init(|| self.matrix.tridiagonalize())
    }

    /// Number of eigenvalues strictly below z, by inertia.
    pub fn count_below(&self, z: f64) -> Result<EigencountReport, FockError> {
        let tri = self.tri();
        let atol = 1e-12 * (1.0 + z.abs());
        if tri.eigenvalue_near(z, atol) {
            return Err(FockError::ShiftOnEigenvalue { z, atol });
        }
        Ok(EigencountReport {
            z,
            count: tri.count_below(z),
            method: CountMethod::FockOracle,
            residual_gap: tri.gap_to_spectrum(z),
        })
    }

    /// The k smallest eigenvalues, ascending.
    pub fn low_spectrum(&self, k: usize) -> Result<Vec<f64>, FockError> {
        if k > self.dim {
            return Err(FockError::NotEnoughEigenvalues { k, dim: self.dim });
        }
        Ok(self.tri().smallest(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FormFactor;
    use approx::assert_relative_eq;

    #[test]
    fn dimension_arithmetic_and_guard() {
        let model = ModelSpec::cubic(0.0);
        let grid = TorusGrid::build(2, true, 0).unwrap();
        let f = FockMatrix::assemble(&model, &grid).unwrap();
        assert_eq!(f.dim(), 1 + 8 + 36);
        assert_eq!(f.matrix().max_abs_asymmetry(), 0.0);
    }

    #[test]
    fn decoupled_model_is_block_diagonal_with_known_spectrum() {
        let model = ModelSpec::cubic(0.0)
            .with_form_factor(FormFactor::Constant(0.0))
            .with_u0(-5.0);
        let grid = TorusGrid::build(2, true, 0).unwrap();
        let f = FockMatrix::assemble(&model, &grid).unwrap();
        // spectrum = {u0} + {u(q_i)} + {w(q_i, q_j)} exactly
        let mut expected: Vec<f64> = vec![-5.0];
        for q in grid.nodes() {
            expected.push(model.u(*q));
        }
        for (a, qa) in grid.nodes().iter().enumerate() {
            for qb in grid.nodes().iter().skip(a) {
                expected.push(model.w(*qa, *qb));
            }
        }
        expected.sort_by(f64::total_cmp);
        let got = f.low_spectrum(f.dim()).unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert_relative_eq!(g, e, epsilon = 1e-8);
        }
        // decoupled enumeration of counts
        let z = -4.0;
        let expect_count = expected.iter().filter(|&&e| e < z).count();
        assert_eq!(f.count_below(z).unwrap().count, expect_count);
        assert_eq!(f.count_below(-6.0).unwrap().count, 0);
    }

    #[test]
    fn two_sector_diagonal_carries_w_values() {
        let model = ModelSpec::cubic(0.3);
        let grid = TorusGrid::build(2, true, 0).unwrap();
        let f = FockMatrix::assemble(&model, &grid).unwrap();
        let n = grid.len();
        let pair_index = |a: usize, b: usize| 1 + n + a * n - a * (a + 1) / 2 + b;
        for a in 0..n {
            for b in a..n {
                let idx = pair_index(a, b);
                assert_relative_eq!(
                    f.matrix().get(idx, idx),
                    model.w(grid.nodes()[a], grid.nodes()[b]),
                    epsilon = 1e-14
                );
            }
        }
        // 0-2 block vanishes
        for idx in 1 + n..f.dim() {
            assert_eq!(f.matrix().get(0, idx), 0.0);
        }
    }

    #[test]
    fn count_below_smallest_eigenvalue_is_zero() {
        let model = ModelSpec::cubic(-2.0);
        let grid = TorusGrid::build(2, true, 0).unwrap();
        let f = FockMatrix::assemble(&model, &grid).unwrap();
        let lo = f.low_spectrum(1).unwrap()[0];
        assert_eq!(f.count_below(lo - 1.0).unwrap().count, 0);
        assert!(f.count_below(lo + 1e-3).unwrap().count >= 1);
    }

    #[test]
    fn refinement_on_nested_grids_lowers_low_eigenvalues() {
        // offset=false lattices nest (n=2 nodes sit inside the n=4 set). The
        // quadrature weights rescale with the cell volume, so this is not an
        // exact Galerkin nesting; the min-max decrease holds up to the coarse
        // grid's own discretization error.
        let model = ModelSpec::cubic(-5.0);
        let coarse = TorusGrid::build(2, false, 0).unwrap();
        let fine = TorusGrid::build(4, false, 0).unwrap();
        let fc = FockMatrix::assemble(&model, &coarse).unwrap();
        let ff = FockMatrix::assemble(&model, &fine).unwrap();
        let ec = fc.low_spectrum(3).unwrap();
        let ef = ff.low_spectrum(3).unwrap();
        for (c, f) in ec.iter().zip(&ef) {
            assert!(
                *f <= c + 0.01 * (1.0 + c.abs()),
                "refinement raised an eigenvalue beyond tolerance: {c} -> {f}"
            );
        }
    }

    #[test]
    fn guard_rejects_oversized_grids() {
        let model = ModelSpec::cubic(0.0);
        let grid = TorusGrid::build(7, false, 0).unwrap(); // 343 nodes -> 59341 dim
        assert!(matches!(
            FockMatrix::assemble(&model, &grid),
            Err(FockError::DimensionGuard { .. })
        ));
    }
}
