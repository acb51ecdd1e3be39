use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::MatMut;

use super::assemble::LinearSystem;
use super::grid::FieldState;
use super::SolverError;

/// Sparse direct solver that keeps the symbolic LU analysis across solves
/// with an unchanged sparsity pattern.
type CachedAnalysis = (Vec<(usize, usize)>, SymbolicLu<usize>);

#[derive(Default)]
pub struct FixedBoundarySolver {
    cached: Option<CachedAnalysis>,
}

impl FixedBoundarySolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, system: &LinearSystem, tol: f64) -> Result<FieldState, SolverError> {
        let size = system.size();
        let triplets: Vec<Triplet<usize, usize, f64>> = system
            .entries
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let matrix = SparseColMat::<usize, f64>::try_new_from_triplets(size, size, &triplets)
            .map_err(|e| SolverError::SolveFailure {
                residual: f64::INFINITY,
                detail: format!("{e:?}"),
            })?;
        let pattern: Vec<(usize, usize)> = system.entries.iter().map(|&(r, c, _)| (r, c)).collect();
        let symbolic = match &self.cached {
            Some((p, s)) if *p == pattern => s.clone(),
            _ => {
                let s = SymbolicLu::try_new(matrix.symbolic()).map_err(|e| {
                    SolverError::SolveFailure {
                        residual: f64::INFINITY,
                        detail: format!("symbolic analysis: {e:?}"),
                    }
                })?;
                self.cached = Some((pattern, s.clone()));
                s
            }
        };
        let lu = Lu::try_new_with_symbolic(symbolic, matrix.as_ref()).map_err(|e| {
            SolverError::SolveFailure {
                residual: f64::INFINITY,
                detail: format!("factorization: {e:?}"),
            }
        })?;
        let solve = |rhs: &[f64]| {
            let mut x = rhs.to_vec();
            lu.solve_in_place(MatMut::from_column_major_slice_mut(&mut x, size, 1));
            x
        };
        let mut x = solve(&system.rhs);
        let mut error = backward_error(system, &x);
        if error.is_finite() && error > 1e-15 {
            // one step of iterative refinement
            let correction = solve(&system.residual(&x));
            let refined: Vec<f64> = x.iter().zip(&correction).map(|(a, b)| a + b).collect();
            let refined_error = backward_error(system, &refined);
            if refined_error < error {
                x = refined;
                error = refined_error;
            }
        }
        if error.is_nan() || error > tol || x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::SolveFailure {
                residual: error,
                detail: "relative residual above tolerance".into(),
            });
        }
        Ok(FieldState::from_values(system.n, x))
    }
}

/// `‖b − Ax‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)`.
pub fn backward_error(system: &LinearSystem, x: &[f64]) -> f64 {
    let r = system.residual(x);
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if r.iter().any(|v| !v.is_finite()) || x.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let scale = system.norm_inf() * inf(x) + inf(&system.rhs);
    if scale == 0.0 {
        return 0.0;
    }
    inf(&r) / scale
}

/// One-off solve without symbolic reuse.
pub fn solve_fixed_boundary(system: &LinearSystem, tol: f64) -> Result<FieldState, SolverError> {
    FixedBoundarySolver::new().solve(system, tol)
}
