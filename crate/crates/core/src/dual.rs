//! Generalized Vandermonde systems: nodal bases dual to a set of functionals.

use nalgebra::DMatrix;

use crate::error::{FemError, Result};
use crate::poly2d::{DofFunctional, Poly2D};

/// Reciprocal condition number below which a duality matrix is rejected.
pub const SINGULAR_RCOND: f64 = 1e-14;

/// Outcome of inverting `V[m][n] = F_m(s_n)`.
#[derive(Debug, Clone)]
pub struct DualBasis {
    pub nodal: Vec<Poly2D>,
    /// 2-norm reciprocal condition number of `V`.
    pub rcond: f64,
    /// `max |F_m(φ_n) - δ_mn|` re-measured on the assembled polynomials.
    pub residual: f64,
}

pub fn functional_matrix(dofs: &[DofFunctional], span: &[Poly2D]) -> DMatrix<f64> {
    DMatrix::from_fn(dofs.len(), span.len(), |m, n| dofs[m].apply(&span[n]))
}

/// Ratio of extreme singular values; zero for empty or rank-deficient input.
pub fn rcond(matrix: &DMatrix<f64>) -> f64 {
    if matrix.is_empty() {
        return 0.0;
    }
    let sv = matrix.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

pub fn duality_residual(dofs: &[DofFunctional], nodal: &[Poly2D]) -> f64 {
    let mut worst: f64 = 0.0;
    for (m, f) in dofs.iter().enumerate() {
        for (n, p) in nodal.iter().enumerate() {
            let delta = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((f.apply(p) - delta).abs());
        }
    }
    worst
}

/// Nodal basis `φ_n = Σ_j C[j][n] s_j` with `C = V⁻¹`.
pub fn dual_basis(dofs: &[DofFunctional], span: &[Poly2D]) -> Result<DualBasis> {
    if dofs.len() != span.len() {
        return Err(FemError::MismatchedCounts {
            dim: span.len(),
            n_dof: dofs.len(),
        });
    }
    let v = functional_matrix(dofs, span);
    let rc = rcond(&v);
    if rc < SINGULAR_RCOND {
        return Err(FemError::SingularDofMatrix { rcond: rc });
    }
    let inv = v
        .lu()
        .try_inverse()
        .ok_or(FemError::SingularDofMatrix { rcond: rc })?;
    let frame = span[0].frame();
    let nodal: Vec<Poly2D> = (0..span.len())
        .map(|n| {
            let mut p = Poly2D::zero(frame, 0, 0);
            for (j, s) in span.iter().enumerate() {
                p.axpy(inv[(j, n)], s);
            }
            p
        })
        .collect();
    let residual = duality_residual(dofs, &nodal);
    Ok(DualBasis {
        nodal,
        rcond: rc,
        residual,
    })
}

/// Null space of `rows` (each of length `ncols`) by row reduction with partial pivoting.
///
/// One basis vector per free column: the free column set to 1, other free
/// columns 0, pivot columns back-substituted.
pub fn null_space(rows: &[Vec<f64>], ncols: usize) -> Vec<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let nrows = a.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale.max(1.0);
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let (best, val) = (r..nrows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        a[r].iter_mut().for_each(|v| *v /= p);
        for i in 0..nrows {
            if i != r && a[i][c] != 0.0 {
                let factor = a[i][c];
                let pivot_row = a[r].clone();
                for (v, pv) in a[i].iter_mut().zip(pivot_row.iter()) {
                    *v -= factor * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0.0; ncols];
            v[f] = 1.0;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f];
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly2d::{DofKind, Frame};

    #[test]
    fn null_space_of_single_constraint() {
        // x0 + 2 x1 - x2 = 0
        let ns = null_space(&[vec![1.0, 2.0, -1.0]], 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((v[0] + 2.0 * v[1] - v[2]).abs() < 1e-15);
        }
    }

    #[test]
    fn dual_basis_rejects_repeated_functional() {
        let f = Frame::IDENTITY;
        let span = vec![Poly2D::constant(f, 1.0), Poly2D::monomial(f, 1, 0)];
        let dofs = vec![
            DofFunctional::new(DofKind::Value, 0.5, 0.0),
            DofFunctional::new(DofKind::Value, 0.5, 0.0),
        ];
        assert!(matches!(
            dual_basis(&dofs, &span),
            Err(FemError::SingularDofMatrix { .. })
        ));
    }

    #[test]
    fn dual_basis_of_linear_interpolation() {
        let f = Frame::IDENTITY;
        let span = vec![Poly2D::constant(f, 1.0), Poly2D::monomial(f, 1, 0)];
        let dofs = vec![
            DofFunctional::new(DofKind::Value, 0.0, 0.0),
            DofFunctional::new(DofKind::Value, 1.0, 0.0),
        ];
        let db = dual_basis(&dofs, &span).unwrap();
        assert!(db.residual < 1e-15);
        assert!((db.nodal[0].eval(0.25, 0.0) - 0.75).abs() < 1e-15);
    }
}
