//! Symmetric positive definite solvers: preconditioned conjugate gradients
//! and a dense Cholesky path used as a cross-check.

use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{FemError, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b - A x‖ / ‖b‖` of the recurrence residual at exit.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `z = M⁻¹ r` for a symmetric positive definite `M`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let diag = a.diagonal();
        if diag.iter().any(|&d| d.is_nan() || d <= 0.0) {
            return Err(FemError::NotSpd);
        }
        Ok(Jacobi {
            inv_diag: diag.into_iter().map(|d| 1.0 / d).collect(),
        })
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((z, r), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *z = r * d;
        }
    }
}

/// Additive Schwarz: `M⁻¹ = Σ_B R_Bᵀ A_BB⁻¹ R_B` over index blocks `B`.
///
/// With one block per element this removes the element-local
/// ill-conditioning of high-degree nodal bases.
#[derive(Debug, Clone)]
pub struct BlockSchwarz {
    blocks: Vec<(Vec<usize>, Cholesky<f64, Dyn>)>,
}

impl BlockSchwarz {
    /// Every unknown must belong to at least one block.
    pub fn new(a: &CsrMatrix, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut covered = vec![false; a.n];
        let mut out = Vec::with_capacity(blocks.len());
        for idx in blocks.iter().filter(|b| !b.is_empty()) {
            if idx.iter().any(|&i| i >= a.n) {
                return Err(FemError::DimensionMismatch("block index out of range".into()));
            }
            let m = DMatrix::from_fn(idx.len(), idx.len(), |p, q| a.get(idx[p], idx[q]));
            let chol = m.cholesky().ok_or(FemError::NotSpd)?;
            idx.iter().for_each(|&i| covered[i] = true);
            out.push((idx.clone(), chol));
        }
        if covered.iter().any(|c| !c) {
            return Err(FemError::InvalidArgument("blocks do not cover every unknown".into()));
        }
        Ok(BlockSchwarz { blocks: out })
    }
}

impl Preconditioner for BlockSchwarz {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.iter_mut().for_each(|v| *v = 0.0);
        for (idx, chol) in &self.blocks {
            let mut local = DVector::from_iterator(idx.len(), idx.iter().map(|&i| r[i]));
            chol.solve_mut(&mut local);
            for (&i, v) in idx.iter().zip(local.iter()) {
                z[i] += v;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecondKind {
    Jacobi,
    #[default]
    Schwarz,
}

impl FromStr for PrecondKind {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jacobi" => Ok(PrecondKind::Jacobi),
            "schwarz" => Ok(PrecondKind::Schwarz),
            other => Err(FemError::InvalidArgument(format!("unknown preconditioner `{other}`"))),
        }
    }
}

/// Jacobi-preconditioned CG, stopping at `‖r‖ ≤ rel_tol ‖b‖`.
pub fn pcg(a: &CsrMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    if a.n == 0 {
        return Ok((Vec::new(), SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    pcg_with(a, b, &Jacobi::new(a)?, rel_tol, max_iter)
}

/// Preconditioned CG with an arbitrary SPD preconditioner.
pub fn pcg_with<P: Preconditioner + ?Sized>(
    a: &CsrMatrix,
    b: &[f64],
    m: &P,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n;
    if b.len() != n {
        return Err(FemError::DimensionMismatch(format!(
            "rhs has length {} but matrix is {n}x{n}",
            b.len()
        )));
    }
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if n == 0 || b_norm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if curvature <= 0.0 || !curvature.is_finite() {
            return Err(FemError::NotSpd);
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = dot(&r, &r).sqrt() / b_norm;
        if res <= rel_tol {
            return Ok((x, SolveStats { iterations: it, relative_residual: res }));
        }
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(FemError::NotConverged {
        iterations: max_iter,
        residual: dot(&r, &r).sqrt() / b_norm,
    })
}

/// Dense Cholesky solve of `A x = b`.
pub fn dense_cholesky(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.n {
        return Err(FemError::DimensionMismatch(format!(
            "rhs has length {} but matrix is {n}x{n}",
            b.len(),
            n = a.n
        )));
    }
    if a.n == 0 {
        return Ok(Vec::new());
    }
    let chol = a.to_dense().cholesky().ok_or(FemError::NotSpd)?;
    let x = chol.solve(&DVector::from_column_slice(b));
    Ok(x.iter().copied().collect())
}
