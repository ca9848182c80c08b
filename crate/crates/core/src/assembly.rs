//! Galerkin assembly of `(Δu, Δv) = (f, v)` with strong clamping, and
//! evaluation of finite element functions.
//!
//! The mesh is uniform, so every element shares one reference stiffness
//! matrix; only the load vector needs per-element quadrature.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::element::{ElementBasis, PhysicalElement};
use crate::error::{FemError, Result};
use crate::mesh::{DofMap, RectMesh};
use crate::quadrature::QuadratureRule;
use crate::solver::{dense_cholesky, pcg_with, BlockSchwarz, Jacobi, PrecondKind, SolveStats};
use crate::sparse::CsrMatrix;

/// Largest reduced system the dense path accepts.
pub const DIRECT_MAX_DIM: usize = 6000;

/// Reduced system over the free (unconstrained) DOFs.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub free_to_global: Vec<usize>,
    pub global_to_free: Vec<Option<usize>>,
    pub total: usize,
    /// Free indices touched by each element.
    pub element_blocks: Vec<Vec<usize>>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.free_to_global.len()
    }

    /// Scatters a free-DOF vector into a global vector with zeros at constrained slots.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.total];
        for (i, &g) in self.free_to_global.iter().enumerate() {
            out[g] = free[i];
        }
        out
    }

    pub fn restrict(&self, global: &[f64]) -> Vec<f64> {
        self.free_to_global.iter().map(|&g| global[g]).collect()
    }
}

/// Values of reference nodal functions and their second derivatives at quadrature points.
#[derive(Debug, Clone)]
pub struct ReferenceTable {
    /// `values[q * dim + n]`
    pub values: Vec<f64>,
    pub dxx: Vec<f64>,
    pub dxy: Vec<f64>,
    pub dyy: Vec<f64>,
    pub dim: usize,
}

impl ReferenceTable {
    pub fn new(eb: &ElementBasis, rule: &QuadratureRule) -> Self {
        let dim = eb.dim();
        let len = dim * rule.len();
        let mut t = ReferenceTable {
            values: Vec::with_capacity(len),
            dxx: Vec::with_capacity(len),
            dxy: Vec::with_capacity(len),
            dyy: Vec::with_capacity(len),
            dim,
        };
        for p in &rule.points {
            for n in 0..dim {
                t.values.push(eb.eval_reference(n, p[0], p[1], 0, 0));
                t.dxx.push(eb.eval_reference(n, p[0], p[1], 2, 0));
                t.dxy.push(eb.eval_reference(n, p[0], p[1], 1, 1));
                t.dyy.push(eb.eval_reference(n, p[0], p[1], 0, 2));
            }
        }
        t
    }
}

/// `∫_{[0,1]²} Δφ_i Δφ_j` on the reference square.
pub fn reference_stiffness(eb: &ElementBasis, rule: &QuadratureRule) -> Vec<Vec<f64>> {
    let table = ReferenceTable::new(eb, rule);
    let dim = eb.dim();
    let mut k = vec![vec![0.0; dim]; dim];
    for (q, w) in rule.weights.iter().enumerate() {
        let lap: Vec<f64> = (0..dim)
            .map(|n| table.dxx[q * dim + n] + table.dyy[q * dim + n])
            .collect();
        for i in 0..dim {
            let wi = w * lap[i];
            for j in 0..dim {
                k[i][j] += wi * lap[j];
            }
        }
    }
    k
}

/// Physical element stiffness `s_i s_j h⁻² K̂_ij` for DOF scales `s`.
pub fn element_stiffness(eb: &ElementBasis, rule: &QuadratureRule, h: f64) -> Vec<Vec<f64>> {
    let pe = PhysicalElement::new(eb, [0.0, 0.0], h);
    let scales: Vec<f64> = (0..eb.dim()).map(|n| pe.dof_scale(n)).collect();
    let mut k = reference_stiffness(eb, rule);
    for (i, row) in k.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= scales[i] * scales[j] / (h * h);
        }
    }
    k
}

fn check_map(mesh: &RectMesh, map: &DofMap, eb: &ElementBasis) -> Result<()> {
    if map.local_to_global.len() != mesh.element_count() {
        return Err(FemError::DimensionMismatch(format!(
            "DOF map covers {} elements, mesh has {}",
            map.local_to_global.len(),
            mesh.element_count()
        )));
    }
    if let Some(row) = map.local_to_global.iter().find(|r| r.len() != eb.dim()) {
        return Err(FemError::DimensionMismatch(format!(
            "DOF map has {} local slots, element has {}",
            row.len(),
            eb.dim()
        )));
    }
    Ok(())
}

/// Assembles the clamped system for source `f`.
pub fn assemble<F: Fn(f64, f64) -> f64>(
    mesh: &RectMesh,
    map: &DofMap,
    eb: &ElementBasis,
    f: F,
    quad_stiff: &QuadratureRule,
    quad_load: &QuadratureRule,
) -> Result<LinearSystem> {
    check_map(mesh, map, eb)?;
    let dim = eb.dim();
    let h = mesh.h;

    let mut global_to_free = vec![None; map.total];
    let mut free_to_global = Vec::with_capacity(map.free_count());
    for (g, slot) in global_to_free.iter_mut().enumerate() {
        if !map.is_boundary[g] {
            *slot = Some(free_to_global.len());
            free_to_global.push(g);
        }
    }

    let ke = element_stiffness(eb, quad_stiff, h);
    let load_table = ReferenceTable::new(eb, quad_load);
    let scales: Vec<f64> = {
        let pe = PhysicalElement::new(eb, [0.0, 0.0], h);
        (0..dim).map(|n| pe.dof_scale(n)).collect()
    };

    let mut triplets = Vec::with_capacity(mesh.element_count() * dim * dim);
    let mut rhs = vec![0.0; free_to_global.len()];
    let mut fe = vec![0.0; dim];
    let mut element_blocks = Vec::with_capacity(mesh.element_count());
    for (el, origin) in mesh.elements.iter().enumerate() {
        let l2g = &map.local_to_global[el];
        let mut block: Vec<usize> = l2g.iter().filter_map(|&g| global_to_free[g]).collect();
        block.sort_unstable();
        block.dedup();
        element_blocks.push(block);
        fe.iter_mut().for_each(|v| *v = 0.0);
        for (q, (p, w)) in quad_load.points.iter().zip(&quad_load.weights).enumerate() {
            let fv = w * f(origin[0] + h * p[0], origin[1] + h * p[1]);
            for (acc, v) in fe.iter_mut().zip(&load_table.values[q * dim..(q + 1) * dim]) {
                *acc += fv * v;
            }
        }
        for i in 0..dim {
            let Some(fi) = global_to_free[l2g[i]] else { continue };
            rhs[fi] += fe[i] * scales[i] * h * h;
            for j in 0..dim {
                if let Some(fj) = global_to_free[l2g[j]] {
                    triplets.push((fi, fj, ke[i][j]));
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(free_to_global.len(), triplets);
    Ok(LinearSystem {
        matrix,
        rhs,
        free_to_global,
        global_to_free,
        total: map.total,
        element_blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Cg,
    Direct,
}

impl FromStr for SolverKind {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cg" => Ok(SolverKind::Cg),
            "direct" | "cholesky" => Ok(SolverKind::Direct),
            other => Err(FemError::InvalidArgument(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Global DOF values, constrained slots zero.
    pub coeffs: Vec<f64>,
    pub stats: SolveStats,
}

/// CG with the default preconditioner; iteration cap `50 · dim`.
pub fn solve(sys: &LinearSystem, rel_tol: f64) -> Result<Solution> {
    solve_cg(sys, PrecondKind::default(), rel_tol)
}

pub fn solve_cg(sys: &LinearSystem, precond: PrecondKind, rel_tol: f64) -> Result<Solution> {
    let cap = 50 * sys.dim().max(1);
    if sys.dim() == 0 {
        return Ok(Solution {
            coeffs: vec![0.0; sys.total],
            stats: SolveStats { iterations: 0, relative_residual: 0.0 },
        });
    }
    let (x, stats) = match precond {
        PrecondKind::Jacobi => pcg_with(&sys.matrix, &sys.rhs, &Jacobi::new(&sys.matrix)?, rel_tol, cap)?,
        PrecondKind::Schwarz => {
            let m = BlockSchwarz::new(&sys.matrix, &sys.element_blocks)?;
            pcg_with(&sys.matrix, &sys.rhs, &m, rel_tol, cap)?
        }
    };
    Ok(Solution {
        coeffs: sys.expand(&x),
        stats,
    })
}

/// Dense Cholesky on the reduced system (at most [`DIRECT_MAX_DIM`] unknowns).
pub fn solve_direct(sys: &LinearSystem) -> Result<Solution> {
    if sys.dim() > DIRECT_MAX_DIM {
        return Err(FemError::InvalidArgument(format!(
            "direct solver limited to {DIRECT_MAX_DIM} unknowns, system has {}",
            sys.dim()
        )));
    }
    let x = dense_cholesky(&sys.matrix, &sys.rhs)?;
    let r = sys.matrix.matvec(&x);
    let b_norm = sys.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let res = r
        .iter()
        .zip(&sys.rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(Solution {
        coeffs: sys.expand(&x),
        stats: SolveStats {
            iterations: 0,
            relative_residual: if b_norm > 0.0 { res / b_norm } else { 0.0 },
        },
    })
}

pub fn solve_with(sys: &LinearSystem, kind: SolverKind, precond: PrecondKind, rel_tol: f64) -> Result<Solution> {
    match kind {
        SolverKind::Cg => solve_cg(sys, precond, rel_tol),
        SolverKind::Direct => solve_direct(sys),
    }
}

/// Local DOF values of element `el`.
pub fn gather(map: &DofMap, el: usize, coeffs: &[f64]) -> Vec<f64> {
    map.local_to_global[el].iter().map(|&g| coeffs[g]).collect()
}

/// `∂^{ax,ay} u_h` at `(x, y)` using element `el`'s polynomial.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_in_element(
    mesh: &RectMesh,
    map: &DofMap,
    eb: &ElementBasis,
    coeffs: &[f64],
    el: usize,
    x: f64,
    y: f64,
    deriv: (usize, usize),
) -> f64 {
    let pe = PhysicalElement::new(eb, mesh.elements[el], mesh.h);
    pe.eval_combination(&gather(map, el, coeffs), x, y, deriv.0, deriv.1)
}

/// `∂^{ax,ay} u_h` at `(x, y)`, `ax, ay ≤ 2`.
pub fn evaluate_solution(
    mesh: &RectMesh,
    map: &DofMap,
    eb: &ElementBasis,
    coeffs: &[f64],
    x: f64,
    y: f64,
    deriv: (usize, usize),
) -> Result<f64> {
    if deriv.0 > 2 || deriv.1 > 2 {
        return Err(FemError::InvalidArgument(format!(
            "derivative order {deriv:?} exceeds (2, 2)"
        )));
    }
    if coeffs.len() != map.total {
        return Err(FemError::DimensionMismatch(format!(
            "{} coefficients for {} DOFs",
            coeffs.len(),
            map.total
        )));
    }
    let el = mesh.locate(x, y)?;
    Ok(evaluate_in_element(mesh, map, eb, coeffs, el, x, y, deriv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::{bfs_element, enriched_nodal_basis};
    use crate::mesh::{build_mesh, clamped_dof_map};
    use crate::quadrature::gauss_rule;

    #[test]
    fn zero_source_gives_zero_solution() {
        let eb = enriched_nodal_basis(4).unwrap();
        let mesh = build_mesh(3).unwrap();
        let map = clamped_dof_map(&mesh, &eb);
        let sys = assemble(&mesh, &map, &eb, |_, _| 0.0, &gauss_rule(5).unwrap(), &gauss_rule(10).unwrap()).unwrap();
        assert!(sys.rhs.iter().all(|&v| v == 0.0));
        let sol = solve(&sys, 1e-13).unwrap();
        assert!(sol.coeffs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_element_is_fully_clamped() {
        let eb = enriched_nodal_basis(4).unwrap();
        let mesh = build_mesh(1).unwrap();
        let map = clamped_dof_map(&mesh, &eb);
        let sys = assemble(&mesh, &map, &eb, |_, _| 1.0, &gauss_rule(5).unwrap(), &gauss_rule(10).unwrap()).unwrap();
        assert_eq!(sys.dim(), 0);
        let sol = solve(&sys, 1e-13).unwrap();
        assert_eq!(sol.coeffs, vec![0.0; 20]);
    }

    #[test]
    fn stiffness_is_symmetric() {
        let eb = bfs_element(5).unwrap();
        let mesh = build_mesh(3).unwrap();
        let map = clamped_dof_map(&mesh, &eb);
        let sys = assemble(&mesh, &map, &eb, |x, y| x + y, &gauss_rule(6).unwrap(), &gauss_rule(11).unwrap()).unwrap();
        assert!(sys.matrix.symmetry_defect() <= 1e-12 * sys.matrix.max_abs());
    }

    #[test]
    fn preconditioners_agree() {
        let eb = enriched_nodal_basis(6).unwrap();
        let mesh = build_mesh(3).unwrap();
        let map = clamped_dof_map(&mesh, &eb);
        let sys = assemble(&mesh, &map, &eb, |x, y| (x * y).sin(), &gauss_rule(7).unwrap(), &gauss_rule(12).unwrap()).unwrap();
        let a = solve_cg(&sys, PrecondKind::Jacobi, 1e-13).unwrap();
        let b = solve_cg(&sys, PrecondKind::Schwarz, 1e-13).unwrap();
        let d = solve_direct(&sys).unwrap();
        let scale = d.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for ((x, y), z) in a.coeffs.iter().zip(&b.coeffs).zip(&d.coeffs) {
            assert!((x - z).abs() < 1e-8 * scale && (y - z).abs() < 1e-8 * scale);
        }
        assert!(b.stats.iterations < a.stats.iterations);
    }

    #[test]
    fn mismatched_map_is_rejected() {
        let eb4 = enriched_nodal_basis(4).unwrap();
        let eb5 = enriched_nodal_basis(5).unwrap();
        let mesh = build_mesh(2).unwrap();
        let map = clamped_dof_map(&mesh, &eb4);
        let q = gauss_rule(6).unwrap();
        assert!(matches!(
            assemble(&mesh, &map, &eb5, |_, _| 1.0, &q, &q),
            Err(FemError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn evaluation_errors() {
        let eb = enriched_nodal_basis(4).unwrap();
        let mesh = build_mesh(2).unwrap();
        let map = clamped_dof_map(&mesh, &eb);
        let c = vec![0.0; map.total];
        assert!(matches!(
            evaluate_solution(&mesh, &map, &eb, &c, 1.2, 0.5, (0, 0)),
            Err(FemError::OutOfDomain { .. })
        ));
        assert!(evaluate_solution(&mesh, &map, &eb, &c, 0.5, 0.5, (3, 0)).is_err());
    }
}
