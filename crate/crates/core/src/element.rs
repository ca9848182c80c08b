//! Reference elements on `[0,1]²`: the bubble-enriched C1-Pk element and the
//! C1-Qk Bogner-Fox-Schmit tensor-product element.
//!
//! Both families share the same degree-of-freedom layout on the boundary:
//! a `[Value, Dx, Dy, Dxy]` block at each vertex, then per edge the point
//! values (increasing edge parameter) followed by the normal-axis
//! derivatives, then interior point values. All derivatives are global-axis
//! derivatives, so a shared edge functional is identical from both sides.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bell::{bell_nodal_basis, check_degree, select_bubbles, REFERENCE_FRAME};
use crate::dual::{dual_basis, functional_matrix, rcond};
use crate::error::{FemError, Result};
use crate::poly2d::{DofFunctional, DofKind, Field2D, Poly2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `P_k` enriched by selected Bell bubbles.
    #[serde(rename = "p-enriched")]
    EnrichedP,
    /// Tensor-product C1-Qk element.
    #[serde(rename = "q-bfs")]
    BfsQ,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::EnrichedP, Family::BfsQ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::EnrichedP => "p-enriched",
            Family::BfsQ => "q-bfs",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p-enriched" | "enriched-p" | "p" => Ok(Family::EnrichedP),
            "q-bfs" | "bfs-q" | "bfs" | "q" => Ok(Family::BfsQ),
            other => Err(FemError::InvalidArgument(format!("unknown family `{other}`"))),
        }
    }
}

/// Local vertices `x1..x4`, counter-clockwise from the origin.
pub const REFERENCE_VERTICES: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeSide {
    Bottom,
    Right,
    Top,
    Left,
}

impl EdgeSide {
    pub const ALL: [EdgeSide; 4] = [EdgeSide::Bottom, EdgeSide::Right, EdgeSide::Top, EdgeSide::Left];

    /// Reference point at edge parameter `t` (increasing coordinate).
    pub fn point(self, t: f64) -> [f64; 2] {
        match self {
            EdgeSide::Bottom => [t, 0.0],
            EdgeSide::Right => [1.0, t],
            EdgeSide::Top => [t, 1.0],
            EdgeSide::Left => [0.0, t],
        }
    }

    pub fn normal_kind(self) -> DofKind {
        match self {
            EdgeSide::Bottom | EdgeSide::Top => DofKind::Dy,
            EdgeSide::Right | EdgeSide::Left => DofKind::Dx,
        }
    }

    /// Local vertex indices at `t = 0` and `t = 1`.
    pub fn vertices(self) -> [usize; 2] {
        match self {
            EdgeSide::Bottom => [0, 1],
            EdgeSide::Right => [1, 2],
            EdgeSide::Top => [3, 2],
            EdgeSide::Left => [0, 3],
        }
    }
}

/// Topological owner of a local degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DofRole {
    Vertex { vertex: usize, kind: DofKind },
    Edge { side: EdgeSide, slot: usize },
    Interior { slot: usize },
}

/// Edge layout `(kind is normal derivative, parameter)`, values first.
fn edge_layout(family: Family, k: usize) -> Vec<(bool, f64)> {
    let values = (1..=k - 3).map(|j| (false, j as f64 / (k - 2) as f64));
    let derivs: Vec<(bool, f64)> = match family {
        Family::EnrichedP => (1..=k - 4).map(|j| (true, j as f64 / (k - 3) as f64)).collect(),
        Family::BfsQ => (1..=k - 3).map(|j| (true, j as f64 / (k - 2) as f64)).collect(),
    };
    values.chain(derivs).collect()
}

fn interior_points(family: Family, k: usize) -> Vec<[f64; 2]> {
    let a = (k - 2) as f64;
    match family {
        Family::EnrichedP => (1..=k.saturating_sub(7))
            .flat_map(|i| (1..=i).map(move |j| [i as f64 / a, j as f64 / a]))
            .collect(),
        Family::BfsQ => (1..=k - 3)
            .flat_map(|i| (1..=k - 3).map(move |j| [i as f64 / a, j as f64 / a]))
            .collect(),
    }
}

/// Ordered reference functionals and their topological roles.
pub fn element_dofs(family: Family, k: usize) -> Result<(Vec<DofFunctional>, Vec<DofRole>)> {
    check_degree(k)?;
    let mut dofs = Vec::new();
    let mut roles = Vec::new();
    for (vertex, p) in REFERENCE_VERTICES.iter().enumerate() {
        for kind in DofKind::ALL {
            dofs.push(DofFunctional::new(kind, p[0], p[1]));
            roles.push(DofRole::Vertex { vertex, kind });
        }
    }
    let layout = edge_layout(family, k);
    for side in EdgeSide::ALL {
        for (slot, &(normal, t)) in layout.iter().enumerate() {
            let p = side.point(t);
            let kind = if normal { side.normal_kind() } else { DofKind::Value };
            dofs.push(DofFunctional::new(kind, p[0], p[1]));
            roles.push(DofRole::Edge { side, slot });
        }
    }
    for (slot, p) in interior_points(family, k).into_iter().enumerate() {
        dofs.push(DofFunctional::new(DofKind::Value, p[0], p[1]));
        roles.push(DofRole::Interior { slot });
    }
    Ok((dofs, roles))
}

/// Degrees of freedom of the enriched C1-Pk element.
pub fn enriched_dofs(k: usize) -> Result<(Vec<DofFunctional>, Vec<DofRole>)> {
    element_dofs(Family::EnrichedP, k)
}

/// `P_k` in graded order (local monomials), then the selected Bell bubbles.
pub fn enriched_space(k: usize) -> Result<Vec<Poly2D>> {
    check_degree(k)?;
    let mut span: Vec<Poly2D> = (0..=k)
        .flat_map(|d| (0..=d).rev().map(move |i| (i, d - i)))
        .map(|(i, j)| Poly2D::monomial(REFERENCE_FRAME, i, j))
        .collect();
    let bell = bell_nodal_basis(k)?;
    for label in select_bubbles(k)? {
        let b = bell
            .nodal_function(label)
            .expect("selected bubble labels exist in the Bell basis");
        span.push(b.clone());
    }
    Ok(span)
}

/// All local monomials of `Q_k`.
pub fn bfs_space(k: usize) -> Result<Vec<Poly2D>> {
    check_degree(k)?;
    Ok((0..=k)
        .flat_map(|i| (0..=k).map(move |j| (i, j)))
        .map(|(i, j)| Poly2D::monomial(REFERENCE_FRAME, i, j))
        .collect())
}

fn spanning_set(family: Family, k: usize) -> Result<Vec<Poly2D>> {
    match family {
        Family::EnrichedP => enriched_space(k),
        Family::BfsQ => bfs_space(k),
    }
}

/// Closed-form per-element dimension.
pub fn element_dim(family: Family, k: usize) -> usize {
    match family {
        Family::EnrichedP => {
            let bubbles = match k {
                4 => 5,
                5 => 7,
                _ => 8,
            };
            (k + 1) * (k + 2) / 2 + bubbles
        }
        Family::BfsQ => (k + 1) * (k + 1),
    }
}

/// A reference element with its nodal basis.
#[derive(Debug, Clone)]
pub struct ElementBasis {
    pub family: Family,
    pub k: usize,
    pub dofs: Vec<DofFunctional>,
    pub roles: Vec<DofRole>,
    pub nodal: Vec<Poly2D>,
    pub rcond: f64,
    pub duality_residual: f64,
    /// `derivs[n][3 * ax + ay]` for `ax, ay ≤ 2`.
    derivs: Vec<Vec<Poly2D>>,
}

impl ElementBasis {
    fn from_parts(
        family: Family,
        k: usize,
        dofs: Vec<DofFunctional>,
        roles: Vec<DofRole>,
        span: &[Poly2D],
    ) -> Result<Self> {
        let db = dual_basis(&dofs, span)?;
        let derivs = db
            .nodal
            .iter()
            .map(|p| {
                (0..9)
                    .map(|d| p.derivative(d / 3, d % 3))
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(ElementBasis {
            family,
            k,
            dofs,
            roles,
            nodal: db.nodal,
            rcond: db.rcond,
            duality_residual: db.residual,
            derivs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    pub fn per_edge(&self) -> usize {
        self.roles
            .iter()
            .filter(|r| matches!(r, DofRole::Edge { side: EdgeSide::Bottom, .. }))
            .count()
    }

    pub fn per_interior(&self) -> usize {
        self.roles
            .iter()
            .filter(|r| matches!(r, DofRole::Interior { .. }))
            .count()
    }

    /// Cached reference derivative `∂^{ax,ay} φ_n`, `ax, ay ≤ 2`.
    pub fn nodal_derivative(&self, n: usize, ax: usize, ay: usize) -> &Poly2D {
        assert!(ax <= 2 && ay <= 2, "derivative order above 2");
        &self.derivs[n][3 * ax + ay]
    }

    pub fn eval_reference(&self, n: usize, x: f64, y: f64, ax: usize, ay: usize) -> f64 {
        self.nodal_derivative(n, ax, ay).eval(x, y)
    }

    /// Local interpolant `Σ F_n(f) φ_n` on the reference square.
    pub fn interpolate_reference<F: Field2D + ?Sized>(&self, f: &F) -> Poly2D {
        let mut out = Poly2D::zero(REFERENCE_FRAME, 0, 0);
        for (dof, phi) in self.dofs.iter().zip(&self.nodal) {
            out.axpy(dof.apply(f), phi);
        }
        out
    }

    /// Indices of the DOFs that determine the traces on `side`.
    pub fn edge_dof_indices(&self, side: EdgeSide) -> Vec<usize> {
        let [a, b] = side.vertices();
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| match r {
                DofRole::Vertex { vertex, .. } => *vertex == a || *vertex == b,
                DofRole::Edge { side: s, .. } => *s == side,
                DofRole::Interior { .. } => false,
            })
            .map(|(n, _)| n)
            .collect()
    }
}

/// Nodal basis of the enriched C1-Pk element.
pub fn enriched_nodal_basis(k: usize) -> Result<ElementBasis> {
    let (dofs, roles) = enriched_dofs(k)?;
    let span = enriched_space(k)?;
    ElementBasis::from_parts(Family::EnrichedP, k, dofs, roles, &span)
}

/// Enriched element with caller-chosen bubbles in place of the Bell selection.
pub fn enriched_with_bubbles(k: usize, bubbles: &[Poly2D]) -> Result<ElementBasis> {
    let (dofs, roles) = enriched_dofs(k)?;
    let mut span: Vec<Poly2D> = enriched_space(k)?
        .into_iter()
        .take((k + 1) * (k + 2) / 2)
        .collect();
    span.extend(bubbles.iter().cloned());
    if span.len() != dofs.len() {
        return Err(FemError::MismatchedCounts {
            dim: span.len(),
            n_dof: dofs.len(),
        });
    }
    ElementBasis::from_parts(Family::EnrichedP, k, dofs, roles, &span)
}

/// Nodal basis of the C1-Qk BFS element: tensor products of the 1D element with
/// endpoint values and slopes plus `k-3` interior values.
pub fn bfs_element(k: usize) -> Result<ElementBasis> {
    let (dofs, roles) = element_dofs(Family::BfsQ, k)?;
    let span = bfs_space(k)?;
    ElementBasis::from_parts(Family::BfsQ, k, dofs, roles, &span)
}

pub fn element_basis(family: Family, k: usize) -> Result<ElementBasis> {
    match family {
        Family::EnrichedP => enriched_nodal_basis(k),
        Family::BfsQ => bfs_element(k),
    }
}

/// Reference element placed on `[x0, x0+h] × [y0, y0+h]`.
///
/// Physical DOFs are the reference functionals mapped to the square:
/// a derivative DOF of total order `d` picks up `h^d`.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalElement<'a> {
    pub basis: &'a ElementBasis,
    pub origin: [f64; 2],
    pub h: f64,
}

impl<'a> PhysicalElement<'a> {
    pub fn new(basis: &'a ElementBasis, origin: [f64; 2], h: f64) -> Self {
        assert!(h > 0.0, "element size must be positive");
        PhysicalElement { basis, origin, h }
    }

    pub fn to_reference(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.origin[0]) / self.h, (y - self.origin[1]) / self.h)
    }

    /// Factor turning a physical DOF value into its reference counterpart.
    pub fn dof_scale(&self, n: usize) -> f64 {
        self.h.powi(self.basis.dofs[n].kind.order())
    }

    /// The physical functional dual to physical nodal function `n`.
    pub fn functional(&self, n: usize) -> DofFunctional {
        let f = self.basis.dofs[n];
        DofFunctional::new(
            f.kind,
            self.origin[0] + self.h * f.point[0],
            self.origin[1] + self.h * f.point[1],
        )
    }

    /// `∂^{ax,ay}` of physical nodal function `n` at physical `(x, y)`.
    pub fn eval(&self, n: usize, x: f64, y: f64, ax: usize, ay: usize) -> f64 {
        let (xr, yr) = self.to_reference(x, y);
        self.dof_scale(n)
            * self.h.powi(-((ax + ay) as i32))
            * self.basis.eval_reference(n, xr, yr, ax, ay)
    }

    /// Converts physical DOF values to reference DOF values.
    pub fn to_reference_coeffs(&self, physical: &[f64]) -> Vec<f64> {
        physical
            .iter()
            .enumerate()
            .map(|(n, c)| c * self.dof_scale(n))
            .collect()
    }

    /// `Σ c_n ∂^{ax,ay} φ_n` for physical DOF values `c`.
    pub fn eval_combination(&self, physical: &[f64], x: f64, y: f64, ax: usize, ay: usize) -> f64 {
        let (xr, yr) = self.to_reference(x, y);
        let chain = self.h.powi(-((ax + ay) as i32));
        physical
            .iter()
            .enumerate()
            .map(|(n, c)| c * self.dof_scale(n) * self.basis.eval_reference(n, xr, yr, ax, ay))
            .sum::<f64>()
            * chain
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnisolvencyReport {
    pub dim: usize,
    pub n_dof: usize,
    pub rcond: f64,
}

/// Dimension, DOF count and duality-matrix conditioning for one element.
pub fn unisolvency_report(family: Family, k: usize) -> Result<UnisolvencyReport> {
    let (dofs, _) = element_dofs(family, k)?;
    let span = spanning_set(family, k)?;
    if dofs.len() != span.len() {
        return Err(FemError::MismatchedCounts {
            dim: span.len(),
            n_dof: dofs.len(),
        });
    }
    let rc = rcond(&functional_matrix(&dofs, &span));
    Ok(UnisolvencyReport {
        dim: span.len(),
        n_dof: dofs.len(),
        rcond: rc,
    })
}
