//! Uniform square meshes of the unit square and global DOF numbering.
//!
//! Numbering: vertices first (row-major in `(y, x)`, four DOFs each in
//! `[Value, Dx, Dy, Dxy]` order), then edges (horizontal, then vertical,
//! each row-major), then element interiors.

use serde::{Deserialize, Serialize};

use crate::element::{DofRole, ElementBasis, EdgeSide};
use crate::error::{FemError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints in increasing-coordinate order.
    pub vertices: [usize; 2],
    pub elements: Vec<usize>,
    pub horizontal: bool,
}

#[derive(Debug, Clone)]
pub struct RectMesh {
    /// Subdivisions per side.
    pub n: usize,
    pub h: f64,
    /// Lower-left corners, element `j * n + i` at `(i h, j h)`.
    pub elements: Vec<[f64; 2]>,
    pub vertices: Vec<[f64; 2]>,
    pub edges: Vec<Edge>,
}

impl RectMesh {
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(FemError::InvalidArgument("mesh needs n >= 1".into()));
        }
        let h = 1.0 / n as f64;
        let coord = |i: usize| if i == n { 1.0 } else { i as f64 * h };
        let elements = (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| [coord(i), coord(j)])
            .collect();
        let vertices = (0..=n)
            .flat_map(|j| (0..=n).map(move |i| (i, j)))
            .map(|(i, j)| [coord(i), coord(j)])
            .collect();
        let mut mesh = RectMesh {
            n,
            h,
            elements,
            vertices,
            edges: Vec::with_capacity(2 * n * (n + 1)),
        };
        for r in 0..=n {
            for c in 0..n {
                let elements = [r.checked_sub(1), (r < n).then_some(r)]
                    .into_iter()
                    .flatten()
                    .map(|row| row * n + c)
                    .collect();
                mesh.edges.push(Edge {
                    vertices: [mesh.vertex_index(c, r), mesh.vertex_index(c + 1, r)],
                    elements,
                    horizontal: true,
                });
            }
        }
        for r in 0..n {
            for c in 0..=n {
                let elements = [c.checked_sub(1), (c < n).then_some(c)]
                    .into_iter()
                    .flatten()
                    .map(|col| r * n + col)
                    .collect();
                mesh.edges.push(Edge {
                    vertices: [mesh.vertex_index(c, r), mesh.vertex_index(c, r + 1)],
                    elements,
                    horizontal: false,
                });
            }
        }
        Ok(mesh)
    }

    pub fn element_count(&self) -> usize {
        self.n * self.n
    }

    pub fn vertex_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn edge_count(&self) -> usize {
        2 * self.n * (self.n + 1)
    }

    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    fn horizontal_edge(&self, row: usize, col: usize) -> usize {
        row * self.n + col
    }

    fn vertical_edge(&self, col: usize, row: usize) -> usize {
        self.n * (self.n + 1) + row * (self.n + 1) + col
    }

    /// `(i, j)` grid position of element `e`.
    pub fn element_position(&self, e: usize) -> (usize, usize) {
        (e % self.n, e / self.n)
    }

    /// Global vertices `x1..x4` of element `e`.
    pub fn element_vertices(&self, e: usize) -> [usize; 4] {
        let (i, j) = self.element_position(e);
        [
            self.vertex_index(i, j),
            self.vertex_index(i + 1, j),
            self.vertex_index(i + 1, j + 1),
            self.vertex_index(i, j + 1),
        ]
    }

    /// Global edges in [`EdgeSide::ALL`] order.
    pub fn element_edges(&self, e: usize) -> [usize; 4] {
        let (i, j) = self.element_position(e);
        [
            self.horizontal_edge(j, i),
            self.vertical_edge(i + 1, j),
            self.horizontal_edge(j + 1, i),
            self.vertical_edge(i, j),
        ]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let (i, j) = (v % (self.n + 1), v / (self.n + 1));
        i == 0 || j == 0 || i == self.n || j == self.n
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edges[e].elements.len() == 1
    }

    /// Element containing `(x, y)`; points on interior element boundaries go
    /// to the element on the right / top.
    pub fn locate(&self, x: f64, y: f64) -> Result<usize> {
        let tol = 1e-12;
        if !(-tol..=1.0 + tol).contains(&x) || !(-tol..=1.0 + tol).contains(&y) {
            return Err(FemError::OutOfDomain { x, y });
        }
        let cell = |t: f64| ((t * self.n as f64).floor().max(0.0) as usize).min(self.n - 1);
        Ok(cell(y) * self.n + cell(x))
    }
}

/// Grid `level` has `2^(level-1)` squares per side.
pub fn build_mesh(level: usize) -> Result<RectMesh> {
    if level == 0 || level > 16 {
        return Err(FemError::InvalidArgument(format!(
            "grid level must be in 1..=16, got {level}"
        )));
    }
    RectMesh::uniform(1 << (level - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DofEntity {
    Vertex(usize),
    Edge(usize),
    Interior(usize),
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub total: usize,
    pub local_to_global: Vec<Vec<usize>>,
    /// Constrained by the clamped boundary condition.
    pub is_boundary: Vec<bool>,
    pub entity: Vec<DofEntity>,
    pub per_edge: usize,
    pub per_interior: usize,
}

impl DofMap {
    pub fn constrained_count(&self) -> usize {
        self.is_boundary.iter().filter(|&&b| b).count()
    }

    pub fn free_count(&self) -> usize {
        self.total - self.constrained_count()
    }
}

/// Closed-form global count `4·#vertices + per_edge·#edges + per_interior·#elements`.
pub fn closed_form_total(n: usize, per_edge: usize, per_interior: usize) -> usize {
    4 * (n + 1) * (n + 1) + per_edge * 2 * n * (n + 1) + per_interior * n * n
}

/// Global numbering with shared vertex and edge DOFs. No DOF is flagged yet.
pub fn build_dof_map(mesh: &RectMesh, eb: &ElementBasis) -> DofMap {
    let per_edge = eb.per_edge();
    let per_interior = eb.per_interior();
    let edge_base = 4 * mesh.vertex_count();
    let interior_base = edge_base + per_edge * mesh.edge_count();
    let total = interior_base + per_interior * mesh.element_count();

    let mut entity = vec![DofEntity::Interior(0); total];
    for v in 0..mesh.vertex_count() {
        for s in 0..4 {
            entity[4 * v + s] = DofEntity::Vertex(v);
        }
    }
    for e in 0..mesh.edge_count() {
        for s in 0..per_edge {
            entity[edge_base + e * per_edge + s] = DofEntity::Edge(e);
        }
    }
    for el in 0..mesh.element_count() {
        for s in 0..per_interior {
            entity[interior_base + el * per_interior + s] = DofEntity::Interior(el);
        }
    }

    let local_to_global = (0..mesh.element_count())
        .map(|el| {
            let verts = mesh.element_vertices(el);
            let edges = mesh.element_edges(el);
            eb.roles
                .iter()
                .map(|role| match *role {
                    DofRole::Vertex { vertex, kind } => 4 * verts[vertex] + kind.vertex_slot(),
                    DofRole::Edge { side, slot } => {
                        let local = EdgeSide::ALL.iter().position(|&s| s == side).unwrap();
                        edge_base + edges[local] * per_edge + slot
                    }
                    DofRole::Interior { slot } => interior_base + el * per_interior + slot,
                })
                .collect()
        })
        .collect();

    DofMap {
        total,
        local_to_global,
        is_boundary: vec![false; total],
        entity,
        per_edge,
        per_interior,
    }
}

/// Flags every DOF owned by a boundary vertex or boundary edge.
pub fn clamped_flags(mesh: &RectMesh, map: &DofMap) -> DofMap {
    let mut out = map.clone();
    for (flag, ent) in out.is_boundary.iter_mut().zip(&map.entity) {
        *flag = match *ent {
            DofEntity::Vertex(v) => mesh.is_boundary_vertex(v),
            DofEntity::Edge(e) => mesh.is_boundary_edge(e),
            DofEntity::Interior(_) => false,
        };
    }
    out
}

/// [`build_dof_map`] followed by [`clamped_flags`].
pub fn clamped_dof_map(mesh: &RectMesh, eb: &ElementBasis) -> DofMap {
    clamped_flags(mesh, &build_dof_map(mesh, eb))
}
