//! The C1-Qk Bell element on `[0,1]²`.
//!
//! `W_k` is the subspace of `Q_k` whose normal derivative on every edge has
//! degree at most `k-1` along that edge. Its nodal basis, dual to point
//! values on a `(k-1)×(k-1)` lattice plus edge derivatives and corner
//! cross-derivatives, supplies the bubbles that enrich `P_k`.

use std::fmt;

use crate::dual::{dual_basis, null_space};
use crate::error::{FemError, Result};
use crate::poly2d::{DofFunctional, DofKind, Frame, Poly2D};

/// Construction frame of every reference element.
pub const REFERENCE_FRAME: Frame = Frame::UNIT_SQUARE;

/// Label `b_block^{i,j}` of a Bell nodal function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellLabel {
    /// 1: value, 2: ∂x, 3: ∂y, 4: ∂xy.
    pub block: u8,
    pub i: usize,
    pub j: usize,
}

impl BellLabel {
    pub const fn new(block: u8, i: usize, j: usize) -> Self {
        BellLabel { block, i, j }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b_{}^({},{})", self.block, self.i, self.j)
    }
}

pub(crate) fn check_degree(k: usize) -> Result<()> {
    if k < 4 {
        Err(FemError::InvalidDegree(k))
    } else {
        Ok(())
    }
}

/// Canonical labels: block 1 lexicographic in `(i, j)`, then blocks 2, 3, 4.
pub fn bell_labels(k: usize) -> Result<Vec<BellLabel>> {
    check_degree(k)?;
    let mut out = Vec::with_capacity((k + 1) * (k + 1) - 4);
    for i in 0..=k - 2 {
        for j in 0..=k - 2 {
            out.push(BellLabel::new(1, i, j));
        }
    }
    for i in 0..=1 {
        for j in 0..=k - 3 {
            out.push(BellLabel::new(2, i, j));
        }
    }
    for i in 0..=k - 3 {
        for j in 0..=1 {
            out.push(BellLabel::new(3, i, j));
        }
    }
    for i in 0..=1 {
        for j in 0..=1 {
            out.push(BellLabel::new(4, i, j));
        }
    }
    Ok(out)
}

fn label_functional(k: usize, label: BellLabel) -> DofFunctional {
    let (a, b) = ((k - 2) as f64, (k - 3) as f64);
    let (i, j) = (label.i as f64, label.j as f64);
    match label.block {
        1 => DofFunctional::new(DofKind::Value, i / a, j / a),
        2 => DofFunctional::new(DofKind::Dx, i, j / b),
        3 => DofFunctional::new(DofKind::Dy, i / b, j),
        _ => DofFunctional::new(DofKind::Dxy, i, j),
    }
}

/// Bell functionals on `[0,1]²` in canonical order.
pub fn bell_dofs(k: usize) -> Result<Vec<DofFunctional>> {
    Ok(bell_labels(k)?
        .into_iter()
        .map(|l| label_functional(k, l))
        .collect())
}

/// The four linear constraints on `Q_k` coefficients (reference frame, row-major index).
///
/// Row order: edge `x=0`, `x=1`, `y=0`, `y=1`. Each row extracts the
/// top-degree tangential coefficient of the normal-derivative trace.
pub fn wk_constraints(k: usize) -> Vec<Vec<f64>> {
    let n = k + 1;
    let mut rows = Vec::with_capacity(4);
    for x_edge in [0.0, 1.0] {
        let (xi, _) = REFERENCE_FRAME.local(x_edge, 0.0);
        let mut row = vec![0.0; n * n];
        for i in 1..=k {
            row[i * n + k] = i as f64 * xi.powi(i as i32 - 1);
        }
        rows.push(row);
    }
    for y_edge in [0.0, 1.0] {
        let (_, eta) = REFERENCE_FRAME.local(0.0, y_edge);
        let mut row = vec![0.0; n * n];
        for j in 1..=k {
            row[k * n + j] = j as f64 * eta.powi(j as i32 - 1);
        }
        rows.push(row);
    }
    rows
}

/// Basis of `W_k` on `[0,1]²`.
pub fn wk_space(k: usize) -> Result<Vec<Poly2D>> {
    check_degree(k)?;
    let n = k + 1;
    Ok(null_space(&wk_constraints(k), n * n)
        .into_iter()
        .map(|v| Poly2D::from_coeffs(REFERENCE_FRAME, k, k, v))
        .collect())
}

/// Top tangential coefficient of the normal-derivative trace on each edge
/// (`x=0`, `x=1`, `y=0`, `y=1`), for a polynomial of bidegree ≤ `(k, k)`.
pub fn normal_trace_top_coeffs(p: &Poly2D, k: usize) -> [f64; 4] {
    let top = |v: Vec<f64>| v.get(k).copied().unwrap_or(0.0);
    let dx = p.derivative(1, 0);
    let dy = p.derivative(0, 1);
    [
        top(dx.restrict_x(0.0)),
        top(dx.restrict_x(1.0)),
        top(dy.restrict_y(0.0)),
        top(dy.restrict_y(1.0)),
    ]
}

/// Whether `p` lies in `W_k` (bidegree ≤ k and all four edge constraints hold).
pub fn in_wk(p: &Poly2D, k: usize, tol: f64) -> bool {
    let (kx, ky) = p.bidegree();
    let beyond = (0..=kx)
        .flat_map(|i| (0..=ky).map(move |j| (i, j)))
        .filter(|&(i, j)| i > k || j > k)
        .all(|(i, j)| p.coeff(i, j).abs() <= tol);
    beyond && normal_trace_top_coeffs(p, k).iter().all(|c| c.abs() <= tol)
}

#[derive(Debug, Clone)]
pub struct BellBasis {
    pub k: usize,
    pub labels: Vec<BellLabel>,
    pub dofs: Vec<DofFunctional>,
    pub nodal: Vec<Poly2D>,
    pub rcond: f64,
    pub duality_residual: f64,
}

impl BellBasis {
    pub fn position(&self, label: BellLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn nodal_function(&self, label: BellLabel) -> Option<&Poly2D> {
        self.position(label).map(|n| &self.nodal[n])
    }
}

/// Nodal basis of `W_k` dual to [`bell_dofs`].
pub fn bell_nodal_basis(k: usize) -> Result<BellBasis> {
    let labels = bell_labels(k)?;
    let dofs = bell_dofs(k)?;
    let span = wk_space(k)?;
    let db = dual_basis(&dofs, &span)?;
    Ok(BellBasis {
        k,
        labels,
        dofs,
        nodal: db.nodal,
        rcond: db.rcond,
        duality_residual: db.residual,
    })
}

/// Bell nodal functions used to enrich `P_k`.
///
/// For k = 5 the ∂x bubble sits at the corner `(1, 0)`, i.e. `b_2^{1,0}`.
pub fn select_bubbles(k: usize) -> Result<Vec<BellLabel>> {
    check_degree(k)?;
    let l = BellLabel::new;
    Ok(match k {
        4 => vec![l(1, 1, 0), l(1, 2, 0), l(2, 1, 0), l(3, 1, 0), l(4, 1, 0)],
        5 => vec![
            l(1, 1, 0),
            l(1, 2, 0),
            l(1, 3, 0),
            l(3, 1, 0),
            l(2, 1, 0),
            l(3, 2, 0),
            l(4, 1, 0),
        ],
        _ => vec![
            l(1, 1, 0),
            l(1, 2, 0),
            l(3, 1, 0),
            l(3, 2, 0),
            l(1, k - 2, 0),
            l(2, 1, 0),
            l(3, k - 3, 0),
            l(4, 1, 0),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dof_counts() {
        let k4 = bell_dofs(4).unwrap();
        assert_eq!(k4.len(), 21);
        let count = |kind| k4.iter().filter(|f| f.kind == kind).count();
        assert_eq!(
            [DofKind::Value, DofKind::Dx, DofKind::Dy, DofKind::Dxy].map(count),
            [9, 4, 4, 4]
        );
        assert_eq!(bell_dofs(5).unwrap().len(), 32);
        for k in 4..=8 {
            assert_eq!(bell_dofs(k).unwrap().len(), (k - 1) * (k - 1) + 4 * (k - 2) + 4);
        }
        assert_eq!(bell_dofs(8).unwrap().len(), 77);
    }

    #[test]
    fn k5_has_dy_at_bottom_midpoint() {
        let dofs = bell_dofs(5).unwrap();
        assert!(dofs.contains(&DofFunctional::new(DofKind::Dy, 0.5, 0.0)));
    }

    #[test]
    fn rejects_low_degree() {
        assert_eq!(bell_dofs(3).unwrap_err(), FemError::InvalidDegree(3));
        assert!(select_bubbles(2).is_err());
        assert!(wk_space(1).is_err());
    }

    #[test]
    fn wk_dimension() {
        for k in 4..=8 {
            assert_eq!(wk_space(k).unwrap().len(), (k + 1) * (k + 1) - 4);
        }
    }

    #[test]
    fn x_y4_is_not_in_w4() {
        let p = Poly2D::monomial(Frame::IDENTITY, 1, 4);
        // ∂x(x y⁴) = y⁴ on x = 0
        assert_eq!(p.derivative(1, 0).restrict_x(0.0), vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(!in_wk(&p, 4, 1e-12));
        assert!(!in_wk(&Poly2D::monomial(Frame::IDENTITY, 4, 4), 4, 1e-12));
        assert!(in_wk(&Poly2D::monomial(Frame::IDENTITY, 3, 3), 4, 1e-12));
    }

    #[test]
    fn wk_members_satisfy_x0_constraint() {
        for p in wk_space(4).unwrap() {
            let trace = p.derivative(1, 0).restrict_x(0.0);
            assert!(trace[4].abs() < 1e-12);
        }
    }

    #[test]
    fn duality_k4_to_8() {
        for k in 4..=8 {
            let b = bell_nodal_basis(k).unwrap();
            assert!(b.duality_residual < 1e-9, "k={k}: {}", b.duality_residual);
            assert!(b.rcond > 1e-12, "k={k}: rcond {}", b.rcond);
            for p in &b.nodal {
                assert!(in_wk(p, k, 1e-10));
            }
        }
    }

    #[test]
    fn corner_cross_derivative_bubble() {
        let b = bell_nodal_basis(4).unwrap();
        let p = b.nodal_function(BellLabel::new(4, 1, 0)).unwrap();
        let dxy = |x, y| DofFunctional::new(DofKind::Dxy, x, y).apply(p);
        assert!((dxy(1.0, 0.0) - 1.0).abs() < 1e-9);
        for (x, y) in [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
            assert!(dxy(x, y).abs() < 1e-9);
        }
    }

    #[test]
    fn interpolating_constant_reproduces_it() {
        for k in 4..=8 {
            let b = bell_nodal_basis(k).unwrap();
            let one = Poly2D::constant(REFERENCE_FRAME, 1.0);
            let mut interp = Poly2D::zero(REFERENCE_FRAME, 0, 0);
            for (f, p) in b.dofs.iter().zip(&b.nodal) {
                interp.axpy(f.apply(&one), p);
            }
            assert!(interp.max_abs_diff(&one) < 1e-10, "k={k}");
        }
    }

    #[test]
    fn bubble_counts() {
        let counts: Vec<usize> = (4..=8).map(|k| select_bubbles(k).unwrap().len()).collect();
        assert_eq!(counts, vec![5, 7, 8, 8, 8]);
        for k in 4..=8 {
            let b = bell_nodal_basis(k).unwrap();
            for l in select_bubbles(k).unwrap() {
                assert!(b.position(l).is_some(), "k={k} {l}");
            }
        }
    }
}
