//! Convergence studies on the sequence of uniform meshes and their reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, solve_with, ReferenceTable, SolverKind};
use crate::element::{element_basis, ElementBasis, Family, PhysicalElement};
use crate::error::{FemError, Result};
use crate::exact::ExactSolution;
use crate::mesh::{build_mesh, clamped_dof_map, DofMap, RectMesh};
use crate::poly2d::Field2D;
use crate::quadrature::{gauss_rule, QuadratureRule};
use crate::solver::PrecondKind;

/// Hard upper bound on the refinement level.
pub const MAX_LEVEL: usize = 8;
pub const DEFAULT_TOL: f64 = 1e-13;

pub const CSV_HEADER: &str = "level,n,dim,l2_err,l2_order,h2_err,h2_order";

/// Deepest level run by default for degree `k`.
pub fn default_max_level(k: usize) -> usize {
    if k <= 5 {
        6
    } else {
        4
    }
}

/// Gauss points per direction for stiffness, load and error integrals.
pub fn quadrature_points(k: usize) -> (usize, usize, usize) {
    (k + 1, k + 6, k + 6)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub family: Family,
    pub k: usize,
    pub levels: usize,
    pub tol: f64,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default)]
    pub precond: PrecondKind,
}

impl StudyConfig {
    pub fn new(family: Family, k: usize) -> Self {
        StudyConfig {
            family,
            k,
            levels: default_max_level(k),
            tol: DEFAULT_TOL,
            solver: SolverKind::Cg,
            precond: PrecondKind::default(),
        }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(4..=8).contains(&self.k) {
            return Err(FemError::InvalidDegree(self.k));
        }
        if self.levels == 0 || self.levels > MAX_LEVEL {
            return Err(FemError::InvalidArgument(format!(
                "levels must be in 1..={MAX_LEVEL}, got {}",
                self.levels
            )));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(FemError::InvalidArgument(format!("tolerance {} not in (0, 1)", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub level: usize,
    pub n: usize,
    pub dim: usize,
    pub l2_err: f64,
    pub l2_order: f64,
    pub h2_err: f64,
    pub h2_order: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeta {
    pub stiffness: usize,
    pub load: usize,
    pub error: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyMeta {
    pub quadrature: QuadratureMeta,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    pub free_dofs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    pub meta: StudyMeta,
}

/// Everything produced by one solve.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub mesh: RectMesh,
    pub map: DofMap,
    pub coeffs: Vec<f64>,
    pub free_dofs: usize,
    pub iterations: usize,
    pub residual: f64,
    pub l2_err: f64,
    pub h2_err: f64,
}

/// `(‖u - u_h‖_{L²}, |u - u_h|_{H²})` by tensor Gauss quadrature on each element.
pub fn error_norms<F: Field2D + ?Sized>(
    mesh: &RectMesh,
    map: &DofMap,
    eb: &ElementBasis,
    coeffs: &[f64],
    exact: &F,
    rule: &QuadratureRule,
) -> (f64, f64) {
    let table = ReferenceTable::new(eb, rule);
    let dim = eb.dim();
    let h = mesh.h;
    let (mut l2, mut h2) = (0.0, 0.0);
    for (el, origin) in mesh.elements.iter().enumerate() {
        let pe = PhysicalElement::new(eb, *origin, h);
        let local: Vec<f64> = map.local_to_global[el].iter().map(|&g| coeffs[g]).collect();
        let c = pe.to_reference_coeffs(&local);
        for (q, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let row = q * dim..(q + 1) * dim;
            let dot = |t: &[f64]| t[row.clone()].iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
            let (x, y) = (origin[0] + h * p[0], origin[1] + h * p[1]);
            let e0 = exact.value_at(x, y) - dot(&table.values);
            let exx = exact.derivative_at(x, y, 2, 0) - dot(&table.dxx) / (h * h);
            let exy = exact.derivative_at(x, y, 1, 1) - dot(&table.dxy) / (h * h);
            let eyy = exact.derivative_at(x, y, 0, 2) - dot(&table.dyy) / (h * h);
            l2 += w * e0 * e0;
            h2 += w * (exx * exx + 2.0 * exy * exy + eyy * eyy);
        }
    }
    ((l2 * h * h).sqrt(), (h2 * h * h).sqrt())
}

/// Global interpolant of `field`: each global DOF is its functional applied to `field`.
pub fn interpolate<F: Field2D + ?Sized>(
    mesh: &RectMesh,
    map: &DofMap,
    eb: &ElementBasis,
    field: &F,
) -> Vec<f64> {
    let mut out = vec![0.0; map.total];
    for (el, origin) in mesh.elements.iter().enumerate() {
        let pe = PhysicalElement::new(eb, *origin, mesh.h);
        for (n, &g) in map.local_to_global[el].iter().enumerate() {
            out[g] = pe.functional(n).apply(field);
        }
    }
    out
}

/// Solves on level `level` with the manufactured solution and measures errors.
pub fn run_level(config: &StudyConfig, eb: &ElementBasis, level: usize) -> Result<LevelResult> {
    let (ms, ml, me) = quadrature_points(config.k);
    let mesh = build_mesh(level)?;
    let map = clamped_dof_map(&mesh, eb);
    let exact = ExactSolution;
    let sys = assemble(
        &mesh,
        &map,
        eb,
        |x, y| exact.source(x, y),
        &gauss_rule(ms)?,
        &gauss_rule(ml)?,
    )?;
    let sol = solve_with(&sys, config.solver, config.precond, config.tol)?;
    let (l2_err, h2_err) = error_norms(&mesh, &map, eb, &sol.coeffs, &exact, &gauss_rule(me)?);
    Ok(LevelResult {
        free_dofs: sys.dim(),
        iterations: sol.stats.iterations,
        residual: sol.stats.relative_residual,
        mesh,
        map,
        coeffs: sol.coeffs,
        l2_err,
        h2_err,
    })
}

fn order(prev: f64, cur: f64) -> f64 {
    if prev > 0.0 && cur > 0.0 {
        (prev / cur).log2()
    } else {
        0.0
    }
}

/// Runs levels `1..=config.levels`; failures carry the level they occurred on.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let eb = element_basis(config.family, config.k)?;
    let (ms, ml, me) = quadrature_points(config.k);
    let mut rows: Vec<StudyRow> = Vec::with_capacity(config.levels);
    let mut meta = StudyMeta {
        quadrature: QuadratureMeta {
            stiffness: ms,
            load: ml,
            error: me,
        },
        iterations: Vec::new(),
        residuals: Vec::new(),
        free_dofs: Vec::new(),
    };
    for level in 1..=config.levels {
        let r = run_level(config, &eb, level).map_err(|e| FemError::AtLevel {
            level,
            source: Box::new(e),
        })?;
        let (l2_order, h2_order) = match rows.last() {
            Some(p) => (order(p.l2_err, r.l2_err), order(p.h2_err, r.h2_err)),
            None => (0.0, 0.0),
        };
        rows.push(StudyRow {
            level,
            n: r.mesh.n,
            dim: r.map.total,
            l2_err: r.l2_err,
            l2_order,
            h2_err: r.h2_err,
            h2_order,
        });
        meta.iterations.push(r.iterations);
        meta.residuals.push(r.residual);
        meta.free_dofs.push(r.free_dofs);
    }
    Ok(StudyReport {
        config: *config,
        rows,
        meta,
    })
}

impl StudyReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "family {}  k = {}  solver {:?}/{:?}  tol {:e}",
            self.config.family, self.config.k, self.config.solver, self.config.precond, self.config.tol
        );
        let _ = writeln!(
            s,
            "{:>5} {:>4} {:>7} {:>11} {:>6} {:>11} {:>6} {:>6}",
            "level", "n", "dim", "L2 error", "order", "H2 error", "order", "iters"
        );
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:>5} {:>4} {:>7} {:>11.3e} {:>6.2} {:>11.3e} {:>6.2} {:>6}",
                r.level,
                r.n,
                r.dim,
                r.l2_err,
                r.l2_order,
                r.h2_err,
                r.h2_order,
                self.meta.iterations.get(i).copied().unwrap_or(0)
            );
        }
        s
    }

    /// CSV rows; floats use the shortest representation that parses back exactly.
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| FemError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

pub fn rows_to_csv(rows: &[StudyRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:?},{:?},{:?},{:?}",
            r.level, r.n, r.dim, r.l2_err, r.l2_order, r.h2_err, r.h2_order
        );
    }
    s
}

/// Parses the output of [`rows_to_csv`]. Blank lines are skipped.
pub fn rows_from_csv(text: &str) -> Result<Vec<StudyRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((i, _)) => {
            return Err(FemError::Parse {
                line: i + 1,
                message: "unexpected header".into(),
            })
        }
        None => {
            return Err(FemError::Parse {
                line: 0,
                message: "empty input".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let err = |message: String| FemError::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", fields.len())));
        }
        let int = |j: usize| fields[j].parse::<usize>().map_err(|e| err(format!("field {}: {e}", j + 1)));
        let float = |j: usize| fields[j].parse::<f64>().map_err(|e| err(format!("field {}: {e}", j + 1)));
        rows.push(StudyRow {
            level: int(0)?,
            n: int(1)?,
            dim: int(2)?,
            l2_err: float(3)?,
            l2_order: float(4)?,
            h2_err: float(5)?,
            h2_order: float(6)?,
        });
    }
    Ok(rows)
}
