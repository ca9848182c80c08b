#![allow(dead_code)]

use c1pk::assembly::{assemble, evaluate_solution, solve};
use c1pk::element::{element_basis, Family};
use c1pk::error::Result;
use c1pk::mesh::{build_mesh, clamped_dof_map};
use c1pk::poly2d::{Field2D, Frame, Poly2D};
use c1pk::quadrature::gauss_rule;
use c1pk::study::{quadrature_points, DEFAULT_TOL};
use c1pk::verify::pseudo_random;

pub const ALL_ELEMENTS: [(Family, usize); 10] = [
    (Family::EnrichedP, 4),
    (Family::EnrichedP, 5),
    (Family::EnrichedP, 6),
    (Family::EnrichedP, 7),
    (Family::EnrichedP, 8),
    (Family::BfsQ, 4),
    (Family::BfsQ, 5),
    (Family::BfsQ, 6),
    (Family::BfsQ, 7),
    (Family::BfsQ, 8),
];

/// `x²(1-x)²y²(1-y)²`, clamped on the unit square.
pub fn plate_polynomial() -> Poly2D {
    let x = Poly2D::monomial(Frame::IDENTITY, 1, 0);
    let y = Poly2D::monomial(Frame::IDENTITY, 0, 1);
    let one = Poly2D::constant(Frame::IDENTITY, 1.0);
    let bx = &x * &(&one - &x);
    let by = &y * &(&one - &y);
    &(&bx * &bx) * &(&by * &by)
}

pub fn bilaplacian(p: &Poly2D) -> Poly2D {
    let mut out = p.derivative(4, 0);
    out.axpy(2.0, &p.derivative(2, 2));
    out.axpy(1.0, &p.derivative(0, 4));
    out
}

/// Max pointwise error of the discrete solution for the plate polynomial on `level`.
pub fn patch_test_error(family: Family, k: usize, level: usize) -> Result<f64> {
    let u = plate_polynomial();
    let f = bilaplacian(&u);
    let eb = element_basis(family, k)?;
    let mesh = build_mesh(level)?;
    let map = clamped_dof_map(&mesh, &eb);
    let (ms, ml, _) = quadrature_points(k);
    let sys = assemble(&mesh, &map, &eb, |x, y| f.eval(x, y), &gauss_rule(ms)?, &gauss_rule(ml)?)?;
    let sol = solve(&sys, DEFAULT_TOL)?;
    let mut worst = 0.0f64;
    for i in 0..100 {
        let x = 0.5 + 0.4999 * pseudo_random(2 * i + 7);
        let y = 0.5 + 0.4999 * pseudo_random(2 * i + 8);
        let uh = evaluate_solution(&mesh, &map, &eb, &sol.coeffs, x, y, (0, 0))?;
        worst = worst.max((uh - u.value_at(x, y)).abs());
    }
    Ok(worst)
}
