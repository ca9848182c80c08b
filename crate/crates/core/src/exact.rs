//! Manufactured solution `u = sin²(πx) sin²(πy)` and its biharmonic source.

use std::f64::consts::PI;

use crate::poly2d::Field2D;

/// `‖u‖_{L²}` of [`ExactSolution`].
pub const EXACT_L2_NORM: f64 = 0.375;

/// `n`-th derivative of `sin²(πt)`.
pub fn sin2_derivative(t: f64, n: usize) -> f64 {
    if n == 0 {
        let s = (PI * t).sin();
        return s * s;
    }
    let w = 2.0 * PI;
    -0.5 * w.powi(n as i32) * (w * t + n as f64 * PI / 2.0).cos()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSolution;

impl ExactSolution {
    /// `Δ²u = A''''B + 2A''B'' + AB''''`.
    pub fn source(&self, x: f64, y: f64) -> f64 {
        let a = |n| sin2_derivative(x, n);
        let b = |n| sin2_derivative(y, n);
        a(4) * b(0) + 2.0 * a(2) * b(2) + a(0) * b(4)
    }

    /// `|u|_{H²}` with the `u_xx² + 2u_xy² + u_yy²` integrand.
    pub fn h2_seminorm(&self) -> f64 {
        2f64.sqrt() * PI * PI
    }
}

impl Field2D for ExactSolution {
    fn derivative_at(&self, x: f64, y: f64, ax: usize, ay: usize) -> f64 {
        sin2_derivative(x, ax) * sin2_derivative(y, ay)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_rule;

    #[test]
    fn source_at_center() {
        let f = ExactSolution.source(0.5, 0.5);
        assert!((f - 24.0 * PI.powi(4)).abs() < 1e-9 * f);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let d = 1e-5;
        for n in 0..4 {
            for &t in &[0.1, 0.37, 0.8] {
                let fd = (sin2_derivative(t + d, n) - sin2_derivative(t - d, n)) / (2.0 * d);
                assert!((fd - sin2_derivative(t, n + 1)).abs() < 1e-4 * (1.0 + fd.abs()), "n={n}");
            }
        }
    }

    #[test]
    fn norms() {
        let q = gauss_rule(20).unwrap();
        let l2 = q.integrate(|x, y| ExactSolution.value_at(x, y).powi(2)).sqrt();
        assert!((l2 - EXACT_L2_NORM).abs() < 1e-13);
        let u = ExactSolution;
        let h2 = q
            .integrate(|x, y| {
                u.derivative_at(x, y, 2, 0).powi(2)
                    + 2.0 * u.derivative_at(x, y, 1, 1).powi(2)
                    + u.derivative_at(x, y, 0, 2).powi(2)
            })
            .sqrt();
        assert!((h2 - u.h2_seminorm()).abs() < 1e-10);
    }
}
