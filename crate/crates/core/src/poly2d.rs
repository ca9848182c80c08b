//! Dense bivariate polynomials and point functionals.
//!
//! A [`Poly2D`] stores coefficients of the monomials `ξ^i η^j` of a local
//! affine coordinate pair `ξ = (x - ox)/s`, `η = (y - oy)/s` described by a
//! [`Frame`]. With [`Frame::IDENTITY`] the coefficients multiply plain
//! `x^i y^j`. Element constructions use [`Frame::UNIT_SQUARE`], which maps
//! `[0,1]²` onto `[-1,1]²` and keeps degree-8 duality systems well conditioned.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Affine local coordinates `ξ = (x - origin.0)/scale`, `η = (y - origin.1)/scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: [f64; 2],
    pub scale: f64,
}

impl Frame {
    pub const IDENTITY: Frame = Frame {
        origin: [0.0, 0.0],
        scale: 1.0,
    };

    /// `[0,1]²` mapped to `[-1,1]²`.
    pub const UNIT_SQUARE: Frame = Frame {
        origin: [0.5, 0.5],
        scale: 0.5,
    };

    pub fn new(origin: [f64; 2], scale: f64) -> Self {
        assert!(scale > 0.0, "frame scale must be positive");
        Frame { origin, scale }
    }

    #[inline]
    pub fn local(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.origin[0]) / self.scale,
            (y - self.origin[1]) / self.scale,
        )
    }
}

/// Anything whose partial derivatives can be sampled pointwise.
pub trait Field2D {
    /// `∂^{ax+ay} f / ∂x^ax ∂y^ay` at `(x, y)`.
    fn derivative_at(&self, x: f64, y: f64, ax: usize, ay: usize) -> f64;

    fn value_at(&self, x: f64, y: f64) -> f64 {
        self.derivative_at(x, y, 0, 0)
    }
}

/// Bivariate polynomial with bidegree bound `(kx, ky)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2D {
    frame: Frame,
    kx: usize,
    ky: usize,
    /// Row-major: entry `i * (ky + 1) + j` multiplies `ξ^i η^j`.
    coeffs: Vec<f64>,
}

fn falling(n: usize, m: usize) -> f64 {
    (0..m).map(|t| (n - t) as f64).product()
}

impl Poly2D {
    pub fn zero(frame: Frame, kx: usize, ky: usize) -> Self {
        Poly2D {
            frame,
            kx,
            ky,
            coeffs: vec![0.0; (kx + 1) * (ky + 1)],
        }
    }

    pub fn constant(frame: Frame, c: f64) -> Self {
        Poly2D {
            frame,
            kx: 0,
            ky: 0,
            coeffs: vec![c],
        }
    }

    /// The local monomial `ξ^i η^j`.
    pub fn monomial(frame: Frame, i: usize, j: usize) -> Self {
        let mut p = Poly2D::zero(frame, i, j);
        p.coeffs[i * (j + 1) + j] = 1.0;
        p
    }

    /// Builds from a `(kx+1) × (ky+1)` row-major coefficient vector.
    ///
    /// Panics if the length does not match the bidegree.
    pub fn from_coeffs(frame: Frame, kx: usize, ky: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), (kx + 1) * (ky + 1), "coefficient count");
        Poly2D {
            frame,
            kx,
            ky,
            coeffs,
        }
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.kx, self.ky)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `ξ^i η^j`, zero outside the stored bidegree.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i > self.kx || j > self.ky {
            0.0
        } else {
            self.coeffs[i * (self.ky + 1) + j]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, value: f64) {
        if i > self.kx || j > self.ky {
            self.pad_to(self.kx.max(i), self.ky.max(j));
        }
        let ky = self.ky;
        self.coeffs[i * (ky + 1) + j] = value;
    }

    /// Grows the bidegree bound; existing coefficients are kept.
    pub fn pad_to(&mut self, kx: usize, ky: usize) {
        if kx <= self.kx && ky <= self.ky {
            return;
        }
        let (nkx, nky) = (kx.max(self.kx), ky.max(self.ky));
        let mut out = vec![0.0; (nkx + 1) * (nky + 1)];
        for i in 0..=self.kx {
            for j in 0..=self.ky {
                out[i * (nky + 1) + j] = self.coeffs[i * (self.ky + 1) + j];
            }
        }
        self.kx = nkx;
        self.ky = nky;
        self.coeffs = out;
    }

    /// Nested Horner evaluation at the physical point `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (xi, eta) = self.frame.local(x, y);
        self.eval_local(xi, eta)
    }

    /// Horner evaluation at local coordinates.
    pub fn eval_local(&self, xi: f64, eta: f64) -> f64 {
        let stride = self.ky + 1;
        let mut acc = 0.0;
        for i in (0..=self.kx).rev() {
            let row = &self.coeffs[i * stride..(i + 1) * stride];
            let inner = row.iter().rev().fold(0.0, |s, &c| s * eta + c);
            acc = acc * xi + inner;
        }
        acc
    }

    /// Exact partial derivative `∂^{ox} ∂^{oy}` with respect to physical `x`, `y`.
    pub fn derivative(&self, order_x: usize, order_y: usize) -> Poly2D {
        let kx = self.kx.saturating_sub(order_x);
        let ky = self.ky.saturating_sub(order_y);
        let mut out = Poly2D::zero(self.frame, kx, ky);
        if order_x > self.kx || order_y > self.ky {
            return out;
        }
        let chain = self.frame.scale.powi(-((order_x + order_y) as i32));
        for i in order_x..=self.kx {
            for j in order_y..=self.ky {
                let c = self.coeff(i, j);
                if c != 0.0 {
                    out.coeffs[(i - order_x) * (ky + 1) + (j - order_y)] =
                        c * falling(i, order_x) * falling(j, order_y) * chain;
                }
            }
        }
        out
    }

    /// `self += a * other`, padding as needed. Frames must agree.
    pub fn axpy(&mut self, a: f64, other: &Poly2D) {
        assert_eq!(self.frame, other.frame, "polynomial frames differ");
        self.pad_to(other.kx, other.ky);
        let stride = self.ky + 1;
        for i in 0..=other.kx {
            for j in 0..=other.ky {
                self.coeffs[i * stride + j] += a * other.coeffs[i * (other.ky + 1) + j];
            }
        }
    }

    pub fn scaled(&self, a: f64) -> Poly2D {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    /// Coefficient max-norm of `self - other` after padding.
    pub fn max_abs_diff(&self, other: &Poly2D) -> f64 {
        assert_eq!(self.frame, other.frame, "polynomial frames differ");
        let kx = self.kx.max(other.kx);
        let ky = self.ky.max(other.ky);
        let mut m: f64 = 0.0;
        for i in 0..=kx {
            for j in 0..=ky {
                m = m.max((self.coeff(i, j) - other.coeff(i, j)).abs());
            }
        }
        m
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn approx_eq(&self, other: &Poly2D, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Restriction to the vertical line `x = x0`, as coefficients in the local `η`.
    pub fn restrict_x(&self, x0: f64) -> Vec<f64> {
        let (xi, _) = self.frame.local(x0, 0.0);
        (0..=self.ky)
            .map(|j| (0..=self.kx).rev().fold(0.0, |s, i| s * xi + self.coeff(i, j)))
            .collect()
    }

    /// Restriction to the horizontal line `y = y0`, as coefficients in the local `ξ`.
    pub fn restrict_y(&self, y0: f64) -> Vec<f64> {
        let (_, eta) = self.frame.local(0.0, y0);
        (0..=self.kx)
            .map(|i| (0..=self.ky).rev().fold(0.0, |s, j| s * eta + self.coeff(i, j)))
            .collect()
    }
}

impl Field2D for Poly2D {
    fn derivative_at(&self, x: f64, y: f64, ax: usize, ay: usize) -> f64 {
        if ax == 0 && ay == 0 {
            self.eval(x, y)
        } else {
            self.derivative(ax, ay).eval(x, y)
        }
    }
}

impl Add for &Poly2D {
    type Output = Poly2D;
    fn add(self, rhs: &Poly2D) -> Poly2D {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &Poly2D {
    type Output = Poly2D;
    fn sub(self, rhs: &Poly2D) -> Poly2D {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &Poly2D {
    type Output = Poly2D;
    fn neg(self) -> Poly2D {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &Poly2D {
    type Output = Poly2D;
    fn mul(self, rhs: f64) -> Poly2D {
        self.scaled(rhs)
    }
}

impl Mul for &Poly2D {
    type Output = Poly2D;
    fn mul(self, rhs: &Poly2D) -> Poly2D {
        assert_eq!(self.frame, rhs.frame, "polynomial frames differ");
        let (kx, ky) = (self.kx + rhs.kx, self.ky + rhs.ky);
        let mut out = Poly2D::zero(self.frame, kx, ky);
        for i in 0..=self.kx {
            for j in 0..=self.ky {
                let a = self.coeff(i, j);
                if a == 0.0 {
                    continue;
                }
                for p in 0..=rhs.kx {
                    for q in 0..=rhs.ky {
                        out.coeffs[(i + p) * (ky + 1) + j + q] += a * rhs.coeff(p, q);
                    }
                }
            }
        }
        out
    }
}

/// Which derivative a point functional samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DofKind {
    Value,
    Dx,
    Dy,
    Dxy,
}

impl DofKind {
    pub const ALL: [DofKind; 4] = [DofKind::Value, DofKind::Dx, DofKind::Dy, DofKind::Dxy];

    /// Derivative orders `(ax, ay)`.
    pub fn orders(self) -> (usize, usize) {
        match self {
            DofKind::Value => (0, 0),
            DofKind::Dx => (1, 0),
            DofKind::Dy => (0, 1),
            DofKind::Dxy => (1, 1),
        }
    }

    /// Position inside a vertex block `[Value, Dx, Dy, Dxy]`.
    pub fn vertex_slot(self) -> usize {
        match self {
            DofKind::Value => 0,
            DofKind::Dx => 1,
            DofKind::Dy => 2,
            DofKind::Dxy => 3,
        }
    }

    /// Total derivative order; a functional of order `d` scales by `h^d` under mapping.
    pub fn order(self) -> i32 {
        let (a, b) = self.orders();
        (a + b) as i32
    }
}

/// Point evaluation of a value or derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofFunctional {
    pub kind: DofKind,
    pub point: [f64; 2],
}

impl DofFunctional {
    pub fn new(kind: DofKind, x: f64, y: f64) -> Self {
        DofFunctional {
            kind,
            point: [x, y],
        }
    }

    pub fn apply<F: Field2D + ?Sized>(&self, f: &F) -> f64 {
        let (ax, ay) = self.kind.orders();
        f.derivative_at(self.point[0], self.point[1], ax, ay)
    }
}

/// Convenience wrapper for [`DofFunctional::apply`] on polynomials.
pub fn apply_functional(functional: &DofFunctional, p: &Poly2D) -> f64 {
    functional.apply(p)
}
