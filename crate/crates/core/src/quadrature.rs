//! Tensor-product Gauss–Legendre rules on `[0,1]²`.

use crate::error::{FemError, Result};

pub const MAX_POINTS: usize = 32;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[0,1]`.
pub fn gauss_legendre_unit(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if m == 0 || m > MAX_POINTS {
        return Err(FemError::InvalidArgument(format!(
            "Gauss rule needs 1..={MAX_POINTS} points, got {m}"
        )));
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let n = m as f64;
    for i in 0..m.div_ceil(2) {
        // Newton on P_m from the Tricomi initial guess.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 2..=m {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * t * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            let step = p1 / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        // t descends from near 1; store ascending on [0,1].
        nodes[i] = 0.5 * (1.0 - t);
        nodes[m - 1 - i] = 0.5 * (1.0 + t);
        weights[i] = 0.5 * w;
        weights[m - 1 - i] = 0.5 * w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.5;
    }
    Ok((nodes, weights))
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Points per direction.
    pub order: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `∫_{[0,1]²} f`.
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }
}

/// `m × m` tensor Gauss rule on `[0,1]²`, exact for `Q_{2m-1}`.
pub fn gauss_rule(m: usize) -> Result<QuadratureRule> {
    let (x, w) = gauss_legendre_unit(m)?;
    let mut points = Vec::with_capacity(m * m);
    let mut weights = Vec::with_capacity(m * m);
    for (xi, wi) in x.iter().zip(&w) {
        for (yj, wj) in x.iter().zip(&w) {
            points.push([*xi, *yj]);
            weights.push(wi * wj);
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        order: m,
    })
}
