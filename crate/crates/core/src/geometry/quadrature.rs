use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::gauss_legendre;

pub const DEFAULT_RULE_ORDER: usize = 4;

/// Collapsed Gauss-Legendre rule on a triangle with `order` points per
/// direction. Exact for polynomials of total degree `2 * order - 2`.
///
/// Points are barycentric; weights sum to one, so `∫_T f ≈ |T| Σ w f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleQuadRule {
    order: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    line_nodes: Vec<f64>,
    line_weights: Vec<f64>,
}

impl TriangleQuadRule {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "quadrature order must be positive".into(),
            ));
        }
        let (line_nodes, line_weights) = gauss_legendre(order);
        let mut points = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for (&u, &wu) in line_nodes.iter().zip(&line_weights) {
            for (&v, &wv) in line_nodes.iter().zip(&line_weights) {
                let s = u;
                let t = (1.0 - u) * v;
                points.push([1.0 - s - t, s, t]);
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        Ok(Self {
            order,
            points,
            weights,
            line_nodes,
            line_weights,
        })
    }

    /// Smallest rule exact for total degree `degree`.
    pub fn for_degree(degree: usize) -> Self {
        Self::new(degree.div_ceil(2) + 1).expect("positive order")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        2 * self.order - 2
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Gauss-Legendre rule on `[0, 1]` with the same order.
    pub fn line(&self) -> (&[f64], &[f64]) {
        (&self.line_nodes, &self.line_weights)
    }
}

impl Default for TriangleQuadRule {
    fn default() -> Self {
        Self::new(DEFAULT_RULE_ORDER).expect("positive order")
    }
}
