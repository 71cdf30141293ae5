use alloc::vec::Vec;

use crate::clustering::Aabb;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math::{self, Point3};

/// Tensor Chebyshev interpolation of order `m` per axis, rank `m³`.
///
/// Point `ν = (i0·m + i1)·m + i2` has coordinate index `i_a` on axis `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationScheme {
    order: usize,
    nodes: Vec<f64>,
    denominators: Vec<f64>,
}

impl InterpolationScheme {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "interpolation order must be at least 1".into(),
            ));
        }
        let m = order;
        let mut nodes = alloc::vec![0.0; m];
        for i in 0..m / 2 {
            let t = math::cos(core::f64::consts::PI * (2 * i + 1) as f64 / (2 * m) as f64);
            nodes[i] = -t;
            nodes[m - 1 - i] = t;
        }
        let denominators = (0..m)
            .map(|i| {
                (0..m)
                    .filter(|&j| j != i)
                    .map(|j| nodes[i] - nodes[j])
                    .product::<f64>()
            })
            .collect();
        Ok(Self {
            order,
            nodes,
            denominators,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.order * self.order * self.order
    }

    /// Reference nodes on `[-1, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    // Degenerate box edges get a tiny width so the Lagrange polynomials stay
    // defined; every point of such a box maps to the reference origin anyway.
    fn axis(bbox: &Aabb, a: usize) -> (f64, f64) {
        let c = 0.5 * (bbox.min[a] + bbox.max[a]);
        let h = 0.5 * (bbox.max[a] - bbox.min[a]);
        if h > 0.0 {
            (c, h)
        } else {
            (c, 1e-9 * math::abs(c).max(1.0))
        }
    }

    pub fn points(&self, bbox: &Aabb) -> Vec<Point3> {
        let m = self.order;
        let maps = [
            Self::axis(bbox, 0),
            Self::axis(bbox, 1),
            Self::axis(bbox, 2),
        ];
        let coord = |a: usize, i: usize| {
            let (c, h) = maps[a];
            if bbox.max[a] > bbox.min[a] {
                c + h * self.nodes[i]
            } else {
                c
            }
        };
        let mut out = Vec::with_capacity(self.rank());
        for i0 in 0..m {
            for i1 in 0..m {
                for i2 in 0..m {
                    out.push([coord(0, i0), coord(1, i1), coord(2, i2)]);
                }
            }
        }
        out
    }

    fn lagrange_1d(&self, t: f64, out: &mut [f64]) {
        let m = self.order;
        for i in 0..m {
            let mut p = 1.0;
            for j in 0..m {
                if j != i {
                    p *= t - self.nodes[j];
                }
            }
            out[i] = p / self.denominators[i];
        }
    }

    fn axis_values(&self, bbox: &Aabb, x: Point3) -> [[f64; 16]; 3] {
        assert!(
            self.order <= 16,
            "interpolation order above 16 is not supported"
        );
        let mut v = [[0.0; 16]; 3];
        for a in 0..3 {
            let (c, h) = Self::axis(bbox, a);
            self.lagrange_1d((x[a] - c) / h, &mut v[a]);
        }
        v
    }

    /// All `k` Lagrange polynomials of `bbox` evaluated at `x`.
    pub fn lagrange_all(&self, bbox: &Aabb, x: Point3, out: &mut [f64]) {
        let m = self.order;
        let v = self.axis_values(bbox, x);
        let mut nu = 0;
        for i0 in 0..m {
            for i1 in 0..m {
                let p = v[0][i0] * v[1][i1];
                for i2 in 0..m {
                    out[nu] = p * v[2][i2];
                    nu += 1;
                }
            }
        }
    }

    pub fn lagrange(&self, bbox: &Aabb, nu: usize, x: Point3) -> Result<f64> {
        if nu >= self.rank() {
            return Err(Error::IndexOutOfRange {
                index: nu,
                len: self.rank(),
            });
        }
        let m = self.order;
        let v = self.axis_values(bbox, x);
        let (i0, i1, i2) = (nu / (m * m), (nu / m) % m, nu % m);
        Ok(v[0][i0] * v[1][i1] * v[2][i2])
    }

    /// Transfer matrix with entry `(ν', ν) = ℓ_{parent,ν}(ξ_{child,ν'})`.
    pub fn transfer(&self, parent: &Aabb, child: &Aabb) -> Matrix<f64> {
        let k = self.rank();
        let mut e = Matrix::filled(k, k, 0.0);
        let mut row = alloc::vec![0.0; k];
        for (nu_c, xi) in self.points(child).into_iter().enumerate() {
            self.lagrange_all(parent, xi, &mut row);
            for (nu, v) in row.iter().enumerate() {
                e.set(nu_c, nu, *v);
            }
        }
        e
    }
}
