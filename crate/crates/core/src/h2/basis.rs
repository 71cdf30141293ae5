use alloc::vec::Vec;

use crate::clustering::{Aabb, ClusterTree};
use crate::exec::Executor;
use crate::geometry::{Triangle, TriangleQuadRule};
use crate::h2::InterpolationScheme;
use crate::linalg::Matrix;

/// Rule used for leaf matrices: the requested one, raised if needed so that
/// Lagrange polynomials (total degree `3(m-1)`) are integrated exactly.
/// Exactness makes the nested basis identity hold to rounding.
pub fn leaf_rule(scheme: &InterpolationScheme, rule: &TriangleQuadRule) -> TriangleQuadRule {
    let exact = TriangleQuadRule::for_degree(3 * (scheme.order() - 1));
    if exact.order() > rule.order() {
        exact
    } else {
        rule.clone()
    }
}

/// `v[i][ν] = ∫_{T_i} ℓ_ν` for the triangles `triangles[indices[i]]`.
pub fn leaf_matrix(
    bbox: &Aabb,
    indices: &[usize],
    triangles: &[Triangle],
    scheme: &InterpolationScheme,
    rule: &TriangleQuadRule,
) -> Matrix<f64> {
    let k = scheme.rank();
    let mut v = Matrix::filled(indices.len(), k, 0.0);
    let mut vals = alloc::vec![0.0; k];
    let mut row = alloc::vec![0.0; k];
    for (r, &i) in indices.iter().enumerate() {
        let t = &triangles[i];
        row.iter_mut().for_each(|x| *x = 0.0);
        for (l, w) in rule.points().iter().zip(rule.weights()) {
            scheme.lagrange_all(bbox, t.at(*l), &mut vals);
            for (acc, val) in row.iter_mut().zip(&vals) {
                *acc += w * val;
            }
        }
        let area = t.area();
        for (nu, acc) in row.iter().enumerate() {
            v.set(r, nu, area * acc);
        }
    }
    v
}

pub fn transfer_matrix(scheme: &InterpolationScheme, parent: &Aabb, child: &Aabb) -> Matrix<f64> {
    scheme.transfer(parent, child)
}

/// Nested cluster basis: leaf matrices on leaves, transfer matrices on every
/// non-root cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterBasis {
    rank: usize,
    leaf: Vec<Option<Matrix<f64>>>,
    transfer: Vec<Option<Matrix<f64>>>,
}

impl ClusterBasis {
    /// `triangles` is indexed by the tree's index space.
    pub fn assemble(
        tree: &ClusterTree,
        triangles: &[Triangle],
        scheme: &InterpolationScheme,
        rule: &TriangleQuadRule,
        exec: &impl Executor,
    ) -> Self {
        let rule = leaf_rule(scheme, rule);
        let parts = exec.map(tree.len(), &|c| {
            let node = tree.node(c);
            let leaf = tree
                .is_leaf(c)
                .then(|| leaf_matrix(&node.bbox, &node.indices, triangles, scheme, &rule));
            let transfer = node
                .parent
                .map(|p| scheme.transfer(&tree.node(p).bbox, &node.bbox));
            (leaf, transfer)
        });
        let (leaf, transfer) = parts.into_iter().unzip();
        Self {
            rank: scheme.rank(),
            leaf,
            transfer,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.leaf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaf.is_empty()
    }

    pub fn leaf(&self, c: usize) -> Option<&Matrix<f64>> {
        self.leaf[c].as_ref()
    }

    pub fn transfer(&self, c: usize) -> Option<&Matrix<f64>> {
        self.transfer[c].as_ref()
    }

    /// Stored scalars in leaf and transfer matrices.
    pub fn stored(&self) -> (usize, usize) {
        let leaf = self.leaf.iter().flatten().map(Matrix::len).sum();
        let transfer = self.transfer.iter().flatten().map(Matrix::len).sum();
        (leaf, transfer)
    }
}
