use alloc::vec::Vec;

use crate::clustering::{BlockTree, ClusterTree};
use crate::h2::{BlockData, ClusterBasis};
use crate::linalg::{gemv, gemv_acc, gemv_t_acc};
use crate::scalar::Scalar;

/// Coefficients `x̂_σ` for every cluster of `tree`.
pub fn forward<T: Scalar>(tree: &ClusterTree, basis: &ClusterBasis, x: &[T]) -> Vec<Vec<T>> {
    let mut xhat = alloc::vec![Vec::new(); tree.len()];
    forward_from(tree, basis, tree.root(), x, &mut xhat);
    xhat
}

/// Forward transformation of the subtree rooted at `c`; children are
/// accumulated in child order after being completed.
pub fn forward_from<T: Scalar>(
    tree: &ClusterTree,
    basis: &ClusterBasis,
    c: usize,
    x: &[T],
    xhat: &mut [Vec<T>],
) {
    let k = basis.rank();
    let mut acc = alloc::vec![T::zero(); k];
    let node = tree.node(c);
    if node.children.is_empty() {
        let xs: Vec<T> = node.indices.iter().map(|&i| x[i]).collect();
        gemv_t_acc(basis.leaf(c).expect("leaf matrix"), &xs, &mut acc);
    } else {
        for &ch in &node.children {
            forward_from(tree, basis, ch, x, xhat);
            gemv_t_acc(
                basis.transfer(ch).expect("transfer matrix"),
                &xhat[ch],
                &mut acc,
            );
        }
    }
    xhat[c] = acc;
}

/// Backward transformation of the whole tree, adding into `y`.
pub fn backward<T: Scalar>(
    tree: &ClusterTree,
    basis: &ClusterBasis,
    yhat: &mut [Vec<T>],
    y: &mut [T],
) {
    backward_from(tree, basis, tree.root(), yhat, y);
}

pub fn backward_from<T: Scalar>(
    tree: &ClusterTree,
    basis: &ClusterBasis,
    c: usize,
    yhat: &mut [Vec<T>],
    y: &mut [T],
) {
    let node = tree.node(c);
    if node.children.is_empty() {
        let v = gemv(basis.leaf(c).expect("leaf matrix"), &yhat[c]);
        for (&i, vi) in node.indices.iter().zip(v) {
            y[i] += vi;
        }
        return;
    }
    for &ch in &node.children {
        let parent = core::mem::take(&mut yhat[c]);
        gemv_acc(
            basis.transfer(ch).expect("transfer matrix"),
            &parent,
            &mut yhat[ch],
        );
        yhat[c] = parent;
        backward_from(tree, basis, ch, yhat, y);
    }
}

/// Column-side data seen by the interaction phase.
pub trait ColumnSource<T> {
    /// `x̂_σ`.
    fn coefficients(&self, col: usize) -> &[T];
    /// `x|σ̂` in the order of the column cluster's indices.
    fn restricted(&self, col: usize) -> Vec<T>;
}

pub struct LocalColumns<'a, T> {
    pub tree: &'a ClusterTree,
    pub xhat: &'a [Vec<T>],
    pub x: &'a [T],
}

impl<T: Scalar> ColumnSource<T> for LocalColumns<'_, T> {
    fn coefficients(&self, col: usize) -> &[T] {
        &self.xhat[col]
    }
    fn restricted(&self, col: usize) -> Vec<T> {
        self.tree.indices(col).iter().map(|&j| self.x[j]).collect()
    }
}

/// Interaction phase over the block tree in depth-first order.
pub fn interaction<T: Scalar, C: ColumnSource<T>>(
    blocks: &BlockTree,
    data: &[BlockData<T>],
    rows: &ClusterTree,
    cols: &C,
    yhat: &mut [Vec<T>],
    y: &mut [T],
) {
    interaction_rec(blocks, data, rows, cols, 0, yhat, y);
}

fn interaction_rec<T: Scalar, C: ColumnSource<T>>(
    blocks: &BlockTree,
    data: &[BlockData<T>],
    rows: &ClusterTree,
    cols: &C,
    b: usize,
    yhat: &mut [Vec<T>],
    y: &mut [T],
) {
    let node = blocks.node(b);
    match &data[b] {
        BlockData::Subdivided => {
            for &ch in &node.children {
                interaction_rec(blocks, data, rows, cols, ch, yhat, y);
            }
        }
        BlockData::Coupling(s) => {
            gemv_acc(s, cols.coefficients(node.col), &mut yhat[node.row]);
        }
        BlockData::Nearfield(g) => {
            let xs = cols.restricted(node.col);
            let v = gemv(g, &xs);
            for (&i, vi) in rows.indices(node.row).iter().zip(v) {
                y[i] += vi;
            }
        }
    }
}
