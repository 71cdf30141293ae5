use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, ProtocolError, Result};
use crate::h2::{backward, forward, BlockData, ClusterBasis};
use crate::linalg::{gemv, gemv_acc, gemv_t_acc, Matrix};
use crate::scalar::Scalar;
use crate::shared::{SharedH2, SharedTree};
use crate::transport::Transport;
use crate::wire::{ClusterId, Reader, Tag, Writer};

/// Coefficients of one node: every local cluster, plus the shared clusters
/// it manages.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedCoefficients<T> {
    pub local: Vec<Vec<T>>,
    pub shared: BTreeMap<ClusterId, Vec<T>>,
}

impl<T: Scalar> SharedCoefficients<T> {
    pub fn zeros(tree: &SharedTree, k: usize) -> Self {
        Self {
            local: alloc::vec![alloc::vec![T::zero(); k]; tree.local.len()],
            shared: tree
                .path
                .iter()
                .filter(|c| c.header.manager() == tree.rank)
                .map(|c| (c.header.header.id, alloc::vec![T::zero(); k]))
                .collect(),
        }
    }

    fn slot(&mut self, tree: &SharedTree, id: ClusterId) -> &mut Vec<T> {
        if id.owner() == Some(tree.rank) {
            &mut self.local[id.preorder()]
        } else {
            self.shared.get_mut(&id).expect("managed shared cluster")
        }
    }

    /// Coefficients of a cluster this node holds: a local cluster or a
    /// managed shared one.
    pub fn get(&self, rank: usize, id: ClusterId) -> Option<&[T]> {
        if id.owner() == Some(rank) {
            self.local.get(id.preorder()).map(Vec::as_slice)
        } else {
            self.shared.get(&id).map(Vec::as_slice)
        }
    }
}

fn send_vector<T: Scalar, Tr: Transport>(tr: &mut Tr, dest: usize, tag: Tag, id: ClusterId, v: &[T]) -> Result<(), ProtocolError> {
    let mut w = Writer::new();
    w.put_vector(id, v);
    tr.send(dest, tag, w.finish())
}

fn recv_vector<T: Scalar, Tr: Transport>(
    tr: &mut Tr,
    src: usize,
    tag: Tag,
    id: ClusterId,
    len: Option<usize>,
) -> Result<Vec<T>, ProtocolError> {
    let bytes = tr.recv(src, tag)?;
    let mut r = Reader::new(&bytes);
    let (got, v) = r.vector::<T>()?;
    r.finish()?;
    if got != id || len.is_some_and(|n| n != v.len()) {
        return Err(ProtocolError::Malformed(alloc::format!(
            "{} vector for {got} where {id} was expected",
            tag.name()
        )));
    }
    Ok(v)
}

/// Forward transformation through the local tree and up the shared path.
/// Only the manager of a shared cluster completes its coefficients; a child
/// whose manager differs sends its own.
pub fn forward_shared<T: Scalar, Tr: Transport>(
    tr: &mut Tr,
    tree: &SharedTree,
    basis: &ClusterBasis,
    transfers: &BTreeMap<ClusterId, Matrix<f64>>,
    x: &[T],
) -> Result<SharedCoefficients<T>, ProtocolError> {
    let me = tree.rank;
    let k = basis.rank();
    let mut out = SharedCoefficients {
        local: forward(&tree.local, basis, x),
        shared: BTreeMap::new(),
    };
    let mut mine = ClusterId::local(me, 0);
    let mut cur = out.local[0].clone();
    for c in tree.path.iter().rev() {
        let mgr = c.header.manager();
        if mgr != me {
            send_vector(tr, mgr, Tag::Xhat, mine, &cur)?;
            break;
        }
        let mut acc = alloc::vec![T::zero(); k];
        for ch in &c.children {
            let id = ch.header.id;
            let f = &transfers[&id];
            if id == mine {
                gemv_t_acc(f, &cur, &mut acc);
            } else {
                let v = recv_vector(tr, ch.manager(), Tag::Xhat, id, Some(k))?;
                gemv_t_acc(f, &v, &mut acc);
            }
        }
        mine = c.header.header.id;
        out.shared.insert(mine, acc.clone());
        cur = acc;
    }
    Ok(out)
}

/// Backward transformation down the shared path and through the local tree.
/// A parent's manager sends `E ŷ` to children managed elsewhere; the
/// receiver adds it to its own coefficients.
pub fn backward_shared<T: Scalar, Tr: Transport>(
    tr: &mut Tr,
    tree: &SharedTree,
    basis: &ClusterBasis,
    transfers: &BTreeMap<ClusterId, Matrix<f64>>,
    yhat: &mut SharedCoefficients<T>,
    y: &mut [T],
) -> Result<(), ProtocolError> {
    let me = tree.rank;
    let k = basis.rank();
    for (d, c) in tree.path.iter().enumerate() {
        let mine = tree
            .path
            .get(d + 1)
            .map_or(ClusterId::local(me, 0), |n| n.header.header.id);
        let mine_mgr = tree.path.get(d + 1).map_or(me, |n| n.header.manager());
        let mgr = c.header.manager();
        if mgr == me {
            let parent = yhat.shared[&c.header.header.id].clone();
            for ch in &c.children {
                let id = ch.header.id;
                let e = &transfers[&id];
                if id == mine {
                    gemv_acc(e, &parent, yhat.slot(tree, id));
                } else {
                    send_vector(tr, ch.manager(), Tag::Yhat, id, &gemv(e, &parent))?;
                }
            }
        } else if mine_mgr == me {
            let v: Vec<T> = recv_vector(tr, mgr, Tag::Yhat, mine, Some(k))?;
            for (t, vi) in yhat.slot(tree, mine).iter_mut().zip(v) {
                *t += vi;
            }
        }
    }
    backward(&tree.local, basis, &mut yhat.local, y);
    Ok(())
}

/// `y += G x` on the local parts.
pub fn mvm_shared_acc<T: Scalar, Tr: Transport>(
    tr: &mut Tr,
    h: &SharedH2<T>,
    x: &[T],
    y: &mut [T],
) -> Result<()> {
    let s = &h.skeleton;
    let (me, p) = (s.rank, s.size);
    let (rows, cols) = (&*s.rows, &*s.cols);
    let n_cols = cols.local.indices(0).len();
    let n_rows = rows.local.indices(0).len();
    if x.len() != n_cols {
        return Err(Error::DimensionMismatch { expected: n_cols, actual: x.len() });
    }
    if y.len() != n_rows {
        return Err(Error::DimensionMismatch { expected: n_rows, actual: y.len() });
    }
    let k = h.col_basis.rank();
    let xhat = forward_shared(tr, cols, &h.col_basis, &h.col_transfer, x)?;

    let restrict = |c: usize| -> Vec<T> { cols.local.indices(c).iter().map(|&j| x[j]).collect() };
    for dest in 0..p {
        for id in s.column_sends(dest) {
            let v = xhat.get(me, id).expect("managed column cluster");
            send_vector(tr, dest, Tag::Xhat, id, v)?;
            if s.col_catalog.announced(id) == 0 {
                send_vector(tr, dest, Tag::Xleaf, id, &restrict(id.preorder()))?;
            }
        }
    }
    let mut remote_hat: BTreeMap<ClusterId, Vec<T>> = BTreeMap::new();
    let mut remote_leaf: BTreeMap<ClusterId, Vec<T>> = BTreeMap::new();
    for src in 0..p {
        for id in s.column_recvs(src) {
            remote_hat.insert(id, recv_vector(tr, src, Tag::Xhat, id, Some(k))?);
            if s.col_catalog.announced(id) == 0 {
                remote_leaf.insert(id, recv_vector(tr, src, Tag::Xleaf, id, None)?);
            }
        }
    }

    let mut yhat = SharedCoefficients::zeros(rows, k);
    let mut stack = alloc::vec![0usize];
    while let Some(b) = stack.pop() {
        let block = &s.blocks[b];
        match &h.data[b] {
            None | Some(BlockData::Subdivided) => stack.extend(block.children.iter().rev()),
            Some(BlockData::Coupling(m)) => {
                let xs = xhat
                    .get(me, block.col)
                    .or_else(|| remote_hat.get(&block.col).map(Vec::as_slice))
                    .expect("column coefficients");
                gemv_acc(m, xs, yhat.slot(rows, block.row));
            }
            Some(BlockData::Nearfield(g)) => {
                let xs = if block.col.owner() == Some(me) {
                    restrict(block.col.preorder())
                } else {
                    remote_leaf[&block.col].clone()
                };
                let v = gemv(g, &xs);
                for (&i, vi) in rows.local.indices(block.row.preorder()).iter().zip(v) {
                    y[i] += vi;
                }
            }
        }
    }
    backward_shared(tr, rows, &h.row_basis, &h.row_transfer, &mut yhat, y)?;
    Ok(())
}

pub fn mvm_shared<T: Scalar, Tr: Transport>(tr: &mut Tr, h: &SharedH2<T>, x: &[T]) -> Result<Vec<T>> {
    let mut y = alloc::vec![T::zero(); h.skeleton.rows.local.indices(0).len()];
    mvm_shared_acc(tr, h, x, &mut y)?;
    Ok(y)
}
