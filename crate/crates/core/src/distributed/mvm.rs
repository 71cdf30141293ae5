use alloc::vec::Vec;

use crate::distributed::DistributedH2;
use crate::error::{Error, ProtocolError, Result};
use crate::h2::{backward, forward, interaction, ColumnSource};
use crate::scalar::Scalar;
use crate::transport::Transport;
use crate::wire::{ClusterId, Reader, Tag, Writer};

/// Columns of the diagonal block row: mirror ids point back into the local
/// column tree.
struct OwnColumns<'a, T> {
    h: &'a DistributedH2<T>,
    xhat: &'a [Vec<T>],
    x: &'a [T],
}

impl<T: Scalar> ColumnSource<T> for OwnColumns<'_, T> {
    fn coefficients(&self, col: usize) -> &[T] {
        &self.xhat[self.h.skeleton.recv_col[self.h.skeleton.rank].id(col).preorder()]
    }
    fn restricted(&self, col: usize) -> Vec<T> {
        let s = &self.h.skeleton;
        let c = s.recv_col[s.rank].id(col).preorder();
        s.col_tree.indices(c).iter().map(|&j| self.x[j]).collect()
    }
}

/// Coefficients received for the mirror of one peer's column tree.
struct RemoteColumns<T> {
    xhat: Vec<Vec<T>>,
    xleaf: Vec<Vec<T>>,
}

impl<T: Scalar> ColumnSource<T> for RemoteColumns<T> {
    fn coefficients(&self, col: usize) -> &[T] {
        &self.xhat[col]
    }
    fn restricted(&self, col: usize) -> Vec<T> {
        self.xleaf[col].clone()
    }
}

fn expect_vector<T: Scalar>(bytes: &[u8], id: ClusterId, len: usize) -> Result<Vec<T>, ProtocolError> {
    let mut r = Reader::new(bytes);
    let (got, v) = r.vector::<T>()?;
    r.finish()?;
    if got != id || v.len() != len {
        return Err(ProtocolError::Malformed(alloc::format!(
            "vector for {got} (length {}) where {id} (length {len}) was expected",
            v.len()
        )));
    }
    Ok(v)
}

/// `y += G x` for the local parts: `x` over the local column indices, `y`
/// over the local row indices, both in local positions.
pub fn mvm_distributed_acc<T: Scalar, Tr: Transport>(
    tr: &mut Tr,
    h: &DistributedH2<T>,
    x: &[T],
    y: &mut [T],
) -> Result<()> {
    let s = &h.skeleton;
    let (me, p) = (s.rank, s.size);
    let n_cols = s.col_tree.indices(0).len();
    let n_rows = s.row_tree.indices(0).len();
    if x.len() != n_cols {
        return Err(Error::DimensionMismatch { expected: n_cols, actual: x.len() });
    }
    if y.len() != n_rows {
        return Err(Error::DimensionMismatch { expected: n_rows, actual: y.len() });
    }
    let k = h.col_basis.rank();
    let xhat = forward(&s.col_tree, &h.col_basis, x);

    for beta in (0..p).filter(|&b| b != me) {
        for c in s.send_col[beta].clusters() {
            let id = ClusterId::local(me, c);
            let mut w = Writer::new();
            w.put_vector(id, &xhat[c]);
            tr.send(beta, Tag::Xhat, w.finish())?;
            if s.col_tree.is_leaf(c) {
                let xs: Vec<T> = s.col_tree.indices(c).iter().map(|&j| x[j]).collect();
                let mut w = Writer::new();
                w.put_vector(id, &xs);
                tr.send(beta, Tag::Xleaf, w.finish())?;
            }
        }
    }
    let mut remote: Vec<Option<RemoteColumns<T>>> = (0..p).map(|_| None).collect();
    for beta in (0..p).filter(|&b| b != me) {
        let mirror = &s.recv_col[beta];
        let mut cols = RemoteColumns {
            xhat: Vec::with_capacity(mirror.len()),
            xleaf: Vec::with_capacity(mirror.len()),
        };
        for c in 0..mirror.len() {
            let id = mirror.id(c);
            cols.xhat.push(expect_vector(&tr.recv(beta, Tag::Xhat)?, id, k)?);
            cols.xleaf.push(if mirror.announced(c) == 0 {
                let bytes = tr.recv(beta, Tag::Xleaf)?;
                let mut r = Reader::new(&bytes);
                let (got, v) = r.vector::<T>()?;
                r.finish()?;
                if got != id {
                    return Err(ProtocolError::Malformed(alloc::format!("leaf vector for {got} where {id} was expected")).into());
                }
                v
            } else {
                Vec::new()
            });
        }
        remote[beta] = Some(cols);
    }

    let mut yhat = alloc::vec![alloc::vec![T::zero(); k]; s.row_tree.len()];
    for beta in 0..p {
        let (blocks, data) = (&s.row_blocks[beta], &h.data[beta]);
        match &remote[beta] {
            None => {
                let cols = OwnColumns { h, xhat: &xhat, x };
                interaction(blocks, data, &s.row_tree, &cols, &mut yhat, y);
            }
            Some(cols) => interaction(blocks, data, &s.row_tree, cols, &mut yhat, y),
        }
    }
    backward(&s.row_tree, &h.row_basis, &mut yhat, y);
    Ok(())
}

pub fn mvm_distributed<T: Scalar, Tr: Transport>(
    tr: &mut Tr,
    h: &DistributedH2<T>,
    x: &[T],
) -> Result<Vec<T>> {
    let mut y = alloc::vec![T::zero(); h.skeleton.row_tree.indices(0).len()];
    mvm_distributed_acc(tr, h, x, &mut y)?;
    Ok(y)
}
