use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::clustering::BlockStatus;
use crate::distributed::{local_geometry, LocalPart};
use crate::error::{ProtocolError, Result};
use crate::exec::Executor;
use crate::geometry::{Kernel, TriangleQuadRule};
use crate::h2::{assemble_coupling, assemble_nearfield, BlockData, ClusterBasis, InterpolationScheme, StorageCensus};
use crate::linalg::Matrix;
use crate::shared::{SharedSkeleton, SharedTree};
use crate::transport::Transport;
use crate::wire::{ClusterId, LeafGeometry, Reader, Tag, Writer};

/// One node's share of an H²-matrix over shared cluster trees.
#[derive(Debug, Clone)]
pub struct SharedH2<T> {
    pub skeleton: SharedSkeleton,
    pub part: LocalPart,
    pub row_basis: Arc<ClusterBasis>,
    pub col_basis: Arc<ClusterBasis>,
    /// Transfer matrices of the children of managed shared row clusters,
    /// keyed by child id.
    pub row_transfer: BTreeMap<ClusterId, Matrix<f64>>,
    pub col_transfer: BTreeMap<ClusterId, Matrix<f64>>,
    /// Per block of the skeleton; `None` where another node manages the row.
    pub data: Vec<Option<BlockData<T>>>,
}

impl<T: crate::Scalar> SharedH2<T> {
    pub fn census(&self) -> StorageCensus {
        let (mut leaf, mut transfer) = self.row_basis.stored();
        if !Arc::ptr_eq(&self.row_basis, &self.col_basis) {
            let (l, t) = self.col_basis.stored();
            leaf += l;
            transfer += t;
        }
        transfer += self.row_transfer.values().map(Matrix::len).sum::<usize>();
        if !Arc::ptr_eq(&self.skeleton.rows, &self.skeleton.cols) {
            transfer += self.col_transfer.values().map(Matrix::len).sum::<usize>();
        }
        let mut c = StorageCensus {
            leaf,
            transfer,
            block_nodes: self.skeleton.blocks.len(),
            ..Default::default()
        };
        for (b, d) in self.skeleton.blocks.iter().zip(&self.data) {
            match d {
                Some(BlockData::Coupling(m)) => {
                    c.coupling += m.len();
                    c.admissible_blocks += 1;
                }
                Some(BlockData::Nearfield(m)) => {
                    c.nearfield += m.len();
                    c.inadmissible_blocks += 1;
                }
                _ => debug_assert!(d.is_none() || b.status == BlockStatus::Subdivided),
            }
        }
        c
    }

    /// Block-tree nodes held by this node.
    pub fn stored_blocks(&self) -> usize {
        self.skeleton.blocks.len()
    }
}

/// Transfer matrices from every managed shared cluster to its children.
pub fn shared_transfers(tree: &SharedTree, scheme: &InterpolationScheme) -> BTreeMap<ClusterId, Matrix<f64>> {
    let mut out = BTreeMap::new();
    for c in tree.path.iter().filter(|c| c.header.manager() == tree.rank) {
        for ch in &c.children {
            out.insert(ch.header.id, scheme.transfer(&c.header.header.bbox, &ch.header.bbox));
        }
    }
    out
}

pub fn setup_shared<K: Kernel, Tr: Transport>(
    tr: &mut Tr,
    skeleton: SharedSkeleton,
    part: LocalPart,
    kernel: &K,
    scheme: &InterpolationScheme,
    rule: &TriangleQuadRule,
    exec: &impl Executor,
) -> Result<SharedH2<K::Scalar>> {
    let (me, p) = (skeleton.rank, skeleton.size);
    let s = &skeleton;
    let (rc, cc) = (&s.row_catalog, &s.col_catalog);
    let (row_tree, col_tree) = (&s.rows.local, &s.cols.local);

    for dest in 0..p {
        for id in s.column_sends(dest) {
            if let Some(c) = cc.entry(id).local.filter(|&c| col_tree.is_leaf(c)) {
                let (indices, triangles) = local_geometry(&part, col_tree, c);
                let mut w = Writer::new();
                w.put_geometry(&LeafGeometry { id, indices, triangles });
                tr.send(dest, Tag::Geometry, w.finish())?;
            }
        }
    }
    let mut remote: BTreeMap<ClusterId, LeafGeometry> = BTreeMap::new();
    for src in 0..p {
        for id in s.column_recvs(src) {
            if cc.announced(id) != 0 {
                continue;
            }
            let bytes = tr.recv(src, Tag::Geometry)?;
            let mut r = Reader::new(&bytes);
            let g = r.geometry()?;
            r.finish()?;
            if g.id != id {
                return Err(ProtocolError::Malformed(alloc::format!(
                    "geometry for {} arrived where {id} was expected",
                    g.id
                ))
                .into());
            }
            remote.insert(id, g);
        }
    }

    let row_basis = Arc::new(ClusterBasis::assemble(row_tree, &part.triangles, scheme, rule, exec));
    let col_basis = if Arc::ptr_eq(row_tree, col_tree) {
        row_basis.clone()
    } else {
        Arc::new(ClusterBasis::assemble(col_tree, &part.triangles, scheme, rule, exec))
    };

    let data = exec.map(s.blocks.len(), &|b| {
        let block = &s.blocks[b];
        let (t, c) = (block.row, block.col);
        if rc.manager(t) != me {
            return Ok(None);
        }
        match block.status {
            BlockStatus::Subdivided => Ok(Some(BlockData::Subdivided)),
            BlockStatus::Admissible => {
                assemble_coupling(kernel, rc.bbox(t), cc.bbox(c), scheme).map(|m| Some(BlockData::Coupling(m)))
            }
            BlockStatus::Inadmissible => {
                let tau = rc.entry(t).local.expect("managed leaf row is local");
                let rows = local_geometry(&part, row_tree, tau);
                let cols = match cc.entry(c).local {
                    Some(sigma) => local_geometry(&part, col_tree, sigma),
                    None => {
                        let g = remote
                            .get(&c)
                            .ok_or(ProtocolError::MissingGeometry { row: t, col: c })?;
                        (g.indices.clone(), g.triangles.clone())
                    }
                };
                Ok(Some(BlockData::Nearfield(assemble_nearfield(
                    kernel,
                    (&rows.0, &rows.1),
                    (&cols.0, &cols.1),
                    rule,
                ))))
            }
        }
    });
    let data = data.into_iter().collect::<Result<Vec<_>>>()?;

    Ok(SharedH2 {
        row_transfer: shared_transfers(&s.rows, scheme),
        col_transfer: shared_transfers(&s.cols, scheme),
        skeleton,
        part,
        row_basis,
        col_basis,
        data,
    })
}
