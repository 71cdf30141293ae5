use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::clustering::{BlockStatus, TreeView};
use crate::distributed::{BlockSkeleton, LocalPart};
use crate::error::{ProtocolError, Result};
use crate::exec::Executor;
use crate::geometry::{Kernel, Triangle, TriangleQuadRule};
use crate::h2::{assemble_coupling, assemble_nearfield, BlockData, ClusterBasis, InterpolationScheme, StorageCensus};
use crate::transport::Transport;
use crate::wire::{ClusterId, LeafGeometry, Reader, Tag, Writer};

/// One node's share of a distributed H²-matrix: block row α.
#[derive(Debug, Clone)]
pub struct DistributedH2<T> {
    pub skeleton: BlockSkeleton,
    pub part: LocalPart,
    pub row_basis: Arc<ClusterBasis>,
    pub col_basis: Arc<ClusterBasis>,
    /// `data[β][b]` belongs to block `b` of `skeleton.row_blocks[β]`.
    pub data: Vec<Vec<BlockData<T>>>,
}

impl<T: crate::Scalar> DistributedH2<T> {
    pub fn census(&self) -> StorageCensus {
        let (mut leaf, mut transfer) = self.row_basis.stored();
        if !Arc::ptr_eq(&self.row_basis, &self.col_basis) {
            let (l, t) = self.col_basis.stored();
            leaf += l;
            transfer += t;
        }
        let mut c = StorageCensus {
            leaf,
            transfer,
            ..Default::default()
        };
        for (blocks, data) in self.skeleton.row_blocks.iter().zip(&self.data) {
            c.block_nodes += blocks.len();
            c.admissible_blocks += blocks.count(BlockStatus::Admissible);
            c.inadmissible_blocks += blocks.count(BlockStatus::Inadmissible);
            for d in data {
                match d {
                    BlockData::Coupling(m) => c.coupling += m.len(),
                    BlockData::Nearfield(m) => c.nearfield += m.len(),
                    BlockData::Subdivided => {}
                }
            }
        }
        c
    }

    /// Block-tree nodes held by this node, over both families.
    pub fn stored_blocks(&self) -> usize {
        let s = &self.skeleton;
        s.row_blocks.iter().chain(&s.col_blocks).map(|b| b.len()).sum()
    }
}

/// Geometry of one column leaf as seen from this node.
pub(crate) fn local_geometry(part: &LocalPart, tree: &crate::clustering::ClusterTree, c: usize) -> (Vec<usize>, Vec<Triangle>) {
    let idx = tree.indices(c);
    (
        idx.iter().map(|&k| part.global[k]).collect(),
        idx.iter().map(|&k| part.triangles[k]).collect(),
    )
}

/// Distributed setup: local bases, couplings from mirrored boxes, nearfield
/// blocks after receiving the triangles of remote column leaves.
pub fn setup_distributed<K: Kernel, Tr: Transport>(
    tr: &mut Tr,
    skeleton: BlockSkeleton,
    part: LocalPart,
    kernel: &K,
    scheme: &InterpolationScheme,
    rule: &TriangleQuadRule,
    exec: &impl Executor,
) -> Result<DistributedH2<K::Scalar>> {
    let (me, p) = (skeleton.rank, skeleton.size);
    let s = &skeleton;

    for beta in (0..p).filter(|&b| b != me) {
        for c in s.send_col[beta].clusters() {
            if s.col_tree.is_leaf(c) {
                let (indices, triangles) = local_geometry(&part, &s.col_tree, c);
                let mut w = Writer::new();
                w.put_geometry(&LeafGeometry {
                    id: ClusterId::local(me, c),
                    indices,
                    triangles,
                });
                tr.send(beta, Tag::Geometry, w.finish())?;
            }
        }
    }
    let mut remote: Vec<BTreeMap<usize, LeafGeometry>> = alloc::vec![BTreeMap::new(); p];
    for beta in (0..p).filter(|&b| b != me) {
        let mirror = &s.recv_col[beta];
        for c in (0..mirror.len()).filter(|&c| mirror.announced(c) == 0) {
            let bytes = tr.recv(beta, Tag::Geometry)?;
            let mut r = Reader::new(&bytes);
            let g = r.geometry()?;
            r.finish()?;
            if g.id != mirror.id(c) {
                return Err(ProtocolError::Malformed(alloc::format!(
                    "geometry for {} arrived where {} was expected",
                    g.id,
                    mirror.id(c)
                ))
                .into());
            }
            remote[beta].insert(c, g);
        }
    }

    let row_basis = Arc::new(ClusterBasis::assemble(&s.row_tree, &part.triangles, scheme, rule, exec));
    let col_basis = if Arc::ptr_eq(&s.row_tree, &s.col_tree) {
        row_basis.clone()
    } else {
        Arc::new(ClusterBasis::assemble(&s.col_tree, &part.triangles, scheme, rule, exec))
    };

    let mut data = Vec::with_capacity(p);
    for beta in 0..p {
        let blocks = &s.row_blocks[beta];
        let mirror = &s.recv_col[beta];
        let out = exec.map(blocks.len(), &|b| {
            let node = blocks.node(b);
            let (tau, sigma) = (node.row, node.col);
            match node.status {
                BlockStatus::Subdivided => Ok(BlockData::Subdivided),
                BlockStatus::Admissible => {
                    assemble_coupling(kernel, s.row_tree.bbox(tau), mirror.bbox(sigma), scheme)
                        .map(BlockData::Coupling)
                }
                BlockStatus::Inadmissible => {
                    let rows = local_geometry(&part, &s.row_tree, tau);
                    let cols = if beta == me {
                        local_geometry(&part, &s.col_tree, mirror.id(sigma).preorder())
                    } else {
                        let g = remote[beta].get(&sigma).ok_or(ProtocolError::MissingGeometry {
                            row: ClusterId::local(me, tau),
                            col: mirror.id(sigma),
                        })?;
                        (g.indices.clone(), g.triangles.clone())
                    };
                    Ok(BlockData::Nearfield(assemble_nearfield(
                        kernel,
                        (&rows.0, &rows.1),
                        (&cols.0, &cols.1),
                        rule,
                    )))
                }
            }
        });
        data.push(out.into_iter().collect::<Result<Vec<_>>>()?);
    }

    Ok(DistributedH2 {
        skeleton,
        part,
        row_basis,
        col_basis,
        data,
    })
}
