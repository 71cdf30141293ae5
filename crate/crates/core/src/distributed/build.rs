use alloc::collections::BTreeSet;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::clustering::{child_pairs, is_admissible, BlockStatus, BlockTree, ClusterTree, TreeView};
use crate::distributed::mirror::{header_of, MirrorTree, SendTree};
use crate::error::ProtocolError;
use crate::transport::Transport;
use crate::wire::{Reader, Tag, Writer};

/// Block trees and transmission trees of one node after the distributed
/// construction. Index `β` of every vector refers to peer node β, including
/// this node itself.
#[derive(Debug, Clone)]
pub struct BlockSkeleton {
    pub rank: usize,
    pub size: usize,
    pub eta: f64,
    pub row_tree: Arc<ClusterTree>,
    pub col_tree: Arc<ClusterTree>,
    /// `T_{I_α×J_β}`: rows in the local row tree, columns in `recv_col[β]`.
    pub row_blocks: Vec<BlockTree>,
    /// `T_{I_β×J_α}`: rows in `recv_row[β]`, columns in the local column tree.
    pub col_blocks: Vec<BlockTree>,
    /// Mirror of β's row tree.
    pub recv_row: Vec<MirrorTree>,
    /// Mirror of β's column tree.
    pub recv_col: Vec<MirrorTree>,
    /// Local row clusters mirrored at β.
    pub send_row: Vec<SendTree>,
    /// Local column clusters mirrored at β.
    pub send_col: Vec<SendTree>,
    /// Construction rounds after the root broadcast.
    pub rounds: usize,
}

/// Insertion-ordered set.
#[derive(Default)]
struct Ordered {
    items: Vec<usize>,
    seen: BTreeSet<usize>,
}

impl Ordered {
    fn insert(&mut self, v: usize) {
        if self.seen.insert(v) {
            self.items.push(v);
        }
    }
}

fn round_err(round: usize, e: ProtocolError) -> ProtocolError {
    match e {
        ProtocolError::Malformed(detail) => ProtocolError::Round { round, detail },
        other => other,
    }
}

/// Collective construction of the local block trees with their send and
/// receive trees. Every node passes its own row and column trees (which may
/// be the same `Arc`) and the same `eta`.
pub fn build_block_distributed<T: Transport>(
    tr: &mut T,
    row_tree: Arc<ClusterTree>,
    col_tree: Arc<ClusterTree>,
    eta: f64,
) -> Result<BlockSkeleton, ProtocolError> {
    let (me, p) = (tr.rank(), tr.size());

    let mut recv_row = Vec::with_capacity(p);
    let mut recv_col = Vec::with_capacity(p);
    for beta in 0..p {
        let payload = if beta == me {
            let mut w = Writer::new();
            w.put_header(&header_of(&row_tree, me, 0));
            w.put_header(&header_of(&col_tree, me, 0));
            w.put_f64(eta);
            w.finish()
        } else {
            Vec::new()
        };
        let bytes = tr.broadcast(beta, Tag::Roots, payload)?;
        let mut r = Reader::new(&bytes);
        recv_row.push(MirrorTree::new(r.header()?));
        recv_col.push(MirrorTree::new(r.header()?));
        let theirs = r.f64()?;
        r.finish()?;
        if theirs.to_bits() != eta.to_bits() {
            return Err(ProtocolError::ParameterMismatch(format!(
                "eta {eta} on node {me}, {theirs} on node {beta}"
            )));
        }
    }

    let mut s = BlockSkeleton {
        rank: me,
        size: p,
        eta,
        row_blocks: (0..p).map(|_| BlockTree::with_root(0, 0)).collect(),
        col_blocks: (0..p).map(|_| BlockTree::with_root(0, 0)).collect(),
        recv_row,
        recv_col,
        send_row: (0..p).map(|_| SendTree::new(0)).collect(),
        send_col: (0..p).map(|_| SendTree::new(0)).collect(),
        row_tree,
        col_tree,
        rounds: 0,
    };
    let mut active_row: Vec<Vec<usize>> = alloc::vec![alloc::vec![0]; p];
    let mut active_col: Vec<Vec<usize>> = alloc::vec![alloc::vec![0]; p];

    loop {
        s.rounds += 1;
        let round = s.rounds;
        let mut get_row: Vec<Ordered> = (0..p).map(|_| Ordered::default()).collect();
        let mut get_col: Vec<Ordered> = (0..p).map(|_| Ordered::default()).collect();
        let mut put_row: Vec<Ordered> = (0..p).map(|_| Ordered::default()).collect();
        let mut put_col: Vec<Ordered> = (0..p).map(|_| Ordered::default()).collect();
        let mut adm_row: Vec<Vec<bool>> = Vec::with_capacity(p);
        let mut adm_col: Vec<Vec<bool>> = Vec::with_capacity(p);

        for beta in 0..p {
            let (rows, cols) = (&*s.row_tree, &s.recv_col[beta]);
            let flags: Vec<bool> = active_row[beta]
                .iter()
                .map(|&b| {
                    let node = s.row_blocks[beta].node(b);
                    let (tau, sigma) = (node.row, node.col);
                    let adm = is_admissible(rows.bbox(tau), cols.bbox(sigma), eta);
                    if !adm {
                        if !cols.is_expanded(sigma) {
                            get_col[beta].insert(sigma);
                        }
                        if !s.send_row[beta].is_expanded(rows, tau) {
                            put_row[beta].insert(tau);
                        }
                    }
                    adm
                })
                .collect();
            adm_row.push(flags);

            let (rows, cols) = (&s.recv_row[beta], &*s.col_tree);
            let flags: Vec<bool> = active_col[beta]
                .iter()
                .map(|&b| {
                    let node = s.col_blocks[beta].node(b);
                    let (tau, sigma) = (node.row, node.col);
                    let adm = is_admissible(rows.bbox(tau), cols.bbox(sigma), eta);
                    if !adm {
                        if !rows.is_expanded(tau) {
                            get_row[beta].insert(tau);
                        }
                        if !s.send_col[beta].is_expanded(cols, sigma) {
                            put_col[beta].insert(sigma);
                        }
                    }
                    adm
                })
                .collect();
            adm_col.push(flags);
        }

        // Children of the put sets go out, children of the get sets come in.
        let payloads: Vec<Vec<u8>> = (0..p)
            .map(|beta| {
                let mut w = Writer::new();
                for (tree, set) in [(&*s.row_tree, &put_row[beta]), (&*s.col_tree, &put_col[beta])] {
                    for &c in &set.items {
                        for &ch in tree.children(c) {
                            w.put_header(&header_of(tree, me, ch));
                        }
                    }
                }
                w.finish()
            })
            .collect();
        let received = tr.all_to_all(Tag::Children, payloads)?;
        for beta in 0..p {
            let mut r = Reader::new(&received[beta]);
            for (mirror, set) in [(&mut s.recv_row[beta], &get_row[beta]), (&mut s.recv_col[beta], &get_col[beta])] {
                for &c in &set.items {
                    let headers = (0..mirror.announced(c))
                        .map(|_| r.header())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| round_err(round, e))?;
                    mirror.expand(c, headers);
                }
            }
            r.finish().map_err(|_| ProtocolError::Round {
                round,
                detail: format!("unexpected children from node {beta}"),
            })?;
            for &c in &put_row[beta].items {
                s.send_row[beta].expand(&s.row_tree, c);
            }
            for &c in &put_col[beta].items {
                s.send_col[beta].expand(&s.col_tree, c);
            }
        }

        let mut busy = false;
        for beta in 0..p {
            let next = split(&mut s.row_blocks[beta], &active_row[beta], &adm_row[beta], &*s.row_tree, &s.recv_col[beta]);
            active_row[beta] = next;
            let next = split(&mut s.col_blocks[beta], &active_col[beta], &adm_col[beta], &s.recv_row[beta], &*s.col_tree);
            active_col[beta] = next;
            busy |= !active_row[beta].is_empty() || !active_col[beta].is_empty();
        }
        if !tr.reduce_or(busy)? {
            break;
        }
    }
    Ok(s)
}

fn split<R: TreeView, C: TreeView>(
    blocks: &mut BlockTree,
    active: &[usize],
    adm: &[bool],
    rows: &R,
    cols: &C,
) -> Vec<usize> {
    let mut next = Vec::new();
    for (&b, &a) in active.iter().zip(adm) {
        if a {
            blocks.set_status(b, BlockStatus::Admissible);
            continue;
        }
        let (tau, sigma) = (blocks.node(b).row, blocks.node(b).col);
        let pairs = child_pairs(rows.children(tau), cols.children(sigma), tau, sigma);
        if pairs.is_empty() {
            blocks.set_status(b, BlockStatus::Inadmissible);
        } else {
            next.extend(blocks.subdivide(b, &pairs));
        }
    }
    next
}
