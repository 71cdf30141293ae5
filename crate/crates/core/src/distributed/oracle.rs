//! Helpers that rebuild the global picture from all nodes' data, for
//! comparing the distributed results with the sequential algorithms.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::clustering::{BlockStatus, ClusterTree};
use crate::distributed::{BlockSkeleton, LocalPart};
use crate::wire::ClusterId;

/// The local trees of all nodes over global indices, glued under a new root
/// (for `p = 1` the local tree itself). Also returns the glued position of
/// each node's local root.
pub fn glue_trees(parts: &[LocalPart], trees: &[ClusterTree]) -> (ClusterTree, Vec<usize>) {
    let remapped: Vec<ClusterTree> = parts
        .iter()
        .zip(trees)
        .map(|(part, t)| t.remap_indices(&part.global))
        .collect();
    if remapped.len() == 1 {
        return (remapped.into_iter().next().expect("one tree"), alloc::vec![0]);
    }
    let mut offsets = Vec::with_capacity(trees.len());
    let mut next = 1;
    for t in trees {
        offsets.push(next);
        next += t.len();
    }
    (ClusterTree::join(remapped), offsets)
}

/// Leaf blocks of one node's block row as `(row, column, status)`.
pub fn owned_leaf_blocks(s: &BlockSkeleton) -> Vec<(ClusterId, ClusterId, BlockStatus)> {
    let mut out = Vec::new();
    for (blocks, mirror) in s.row_blocks.iter().zip(&s.recv_col) {
        for b in blocks.leaves() {
            let node = blocks.node(b);
            out.push((ClusterId::local(s.rank, node.row), mirror.id(node.col), node.status));
        }
    }
    out
}

/// For every ordered pair `(α, β)`, the send trees at β for α equal the
/// receive trees at α for β header by header, in both families.
pub fn check_mirrors(skels: &[BlockSkeleton]) -> Result<(), String> {
    for a in skels {
        for b in skels {
            let pairs = [
                ("row", b.send_row[a.rank].headers(&b.row_tree, b.rank), a.recv_row[b.rank].headers()),
                ("col", b.send_col[a.rank].headers(&b.col_tree, b.rank), a.recv_col[b.rank].headers()),
            ];
            for (family, sent, mirrored) in pairs {
                if sent != mirrored {
                    return Err(format!(
                        "{family} trees differ: {} clusters sent by {} to {}, {} mirrored",
                        sent.len(),
                        b.rank,
                        a.rank,
                        mirrored.len()
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Every mirrored cluster appears in some block of the node's block trees.
pub fn check_minimal(s: &BlockSkeleton) -> Result<(), String> {
    for beta in 0..s.size {
        let mut seen_col = alloc::vec![false; s.recv_col[beta].len()];
        for n in s.row_blocks[beta].nodes() {
            seen_col[n.col] = true;
        }
        let mut seen_row = alloc::vec![false; s.recv_row[beta].len()];
        for n in s.col_blocks[beta].nodes() {
            seen_row[n.row] = true;
        }
        if let Some(c) = seen_col.iter().position(|x| !x) {
            return Err(format!("node {}: column cluster {} of node {beta} is unused", s.rank, s.recv_col[beta].id(c)));
        }
        if let Some(c) = seen_row.iter().position(|x| !x) {
            return Err(format!("node {}: row cluster {} of node {beta} is unused", s.rank, s.recv_row[beta].id(c)));
        }
    }
    Ok(())
}
