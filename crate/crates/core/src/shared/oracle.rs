//! Global views rebuilt from all nodes' shared structures, for checks
//! against the sequential algorithms.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::clustering::{Cluster, ClusterTree};
use crate::distributed::LocalPart;
use crate::error::Result;
use crate::shared::{SharedSkeleton, SharedTree};
use crate::wire::{ClusterId, SharedHeader};

/// Every shared header materialized anywhere, checked to agree across nodes.
pub fn gather_shared_headers(trees: &[SharedTree]) -> core::result::Result<BTreeMap<ClusterId, SharedHeader>, String> {
    let mut all: BTreeMap<ClusterId, SharedHeader> = BTreeMap::new();
    for t in trees {
        for c in &t.path {
            for h in core::iter::once(&c.header).chain(&c.children) {
                match all.get(&h.header.id) {
                    Some(prev) if prev != h => {
                        return Err(format!("node {} disagrees on cluster {}", t.rank, h.header.id));
                    }
                    _ => {
                        all.insert(h.header.id, h.clone());
                    }
                }
            }
        }
    }
    Ok(all)
}

/// The shared tree with every node's local tree attached, over global
/// indices, plus the cluster id of every glued node.
pub fn glue_shared(trees: &[SharedTree], parts: &[LocalPart]) -> Result<(ClusterTree, Vec<ClusterId>)> {
    let headers = gather_shared_headers(trees).map_err(crate::Error::InvalidArgument)?;
    let top = &trees[0].top;
    let mut nodes: Vec<Cluster> = Vec::new();
    let mut ids = Vec::new();
    glue_rec(top, 0, None, 0, trees, parts, &headers, &mut nodes, &mut ids);
    Ok((ClusterTree::from_nodes(nodes)?, ids))
}

#[allow(clippy::too_many_arguments)]
fn glue_rec(
    top: &crate::shared::TopTree,
    t: usize,
    parent: Option<usize>,
    level: usize,
    trees: &[SharedTree],
    parts: &[LocalPart],
    headers: &BTreeMap<ClusterId, SharedHeader>,
    nodes: &mut Vec<Cluster>,
    ids: &mut Vec<ClusterId>,
) -> usize {
    let node = top.node(t);
    let at = nodes.len();
    if node.children.is_empty() {
        let owner = node.shareholders[0];
        let local = trees[owner].local.remap_indices(&parts[owner].global);
        for (c, mut cl) in local.nodes().iter().cloned().enumerate() {
            cl.children.iter_mut().for_each(|x| *x += at);
            cl.parent = if c == 0 { parent } else { cl.parent.map(|q| q + at) };
            cl.level += level;
            nodes.push(cl);
            ids.push(ClusterId::local(owner, c));
        }
        return at;
    }
    let id = top.id(t);
    nodes.push(Cluster {
        bbox: headers[&id].header.bbox,
        indices: Vec::new(),
        children: Vec::new(),
        parent,
        level,
    });
    ids.push(id);
    let mut indices = Vec::new();
    for &ch in &node.children {
        let c = glue_rec(top, ch, Some(at), level + 1, trees, parts, headers, nodes, ids);
        nodes[at].children.push(c);
        indices.extend_from_slice(&nodes[c].indices);
    }
    indices.sort_unstable();
    nodes[at].indices = indices;
    at
}

/// The shareholder conditions on the gathered tree: local clusters belong to
/// their owner alone, siblings below a shared cluster have disjoint
/// shareholders whose union is the parent's, the manager is the smallest
/// shareholder, and every node holds one shared cluster per level of its path.
pub fn check_shareholders(trees: &[SharedTree]) -> core::result::Result<(), String> {
    let all = gather_shared_headers(trees)?;
    for t in trees {
        if t.local_root().shareholders != [t.rank] {
            return Err(format!("node {}: local root has foreign shareholders", t.rank));
        }
        for (d, c) in t.path.iter().enumerate() {
            let h = &c.header;
            if h.shareholders.binary_search(&t.rank).is_err() {
                return Err(format!("node {} holds {} without a share", t.rank, h.header.id));
            }
            if d > 0 && !t.path[d - 1].children.iter().any(|x| x.header.id == h.header.id) {
                return Err(format!("node {}: path is not a chain at level {d}", t.rank));
            }
            let mut union = BTreeSet::new();
            for ch in &c.children {
                if ch.header.id.owner().is_some() && ch.shareholders != [ch.header.id.owner().unwrap()] {
                    return Err(format!("local cluster {} is shared", ch.header.id));
                }
                for &s in &ch.shareholders {
                    if !union.insert(s) {
                        return Err(format!("children of {} share node {s}", h.header.id));
                    }
                }
            }
            if union.into_iter().collect::<Vec<_>>() != h.shareholders {
                return Err(format!("shareholders of {} are not the union of its children's", h.header.id));
            }
            if h.manager() != h.shareholders[0] || all[&h.header.id].manager() != h.manager() {
                return Err(format!("manager of {} is not its smallest shareholder", h.header.id));
            }
        }
    }
    Ok(())
}

/// Send and receive trees agree for every ordered pair of nodes: the
/// vertices a manager sends to a peer are exactly the ones the peer expects
/// from it, with identical headers.
pub fn check_shared_mirrors(skels: &[SharedSkeleton]) -> core::result::Result<(), String> {
    for s in skels {
        let me = s.rank;
        for (family, send, cat_of, recv_of) in [
            ("row", &s.send_row, &s.row_catalog, 0usize),
            ("col", &s.send_col, &s.col_catalog, 1usize),
        ] {
            for &(c, dest) in send.keys() {
                if cat_of.manager(c) != me {
                    continue;
                }
                let peer = &skels[dest];
                let (recv, cat) = if recv_of == 0 {
                    (&peer.recv_row, &peer.row_catalog)
                } else {
                    (&peer.recv_col, &peer.col_catalog)
                };
                if !recv.contains(&(c, me)) {
                    return Err(format!("{family} cluster {c} sent by {me} is not expected at {dest}"));
                }
                if cat.entry(c).header != cat_of.entry(c).header {
                    return Err(format!("{family} cluster {c}: headers differ between {me} and {dest}"));
                }
            }
        }
        for &(c, src) in &s.recv_row {
            if !skels[src].send_row.contains_key(&(c, me)) {
                return Err(format!("row cluster {c} expected at {me} is not sent by {src}"));
            }
        }
        for &(c, src) in &s.recv_col {
            if !skels[src].send_col.contains_key(&(c, me)) {
                return Err(format!("col cluster {c} expected at {me} is not sent by {src}"));
            }
        }
    }
    Ok(())
}
