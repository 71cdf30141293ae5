use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::clustering::{Aabb, ClusterTree};
use crate::distributed::header_of;
use crate::error::ProtocolError;
use crate::math::Point3;
use crate::transport::Transport;
use crate::wire::{ClusterHeader, ClusterId, Reader, SharedHeader, Tag, Writer};

#[derive(Debug, Clone, PartialEq)]
pub struct TopNode {
    /// Sorted node ids; the first one is the manager.
    pub shareholders: Vec<usize>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// Binary tree over node ids obtained by bisecting the nodes' anchor points;
/// its leaves are single nodes. Every node computes the same tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TopTree {
    nodes: Vec<TopNode>,
}

impl TopTree {
    pub fn bisect(anchors: &[Point3]) -> Self {
        assert!(!anchors.is_empty());
        let mut t = Self { nodes: Vec::new() };
        t.rec(anchors, (0..anchors.len()).collect(), None);
        t
    }

    fn rec(&mut self, anchors: &[Point3], mut members: Vec<usize>, parent: Option<usize>) -> usize {
        let id = self.nodes.len();
        let mut shareholders = members.clone();
        shareholders.sort_unstable();
        self.nodes.push(TopNode {
            shareholders,
            children: Vec::new(),
            parent,
        });
        if members.len() > 1 {
            let pts: Vec<Point3> = members.iter().map(|&a| anchors[a]).collect();
            let axis = split_axis(&Aabb::from_points(&pts));
            members.sort_by(|&a, &b| anchors[a][axis].total_cmp(&anchors[b][axis]).then(a.cmp(&b)));
            let hi = members.split_off(members.len() / 2);
            for part in [members, hi] {
                let ch = self.rec(anchors, part, Some(id));
                self.nodes[id].children.push(ch);
            }
        }
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, t: usize) -> &TopNode {
        &self.nodes[t]
    }

    pub fn nodes(&self) -> &[TopNode] {
        &self.nodes
    }

    pub fn manager(&self, t: usize) -> usize {
        self.nodes[t].shareholders[0]
    }

    /// Identifier of a top node: leaves stand for the owner's local root.
    pub fn id(&self, t: usize) -> ClusterId {
        let n = &self.nodes[t];
        if n.children.is_empty() {
            ClusterId::local(n.shareholders[0], 0)
        } else {
            ClusterId::shared(t)
        }
    }

    /// Top nodes from the root down to the leaf of `rank`.
    pub fn path(&self, rank: usize) -> Vec<usize> {
        let mut path = alloc::vec![0];
        loop {
            let t = *path.last().expect("nonempty");
            let Some(&next) = self.nodes[t]
                .children
                .iter()
                .find(|&&c| self.nodes[c].shareholders.binary_search(&rank).is_ok())
            else {
                return path;
            };
            path.push(next);
        }
    }
}

/// Longest axis, where axes within a relative `1e-9` of the best count as
/// ties and the first one wins. Symmetric node layouts then split the same
/// way regardless of rounding in the anchors.
fn split_axis(b: &Aabb) -> usize {
    let mut best = 0;
    for a in 1..3 {
        if b.extent(a) > b.extent(best) * (1.0 + 1e-9) {
            best = a;
        }
    }
    best
}

/// A shared cluster on this node's path with the headers of its children.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedCluster {
    pub header: SharedHeader,
    pub children: Vec<SharedHeader>,
}

/// One node's view of a shared cluster tree: the replicated top shape, the
/// materialized shared clusters it holds a share in (root first, one per
/// level), and its local tree.
#[derive(Debug, Clone)]
pub struct SharedTree {
    pub rank: usize,
    pub size: usize,
    pub top: TopTree,
    pub path: Vec<SharedCluster>,
    pub local: Arc<ClusterTree>,
}

impl SharedTree {
    pub fn root_id(&self) -> ClusterId {
        self.path
            .first()
            .map_or(ClusterId::local(self.rank, 0), |c| c.header.header.id)
    }

    pub fn local_root(&self) -> SharedHeader {
        SharedHeader {
            header: header_of(&self.local, self.rank, 0),
            shareholders: alloc::vec![self.rank],
        }
    }
}

/// Collective construction: anchors are gathered, the top tree is bisected,
/// and boxes are computed bottom-up. The manager of a child sends its header
/// to those shareholders of the parent that do not hold the child.
pub fn build_shared_tree<T: Transport>(
    tr: &mut T,
    local: Arc<ClusterTree>,
    anchor: Point3,
) -> Result<SharedTree, ProtocolError> {
    let (me, p) = (tr.rank(), tr.size());
    let mut w = Writer::new();
    for c in anchor {
        w.put_f64(c);
    }
    let gathered = tr.all_gather(Tag::Anchor, w.finish())?;
    let anchors = gathered
        .iter()
        .map(|bytes| {
            let mut r = Reader::new(bytes);
            let a = [r.f64()?, r.f64()?, r.f64()?];
            r.finish()?;
            Ok(a)
        })
        .collect::<Result<Vec<Point3>, ProtocolError>>()?;
    let top = TopTree::bisect(&anchors);
    let path = top.path(me);

    let mut cur = SharedHeader {
        header: header_of(&local, me, 0),
        shareholders: alloc::vec![me],
    };
    let mut materialized = Vec::with_capacity(path.len().saturating_sub(1));
    for d in (0..path.len().saturating_sub(1)).rev() {
        let (t, mine) = (path[d], path[d + 1]);
        let node = top.node(t);
        if me == top.manager(mine) {
            let theirs = &top.node(mine).shareholders;
            for &dest in node.shareholders.iter().filter(|s| theirs.binary_search(s).is_err()) {
                let mut w = Writer::new();
                w.put_shared_header(&cur);
                tr.send(dest, Tag::Shareholders, w.finish())?;
            }
        }
        let mut children = Vec::with_capacity(node.children.len());
        for &ch in &node.children {
            if ch == mine {
                children.push(cur.clone());
                continue;
            }
            let bytes = tr.recv(top.manager(ch), Tag::Shareholders)?;
            let mut r = Reader::new(&bytes);
            let h = r.shared_header()?;
            r.finish()?;
            if h.header.id != top.id(ch) || h.shareholders != top.node(ch).shareholders {
                return Err(ProtocolError::Malformed(alloc::format!(
                    "header for {} arrived where {} was expected",
                    h.header.id,
                    top.id(ch)
                )));
            }
            children.push(h);
        }
        let mut bbox = children[0].header.bbox;
        for c in &children[1..] {
            bbox = bbox.union(&c.header.bbox);
        }
        cur = SharedHeader {
            header: ClusterHeader {
                bbox,
                child_count: children.len() as u32,
                id: top.id(t),
            },
            shareholders: node.shareholders.clone(),
        };
        materialized.push(SharedCluster {
            header: cur.clone(),
            children,
        });
    }
    materialized.reverse();
    Ok(SharedTree {
        rank: me,
        size: p,
        top,
        path: materialized,
        local,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_anchors_pair_up() {
        let a = [[-1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 1.0, 0.0]];
        let t = TopTree::bisect(&a);
        assert_eq!(t.len(), 7);
        assert_eq!(t.node(0).shareholders, [0, 1, 2, 3]);
        assert_eq!(t.node(1).shareholders, [0, 1]);
        assert_eq!(t.node(4).shareholders, [2, 3]);
        assert_eq!(t.path(3), [0, 4, 6]);
        assert_eq!(t.id(6), ClusterId::local(3, 0));
        assert_eq!(t.id(4), ClusterId::shared(4));
        assert_eq!(t.manager(4), 2);
    }

    #[test]
    fn three_anchors_split_one_two() {
        let t = TopTree::bisect(&[[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        assert_eq!(t.node(1).shareholders, [0]);
        assert_eq!(t.node(2).shareholders, [1, 2]);
        assert_eq!(t.path(0), [0, 1]);
    }
}
