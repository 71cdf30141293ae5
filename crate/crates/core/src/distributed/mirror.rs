use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::clustering::{Aabb, ClusterTree, TreeView};
use crate::wire::{ClusterHeader, ClusterId};

#[derive(Debug, Clone, PartialEq)]
pub struct MirrorNode {
    pub header: ClusterHeader,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// Receive tree: the part of a peer's cluster tree that this node knows,
/// materialized from headers only.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorTree {
    nodes: Vec<MirrorNode>,
}

impl TreeView for MirrorTree {
    fn bbox(&self, c: usize) -> &Aabb {
        &self.nodes[c].header.bbox
    }
    fn children(&self, c: usize) -> &[usize] {
        &self.nodes[c].children
    }
}

impl MirrorTree {
    pub fn new(root: ClusterHeader) -> Self {
        Self {
            nodes: alloc::vec![MirrorNode {
                header: root,
                children: Vec::new(),
                parent: None,
            }],
        }
    }

    /// Materializes the children of `c`; their number must match the
    /// announced child count.
    pub fn expand(&mut self, c: usize, children: Vec<ClusterHeader>) {
        debug_assert_eq!(children.len(), self.announced(c));
        debug_assert!(self.nodes[c].children.is_empty());
        for header in children {
            let id = self.nodes.len();
            self.nodes.push(MirrorNode {
                header,
                children: Vec::new(),
                parent: Some(c),
            });
            self.nodes[c].children.push(id);
        }
    }

    /// Child count of the original cluster.
    pub fn announced(&self, c: usize) -> usize {
        self.nodes[c].header.child_count as usize
    }

    pub fn is_expanded(&self, c: usize) -> bool {
        !self.nodes[c].children.is_empty() || self.announced(c) == 0
    }

    pub fn id(&self, c: usize) -> ClusterId {
        self.nodes[c].header.id
    }

    pub fn header(&self, c: usize) -> &ClusterHeader {
        &self.nodes[c].header
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[MirrorNode] {
        &self.nodes
    }

    /// Headers in arena order.
    pub fn headers(&self) -> Vec<ClusterHeader> {
        self.nodes.iter().map(|n| n.header).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SendNode {
    /// Cluster of the local tree.
    pub cluster: usize,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// Send tree: the clusters of a local tree exported to one peer, in the
/// order in which the peer materialized them.
#[derive(Debug, Clone, PartialEq)]
pub struct SendTree {
    nodes: Vec<SendNode>,
    index: BTreeMap<usize, usize>,
}

impl SendTree {
    pub fn new(root: usize) -> Self {
        Self {
            nodes: alloc::vec![SendNode {
                cluster: root,
                children: Vec::new(),
                parent: None,
            }],
            index: BTreeMap::from([(root, 0)]),
        }
    }

    pub fn contains(&self, cluster: usize) -> bool {
        self.index.contains_key(&cluster)
    }

    /// Whether the children of `cluster` have been exported.
    pub fn is_expanded(&self, tree: &ClusterTree, cluster: usize) -> bool {
        tree.is_leaf(cluster) || self.index.get(&cluster).is_some_and(|&v| !self.nodes[v].children.is_empty())
    }

    pub fn expand(&mut self, tree: &ClusterTree, cluster: usize) {
        let v = self.index[&cluster];
        debug_assert!(self.nodes[v].children.is_empty());
        for &ch in tree.children(cluster) {
            let id = self.nodes.len();
            self.nodes.push(SendNode {
                cluster: ch,
                children: Vec::new(),
                parent: Some(v),
            });
            self.nodes[v].children.push(id);
            self.index.insert(ch, id);
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[SendNode] {
        &self.nodes
    }

    /// Local clusters in arena order.
    pub fn clusters(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().map(|n| n.cluster)
    }

    /// The headers the peer's mirror holds, in the same order.
    pub fn headers(&self, tree: &ClusterTree, owner: usize) -> Vec<ClusterHeader> {
        self.clusters().map(|c| header_of(tree, owner, c)).collect()
    }
}

pub fn header_of(tree: &ClusterTree, owner: usize, c: usize) -> ClusterHeader {
    ClusterHeader {
        bbox: tree.node(c).bbox,
        child_count: tree.children(c).len() as u32,
        id: ClusterId::local(owner, c),
    }
}
