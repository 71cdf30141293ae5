use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::clustering::Aabb;
use crate::error::{Error, Result};
use crate::math::Point3;

pub const DEFAULT_LEAF_LIMIT: usize = 16;

/// Read access to the shape of a tree, shared by local cluster trees and the
/// header-only mirrors of remote trees.
pub trait TreeView {
    fn bbox(&self, c: usize) -> &Aabb;
    fn children(&self, c: usize) -> &[usize];
    fn root(&self) -> usize {
        0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub bbox: Aabb,
    /// Sorted basis indices.
    pub indices: Vec<usize>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    pub level: usize,
}

/// Arena cluster tree in preorder; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTree {
    nodes: Vec<Cluster>,
}

impl TreeView for ClusterTree {
    fn bbox(&self, c: usize) -> &Aabb {
        &self.nodes[c].bbox
    }
    fn children(&self, c: usize) -> &[usize] {
        &self.nodes[c].children
    }
}

impl ClusterTree {
    /// Geometric bisection. `indices[k]` is the basis index whose
    /// characteristic point is `points[k]` and whose support is inside
    /// `supports[k]`.
    pub fn build(
        indices: &[usize],
        points: &[Point3],
        supports: &[Aabb],
        leaf_limit: usize,
    ) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot cluster an empty index set".into(),
            ));
        }
        if points.len() != indices.len() || supports.len() != indices.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                actual: points.len().min(supports.len()),
            });
        }
        if leaf_limit == 0 {
            return Err(Error::InvalidArgument("leaf limit must be positive".into()));
        }
        let mut members: Vec<usize> = (0..indices.len()).collect();
        members.sort_by_key(|&k| indices[k]);
        if members.windows(2).any(|w| indices[w[0]] == indices[w[1]]) {
            return Err(Error::InvalidArgument("duplicate basis index".into()));
        }
        let mut tree = Self { nodes: Vec::new() };
        let input = Input {
            indices,
            points,
            supports,
            leaf_limit,
        };
        tree.build_rec(&input, members, None, 0);
        Ok(tree)
    }

    pub fn for_mesh(mesh: &crate::geometry::TriangleMesh, leaf_limit: usize) -> Result<Self> {
        let idx: Vec<usize> = (0..mesh.len()).collect();
        Self::build(&idx, &mesh.centroids(), &mesh.support_boxes(), leaf_limit)
    }

    fn build_rec(
        &mut self,
        input: &Input<'_>,
        members: Vec<usize>,
        parent: Option<usize>,
        level: usize,
    ) -> usize {
        let mut bbox = input.supports[members[0]];
        for &k in &members[1..] {
            bbox = bbox.union(&input.supports[k]);
        }
        let id = self.nodes.len();
        self.nodes.push(Cluster {
            bbox,
            indices: members.iter().map(|&k| input.indices[k]).collect(),
            children: Vec::new(),
            parent,
            level,
        });
        if members.len() > input.leaf_limit {
            let (lo, hi) = split(input.points, members);
            for part in [lo, hi] {
                let child = self.build_rec(input, part, Some(id), level + 1);
                self.nodes[id].children.push(child);
            }
        }
        id
    }

    /// Glues trees over the same index space under a new root whose box is
    /// the union of theirs.
    pub fn join(subtrees: Vec<ClusterTree>) -> Self {
        assert!(!subtrees.is_empty());
        let mut bbox = subtrees[0].nodes[0].bbox;
        let mut indices = Vec::new();
        for t in &subtrees {
            bbox = bbox.union(&t.nodes[0].bbox);
            indices.extend_from_slice(&t.nodes[0].indices);
        }
        indices.sort_unstable();
        let mut nodes = alloc::vec![Cluster {
            bbox,
            indices,
            children: Vec::new(),
            parent: None,
            level: 0,
        }];
        for t in subtrees {
            let offset = nodes.len();
            nodes[0].children.push(offset);
            for mut c in t.nodes {
                c.children.iter_mut().for_each(|x| *x += offset);
                c.parent = Some(c.parent.map_or(0, |p| p + offset));
                c.level += 1;
                nodes.push(c);
            }
        }
        Self { nodes }
    }

    /// Tree from explicit nodes; node 0 must be the only root and every
    /// child link must be matched by a parent link.
    pub fn from_nodes(nodes: Vec<Cluster>) -> Result<Self> {
        if nodes.is_empty() || nodes[0].parent.is_some() {
            return Err(Error::InvalidArgument("node 0 must be the root".into()));
        }
        for (c, node) in nodes.iter().enumerate().skip(1) {
            let p = node.parent.ok_or_else(|| Error::InvalidArgument(alloc::format!("node {c} has no parent")))?;
            if p >= nodes.len() || !nodes[p].children.contains(&c) {
                return Err(Error::InvalidArgument(alloc::format!("node {c}: inconsistent parent link")));
            }
        }
        let links: usize = nodes.iter().map(|n| n.children.len()).sum();
        if links != nodes.len() - 1 {
            return Err(Error::InvalidArgument("child links do not form a tree".into()));
        }
        Ok(Self { nodes })
    }

    /// Replaces every index `i` by `map[i]`. `map` must be increasing so that
    /// index sets stay sorted.
    pub fn remap_indices(&self, map: &[usize]) -> Self {
        debug_assert!(map.windows(2).all(|w| w[0] < w[1]));
        let mut t = self.clone();
        for c in &mut t.nodes {
            c.indices.iter_mut().for_each(|i| *i = map[*i]);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, c: usize) -> &Cluster {
        &self.nodes[c]
    }

    pub fn nodes(&self) -> &[Cluster] {
        &self.nodes
    }

    pub fn is_leaf(&self, c: usize) -> bool {
        self.nodes[c].children.is_empty()
    }

    pub fn indices(&self, c: usize) -> &[usize] {
        &self.nodes[c].indices
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.is_leaf(c)).collect()
    }

    /// Number of levels; a single leaf has depth 1.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|c| c.level).max().unwrap_or(0) + 1
    }

    /// Checks the cluster tree definition: children partition their parent's
    /// indices, leaves are exactly the childless clusters, and every support
    /// lies in its cluster's box.
    pub fn check(&self, support: impl Fn(usize) -> Aabb) -> core::result::Result<(), String> {
        for (c, node) in self.nodes.iter().enumerate() {
            if node.indices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(alloc::format!("cluster {c}: indices not strictly sorted"));
            }
            for &i in &node.indices {
                if !node.bbox.contains(&support(i)) {
                    return Err(alloc::format!(
                        "cluster {c}: support of {i} outside the box"
                    ));
                }
            }
            if node.indices.is_empty() {
                return Err(alloc::format!("cluster {c}: empty"));
            }
            if node.children.is_empty() {
                continue;
            }
            let mut union: Vec<usize> = Vec::new();
            for &ch in &node.children {
                if self.nodes[ch].parent != Some(c) {
                    return Err(alloc::format!("cluster {ch}: wrong parent link"));
                }
                union.extend_from_slice(&self.nodes[ch].indices);
            }
            let total = union.len();
            union.sort_unstable();
            union.dedup();
            if union.len() != total {
                return Err(alloc::format!("cluster {c}: children overlap"));
            }
            if union != node.indices {
                return Err(alloc::format!(
                    "cluster {c}: children do not cover the parent"
                ));
            }
        }
        Ok(())
    }

    /// Indented outline, one cluster per line.
    pub fn write_outline(
        &self,
        out: &mut impl fmt::Write,
        label: impl Fn(usize) -> String,
    ) -> fmt::Result {
        self.outline_rec(out, &label, 0, 0)
    }

    fn outline_rec(
        &self,
        out: &mut impl fmt::Write,
        label: &impl Fn(usize) -> String,
        c: usize,
        depth: usize,
    ) -> fmt::Result {
        let n = &self.nodes[c];
        writeln!(
            out,
            "{:indent$}{} n={} box=[{:.6}, {:.6}, {:.6}]..[{:.6}, {:.6}, {:.6}]",
            "",
            label(c),
            n.indices.len(),
            n.bbox.min[0],
            n.bbox.min[1],
            n.bbox.min[2],
            n.bbox.max[0],
            n.bbox.max[1],
            n.bbox.max[2],
            indent = 2 * depth
        )?;
        for &ch in &n.children {
            self.outline_rec(out, label, ch, depth + 1)?;
        }
        Ok(())
    }
}

struct Input<'a> {
    indices: &'a [usize],
    points: &'a [Point3],
    supports: &'a [Aabb],
    leaf_limit: usize,
}

/// Splits `members` (sorted by basis index) at the midpoint of the longest
/// axis of their points' bounding box. If that leaves one side empty, splits
/// at the median instead, ordering by coordinate and then by position.
fn split(points: &[Point3], members: Vec<usize>) -> (Vec<usize>, Vec<usize>) {
    let pts: Vec<Point3> = members.iter().map(|&k| points[k]).collect();
    let bb = Aabb::from_points(&pts);
    let axis = bb.longest_axis();
    let mid = 0.5 * (bb.min[axis] + bb.max[axis]);
    let (lo, hi): (Vec<usize>, Vec<usize>) = members.iter().partition(|&&k| points[k][axis] <= mid);
    if !lo.is_empty() && !hi.is_empty() {
        return (lo, hi);
    }
    let mut order = members.clone();
    order.sort_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b)));
    let half = order.len() / 2;
    let mut lo: Vec<usize> = order[..half].to_vec();
    let mut hi: Vec<usize> = order[half..].to_vec();
    lo.sort_unstable();
    hi.sort_unstable();
    (lo, hi)
}
