use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use crate::clustering::{Aabb, TreeView};

/// `max(diam τ, diam σ) <= 2 η dist(τ, σ)`.
pub fn is_admissible(tau: &Aabb, sigma: &Aabb, eta: f64) -> bool {
    tau.diameter().max(sigma.diameter()) <= 2.0 * eta * tau.distance(sigma)
}

/// Children of an inadmissible block: all pairs of children if both clusters
/// have some, otherwise the children of whichever side has them paired with
/// the other cluster itself.
pub fn child_pairs(
    row_children: &[usize],
    col_children: &[usize],
    tau: usize,
    sigma: usize,
) -> Vec<(usize, usize)> {
    match (row_children.is_empty(), col_children.is_empty()) {
        (false, false) => row_children
            .iter()
            .flat_map(|&t| col_children.iter().map(move |&s| (t, s)))
            .collect(),
        (true, false) => col_children.iter().map(|&s| (tau, s)).collect(),
        (false, true) => row_children.iter().map(|&t| (t, sigma)).collect(),
        (true, true) => Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockStatus {
    Admissible,
    Inadmissible,
    Subdivided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockNode {
    pub row: usize,
    pub col: usize,
    pub status: BlockStatus,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// Arena block tree; node 0 is the root pair. Nodes are stored level by
/// level, which is also the order the distributed construction produces.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTree {
    nodes: Vec<BlockNode>,
}

impl BlockTree {
    pub fn build<R: TreeView, C: TreeView>(rows: &R, cols: &C, eta: f64) -> Self {
        let mut tree = Self::with_root(rows.root(), cols.root());
        let mut queue = VecDeque::from([0usize]);
        while let Some(b) = queue.pop_front() {
            let (tau, sigma) = (tree.nodes[b].row, tree.nodes[b].col);
            if is_admissible(rows.bbox(tau), cols.bbox(sigma), eta) {
                tree.nodes[b].status = BlockStatus::Admissible;
                continue;
            }
            let pairs = child_pairs(rows.children(tau), cols.children(sigma), tau, sigma);
            if pairs.is_empty() {
                tree.nodes[b].status = BlockStatus::Inadmissible;
                continue;
            }
            for child in tree.subdivide(b, &pairs) {
                queue.push_back(child);
            }
        }
        tree
    }

    /// A tree with only the root pair, marked inadmissible until decided.
    pub fn with_root(row: usize, col: usize) -> Self {
        Self {
            nodes: alloc::vec![BlockNode {
                row,
                col,
                status: BlockStatus::Inadmissible,
                children: Vec::new(),
                parent: None,
            }],
        }
    }

    /// Marks `b` subdivided and appends its children; returns their ids.
    pub fn subdivide(&mut self, b: usize, pairs: &[(usize, usize)]) -> core::ops::Range<usize> {
        let start = self.nodes.len();
        for &(row, col) in pairs {
            self.nodes.push(BlockNode {
                row,
                col,
                status: BlockStatus::Inadmissible,
                children: Vec::new(),
                parent: Some(b),
            });
        }
        let end = self.nodes.len();
        self.nodes[b].status = BlockStatus::Subdivided;
        self.nodes[b].children = (start..end).collect();
        start..end
    }

    pub fn set_status(&mut self, b: usize, status: BlockStatus) {
        self.nodes[b].status = status;
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, b: usize) -> &BlockNode {
        &self.nodes[b]
    }

    pub fn nodes(&self) -> &[BlockNode] {
        &self.nodes
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&b| self.nodes[b].status != BlockStatus::Subdivided)
    }

    pub fn count(&self, status: BlockStatus) -> usize {
        self.nodes.iter().filter(|b| b.status == status).count()
    }

    /// Leaves in depth-first order, the order in which the interaction phase
    /// applies them.
    pub fn leaves_depth_first(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![0usize];
        while let Some(b) = stack.pop() {
            let n = &self.nodes[b];
            if n.status == BlockStatus::Subdivided {
                stack.extend(n.children.iter().rev());
            } else {
                out.push(b);
            }
        }
        out
    }

    /// Verifies that every node follows the construction rules.
    pub fn check_rules<R: TreeView, C: TreeView>(
        &self,
        rows: &R,
        cols: &C,
        eta: f64,
    ) -> Result<(), String> {
        for (b, n) in self.nodes.iter().enumerate() {
            let adm = is_admissible(rows.bbox(n.row), cols.bbox(n.col), eta);
            let rc = rows.children(n.row);
            let cc = cols.children(n.col);
            match n.status {
                BlockStatus::Admissible if !adm => {
                    return Err(alloc::format!(
                        "block {b} marked admissible but fails the test"
                    ))
                }
                BlockStatus::Inadmissible if adm || !rc.is_empty() || !cc.is_empty() => {
                    return Err(alloc::format!(
                        "block {b} should not be an inadmissible leaf"
                    ))
                }
                BlockStatus::Subdivided => {
                    if adm {
                        return Err(alloc::format!("block {b} is admissible but subdivided"));
                    }
                    let expect = child_pairs(rc, cc, n.row, n.col);
                    let got: Vec<(usize, usize)> = n
                        .children
                        .iter()
                        .map(|&c| (self.nodes[c].row, self.nodes[c].col))
                        .collect();
                    if expect != got {
                        return Err(alloc::format!("block {b} has the wrong children"));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Checks that the products `rows × cols` of `blocks` cover
/// `[0, n_rows) × [0, n_cols)` exactly once.
pub fn check_cover<'a>(
    n_rows: usize,
    n_cols: usize,
    blocks: impl IntoIterator<Item = (&'a [usize], &'a [usize])>,
) -> Result<(), String> {
    let mut seen = alloc::vec![0u64; (n_rows * n_cols).div_ceil(64)];
    let mut covered = 0usize;
    for (rows, cols) in blocks {
        for &i in rows {
            for &j in cols {
                if i >= n_rows || j >= n_cols {
                    return Err(alloc::format!("entry ({i}, {j}) outside the matrix"));
                }
                let bit = i * n_cols + j;
                let (w, m) = (bit / 64, 1u64 << (bit % 64));
                if seen[w] & m != 0 {
                    return Err(alloc::format!("entry ({i}, {j}) covered twice"));
                }
                seen[w] |= m;
                covered += 1;
            }
        }
    }
    if covered != n_rows * n_cols {
        return Err(alloc::format!(
            "{covered} of {} entries covered",
            n_rows * n_cols
        ));
    }
    Ok(())
}
