use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::clustering::{is_admissible, BlockStatus};
use crate::error::ProtocolError;
use crate::shared::{Catalog, SharedTree};
use crate::transport::Transport;
use crate::wire::{ClusterId, Reader, Tag, Writer};

/// How a manager forwards received children to the other shareholders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FanOut {
    /// One message per shareholder that needs something.
    #[default]
    PointToPoint,
    /// One all-to-all exchange per round, empty payloads included.
    Collective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharedBlock {
    pub row: ClusterId,
    pub col: ClusterId,
    pub status: BlockStatus,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// `(cluster, peer)`: in a send tree the peer is the destination manager, in
/// a receive tree the source manager.
pub type Vertex = (ClusterId, usize);

/// One node's part of the shared block tree and transmission trees.
#[derive(Debug, Clone)]
pub struct SharedSkeleton {
    pub rank: usize,
    pub size: usize,
    pub eta: f64,
    pub rows: Arc<SharedTree>,
    pub cols: Arc<SharedTree>,
    pub row_catalog: Catalog,
    pub col_catalog: Catalog,
    /// Blocks with a row or column cluster this node holds a share in;
    /// block 0 is the root pair.
    pub blocks: Vec<SharedBlock>,
    /// Row send tree, vertex to parent vertex.
    pub send_row: BTreeMap<Vertex, Option<Vertex>>,
    pub send_col: BTreeMap<Vertex, Option<Vertex>>,
    /// Row clusters of blocks whose column this node manages.
    pub recv_row: BTreeSet<Vertex>,
    /// Column clusters of blocks whose row this node manages.
    pub recv_col: BTreeSet<Vertex>,
    pub rounds: usize,
}

impl SharedSkeleton {
    /// Managed column clusters whose coefficients go to `dest`, by id.
    pub fn column_sends(&self, dest: usize) -> Vec<ClusterId> {
        if dest == self.rank {
            return Vec::new();
        }
        self.send_col
            .keys()
            .filter(|&&(s, d)| d == dest && self.col_catalog.manager(s) == self.rank)
            .map(|&(s, _)| s)
            .collect()
    }

    /// Column clusters whose coefficients arrive from `src`, by id.
    pub fn column_recvs(&self, src: usize) -> Vec<ClusterId> {
        if src == self.rank {
            return Vec::new();
        }
        self.recv_col.iter().filter(|&&(_, s)| s == src).map(|&(c, _)| c).collect()
    }

    /// Leaf blocks whose row this node manages.
    pub fn owned_leaves(&self) -> impl Iterator<Item = &SharedBlock> + '_ {
        self.blocks.iter().filter(|b| {
            b.status != BlockStatus::Subdivided && self.row_catalog.manager(b.row) == self.rank
        })
    }

    fn register(&mut self, b: usize) {
        let me = self.rank;
        let (t, s) = (self.blocks[b].row, self.blocks[b].col);
        let (mr, mc) = (self.row_catalog.manager(t), self.col_catalog.manager(s));
        let parent = self.blocks[b].parent.map(|pb| (self.blocks[pb].row, self.blocks[pb].col));
        if self.row_catalog.holds(t, me) {
            let pv = parent.map(|(pt, ps)| (pt, self.col_catalog.manager(ps)));
            self.send_row.entry((t, mc)).or_insert(pv);
        }
        if self.col_catalog.holds(s, me) {
            let pv = parent.map(|(pt, ps)| (ps, self.row_catalog.manager(pt)));
            self.send_col.entry((s, mr)).or_insert(pv);
        }
        if me == mr {
            self.recv_col.insert((s, mc));
        }
        if me == mc {
            self.recv_row.insert((t, mr));
        }
    }
}

fn put_children(w: &mut Writer, cat: &Catalog, set: &BTreeSet<ClusterId>) {
    for &c in set {
        for h in cat.child_headers(c) {
            w.put_shared_header(&h);
        }
    }
}

fn take_children(
    r: &mut Reader<'_>,
    cat: &mut Catalog,
    set: &BTreeSet<ClusterId>,
    round: usize,
) -> Result<(), ProtocolError> {
    for &c in set {
        let headers = (0..cat.announced(c))
            .map(|_| r.shared_header())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ProtocolError::Round {
                round,
                detail: format!("children of {c}: {e}"),
            })?;
        cat.insert_children(c, headers);
    }
    Ok(())
}

fn sets(p: usize) -> Vec<BTreeSet<ClusterId>> {
    (0..p).map(|_| BTreeSet::new()).collect()
}

/// Collective construction of the shared block tree. Only managers exchange
/// children; each manager then forwards what its fellow shareholders lack.
pub fn build_shared<T: Transport>(
    tr: &mut T,
    rows: Arc<SharedTree>,
    cols: Arc<SharedTree>,
    eta: f64,
    fan_out: FanOut,
) -> Result<SharedSkeleton, ProtocolError> {
    let (me, p) = (tr.rank(), tr.size());
    let mut w = Writer::new();
    w.put_f64(eta);
    for (beta, bytes) in tr.all_gather(Tag::Roots, w.finish())?.iter().enumerate() {
        let mut r = Reader::new(bytes);
        let theirs = r.f64()?;
        r.finish()?;
        if theirs.to_bits() != eta.to_bits() {
            return Err(ProtocolError::ParameterMismatch(format!(
                "eta {eta} on node {me}, {theirs} on node {beta}"
            )));
        }
    }

    let mut s = SharedSkeleton {
        rank: me,
        size: p,
        eta,
        row_catalog: Catalog::new(&rows),
        col_catalog: Catalog::new(&cols),
        blocks: alloc::vec![SharedBlock {
            row: rows.root_id(),
            col: cols.root_id(),
            status: BlockStatus::Inadmissible,
            children: Vec::new(),
            parent: None,
        }],
        rows,
        cols,
        send_row: BTreeMap::new(),
        send_col: BTreeMap::new(),
        recv_row: BTreeSet::new(),
        recv_col: BTreeSet::new(),
        rounds: 0,
    };
    s.register(0);
    let mut active = alloc::vec![0usize];

    loop {
        s.rounds += 1;
        let round = s.rounds;
        let (rc, cc) = (&s.row_catalog, &s.col_catalog);
        let adm: Vec<bool> = active
            .iter()
            .map(|&b| is_admissible(rc.bbox(s.blocks[b].row), cc.bbox(s.blocks[b].col), eta))
            .collect();

        let (mut put_row, mut put_col, mut get_row, mut get_col) = (sets(p), sets(p), sets(p), sets(p));
        let (mut fan_row, mut fan_col, mut exp_row, mut exp_col) = (sets(p), sets(p), sets(p), sets(p));
        for (&b, _) in active.iter().zip(&adm).filter(|(_, &a)| !a) {
            let (t, c) = (s.blocks[b].row, s.blocks[b].col);
            let (mr, mc) = (rc.manager(t), cc.manager(c));
            let (t_kids, c_kids) = (rc.announced(t) > 0, cc.announced(c) > 0);
            if mr != mc {
                if me == mr {
                    if t_kids && !rc.holds(t, mc) {
                        put_row[mc].insert(t);
                    }
                    if c_kids && !cc.holds(c, me) {
                        get_col[mc].insert(c);
                    }
                }
                if me == mc {
                    if c_kids && !cc.holds(c, mr) {
                        put_col[mr].insert(c);
                    }
                    if t_kids && !rc.holds(t, me) {
                        get_row[mr].insert(t);
                    }
                }
            }
            if me == mr && c_kids {
                for &g in rc.shareholders(t).iter().filter(|&&g| g != me && !cc.holds(c, g)) {
                    fan_row[g].insert(c);
                }
            }
            if me == mc && t_kids {
                for &g in cc.shareholders(c).iter().filter(|&&g| g != me && !rc.holds(t, g)) {
                    fan_col[g].insert(t);
                }
            }
            if me != mr && rc.holds(t, me) && c_kids && !cc.holds(c, me) {
                exp_row[mr].insert(c);
            }
            if me != mc && cc.holds(c, me) && t_kids && !rc.holds(t, me) {
                exp_col[mc].insert(t);
            }
        }

        let payloads = (0..p)
            .map(|q| {
                let mut w = Writer::new();
                put_children(&mut w, &s.row_catalog, &put_row[q]);
                put_children(&mut w, &s.col_catalog, &put_col[q]);
                w.finish()
            })
            .collect();
        let received = tr.all_to_all(Tag::Children, payloads)?;
        for (q, bytes) in received.iter().enumerate() {
            let mut r = Reader::new(bytes);
            take_children(&mut r, &mut s.row_catalog, &get_row[q], round)?;
            take_children(&mut r, &mut s.col_catalog, &get_col[q], round)?;
            r.finish().map_err(|_| ProtocolError::Round {
                round,
                detail: format!("unexpected children from node {q}"),
            })?;
        }

        let payloads: Vec<Vec<u8>> = (0..p)
            .map(|g| {
                let mut w = Writer::new();
                put_children(&mut w, &s.col_catalog, &fan_row[g]);
                put_children(&mut w, &s.row_catalog, &fan_col[g]);
                w.finish()
            })
            .collect();
        let received = match fan_out {
            FanOut::Collective => tr.all_to_all(Tag::Children, payloads)?,
            FanOut::PointToPoint => {
                for (g, payload) in payloads.into_iter().enumerate() {
                    if !fan_row[g].is_empty() || !fan_col[g].is_empty() {
                        tr.send(g, Tag::Children, payload)?;
                    }
                }
                let mut out = alloc::vec![Vec::new(); p];
                for q in 0..p {
                    if !exp_row[q].is_empty() || !exp_col[q].is_empty() {
                        out[q] = tr.recv(q, Tag::Children)?;
                    }
                }
                out
            }
        };
        for (q, bytes) in received.iter().enumerate() {
            let mut r = Reader::new(bytes);
            take_children(&mut r, &mut s.col_catalog, &exp_row[q], round)?;
            take_children(&mut r, &mut s.row_catalog, &exp_col[q], round)?;
            r.finish().map_err(|_| ProtocolError::Round {
                round,
                detail: format!("unexpected forwarded children from node {q}"),
            })?;
        }

        let mut next = Vec::new();
        for (&b, &a) in active.iter().zip(&adm) {
            if a {
                s.blocks[b].status = BlockStatus::Admissible;
                continue;
            }
            let (t, c) = (s.blocks[b].row, s.blocks[b].col);
            let kids = |cat: &Catalog, id: ClusterId| -> Result<Vec<ClusterId>, ProtocolError> {
                if cat.announced(id) == 0 {
                    return Ok(Vec::new());
                }
                cat.children(id).map(<[ClusterId]>::to_vec).ok_or_else(|| ProtocolError::Round {
                    round,
                    detail: format!("children of {id} never arrived at node {me}"),
                })
            };
            let (tk, ck) = (kids(&s.row_catalog, t)?, kids(&s.col_catalog, c)?);
            let pairs: Vec<(ClusterId, ClusterId)> = match (tk.is_empty(), ck.is_empty()) {
                (true, true) => Vec::new(),
                (false, true) => tk.iter().map(|&x| (x, c)).collect(),
                (true, false) => ck.iter().map(|&y| (t, y)).collect(),
                (false, false) => tk.iter().flat_map(|&x| ck.iter().map(move |&y| (x, y))).collect(),
            };
            if pairs.is_empty() {
                s.blocks[b].status = BlockStatus::Inadmissible;
                continue;
            }
            s.blocks[b].status = BlockStatus::Subdivided;
            for (x, y) in pairs {
                if !s.row_catalog.holds(x, me) && !s.col_catalog.holds(y, me) {
                    continue;
                }
                let id = s.blocks.len();
                s.blocks.push(SharedBlock {
                    row: x,
                    col: y,
                    status: BlockStatus::Inadmissible,
                    children: Vec::new(),
                    parent: Some(b),
                });
                s.blocks[b].children.push(id);
                s.register(id);
                next.push(id);
            }
        }
        active = next;
        if !tr.reduce_or(!active.is_empty())? {
            break;
        }
    }
    Ok(s)
}
