//! Bit-exact little-endian message formats.
//!
//! * cluster header: 6 × f64 box corners (min xyz, max xyz), u32 child count, u64 id
//! * vector: u64 cluster id, u32 length, length × f64 (two words per complex value)
//! * geometry: u64 cluster id, u32 count, count × (u64 basis index, 9 × f64 vertices)
//! * shareholder set: u32 count, count × u32 node ids

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::clustering::Aabb;
use crate::error::ProtocolError;
use crate::geometry::Triangle;
use crate::scalar::Scalar;

pub const HEADER_BYTES: usize = 6 * 8 + 4 + 8;

/// Cluster identifier: owner node in the upper 32 bits, preorder position in
/// the owner's tree in the lower 32. Clusters above the local trees use the
/// owner [`ClusterId::SHARED_OWNER`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClusterId(pub u64);

impl ClusterId {
    pub const SHARED_OWNER: u32 = u32::MAX;

    pub fn local(owner: usize, preorder: usize) -> Self {
        debug_assert!(owner < Self::SHARED_OWNER as usize);
        Self(((owner as u64) << 32) | preorder as u64)
    }

    pub fn shared(preorder: usize) -> Self {
        Self(((Self::SHARED_OWNER as u64) << 32) | preorder as u64)
    }

    pub fn owner(self) -> Option<usize> {
        let o = (self.0 >> 32) as u32;
        (o != Self::SHARED_OWNER).then_some(o as usize)
    }

    pub fn preorder(self) -> usize {
        (self.0 & 0xffff_ffff) as usize
    }

    pub fn is_shared(self) -> bool {
        self.owner().is_none()
    }
}

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.owner() {
            Some(o) => write!(f, "{o}:{}", self.preorder()),
            None => write!(f, "s:{}", self.preorder()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Tag {
    Roots = 1,
    Children = 2,
    Xhat = 3,
    Xleaf = 4,
    Geometry = 5,
    Vote = 6,
    /// Characteristic point of a node, used to build the shared top tree.
    Anchor = 7,
    /// Shared cluster header with its shareholder set.
    Shareholders = 8,
    /// Coefficients pushed down a shared tree.
    Yhat = 9,
}

impl Tag {
    pub const ALL: [Tag; 9] = [
        Tag::Roots,
        Tag::Children,
        Tag::Xhat,
        Tag::Xleaf,
        Tag::Geometry,
        Tag::Vote,
        Tag::Anchor,
        Tag::Shareholders,
        Tag::Yhat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tag::Roots => "roots",
            Tag::Children => "children",
            Tag::Xhat => "xhat",
            Tag::Xleaf => "xleaf",
            Tag::Geometry => "geometry",
            Tag::Vote => "vote",
            Tag::Anchor => "anchor",
            Tag::Shareholders => "shareholders",
            Tag::Yhat => "yhat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterHeader {
    pub bbox: Aabb,
    pub child_count: u32,
    pub id: ClusterId,
}

/// A cluster header together with its shareholder set.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedHeader {
    pub header: ClusterHeader,
    pub shareholders: Vec<usize>,
}

impl SharedHeader {
    pub fn manager(&self) -> usize {
        self.shareholders[0]
    }
}

/// Triangles of one column leaf, keyed by global basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafGeometry {
    pub id: ClusterId,
    pub indices: Vec<usize>,
    pub triangles: Vec<Triangle>,
}

#[derive(Debug, Default, Clone)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_header(&mut self, h: &ClusterHeader) {
        for v in h.bbox.min.iter().chain(&h.bbox.max) {
            self.put_f64(*v);
        }
        self.put_u32(h.child_count);
        self.put_u64(h.id.0);
    }

    pub fn put_shareholders(&mut self, nodes: &[usize]) {
        self.put_u32(nodes.len() as u32);
        for &n in nodes {
            self.put_u32(n as u32);
        }
    }

    pub fn put_shared_header(&mut self, h: &SharedHeader) {
        self.put_header(&h.header);
        self.put_shareholders(&h.shareholders);
    }

    pub fn put_vector<T: Scalar>(&mut self, id: ClusterId, values: &[T]) {
        self.put_u64(id.0);
        self.put_u32(values.len() as u32);
        let mut words = [0.0; 2];
        for v in values {
            v.write_words(&mut words);
            for w in &words[..T::WORDS] {
                self.put_f64(*w);
            }
        }
    }

    pub fn put_geometry(&mut self, g: &LeafGeometry) {
        self.put_u64(g.id.0);
        self.put_u32(g.indices.len() as u32);
        for (idx, t) in g.indices.iter().zip(&g.triangles) {
            self.put_u64(*idx as u64);
            for v in &t.vertices {
                for c in v {
                    self.put_f64(*c);
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn malformed(what: &str) -> ProtocolError {
    ProtocolError::Malformed(what.to_string())
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N], ProtocolError> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| malformed("truncated payload"))?;
        self.pos = end;
        Ok(bytes.try_into().expect("length checked"))
    }

    pub fn u32(&mut self) -> Result<u32, ProtocolError> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    pub fn u64(&mut self) -> Result<u64, ProtocolError> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    pub fn f64(&mut self) -> Result<f64, ProtocolError> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    pub fn header(&mut self) -> Result<ClusterHeader, ProtocolError> {
        let mut c = [0.0; 6];
        for v in &mut c {
            *v = self.f64()?;
        }
        let child_count = self.u32()?;
        let id = ClusterId(self.u64()?);
        let bbox = Aabb::new([c[0], c[1], c[2]], [c[3], c[4], c[5]])
            .map_err(|_| malformed("box corners out of order"))?;
        Ok(ClusterHeader {
            bbox,
            child_count,
            id,
        })
    }

    pub fn shareholders(&mut self) -> Result<Vec<usize>, ProtocolError> {
        let n = self.u32()? as usize;
        if n > self.remaining() / 4 {
            return Err(malformed("shareholder count exceeds payload"));
        }
        (0..n).map(|_| self.u32().map(|v| v as usize)).collect()
    }

    pub fn shared_header(&mut self) -> Result<SharedHeader, ProtocolError> {
        let header = self.header()?;
        let shareholders = self.shareholders()?;
        if shareholders.is_empty() || shareholders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(malformed("shareholder set must be sorted and nonempty"));
        }
        Ok(SharedHeader {
            header,
            shareholders,
        })
    }

    pub fn vector<T: Scalar>(&mut self) -> Result<(ClusterId, Vec<T>), ProtocolError> {
        let id = ClusterId(self.u64()?);
        let n = self.u32()? as usize;
        if n > self.remaining() / (8 * T::WORDS) {
            return Err(malformed("vector length exceeds payload"));
        }
        let mut out = Vec::with_capacity(n);
        let mut words = [0.0; 2];
        for _ in 0..n {
            for w in &mut words[..T::WORDS] {
                *w = self.f64()?;
            }
            out.push(T::read_words(&words));
        }
        Ok((id, out))
    }

    pub fn geometry(&mut self) -> Result<LeafGeometry, ProtocolError> {
        let id = ClusterId(self.u64()?);
        let n = self.u32()? as usize;
        if n > self.remaining() / (8 + 72) {
            return Err(malformed("geometry count exceeds payload"));
        }
        let mut indices = Vec::with_capacity(n);
        let mut triangles = Vec::with_capacity(n);
        for _ in 0..n {
            indices.push(self.u64()? as usize);
            let mut v = [[0.0; 3]; 3];
            for p in &mut v {
                for c in p.iter_mut() {
                    *c = self.f64()?;
                }
            }
            triangles.push(Triangle { vertices: v });
        }
        Ok(LeafGeometry {
            id,
            indices,
            triangles,
        })
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn is_done(&self) -> bool {
        self.pos == self.buf.len()
    }

    pub fn finish(self) -> Result<(), ProtocolError> {
        if self.is_done() {
            Ok(())
        } else {
            Err(malformed("trailing bytes"))
        }
    }
}
