//! Message-passing contract used by the distributed algorithms.
//!
//! Messages between one ordered pair of nodes arrive in send order, and every
//! receive names the tag it expects; a different tag is a protocol error.
//! Collectives are built from point-to-point messages, so an implementation
//! only has to provide [`Transport::send`] and [`Transport::recv`].

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::ProtocolError;
use crate::wire::Tag;

/// Messages and payload bytes sent, by tag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageCensus {
    messages: [u64; 16],
    bytes: [u64; 16],
}

impl MessageCensus {
    pub fn record(&mut self, tag: Tag, bytes: usize) {
        self.messages[tag as usize] += 1;
        self.bytes[tag as usize] += bytes as u64;
    }

    pub fn messages(&self, tag: Tag) -> u64 {
        self.messages[tag as usize]
    }

    pub fn bytes(&self, tag: Tag) -> u64 {
        self.bytes[tag as usize]
    }

    pub fn total_messages(&self) -> u64 {
        self.messages.iter().sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.bytes.iter().sum()
    }

    pub fn add(&mut self, other: &MessageCensus) {
        for i in 0..16 {
            self.messages[i] += other.messages[i];
            self.bytes[i] += other.bytes[i];
        }
    }

    /// Difference `self - earlier`, for measuring one phase.
    pub fn since(&self, earlier: &MessageCensus) -> MessageCensus {
        let mut d = self.clone();
        for i in 0..16 {
            d.messages[i] -= earlier.messages[i];
            d.bytes[i] -= earlier.bytes[i];
        }
        d
    }

    /// `(tag, messages, bytes)` for every tag with traffic.
    pub fn entries(&self) -> impl Iterator<Item = (Tag, u64, u64)> + '_ {
        Tag::ALL
            .into_iter()
            .map(|t| (t, self.messages(t), self.bytes(t)))
            .filter(|e| e.1 > 0)
    }
}

pub trait Transport {
    fn rank(&self) -> usize;
    fn size(&self) -> usize;
    fn send(&mut self, dest: usize, tag: Tag, payload: Vec<u8>) -> Result<(), ProtocolError>;
    fn recv(&mut self, src: usize, tag: Tag) -> Result<Vec<u8>, ProtocolError>;
    /// Traffic sent by this node so far.
    fn census(&self) -> &MessageCensus;

    /// Every node receives `payload` from `root`.
    fn broadcast(&mut self, root: usize, tag: Tag, payload: Vec<u8>) -> Result<Vec<u8>, ProtocolError> {
        if self.rank() == root {
            for dest in (0..self.size()).filter(|&d| d != root) {
                self.send(dest, tag, payload.clone())?;
            }
            Ok(payload)
        } else {
            self.recv(root, tag)
        }
    }

    /// `payloads[β]` goes to node β; the result holds what each node sent
    /// here. The own slot is moved locally without a message.
    fn all_to_all(&mut self, tag: Tag, mut payloads: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>, ProtocolError> {
        let (me, p) = (self.rank(), self.size());
        assert_eq!(payloads.len(), p, "one payload per node");
        for dest in (0..p).filter(|&d| d != me) {
            self.send(dest, tag, core::mem::take(&mut payloads[dest]))?;
        }
        let mut out = alloc::vec![Vec::new(); p];
        out[me] = core::mem::take(&mut payloads[me]);
        for src in (0..p).filter(|&s| s != me) {
            out[src] = self.recv(src, tag)?;
        }
        Ok(out)
    }

    fn all_gather(&mut self, tag: Tag, payload: Vec<u8>) -> Result<Vec<Vec<u8>>, ProtocolError> {
        let p = self.size();
        self.all_to_all(tag, alloc::vec![payload; p])
    }

    /// Boolean or over all nodes.
    fn reduce_or(&mut self, flag: bool) -> Result<bool, ProtocolError> {
        let votes = self.all_gather(Tag::Vote, alloc::vec![flag as u8])?;
        Ok(votes.iter().any(|v| v.first() == Some(&1)))
    }
}

/// Transport for a single node; self-addressed messages are queued.
#[derive(Debug, Default)]
pub struct SingleNode {
    queue: VecDeque<(Tag, Vec<u8>)>,
    census: MessageCensus,
}

impl SingleNode {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Transport for SingleNode {
    fn rank(&self) -> usize {
        0
    }

    fn size(&self) -> usize {
        1
    }

    fn send(&mut self, dest: usize, tag: Tag, payload: Vec<u8>) -> Result<(), ProtocolError> {
        if dest != 0 {
            return Err(ProtocolError::Disconnected { peer: dest });
        }
        self.census.record(tag, payload.len());
        self.queue.push_back((tag, payload));
        Ok(())
    }

    fn recv(&mut self, src: usize, tag: Tag) -> Result<Vec<u8>, ProtocolError> {
        if src != 0 {
            return Err(ProtocolError::Disconnected { peer: src });
        }
        match self.queue.pop_front() {
            Some((t, payload)) if t == tag => Ok(payload),
            Some((t, _)) => Err(ProtocolError::Desync {
                node: 0,
                peer: 0,
                expected: tag,
                actual: t,
            }),
            None => Err(ProtocolError::Timeout { peer: 0 }),
        }
    }

    fn census(&self) -> &MessageCensus {
        &self.census
    }
}
