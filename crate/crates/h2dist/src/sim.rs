//! In-process message passing: one thread per node, one ordered channel per
//! ordered pair of nodes.

use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::Duration;

use h2dist_core::transport::{MessageCensus, Transport};
use h2dist_core::wire::Tag;
use h2dist_core::ProtocolError;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

type Message = (Tag, Vec<u8>);

pub struct ThreadTransport {
    rank: usize,
    outboxes: Vec<Sender<Message>>,
    inboxes: Vec<Receiver<Message>>,
    census: MessageCensus,
    timeout: Duration,
}

impl ThreadTransport {
    /// Fully connected endpoints for `p` nodes.
    pub fn network(p: usize, timeout: Duration) -> Vec<ThreadTransport> {
        let mut outboxes: Vec<Vec<Sender<Message>>> = (0..p).map(|_| Vec::with_capacity(p)).collect();
        let mut inboxes: Vec<Vec<Option<Receiver<Message>>>> = (0..p).map(|_| (0..p).map(|_| None).collect()).collect();
        for (src, out) in outboxes.iter_mut().enumerate() {
            for inbox in inboxes.iter_mut() {
                let (tx, rx) = channel();
                out.push(tx);
                inbox[src] = Some(rx);
            }
        }
        outboxes
            .into_iter()
            .zip(inboxes)
            .enumerate()
            .map(|(rank, (outboxes, inboxes))| ThreadTransport {
                rank,
                outboxes,
                inboxes: inboxes.into_iter().map(|r| r.expect("channel")).collect(),
                census: MessageCensus::default(),
                timeout,
            })
            .collect()
    }
}

impl Transport for ThreadTransport {
    fn rank(&self) -> usize {
        self.rank
    }

    fn size(&self) -> usize {
        self.outboxes.len()
    }

    fn send(&mut self, dest: usize, tag: Tag, payload: Vec<u8>) -> Result<(), ProtocolError> {
        let out = self.outboxes.get(dest).ok_or(ProtocolError::Disconnected { peer: dest })?;
        self.census.record(tag, payload.len());
        out.send((tag, payload)).map_err(|_| ProtocolError::Disconnected { peer: dest })
    }

    fn recv(&mut self, src: usize, tag: Tag) -> Result<Vec<u8>, ProtocolError> {
        let inbox = self.inboxes.get(src).ok_or(ProtocolError::Disconnected { peer: src })?;
        match inbox.recv_timeout(self.timeout) {
            Ok((t, payload)) if t == tag => Ok(payload),
            Ok((t, _)) => Err(ProtocolError::Desync {
                node: self.rank,
                peer: src,
                expected: tag,
                actual: t,
            }),
            Err(RecvTimeoutError::Timeout) => Err(ProtocolError::Timeout { peer: src }),
            Err(RecvTimeoutError::Disconnected) => Err(ProtocolError::Disconnected { peer: src }),
        }
    }

    fn census(&self) -> &MessageCensus {
        &self.census
    }
}

/// Runs `f` on `p` nodes, each on its own thread, and returns the results
/// with each node's message census, in rank order.
pub fn run_nodes<R, F>(p: usize, f: F) -> Vec<(R, MessageCensus)>
where
    R: Send,
    F: Fn(&mut ThreadTransport) -> R + Sync,
{
    run_nodes_with_timeout(p, DEFAULT_TIMEOUT, f)
}

pub fn run_nodes_with_timeout<R, F>(p: usize, timeout: Duration, f: F) -> Vec<(R, MessageCensus)>
where
    R: Send,
    F: Fn(&mut ThreadTransport) -> R + Sync,
{
    let endpoints = ThreadTransport::network(p, timeout);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = endpoints
            .into_iter()
            .map(|mut tr| {
                thread::Builder::new()
                    .name(format!("node-{}", tr.rank))
                    .spawn_scoped(scope, move || {
                        let r = f(&mut tr);
                        (r, tr.census.clone())
                    })
                    .expect("spawn node thread")
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collectives_agree_on_every_node() {
        let out = run_nodes(4, |tr| {
            let me = tr.rank() as u8;
            let b = tr.broadcast(2, Tag::Roots, vec![me]).unwrap();
            let g = tr.all_gather(Tag::Anchor, vec![me * 10]).unwrap();
            let any = tr.reduce_or(me == 3).unwrap();
            (b, g, any)
        });
        for (rank, ((b, g, any), census)) in out.into_iter().enumerate() {
            assert_eq!(b, [2]);
            assert_eq!(g, [[0], [10], [20], [30]]);
            assert!(any);
            let bcast = if rank == 2 { 3 } else { 0 };
            assert_eq!(census.messages(Tag::Roots), bcast);
            assert_eq!(census.messages(Tag::Anchor), 3);
            assert_eq!(census.messages(Tag::Vote), 3);
        }
    }

    #[test]
    fn pair_order_is_preserved_and_tags_checked() {
        let out = run_nodes(2, |tr| {
            if tr.rank() == 0 {
                for i in 0..50u8 {
                    tr.send(1, Tag::Xhat, vec![i]).unwrap();
                }
                tr.send(1, Tag::Xleaf, vec![]).unwrap();
                Ok(Vec::new())
            } else {
                let got: Vec<u8> = (0..50).map(|_| tr.recv(0, Tag::Xhat).unwrap()[0]).collect();
                assert_eq!(got, (0..50).collect::<Vec<u8>>());
                tr.recv(0, Tag::Geometry).map(|_| got)
            }
        });
        assert!(matches!(
            out[1].0,
            Err(ProtocolError::Desync { expected: Tag::Geometry, actual: Tag::Xleaf, .. })
        ));
    }

    #[test]
    fn silent_peer_times_out() {
        let out = run_nodes_with_timeout(2, Duration::from_millis(50), |tr| {
            if tr.rank() == 0 {
                std::thread::sleep(Duration::from_millis(300));
                Ok(vec![])
            } else {
                tr.recv(0, Tag::Vote)
            }
        });
        assert_eq!(out[1].0, Err(ProtocolError::Timeout { peer: 0 }));
    }
}
