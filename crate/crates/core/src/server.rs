//! Broadcast hub: append-only history plus fan-out, independent of any
//! transport. Transports feed received lines into [`Hub::receive`] and drain
//! each connection's outbound queue with [`Hub::drain`].
//!
//! Update payloads are relayed byte for byte; the hub checks frame structure
//! only and never parses commands.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use uuid::Uuid;

use crate::protocol::{Frame, ProtocolError};

pub const DEFAULT_QUEUE_CAPACITY: usize = 10_000;

pub type ConnId = u64;

#[derive(Debug)]
struct Conn {
    client_id: Option<Uuid>,
    subscribed: bool,
    queue: VecDeque<(Arc<str>, bool)>,
    /// Queued frames that are live broadcasts (snapshot frames excluded).
    live: usize,
}

/// Effects of one [`Hub::receive`] call.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Dispatch {
    /// Connections with newly queued frames.
    pub woken: BTreeSet<ConnId>,
    /// Connections dropped for exceeding their queue capacity.
    pub dropped: Vec<ConnId>,
}

#[derive(Debug)]
pub struct Hub {
    history: Vec<Arc<str>>,
    conns: BTreeMap<ConnId, Conn>,
    next: ConnId,
    capacity: usize,
}

impl Default for Hub {
    fn default() -> Self {
        Hub::new(DEFAULT_QUEUE_CAPACITY)
    }
}

impl Hub {
    pub fn new(capacity: usize) -> Self {
        Hub {
            history: Vec::new(),
            conns: BTreeMap::new(),
            next: 1,
            capacity,
        }
    }

    pub fn connect(&mut self) -> ConnId {
        let id = self.next;
        self.next += 1;
        self.conns.insert(
            id,
            Conn {
                client_id: None,
                subscribed: false,
                queue: VecDeque::new(),
                live: 0,
            },
        );
        id
    }

    pub fn disconnect(&mut self, conn: ConnId) {
        self.conns.remove(&conn);
    }

    pub fn is_connected(&self, conn: ConnId) -> bool {
        self.conns.contains_key(&conn)
    }

    pub fn connections(&self) -> usize {
        self.conns.len()
    }

    pub fn client_id(&self, conn: ConnId) -> Option<Uuid> {
        self.conns.get(&conn).and_then(|c| c.client_id)
    }

    /// Update frames in arrival order.
    pub fn history(&self) -> &[Arc<str>] {
        &self.history
    }

    /// Handles one inbound line. Malformed frames are reported and ignored;
    /// the connection stays open.
    pub fn receive(&mut self, conn: ConnId, line: &str) -> Result<Dispatch, ProtocolError> {
        let line = line.trim_end_matches(['\n', '\r']);
        let frame = Frame::decode(line)?;
        let mut out = Dispatch::default();
        if !self.conns.contains_key(&conn) {
            return Ok(out);
        }
        match frame {
            Frame::Hello(id) => {
                if let Some(c) = self.conns.get_mut(&conn) {
                    c.client_id = Some(id);
                }
            }
            Frame::SnapshotRequest => {
                let c = self.conns.get_mut(&conn).expect("checked above");
                c.queue
                    .push_back((Frame::SnapshotBegin.encode().into(), false));
                c.queue
                    .extend(self.history.iter().map(|f| (Arc::clone(f), false)));
                c.queue
                    .push_back((Frame::SnapshotEnd.encode().into(), false));
                c.subscribed = true;
                out.woken.insert(conn);
            }
            Frame::Update(_) => {
                let shared: Arc<str> = line.into();
                self.history.push(Arc::clone(&shared));
                for (id, c) in self.conns.iter_mut() {
                    if !c.subscribed {
                        continue;
                    }
                    if c.live >= self.capacity {
                        out.dropped.push(*id);
                        continue;
                    }
                    c.queue.push_back((Arc::clone(&shared), true));
                    c.live += 1;
                    out.woken.insert(*id);
                }
                for id in &out.dropped {
                    self.conns.remove(id);
                    out.woken.remove(id);
                }
            }
            Frame::SnapshotBegin | Frame::SnapshotEnd => {
                return Err(ProtocolError::UnknownKind(
                    "server-only frame from client".into(),
                ))
            }
        }
        Ok(out)
    }

    /// Takes every queued outbound frame for `conn`.
    pub fn drain(&mut self, conn: ConnId) -> Vec<Arc<str>> {
        match self.conns.get_mut(&conn) {
            Some(c) => {
                c.live = 0;
                c.queue.drain(..).map(|(f, _)| f).collect()
            }
            None => Vec::new(),
        }
    }

    pub fn queued(&self, conn: ConnId) -> usize {
        self.conns.get(&conn).map_or(0, |c| c.queue.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: &str = "00000000-0000-0000-0000-00000000000a";
    const B: &str = "00000000-0000-0000-0000-00000000000b";

    fn update(client: &str, n: u64) -> String {
        format!("U\t{client}\t{n}\t{client}\tCREATE -name x{n}")
    }

    #[test]
    fn sender_receives_its_own_frame() {
        let mut hub = Hub::default();
        let a = hub.connect();
        hub.receive(a, &format!("HELLO\t{A}")).unwrap();
        hub.receive(a, "SREQ").unwrap();
        assert_eq!(hub.drain(a).len(), 2);
        let d = hub.receive(a, &update(A, 1)).unwrap();
        assert!(d.woken.contains(&a));
        assert_eq!(hub.history().len(), 1);
        assert_eq!(&*hub.drain(a)[0], update(A, 1));
    }

    #[test]
    fn broadcast_is_byte_identical() {
        let mut hub = Hub::default();
        let (a, b) = (hub.connect(), hub.connect());
        hub.receive(a, "SREQ").unwrap();
        hub.receive(b, "SREQ").unwrap();
        hub.drain(a);
        hub.drain(b);
        let odd = format!("U\t{A}\t7\t{A}\tUPDATE -name  q   -v \"x\"");
        hub.receive(a, &odd).unwrap();
        assert_eq!(&*hub.drain(b)[0], odd);
    }

    #[test]
    fn snapshot_replays_history_in_arrival_order() {
        let mut hub = Hub::default();
        let a = hub.connect();
        hub.receive(a, &update(A, 5)).unwrap();
        hub.receive(a, &update(A, 2)).unwrap();
        let late = hub.connect();
        hub.receive(late, "SREQ").unwrap();
        let frames: Vec<String> = hub.drain(late).iter().map(|f| f.to_string()).collect();
        assert_eq!(
            frames,
            vec!["SBEG".into(), update(A, 5), update(A, 2), "SEND".into()]
        );
        let empty = hub.connect();
        hub.receive(empty, "SREQ").unwrap();
        hub.drain(empty);
        hub.receive(a, "SREQ").unwrap();
        assert_eq!(hub.drain(a).len(), 4);
    }

    #[test]
    fn empty_history_snapshot() {
        let mut hub = Hub::default();
        let a = hub.connect();
        hub.receive(a, "SREQ").unwrap();
        let f: Vec<String> = hub.drain(a).iter().map(|f| f.to_string()).collect();
        assert_eq!(f, vec!["SBEG", "SEND"]);
    }

    #[test]
    fn slow_consumer_is_dropped_others_unaffected() {
        let mut hub = Hub::new(3);
        let (slow, fast) = (hub.connect(), hub.connect());
        hub.receive(slow, "SREQ").unwrap();
        hub.receive(fast, "SREQ").unwrap();
        let mut dropped = Vec::new();
        for n in 0..5 {
            let d = hub.receive(fast, &update(B, n)).unwrap();
            dropped.extend(d.dropped);
            hub.drain(fast);
        }
        assert_eq!(dropped, vec![slow]);
        assert!(!hub.is_connected(slow));
        assert!(hub.is_connected(fast));
        assert_eq!(hub.history().len(), 5);
    }

    #[test]
    fn malformed_frame_is_reported() {
        let mut hub = Hub::default();
        let a = hub.connect();
        assert!(hub.receive(a, "BOGUS").is_err());
        assert!(hub.receive(a, "SBEG").is_err());
        assert!(hub.is_connected(a));
        assert!(hub.history().is_empty());
    }
}
