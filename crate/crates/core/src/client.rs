//! Client session state machine, free of I/O. A transport sends whatever
//! [`ClientSession::take_outgoing`] returns and feeds every received line to
//! [`ClientSession::receive`].

use std::collections::VecDeque;

use thiserror::Error;
use uuid::Uuid;

use crate::command::{ApplyResult, Command};
use crate::physical::{PhysicalError, PhysicalModel};
use crate::protocol::{Frame, ProtocolError, UpdateMessage};
use crate::replica::Replica;
use crate::stamp::{ReplicaId, Stamp};

/// Upper bound on local frames awaiting their echo from the server.
pub const MAX_UNCONFIRMED: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionState {
    /// Not yet connected, or the connection was lost.
    Disconnected,
    /// SREQ sent; waiting for the end of the snapshot.
    Joining,
    Live,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("session is not live yet")]
    NotLive,
    #[error("send failed: {0}")]
    SendFailure(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("remote operation rejected: {0}")]
    Merge(#[from] PhysicalError),
}

#[derive(Clone, Debug)]
pub struct ClientSession {
    client_id: Uuid,
    replica: Replica,
    state: SessionState,
    outgoing: VecDeque<Frame>,
    /// Sent local updates not yet echoed back, oldest first.
    unconfirmed: VecDeque<UpdateMessage>,
    drop_remote_deletes: bool,
}

impl ClientSession {
    /// A session whose client id doubles as its replica id.
    pub fn new(client_id: Uuid) -> Self {
        ClientSession {
            client_id,
            replica: Replica::new(ReplicaId(client_id)),
            state: SessionState::Disconnected,
            outgoing: VecDeque::new(),
            unconfirmed: VecDeque::new(),
            drop_remote_deletes: false,
        }
    }

    pub fn new_random() -> Self {
        ClientSession::new(Uuid::new_v4())
    }

    pub fn client_id(&self) -> Uuid {
        self.client_id
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn is_live(&self) -> bool {
        self.state == SessionState::Live
    }

    pub fn model(&self) -> &PhysicalModel {
        self.replica.model()
    }

    pub fn model_mut(&mut self) -> &mut PhysicalModel {
        self.replica.model_mut()
    }

    pub fn replica(&self) -> &Replica {
        &self.replica
    }

    pub fn unconfirmed(&self) -> usize {
        self.unconfirmed.len()
    }

    /// Starts (or restarts after a lost connection) the join handshake.
    /// Frames queued for the old connection are discarded; unconfirmed
    /// updates are resent once the new snapshot has been applied.
    pub fn connect(&mut self) {
        self.outgoing.clear();
        self.outgoing.push_back(Frame::Hello(self.client_id));
        self.outgoing.push_back(Frame::SnapshotRequest);
        self.state = SessionState::Joining;
    }

    pub fn disconnected(&mut self) {
        self.state = SessionState::Disconnected;
        self.outgoing.clear();
    }

    pub fn take_outgoing(&mut self) -> Vec<Frame> {
        self.outgoing.drain(..).collect()
    }

    pub fn has_outgoing(&self) -> bool {
        !self.outgoing.is_empty()
    }

    /// Puts frames that could not be written back at the front of the queue.
    pub fn requeue(&mut self, frames: Vec<Frame>) {
        for f in frames.into_iter().rev() {
            self.outgoing.push_front(f);
        }
    }

    /// Applies a local edit stamped from the wall clock.
    pub fn submit(&mut self, cmd: &Command) -> Result<ApplyResult, ClientError> {
        self.submit_with(cmd, None)
    }

    /// Applies a local edit at a virtual time.
    pub fn submit_at(&mut self, cmd: &Command, nanos: u64) -> Result<ApplyResult, ClientError> {
        self.submit_with(cmd, Some(nanos))
    }

    fn submit_with(
        &mut self,
        cmd: &Command,
        nanos: Option<u64>,
    ) -> Result<ApplyResult, ClientError> {
        if !self.is_live() {
            return Err(ClientError::NotLive);
        }
        if self.unconfirmed.len() >= MAX_UNCONFIRMED {
            return Err(ClientError::SendFailure(
                "too many updates awaiting the server".into(),
            ));
        }
        let (result, edit) = match nanos {
            Some(n) => self.replica.local_at(cmd, n),
            None => self.replica.local(cmd),
        };
        if let Some(edit) = edit {
            let msg = UpdateMessage::new(self.client_id, edit.stamp, &edit.command);
            self.unconfirmed.push_back(msg.clone());
            self.outgoing.push_back(Frame::Update(msg));
        }
        Ok(result)
    }

    /// Handles one received line; returns how many remote updates were merged.
    pub fn receive(&mut self, line: &str) -> Result<usize, ClientError> {
        let frame = Frame::decode(line)?;
        self.receive_frame(frame)
    }

    pub fn receive_frame(&mut self, frame: Frame) -> Result<usize, ClientError> {
        match frame {
            Frame::SnapshotBegin => Ok(0),
            Frame::SnapshotEnd => {
                if self.state == SessionState::Joining {
                    self.state = SessionState::Live;
                    let resend: Vec<Frame> = self
                        .unconfirmed
                        .iter()
                        .cloned()
                        .map(Frame::Update)
                        .collect();
                    self.outgoing.extend(resend);
                }
                Ok(0)
            }
            Frame::Update(msg) => {
                if msg.client_id == self.client_id {
                    self.confirm(msg.stamp);
                    return Ok(0);
                }
                let cmd = msg.parse_command()?;
                if self.drop_remote_deletes && matches!(cmd, Command::Delete { .. }) {
                    return Ok(0);
                }
                self.replica.remote(&cmd, msg.stamp)?;
                Ok(1)
            }
            Frame::Hello(_) | Frame::SnapshotRequest => Err(ClientError::Protocol(
                ProtocolError::UnknownKind("client-only frame from server".into()),
            )),
        }
    }

    fn confirm(&mut self, stamp: Stamp) {
        if let Some(pos) = self.unconfirmed.iter().position(|m| m.stamp == stamp) {
            self.unconfirmed.remove(pos);
        }
    }

    /// Fault injection for exercising divergence detection: silently ignore
    /// remote DELETE operations.
    #[doc(hidden)]
    pub fn inject_drop_remote_deletes(&mut self, on: bool) {
        self.drop_remote_deletes = on;
    }
}
