//! Wire frames: UTF-8, one per line, fields separated by a single TAB.
//!
//! ```text
//! HELLO\t<client>
//! SREQ
//! SBEG
//! SEND
//! U\t<client>\t<nanos>\t<replica>\t<command>
//! ```

use std::fmt;

use thiserror::Error;
use uuid::Uuid;

use crate::command::Command;
use crate::stamp::{ReplicaId, Stamp};

/// `⟨client, stamp, command⟩`. The command is kept as its canonical text so
/// relays never need to re-serialize it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UpdateMessage {
    pub client_id: Uuid,
    pub stamp: Stamp,
    pub command: String,
}

impl UpdateMessage {
    pub fn new(client_id: Uuid, stamp: Stamp, command: &Command) -> Self {
        UpdateMessage {
            client_id,
            stamp,
            command: command.serialize(),
        }
    }

    pub fn parse_command(&self) -> Result<Command, ProtocolError> {
        Command::parse(&self.command).map_err(|e| ProtocolError::BadCommand(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    Hello(Uuid),
    SnapshotRequest,
    SnapshotBegin,
    SnapshotEnd,
    Update(UpdateMessage),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("empty frame")]
    Empty,
    #[error("unknown frame kind {0:?}")]
    UnknownKind(String),
    #[error("frame {kind} expects {expected} fields, got {got}")]
    FieldCount {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid uuid {0:?}")]
    BadUuid(String),
    #[error("invalid timestamp {0:?}")]
    BadStamp(String),
    #[error("invalid command payload: {0}")]
    BadCommand(String),
    #[error("payload contains a tab or newline")]
    BadPayload,
}

fn uuid(s: &str) -> Result<Uuid, ProtocolError> {
    Uuid::try_parse(s).map_err(|_| ProtocolError::BadUuid(s.to_owned()))
}

fn expect(kind: &'static str, fields: &[&str], expected: usize) -> Result<(), ProtocolError> {
    if fields.len() == expected {
        Ok(())
    } else {
        Err(ProtocolError::FieldCount {
            kind,
            expected,
            got: fields.len(),
        })
    }
}

impl Frame {
    /// Parses one frame; a trailing `\n` or `\r\n` is ignored.
    pub fn decode(line: &str) -> Result<Frame, ProtocolError> {
        let line = line
            .strip_suffix('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .unwrap_or(line);
        if line.is_empty() {
            return Err(ProtocolError::Empty);
        }
        if line.contains('\n') {
            return Err(ProtocolError::BadPayload);
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields[0] {
            "HELLO" => {
                expect("HELLO", &fields, 2)?;
                Ok(Frame::Hello(uuid(fields[1])?))
            }
            "SREQ" => expect("SREQ", &fields, 1).map(|_| Frame::SnapshotRequest),
            "SBEG" => expect("SBEG", &fields, 1).map(|_| Frame::SnapshotBegin),
            "SEND" => expect("SEND", &fields, 1).map(|_| Frame::SnapshotEnd),
            "U" => {
                expect("U", &fields, 5)?;
                let nanos = fields[2]
                    .parse::<u64>()
                    .map_err(|_| ProtocolError::BadStamp(fields[2].to_owned()))?;
                if fields[4].is_empty() {
                    return Err(ProtocolError::BadCommand("empty".into()));
                }
                Ok(Frame::Update(UpdateMessage {
                    client_id: uuid(fields[1])?,
                    stamp: Stamp::new(nanos, ReplicaId(uuid(fields[3])?)),
                    command: fields[4].to_owned(),
                }))
            }
            other => Err(ProtocolError::UnknownKind(other.to_owned())),
        }
    }

    /// The frame line without its terminating newline.
    pub fn encode(&self) -> String {
        self.to_string()
    }

    /// The frame line with its terminating newline.
    pub fn encode_line(&self) -> String {
        let mut s = self.to_string();
        s.push('\n');
        s
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Hello(id) => write!(f, "HELLO\t{}", id.hyphenated()),
            Frame::SnapshotRequest => f.write_str("SREQ"),
            Frame::SnapshotBegin => f.write_str("SBEG"),
            Frame::SnapshotEnd => f.write_str("SEND"),
            Frame::Update(m) => write!(
                f,
                "U\t{}\t{}\t{}\t{}",
                m.client_id.hyphenated(),
                m.stamp.nanos,
                m.stamp.replica,
                m.command
            ),
        }
    }
}
