//! Operation-based Last-Writer-Wins CRDTs.
//!
//! All state transitions are joins over `(element, max stamp)` records, so
//! applying the same set of timestamped operations in any order, any number
//! of times, yields the same state. Removal is always a tombstone: nothing is
//! physically purged.

mod graph;
mod map;
mod register;
mod set;

pub use graph::{
    Direction, EdgeId, GraphObservation, GraphOp, GraphOpKind, LwwEdge, LwwGraph, LwwVertex, MapOp,
    VertexId, SOURCE_KEY, TARGET_KEY,
};
pub use map::{LwwMap, Tombstone};
pub use register::LwwRegister;
pub use set::LwwSet;

use thiserror::Error;

/// Whether an update took effect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Applied,
    /// The operation lost the LWW race (or a precondition) and changed nothing.
    Nop,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrdtError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
}
