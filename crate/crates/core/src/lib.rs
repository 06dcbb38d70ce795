//! Collaborative multi-level modeling on operation-based Last-Writer-Wins CRDTs.
//!
//! The crate is layered bottom-up:
//!
//! * [`stamp`] and [`crdt`]: the total-order timestamp and the LWW register,
//!   set, map and graph.
//! * [`physical`]: the physical metamodel (nodes, clabjects, associations)
//!   persisted in a single [`crdt::LwwGraph`].
//! * [`command`]: the textual CREATE/LINK/UPDATE/DELETE language, which is
//!   both the local edit API and the wire payload.
//! * [`linguistic`]: conformance checks that report, but never block, remote
//!   merges.
//! * [`protocol`], [`server`], [`client`], [`replica`]: transport-agnostic
//!   networking logic (frames, broadcast hub with history replay, client
//!   sessions).
//! * [`editor`]: the mindmap editor DSL and its translation to commands.
//! * [`sim`]: a deterministic multi-replica simulator with convergence oracles.

pub mod client;
pub mod command;
pub mod crdt;
pub mod editor;
pub mod linguistic;
pub mod physical;
pub mod protocol;
pub mod replica;
pub mod server;
pub mod sim;
pub mod stamp;

pub use command::{ApplyResult, Command, Selector};
pub use crdt::{LwwGraph, LwwMap, LwwRegister, LwwSet};
pub use linguistic::{ConformanceMode, Violation, ViolationKind};
pub use physical::{Clabject, ModelView, PhysicalKind, PhysicalModel, Potency};
pub use stamp::{ReplicaId, Stamp};
