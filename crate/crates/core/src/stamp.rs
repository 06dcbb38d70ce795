//! Globally ordered timestamps.
//!
//! Every CRDT operation carries a [`Stamp`]: Unix-epoch nanoseconds plus the
//! id of the replica that issued it. Stamps compare lexicographically by
//! `(nanos, replica)`, so two distinct stamps are never incomparable even when
//! two replicas read the same clock value.

use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use uuid::Uuid;

/// Identity of a replica (one per client session).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReplicaId(pub Uuid);

impl ReplicaId {
    pub fn new_random() -> Self {
        ReplicaId(Uuid::new_v4())
    }

    pub const fn nil() -> Self {
        ReplicaId(Uuid::nil())
    }

    pub fn from_u128(v: u128) -> Self {
        ReplicaId(Uuid::from_u128(v))
    }
}

impl fmt::Display for ReplicaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.hyphenated().fmt(f)
    }
}

impl FromStr for ReplicaId {
    type Err = uuid::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Uuid::parse_str(s).map(ReplicaId)
    }
}

/// Total-order timestamp: nanoseconds since the Unix epoch, tie-broken by replica.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Stamp {
    pub nanos: u64,
    pub replica: ReplicaId,
}

impl Stamp {
    pub const fn new(nanos: u64, replica: ReplicaId) -> Self {
        Stamp { nanos, replica }
    }

    /// Stamp with the nil replica; handy in tests and single-writer settings.
    pub const fn at(nanos: u64) -> Self {
        Stamp {
            nanos,
            replica: ReplicaId::nil(),
        }
    }

    /// The stamp one minimal interval (1 ns) earlier, same replica.
    ///
    /// Saturates at zero: `Stamp::at(0).minus_epsilon() == Stamp::at(0)`.
    pub fn minus_epsilon(self) -> Self {
        Stamp {
            nanos: self.nanos.saturating_sub(1),
            replica: self.replica,
        }
    }

    /// Deterministic element id derived from the stamp of the operation that
    /// created the element. Every replica computes the same id.
    pub fn derive_id(self) -> Uuid {
        let mut name = [0u8; 24];
        name[..8].copy_from_slice(&self.nanos.to_be_bytes());
        name[8..].copy_from_slice(self.replica.0.as_bytes());
        Uuid::new_v5(&ID_NAMESPACE, &name)
    }
}

const ID_NAMESPACE: Uuid = Uuid::from_u128(0x6c77_7767_7261_7068_8000_0000_0000_0001);

impl fmt::Display for Stamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.nanos, self.replica)
    }
}

/// Per-replica clock: wall-clock nanoseconds, forced strictly increasing and
/// never behind the newest stamp this replica has observed.
#[derive(Debug, Clone)]
pub struct Clock {
    replica: ReplicaId,
    last: u64,
}

impl Clock {
    pub fn new(replica: ReplicaId) -> Self {
        Clock { replica, last: 0 }
    }

    pub fn replica(&self) -> ReplicaId {
        self.replica
    }

    /// Next stamp from the host wall clock.
    pub fn now(&mut self) -> Stamp {
        let wall = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        self.tick(wall)
    }

    /// Next stamp for an externally supplied time (virtual clocks).
    pub fn tick(&mut self, nanos: u64) -> Stamp {
        self.last = nanos.max(self.last + 1);
        Stamp::new(self.last, self.replica)
    }

    /// Record a stamp received from elsewhere.
    pub fn observe(&mut self, stamp: Stamp) {
        self.last = self.last.max(stamp.nanos);
    }
}
