//! Fixtures shared by the criterion benches.

pub use colmod_core::replica::{LocalEdit, Replica};
pub use colmod_core::sim::workload;
pub use colmod_core::{Command, ReplicaId, Stamp};

/// A replica that has applied `workload(n, seed)`, plus the edits it
/// produced in wire form.
pub fn populated(n: usize, seed: u64) -> (Replica, Vec<LocalEdit>) {
    let mut r = Replica::new(ReplicaId::from_u128(1));
    let edits = workload(n, seed)
        .iter()
        .enumerate()
        .filter_map(|(i, c)| r.local_at(c, i as u64 + 1).1)
        .collect();
    (r, edits)
}
