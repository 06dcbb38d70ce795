//! One replica: a physical model, its clock and the queue of remote
//! operations waiting for elements they reference.

use crate::command::{self, ApplyResult, Command};
use crate::physical::{MergeOutcome, PhysicalError, PhysicalModel};
use crate::stamp::{Clock, ReplicaId, Stamp};

#[derive(Clone, Debug)]
pub struct Replica {
    model: PhysicalModel,
    clock: Clock,
    pending: Vec<(Command, Stamp)>,
}

/// A locally applied edit in wire form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalEdit {
    pub stamp: Stamp,
    pub command: Command,
}

impl Replica {
    pub fn new(id: ReplicaId) -> Self {
        Replica {
            model: PhysicalModel::new(),
            clock: Clock::new(id),
            pending: Vec::new(),
        }
    }

    pub fn id(&self) -> ReplicaId {
        self.clock.replica()
    }

    pub fn model(&self) -> &PhysicalModel {
        &self.model
    }

    pub fn model_mut(&mut self) -> &mut PhysicalModel {
        &mut self.model
    }

    /// Applies a local command stamped from the wall clock.
    pub fn local(&mut self, cmd: &Command) -> (ApplyResult, Option<LocalEdit>) {
        let stamp = self.clock.now();
        self.local_stamped(cmd, stamp)
    }

    /// Applies a local command at a caller-supplied time (virtual clocks).
    pub fn local_at(&mut self, cmd: &Command, nanos: u64) -> (ApplyResult, Option<LocalEdit>) {
        let stamp = self.clock.tick(nanos);
        self.local_stamped(cmd, stamp)
    }

    fn local_stamped(&mut self, cmd: &Command, stamp: Stamp) -> (ApplyResult, Option<LocalEdit>) {
        let result = command::apply(cmd, &mut self.model, stamp);
        let edit = match &result {
            ApplyResult::Applied(op) => Some(LocalEdit {
                stamp,
                command: Command::from(op),
            }),
            _ => None,
        };
        if edit.is_some() {
            self.drain_pending();
        }
        (result, edit)
    }

    /// Merges a remote operation under its sender's stamp.
    pub fn remote(&mut self, cmd: &Command, stamp: Stamp) -> Result<MergeOutcome, PhysicalError> {
        self.clock.observe(stamp);
        let outcome = command::merge_remote(cmd, &mut self.model, stamp)?;
        match outcome {
            MergeOutcome::Applied => self.drain_pending(),
            MergeOutcome::Deferred => self.pending.push((cmd.clone(), stamp)),
        }
        Ok(outcome)
    }

    /// Retries deferred operations until none makes progress.
    fn drain_pending(&mut self) {
        loop {
            let before = self.pending.len();
            if before == 0 {
                return;
            }
            let queue = std::mem::take(&mut self.pending);
            for (cmd, stamp) in queue {
                match command::merge_remote(&cmd, &mut self.model, stamp) {
                    Ok(MergeOutcome::Deferred) => self.pending.push((cmd, stamp)),
                    Ok(MergeOutcome::Applied) | Err(_) => {}
                }
            }
            if self.pending.len() == before {
                return;
            }
        }
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rid(n: u128) -> ReplicaId {
        ReplicaId::from_u128(n)
    }

    #[test]
    fn out_of_order_link_waits_for_its_endpoints() {
        let mut a = Replica::new(rid(1));
        let mut edits = Vec::new();
        for line in ["CREATE -name x", "CREATE -name y", "LINK -from x.r -to y"] {
            let (r, e) = a.local_at(&Command::parse(line).unwrap(), 10);
            assert!(r.is_applied());
            edits.push(e.unwrap());
        }
        let mut b = Replica::new(rid(2));
        for e in edits.iter().rev() {
            b.remote(&e.command, e.stamp).unwrap();
        }
        assert_eq!(b.pending(), 0);
        assert_eq!(a.model().read_model(), b.model().read_model());
    }

    #[test]
    fn clock_moves_past_observed_stamps() {
        let mut a = Replica::new(rid(1));
        let cmd = Command::parse("CREATE -name q").unwrap();
        a.remote(&cmd, Stamp::new(1_000, rid(7))).unwrap();
        let (_, e) = a.local_at(&Command::parse("CREATE -name r").unwrap(), 5);
        assert!(e.unwrap().stamp.nanos > 1_000);
    }
}
