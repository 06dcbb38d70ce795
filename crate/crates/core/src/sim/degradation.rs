//! Per-operation latency as the model grows.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::command::{Command, Selector};
use crate::replica::Replica;
use crate::stamp::ReplicaId;

/// A deterministic mix of creates (50%), updates (30%) and deletes (20%)
/// over `n` elements, with every fourth create also linking to an earlier
/// element.
pub fn workload(n: usize, seed: u64) -> Vec<Command> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut created = 0usize;
    while out.len() < n {
        let roll = rng.random_range(0..10);
        if created == 0 || roll < 5 {
            out.push(Command::Create {
                name: format!("e{created}"),
                typed_by: None,
                attrs: vec![("v".into(), "0".into())],
            });
            if created > 0 && created % 4 == 0 && out.len() < n {
                out.push(Command::Link {
                    name: None,
                    typed_by: None,
                    from: Selector::ByName(format!("e{created}")),
                    association: "next".into(),
                    to: Selector::ByName(format!("e{}", rng.random_range(0..created))),
                    attrs: vec![],
                });
            }
            created += 1;
        } else if roll < 8 {
            out.push(Command::Update {
                selector: Selector::ByName(format!("e{}", rng.random_range(0..created))),
                typed_by: None,
                attrs: vec![("v".into(), rng.random_range(0..1000u32).to_string())],
            });
        } else {
            out.push(Command::Delete {
                selector: Selector::ByName(format!("e{}", rng.random_range(0..created))),
            });
        }
    }
    out
}

/// Mean wall time per local operation for each model size, taking the best
/// of `repeats` runs to filter scheduler noise. Size 0 yields no row.
pub fn measure_degradation(sizes: &[usize], repeats: usize) -> Vec<(usize, Duration)> {
    sizes
        .iter()
        .filter(|&&n| n > 0)
        .map(|&n| {
            let ops = workload(n, n as u64);
            let best = (0..repeats.max(1))
                .map(|_| {
                    let mut r = Replica::new(ReplicaId::from_u128(1));
                    let start = Instant::now();
                    for (i, cmd) in ops.iter().enumerate() {
                        let _ = r.local_at(cmd, i as u64 + 1);
                    }
                    start.elapsed()
                })
                .min()
                .expect("at least one repeat");
            (n, best / n as u32)
        })
        .collect()
}
