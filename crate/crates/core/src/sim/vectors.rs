//! Conformance vectors for independent client implementations: a stream of
//! server-to-client frames and the model a client must show afterwards.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::fuzz::Generator;
use crate::client::ClientSession;
use crate::command::Command;
use crate::editor::render_read;
use crate::linguistic::check_view;
use crate::physical::ModelView;
use crate::protocol::{Frame, UpdateMessage};
use crate::replica::Replica;
use crate::stamp::ReplicaId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vector {
    pub name: String,
    /// Frames in delivery order, without line terminators.
    pub frames: Vec<String>,
    pub expected: ModelView,
    /// Expected READ output.
    pub read: String,
    /// Expected violation kinds, sorted.
    pub violations: Vec<String>,
}

/// The receiving client's id; never used by a sender.
pub const RECEIVER: Uuid = Uuid::from_u128(0xffff_0000_0000_0000_0000_0000_0000_ffff);

pub fn sender(i: usize) -> Uuid {
    Uuid::from_u128(0xa000 + i as u128)
}

/// Replays `frames` into a fresh session and returns its view.
pub fn replay(frames: &[String]) -> Result<ModelView, String> {
    let mut s = ClientSession::new(RECEIVER);
    s.connect();
    s.take_outgoing();
    for f in frames {
        s.receive(f).map_err(|e| format!("{f:?}: {e}"))?;
    }
    Ok(s.model().read_model())
}

fn finish(name: &str, frames: Vec<String>) -> Vector {
    let expected = replay(&frames).unwrap_or_else(|e| panic!("vector {name}: {e}"));
    let mut violations: Vec<String> = check_view(&expected)
        .iter()
        .map(|v| format!("{:?}", v.kind))
        .collect();
    violations.sort();
    Vector {
        name: name.to_owned(),
        read: render_read(&expected),
        expected,
        frames,
        violations,
    }
}

/// Replicas editing locally; `sync` delivers everything to everyone.
struct Cluster {
    replicas: Vec<Replica>,
    seen: Vec<usize>,
    log: Vec<(usize, Frame)>,
}

impl Cluster {
    fn new(n: usize) -> Self {
        Cluster {
            replicas: (0..n).map(|i| Replica::new(ReplicaId(sender(i)))).collect(),
            seen: vec![0; n],
            log: Vec::new(),
        }
    }

    fn edit(&mut self, who: usize, nanos: u64, cmd: &Command) -> bool {
        let (_, edit) = self.replicas[who].local_at(cmd, nanos);
        match edit {
            Some(e) => {
                let msg = UpdateMessage::new(sender(who), e.stamp, &e.command);
                self.log.push((who, Frame::Update(msg)));
                true
            }
            None => false,
        }
    }

    fn run(&mut self, who: usize, nanos: u64, cmd: &str) {
        let cmd = Command::parse(cmd).unwrap_or_else(|e| panic!("{cmd}: {e}"));
        assert!(self.edit(who, nanos, &cmd), "{cmd} did not apply");
    }

    fn sync_one(&mut self, who: usize) {
        for (from, f) in &self.log[self.seen[who]..] {
            if *from == who {
                continue;
            }
            if let Frame::Update(m) = f {
                let cmd = m.parse_command().expect("own output parses");
                self.replicas[who].remote(&cmd, m.stamp).expect("merge");
            }
        }
        self.seen[who] = self.log.len();
    }

    fn sync(&mut self) {
        for who in 0..self.replicas.len() {
            self.sync_one(who);
        }
    }

    fn frames(&self) -> Vec<String> {
        self.log.iter().map(|(_, f)| f.encode()).collect()
    }
}

const METAMODEL: &[&str] = &[
    "CREATE -name Class -typedBy Clabject",
    "CREATE -name MindMap -typedBy Class -title String",
    "CREATE -name CentralTopic -typedBy Class",
    "CREATE -name Marker -typedBy Class -symbol String -potency 1",
    "LINK -from MindMap.topic -to CentralTopic -kind Composition -lower 1 -upper 1",
];

fn with_metamodel(n: usize) -> Cluster {
    let mut c = Cluster::new(n);
    for (i, cmd) in METAMODEL.iter().enumerate() {
        c.run(0, 1 + i as u64, cmd);
    }
    c.sync();
    c
}

fn hand_written() -> Vec<Vector> {
    let mut out = Vec::new();
    let mut add = |name: &str, frames: Vec<String>| out.push(finish(name, frames));

    add("empty_snapshot", vec!["SBEG".into(), "SEND".into()]);

    let mut c = Cluster::new(1);
    c.run(0, 10, "CREATE -name a");
    add("create_untyped", c.frames());

    let mut c = Cluster::new(1);
    c.run(
        0,
        10,
        "CREATE -name \"two words\" -note \"tab\\tand \\\"quote\\\"\"",
    );
    add("create_quoted_values", c.frames());

    let c = with_metamodel(1);
    add("metamodel", c.frames());

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    add("create_typed_copies_slots", c.frames());

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name Level -typedBy Class -potency 2");
    c.run(0, 101, "CREATE -name l1 -typedBy Level");
    c.run(0, 102, "CREATE -name l2 -typedBy l1");
    add("potency_chain", c.frames());

    let mut c = Cluster::new(1);
    c.run(0, 10, "CREATE -name Owns -typedBy Composition");
    add("create_physical_kind", c.frames());

    let mut c = with_metamodel(1);
    c.run(
        0,
        100,
        "LINK -from MindMap.markers -to Marker -kind Composition",
    );
    add("link_declaration", c.frames());

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.run(0, 101, "CREATE -name t -typedBy CentralTopic");
    c.run(0, 102, "LINK -from m.topic -to t");
    add("link_instance", c.frames());

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.run(0, 101, "UPDATE -name m -title Plans");
    c.run(0, 102, "UPDATE -name m -title \"Better plans\"");
    add("update_attribute", c.frames());

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy Class");
    c.run(0, 101, "UPDATE -name m -typedBy MindMap");
    add("update_typed_by", c.frames());

    let mut c = with_metamodel(1);
    c.run(0, 100, "UPDATE -name Class -potency 2");
    add("update_potency", c.frames());

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.run(0, 101, "CREATE -name t -typedBy CentralTopic");
    c.run(0, 102, "LINK -from m.topic -to t");
    c.run(0, 103, "DELETE -name t");
    add("delete_vertex_cascades", c.frames());

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.run(0, 101, "CREATE -name t -typedBy CentralTopic");
    c.run(0, 102, "LINK -from m.topic -to t");
    c.run(0, 103, "DELETE -name topic_0");
    add("delete_association", c.frames());

    let mut c = with_metamodel(2);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.sync();
    c.run(0, 200, "UPDATE -name m -title fromA");
    c.run(1, 150, "UPDATE -name m -title fromB");
    add("concurrent_update_newest_wins", c.frames());

    let mut c = with_metamodel(2);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.sync();
    c.run(0, 200, "DELETE -name m");
    c.run(1, 300, "UPDATE -name m -title late");
    add("update_after_concurrent_delete", c.frames());

    let mut c = with_metamodel(2);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.run(0, 101, "CREATE -name t -typedBy CentralTopic");
    c.sync();
    c.run(0, 200, "DELETE -name t");
    c.run(1, 300, "LINK -from m.topic -to t");
    add("newer_link_revives_deleted_target", c.frames());

    let mut c = with_metamodel(2);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.run(0, 101, "CREATE -name t -typedBy CentralTopic");
    c.sync();
    c.run(1, 200, "LINK -from m.topic -to t");
    c.run(0, 300, "DELETE -name t");
    add("older_link_dies_with_target", c.frames());

    let mut c = with_metamodel(2);
    c.run(0, 100, "CREATE -name dup -typedBy Class");
    c.run(1, 100, "CREATE -name dup -typedBy Class");
    add("concurrent_same_name", c.frames());

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.run(0, 101, "CREATE -name t -typedBy CentralTopic");
    c.run(0, 102, "LINK -from m.topic -to t");
    let mut frames = c.frames();
    frames.reverse();
    add("reverse_order_deferred", frames);

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.run(0, 101, "UPDATE -name m -title once");
    let mut frames = c.frames();
    let again = frames.clone();
    frames.extend(again);
    add("duplicated_frames", frames);

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    let mut frames = vec!["SBEG".to_owned()];
    frames.extend(c.frames());
    frames.push("SEND".into());
    add("snapshot_wrapped", frames);

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.run(0, 101, "CREATE -name t -typedBy CentralTopic");
    let mut frames = vec!["SBEG".to_owned()];
    frames.extend(c.frames());
    frames.push("SEND".into());
    c.run(0, 102, "LINK -from m.topic -to t");
    frames.push(c.frames().pop().expect("link frame"));
    add("snapshot_then_live", frames);

    let mut c = with_metamodel(1);
    c.run(0, 100, "CREATE -name m -typedBy MindMap");
    c.run(0, 101, "UPDATE -name m -stray x");
    add("undeclared_attribute_violation", c.frames());

    out
}

fn generated(count: usize) -> Vec<Vector> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(1_000 + k as u64);
            let n = 2 + k % 2;
            let mut c = with_metamodel(n);
            let mut gens: Vec<Generator> = (0..n).map(Generator::new).collect();
            let mut nanos = 1_000;
            for _ in 0..(8 + k % 10) {
                let who = rng.random_range(0..n);
                let view = c.replicas[who].model().read_model();
                let cmd = gens[who].next(&view, &mut rng);
                nanos += rng.random_range(1..50);
                c.edit(who, nanos, &cmd);
                if rng.random_bool(0.3) {
                    c.sync_one(rng.random_range(0..n));
                }
            }
            let mut frames = c.frames();
            let meta = METAMODEL.len();
            match k % 3 {
                0 => {}
                1 => frames[meta..].shuffle(&mut rng),
                _ => {
                    frames.shuffle(&mut rng);
                    if let Some(f) = frames.first().cloned() {
                        frames.push(f);
                    }
                }
            }
            if k % 4 == 0 {
                frames.insert(0, "SBEG".into());
                frames.push("SEND".into());
            }
            finish(&format!("generated_{k:02}"), frames)
        })
        .collect()
}

/// The full exported set.
pub fn conformance_vectors() -> Vec<Vector> {
    let mut v = hand_written();
    v.extend(generated(40));
    v
}

pub fn to_json(vectors: &[Vector]) -> String {
    let mut s = serde_json::to_string_pretty(vectors).expect("vectors serialize");
    s.push('\n');
    s
}
