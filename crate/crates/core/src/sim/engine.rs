//! Deterministic network simulation over virtual time. Uses the real
//! [`Hub`] and [`ClientSession`] types; only the transport is simulated.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use uuid::Uuid;

use super::fuzz::Generator;
use super::script::{Action, Script, ScriptError, Step};
use crate::client::ClientSession;
use crate::command::Command;
use crate::editor::{self, EditorBackend};
use crate::physical::ModelView;
use crate::server::{ConnId, Hub, DEFAULT_QUEUE_CAPACITY};

/// Network behaviour and fault injection for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub seed: u64,
    /// Per-frame delivery delay range in virtual ns, inclusive.
    pub min_delay: u64,
    pub max_delay: u64,
    /// Probability that a broadcast frame is delivered twice.
    pub duplicate: f64,
    /// Probability, after each local action, that the client's connection
    /// drops (in-flight frames are lost) and is re-established.
    pub drop_connection: f64,
    pub reconnect_delay: u64,
    pub queue_capacity: usize,
    /// Client whose session ignores remote DELETEs.
    pub drop_remote_deletes: Option<usize>,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            seed: 0,
            min_delay: 50_000,
            max_delay: 3_000_000,
            duplicate: 0.05,
            drop_connection: 0.01,
            reconnect_delay: 2_000_000,
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
            drop_remote_deletes: None,
        }
    }
}

impl Schedule {
    pub fn seeded(seed: u64) -> Self {
        Schedule {
            seed,
            ..Schedule::default()
        }
    }

    /// No delays, duplicates or drops.
    pub fn reliable(seed: u64) -> Self {
        Schedule {
            seed,
            min_delay: 1,
            max_delay: 1,
            duplicate: 0.0,
            drop_connection: 0.0,
            ..Schedule::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("clients {a} and {b} diverged; minimized trace has {} steps:\n{trace}", trace.steps.len())]
    DivergenceDetected {
        a: usize,
        b: usize,
        /// 1-minimal failing trace of concrete actions.
        trace: Script,
    },
    #[error("client {client} holds dangling edge {edge} at t={at}")]
    DanglingEdge { client: usize, edge: Uuid, at: u64 },
    #[error("client {client}: {reason}")]
    Client { client: usize, reason: String },
}

#[derive(Clone, Debug, Default)]
pub struct SimReport {
    /// Final view of every client, all equal on success.
    pub views: Vec<ModelView>,
    /// Concrete actions as executed (random steps resolved).
    pub trace: Script,
    /// Editor output per executed step, in execution order.
    pub outputs: Vec<(usize, u64, String)>,
    pub frames_delivered: usize,
    pub reconnects: usize,
    pub final_time: u64,
}

#[derive(Clone, Debug)]
enum Event {
    Act(usize),
    Connect(usize),
    ToServer {
        client: usize,
        epoch: u64,
        line: String,
    },
    ToClient {
        client: usize,
        epoch: u64,
        lines: Vec<Arc<str>>,
    },
    Drop(usize),
}

struct Node {
    session: ClientSession,
    conn: Option<ConnId>,
    epoch: u64,
    generator: Generator,
    /// Indices into the script steps owned by this client, in order.
    steps: Vec<usize>,
    cursor: usize,
}

struct World {
    hub: Hub,
    nodes: Vec<Node>,
    by_conn: BTreeMap<ConnId, usize>,
    queue: BinaryHeap<Reverse<(u64, u64)>>,
    events: BTreeMap<u64, Event>,
    seq: u64,
    net: ChaCha8Rng,
    actions: ChaCha8Rng,
    schedule: Schedule,
    report: SimReport,
}

/// Ids are derived from the seed and index so runs are reproducible.
pub fn client_uuid(seed: u64, client: usize) -> Uuid {
    Uuid::from_u128(((seed as u128) << 64) | (client as u128 + 1))
}

/// Runs `script` under `schedule`. A divergence is reported with a
/// minimized trace.
pub fn run_simulation(script: &Script, schedule: &Schedule) -> Result<SimReport, SimError> {
    match run_raw(script, schedule) {
        Err(SimError::DivergenceDetected { a, b, trace }) => {
            let minimal = super::ddmin::ddmin(trace.steps, |steps| {
                let candidate = Script {
                    clients: script.clients,
                    steps: steps.to_vec(),
                };
                matches!(
                    run_raw(&candidate, schedule),
                    Err(SimError::DivergenceDetected { .. })
                )
            });
            Err(SimError::DivergenceDetected {
                a,
                b,
                trace: Script {
                    clients: script.clients,
                    steps: minimal,
                },
            })
        }
        other => other,
    }
}

/// Runs without minimizing; divergence carries the full executed trace.
pub fn run_raw(script: &Script, schedule: &Schedule) -> Result<SimReport, SimError> {
    script.validate()?;
    let mut world = World::new(script, schedule);
    world.run(script)
}

impl World {
    fn new(script: &Script, schedule: &Schedule) -> World {
        let nodes = (0..script.clients)
            .map(|c| {
                let mut session = ClientSession::new(client_uuid(schedule.seed, c));
                if schedule.drop_remote_deletes == Some(c) {
                    session.inject_drop_remote_deletes(true);
                }
                Node {
                    session,
                    conn: None,
                    epoch: 0,
                    generator: Generator::new(c),
                    steps: script
                        .steps
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.client == c && s.action != Action::Join)
                        .map(|(i, _)| i)
                        .collect(),
                    cursor: 0,
                }
            })
            .collect();
        World {
            hub: Hub::new(schedule.queue_capacity),
            nodes,
            by_conn: BTreeMap::new(),
            queue: BinaryHeap::new(),
            events: BTreeMap::new(),
            seq: 0,
            net: ChaCha8Rng::seed_from_u64(schedule.seed),
            actions: ChaCha8Rng::seed_from_u64(schedule.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            schedule: schedule.clone(),
            report: SimReport {
                trace: Script::new(script.clients),
                ..SimReport::default()
            },
        }
    }

    fn at(&mut self, time: u64, event: Event) {
        self.seq += 1;
        self.queue.push(Reverse((time, self.seq)));
        self.events.insert(self.seq, event);
    }

    fn delay(&mut self) -> u64 {
        self.net.random_range(
            self.schedule.min_delay..=self.schedule.max_delay.max(self.schedule.min_delay),
        )
    }

    fn run(&mut self, script: &Script) -> Result<SimReport, SimError> {
        for c in 0..self.nodes.len() {
            let join = script.joins_late(c).unwrap_or(0);
            self.at(join, Event::Connect(c));
            if let Some(&first) = self.nodes[c].steps.first() {
                let t = script.steps[first].at.max(join);
                self.at(t, Event::Act(c));
            }
        }
        let mut now = 0;
        while let Some(Reverse((time, seq))) = self.queue.pop() {
            now = time;
            let event = self.events.remove(&seq).expect("scheduled");
            let touched = self.handle(script, time, event)?;
            if let Some(c) = touched {
                if let Some(edge) = self.nodes[c].session.model().graph().find_dangling_edge() {
                    return Err(SimError::DanglingEdge {
                        client: c,
                        edge: edge.0,
                        at: time,
                    });
                }
            }
        }
        self.report.final_time = now;
        self.finish()
    }

    fn handle(
        &mut self,
        script: &Script,
        now: u64,
        event: Event,
    ) -> Result<Option<usize>, SimError> {
        match event {
            Event::Connect(c) => {
                let conn = self.hub.connect();
                let node = &mut self.nodes[c];
                node.conn = Some(conn);
                node.epoch += 1;
                node.session.connect();
                self.by_conn.insert(conn, c);
                self.flush(c, now);
                Ok(None)
            }
            Event::Drop(c) => {
                if let Some(conn) = self.nodes[c].conn.take() {
                    self.hub.disconnect(conn);
                    self.by_conn.remove(&conn);
                    self.lost(c, now);
                }
                Ok(None)
            }
            Event::ToServer {
                client,
                epoch,
                line,
            } => {
                let node = &self.nodes[client];
                let Some(conn) = node.conn.filter(|_| node.epoch == epoch) else {
                    return Ok(None);
                };
                let dispatch = self
                    .hub
                    .receive(conn, &line)
                    .map_err(|e| SimError::Client {
                        client,
                        reason: format!("server rejected {line:?}: {e}"),
                    })?;
                for dropped in dispatch.dropped {
                    if let Some(c) = self.by_conn.remove(&dropped) {
                        self.nodes[c].conn = None;
                        self.lost(c, now);
                    }
                }
                for conn in dispatch.woken {
                    let c = self.by_conn[&conn];
                    let frames = self.hub.drain(conn);
                    self.deliver(c, now, frames);
                }
                Ok(None)
            }
            Event::ToClient {
                client,
                epoch,
                lines,
            } => {
                if self.nodes[client].epoch != epoch || self.nodes[client].conn.is_none() {
                    return Ok(None);
                }
                for line in lines {
                    self.report.frames_delivered += 1;
                    self.nodes[client]
                        .session
                        .receive(&line)
                        .map_err(|e| SimError::Client {
                            client,
                            reason: format!("{line:?}: {e}"),
                        })?;
                }
                self.flush(client, now);
                Ok(Some(client))
            }
            Event::Act(c) => {
                if !self.nodes[c].session.is_live() {
                    self.at(now + 100_000, Event::Act(c));
                    return Ok(None);
                }
                let idx = self.nodes[c].steps[self.nodes[c].cursor];
                self.nodes[c].cursor += 1;
                self.act(c, now, &script.steps[idx])?;
                self.flush(c, now);
                if let Some(&next) = self.nodes[c].steps.get(self.nodes[c].cursor) {
                    let t = script.steps[next].at.max(now + 1);
                    self.at(t, Event::Act(c));
                }
                if self.schedule.drop_connection > 0.0
                    && self.net.random_bool(self.schedule.drop_connection)
                {
                    let d = self.delay();
                    self.at(now + d, Event::Drop(c));
                }
                Ok(Some(c))
            }
        }
    }

    fn act(&mut self, c: usize, now: u64, step: &Step) -> Result<(), SimError> {
        let record = |world: &mut World, action: Action, out: String| {
            world.report.trace.push(c, now, action);
            world.report.outputs.push((c, now, out));
        };
        match &step.action {
            Action::Join => {}
            Action::Bootstrap => {
                let mut backend = AtTime {
                    session: &mut self.nodes[c].session,
                    now,
                };
                let out = match editor::bootstrap_mindmap_metamodel(&mut backend) {
                    Ok(n) => format!("bootstrapped {n}"),
                    Err(e) => format!("error: {e}"),
                };
                record(self, Action::Bootstrap, out);
            }
            Action::Editor(verb) => {
                let mut backend = AtTime {
                    session: &mut self.nodes[c].session,
                    now,
                };
                let out = match editor::execute(&mut backend, &verb.to_string()) {
                    editor::Outcome::Output(s) => s,
                    editor::Outcome::Quit => String::new(),
                };
                record(self, step.action.clone(), out);
            }
            Action::Command(cmd) => {
                let out = self.submit(c, cmd, now)?;
                record(self, step.action.clone(), out);
            }
            Action::Random => {
                let view = self.nodes[c].session.model().read_model();
                let cmd = self.nodes[c].generator.next(&view, &mut self.actions);
                let out = self.submit(c, &cmd, now)?;
                record(self, Action::Command(cmd), out);
            }
        }
        Ok(())
    }

    fn submit(&mut self, c: usize, cmd: &Command, now: u64) -> Result<String, SimError> {
        let r = self.nodes[c]
            .session
            .submit_at(cmd, now)
            .map_err(|e| SimError::Client {
                client: c,
                reason: e.to_string(),
            })?;
        Ok(format!("{r:?}"))
    }

    /// Connection lost: reset the session and reconnect later.
    fn lost(&mut self, c: usize, now: u64) {
        self.nodes[c].session.disconnected();
        self.nodes[c].epoch += 1;
        self.report.reconnects += 1;
        let t = now + self.schedule.reconnect_delay;
        self.at(t, Event::Connect(c));
    }

    /// Sends everything the session has queued, each frame on its own delay.
    /// Frames leave in order on one connection, so delays are monotone.
    fn flush(&mut self, c: usize, now: u64) {
        let frames = self.nodes[c].session.take_outgoing();
        if self.nodes[c].conn.is_none() {
            return;
        }
        let epoch = self.nodes[c].epoch;
        let mut t = now;
        for f in frames {
            t = t.max(now + self.delay());
            self.at(
                t,
                Event::ToServer {
                    client: c,
                    epoch,
                    line: f.encode(),
                },
            );
        }
    }

    /// Snapshot frames travel as one batch; broadcast frames are delayed,
    /// reordered and possibly duplicated individually.
    fn deliver(&mut self, c: usize, now: u64, frames: Vec<Arc<str>>) {
        let epoch = self.nodes[c].epoch;
        let mut batch: Vec<Arc<str>> = Vec::new();
        let mut in_snapshot = false;
        for f in frames {
            match &*f {
                "SBEG" => {
                    in_snapshot = true;
                    batch.push(f);
                }
                "SEND" => {
                    in_snapshot = false;
                    batch.push(f);
                    let d = self.delay();
                    let lines = std::mem::take(&mut batch);
                    self.at(
                        now + d,
                        Event::ToClient {
                            client: c,
                            epoch,
                            lines,
                        },
                    );
                }
                _ if in_snapshot => batch.push(f),
                _ => {
                    let copies = if self.net.random_bool(self.schedule.duplicate) {
                        2
                    } else {
                        1
                    };
                    for _ in 0..copies {
                        let d = self.delay();
                        self.at(
                            now + d,
                            Event::ToClient {
                                client: c,
                                epoch,
                                lines: vec![Arc::clone(&f)],
                            },
                        );
                    }
                }
            }
        }
    }

    fn finish(&mut self) -> Result<SimReport, SimError> {
        let views: Vec<ModelView> = self
            .nodes
            .iter()
            .map(|n| n.session.model().read_model())
            .collect();
        for (c, n) in self.nodes.iter().enumerate() {
            if !n.session.is_live() || n.cursor < n.steps.len() {
                return Err(SimError::Client {
                    client: c,
                    reason: "did not finish its script".into(),
                });
            }
        }
        for b in 1..views.len() {
            if views[b] != views[0] {
                return Err(SimError::DivergenceDetected {
                    a: 0,
                    b,
                    trace: std::mem::take(&mut self.report.trace),
                });
            }
        }
        for (c, n) in self.nodes.iter().enumerate() {
            if n.session.unconfirmed() > 0 || n.session.replica().pending() > 0 {
                return Err(SimError::Client {
                    client: c,
                    reason: format!(
                        "{} unconfirmed, {} deferred at quiescence",
                        n.session.unconfirmed(),
                        n.session.replica().pending()
                    ),
                });
            }
        }
        let mut report = std::mem::take(&mut self.report);
        report.views = views;
        Ok(report)
    }
}

/// Editor backend that stamps every edit with the current virtual time.
struct AtTime<'a> {
    session: &'a mut ClientSession,
    now: u64,
}

impl EditorBackend for AtTime<'_> {
    fn model(&self) -> &crate::physical::PhysicalModel {
        self.session.model()
    }

    fn submit(&mut self, cmd: &Command) -> Result<crate::command::ApplyResult, String> {
        self.session
            .submit_at(cmd, self.now)
            .map_err(|e| e.to_string())
    }
}
