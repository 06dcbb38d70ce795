use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::command::Command;
use crate::editor::EditorVerb;

/// What a scripted client does at its virtual time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    /// Connect (clients without a JOIN step connect at time 0).
    Join,
    /// Issue the mindmap metamodel.
    Bootstrap,
    Editor(EditorVerb),
    /// A raw command, written `CMD <command>` in script files.
    Command(Command),
    /// Filled in at run time from the acting client's view.
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub client: usize,
    pub at: u64,
    pub action: Action,
}

/// Per-client timed actions. Times are strictly increasing per client.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Script {
    pub clients: usize,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("client {client}: time {at} is not after {prev}")]
    NonIncreasing { client: usize, at: u64, prev: u64 },
}

impl Script {
    pub fn new(clients: usize) -> Self {
        Script {
            clients,
            steps: Vec::new(),
        }
    }

    pub fn push(&mut self, client: usize, at: u64, action: Action) -> &mut Self {
        self.clients = self.clients.max(client + 1);
        self.steps.push(Step { client, at, action });
        self
    }

    /// Adds an editor line; panics on malformed input (for tests and fixtures).
    pub fn editor(&mut self, client: usize, at: u64, line: &str) -> &mut Self {
        let verb = EditorVerb::parse(line).unwrap_or_else(|e| panic!("{line}: {e}"));
        self.push(client, at, Action::Editor(verb))
    }

    pub fn validate(&self) -> Result<(), ScriptError> {
        let mut last: Vec<Option<u64>> = vec![None; self.clients];
        for s in &self.steps {
            if let Some(prev) = last[s.client] {
                if s.at <= prev {
                    return Err(ScriptError::NonIncreasing {
                        client: s.client,
                        at: s.at,
                        prev,
                    });
                }
            }
            last[s.client] = Some(s.at);
        }
        Ok(())
    }

    pub fn joins_late(&self, client: usize) -> Option<u64> {
        self.steps
            .iter()
            .find(|s| s.client == client && s.action == Action::Join)
            .map(|s| s.at)
    }

    /// A fuzz script: client 0 bootstraps, then every client performs `ops`
    /// random actions spread over time.
    pub fn fuzz(clients: usize, ops: usize, seed: u64) -> Script {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f022);
        let mut s = Script::new(clients);
        s.push(0, 1_000, Action::Bootstrap);
        for c in 0..clients {
            let mut t = 2_000_000 + rng.random_range(0..500_000u64);
            for _ in 0..ops {
                s.push(c, t, Action::Random);
                t += rng.random_range(100_000..2_000_000u64);
            }
        }
        s
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Join => f.write_str("JOIN"),
            Action::Bootstrap => f.write_str("BOOTSTRAP"),
            Action::Editor(v) => v.fmt(f),
            Action::Command(c) => write!(f, "CMD {c}"),
            Action::Random => f.write_str("RANDOM"),
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{} {} {}", s.client, s.at, s.action)?;
        }
        Ok(())
    }
}

impl FromStr for Script {
    type Err = ScriptError;

    /// `<client> <vtime_ns> <action>` per line; `#` starts a comment.
    fn from_str(text: &str) -> Result<Script, ScriptError> {
        let mut script = Script::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| ScriptError::Syntax {
                line: i + 1,
                reason,
            };
            let mut parts = line.splitn(3, char::is_whitespace);
            let client = parts
                .next()
                .and_then(|c| c.parse::<usize>().ok())
                .ok_or_else(|| err("expected a client index".into()))?;
            let at = parts
                .next()
                .and_then(|t| t.parse::<u64>().ok())
                .ok_or_else(|| err("expected a virtual time in ns".into()))?;
            let rest = parts.next().unwrap_or("").trim();
            let action = match rest {
                "JOIN" => Action::Join,
                "BOOTSTRAP" => Action::Bootstrap,
                "RANDOM" => Action::Random,
                _ => match rest.strip_prefix("CMD ") {
                    Some(cmd) => {
                        Action::Command(Command::parse(cmd).map_err(|e| err(e.to_string()))?)
                    }
                    None => {
                        Action::Editor(EditorVerb::parse(rest).map_err(|e| err(e.to_string()))?)
                    }
                },
            };
            script.push(client, at, action);
        }
        script.validate()?;
        Ok(script)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let text = "\
# scenario
0 100 BOOTSTRAP
0 200 CREATE MindMap mindmap_0
1 50 JOIN
1 300 CMD UPDATE -name mindmap_0 -title todolist
";
        let s: Script = text.parse().unwrap();
        assert_eq!(s.clients, 2);
        assert_eq!(s.steps.len(), 4);
        assert_eq!(s.joins_late(1), Some(50));
        let again: Script = s.to_string().parse().unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn times_must_increase_per_client() {
        let err = "0 5 READ\n0 5 READ".parse::<Script>().unwrap_err();
        assert!(matches!(err, ScriptError::NonIncreasing { .. }));
        assert!("0 x READ".parse::<Script>().is_err());
        assert!("0 1 FLY".parse::<Script>().is_err());
    }

    #[test]
    fn fuzz_scripts_are_deterministic() {
        assert_eq!(Script::fuzz(3, 10, 7), Script::fuzz(3, 10, 7));
        assert_ne!(Script::fuzz(3, 10, 7), Script::fuzz(3, 10, 8));
        Script::fuzz(3, 50, 1).validate().unwrap();
    }
}
