//! The mindmap editor DSL and its translation into commands.
//!
//! ```text
//! READ | OBJECTS | VIOLATIONS | QUIT
//! CREATE {type} {name}
//! LINK {source}.{port} TO {target}
//! UPDATE {name} {attribute} {value}
//! DELETE {name}
//! ```

mod bootstrap;
mod render;

use std::fmt;

use thiserror::Error;

use crate::client::{ClientError, ClientSession};
use crate::command::{ApplyResult, Command, Selector};
use crate::linguistic;
use crate::physical::PhysicalModel;
use crate::replica::Replica;

pub use bootstrap::{bootstrap_mindmap_metamodel, metamodel_commands};
pub use render::{render_objects, render_read, render_violations};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EditorVerb {
    Read,
    Objects,
    Create {
        type_name: String,
        name: String,
    },
    Link {
        source: String,
        port: String,
        target: String,
    },
    Update {
        name: String,
        attribute: String,
        value: String,
    },
    Delete {
        name: String,
    },
    Violations,
    Quit,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerbError {
    #[error("empty input")]
    Empty,
    #[error("unknown verb {0:?}")]
    UnknownVerb(String),
    #[error("usage: {0}")]
    Usage(&'static str),
    #[error("unterminated quote")]
    Unterminated,
}

/// Whitespace-separated words; double quotes group, `\` escapes inside quotes.
fn words(line: &str) -> Result<Vec<String>, VerbError> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut w = String::new();
        if c == '"' {
            chars.next();
            loop {
                match chars.next() {
                    None => return Err(VerbError::Unterminated),
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('n') => w.push('\n'),
                        Some('t') => w.push('\t'),
                        Some('r') => w.push('\r'),
                        Some(other) => w.push(other),
                        None => return Err(VerbError::Unterminated),
                    },
                    Some(other) => w.push(other),
                }
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                w.push(c);
                chars.next();
            }
        }
        out.push(w);
    }
    Ok(out)
}

impl EditorVerb {
    pub fn parse(line: &str) -> Result<EditorVerb, VerbError> {
        let w = words(line)?;
        let Some(verb) = w.first() else {
            return Err(VerbError::Empty);
        };
        let args = &w[1..];
        let verb = verb.to_ascii_uppercase();
        match (verb.as_str(), args) {
            ("READ", []) => Ok(EditorVerb::Read),
            ("OBJECTS", []) => Ok(EditorVerb::Objects),
            ("VIOLATIONS", []) => Ok(EditorVerb::Violations),
            ("QUIT", []) => Ok(EditorVerb::Quit),
            ("CREATE", [t, n]) => Ok(EditorVerb::Create {
                type_name: t.clone(),
                name: n.clone(),
            }),
            ("CREATE", _) => Err(VerbError::Usage("CREATE {type} {name}")),
            ("LINK", [from, to_kw, target]) if to_kw.eq_ignore_ascii_case("TO") => {
                match from.rsplit_once('.') {
                    Some((s, p)) if !s.is_empty() && !p.is_empty() => Ok(EditorVerb::Link {
                        source: s.to_owned(),
                        port: p.to_owned(),
                        target: target.clone(),
                    }),
                    _ => Err(VerbError::Usage("LINK {source}.{port} TO {target}")),
                }
            }
            ("LINK", _) => Err(VerbError::Usage("LINK {source}.{port} TO {target}")),
            ("UPDATE", [n, a, v]) => Ok(EditorVerb::Update {
                name: n.clone(),
                attribute: a.clone(),
                value: v.clone(),
            }),
            ("UPDATE", _) => Err(VerbError::Usage("UPDATE {name} {attribute} {value}")),
            ("DELETE", [n]) => Ok(EditorVerb::Delete { name: n.clone() }),
            ("DELETE", _) => Err(VerbError::Usage("DELETE {name}")),
            ("READ" | "OBJECTS" | "VIOLATIONS" | "QUIT", _) => Err(VerbError::Usage(
                "READ, OBJECTS, VIOLATIONS and QUIT take no arguments",
            )),
            (other, _) => Err(VerbError::UnknownVerb(other.to_owned())),
        }
    }

    /// The physical command for a mutating verb.
    pub fn to_command(&self) -> Option<Command> {
        match self {
            EditorVerb::Create { type_name, name } => Some(Command::Create {
                name: name.clone(),
                typed_by: Some(type_name.clone()),
                attrs: vec![],
            }),
            EditorVerb::Link {
                source,
                port,
                target,
            } => Some(Command::Link {
                name: None,
                typed_by: None,
                from: Selector::ByName(source.clone()),
                association: port.clone(),
                to: Selector::ByName(target.clone()),
                attrs: vec![],
            }),
            EditorVerb::Update {
                name,
                attribute,
                value,
            } if attribute == "typedBy" => Some(Command::Update {
                selector: Selector::ByName(name.clone()),
                typed_by: Some(value.clone()),
                attrs: vec![],
            }),
            EditorVerb::Update {
                name,
                attribute,
                value,
            } => Some(Command::Update {
                selector: Selector::ByName(name.clone()),
                typed_by: None,
                attrs: vec![(attribute.clone(), value.clone())],
            }),
            EditorVerb::Delete { name } => Some(Command::Delete {
                selector: Selector::ByName(name.clone()),
            }),
            EditorVerb::Read | EditorVerb::Objects | EditorVerb::Violations | EditorVerb::Quit => {
                None
            }
        }
    }
}

impl fmt::Display for EditorVerb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = crate::command::quote;
        match self {
            EditorVerb::Read => f.write_str("READ"),
            EditorVerb::Objects => f.write_str("OBJECTS"),
            EditorVerb::Violations => f.write_str("VIOLATIONS"),
            EditorVerb::Quit => f.write_str("QUIT"),
            EditorVerb::Create { type_name, name } => {
                write!(f, "CREATE {} {}", q(type_name), q(name))
            }
            EditorVerb::Link {
                source,
                port,
                target,
            } => write!(f, "LINK {}.{} TO {}", q(source), q(port), q(target)),
            EditorVerb::Update {
                name,
                attribute,
                value,
            } => write!(f, "UPDATE {} {} {}", q(name), q(attribute), q(value)),
            EditorVerb::Delete { name } => write!(f, "DELETE {}", q(name)),
        }
    }
}

pub const HELP: &str = "\
READ                               print the model as a containment tree
OBJECTS                            list every live element
CREATE {type} {name}               create an element typed by {type}
LINK {source}.{port} TO {target}   link two elements
UPDATE {name} {attribute} {value}  set an attribute (typedBy and potency included)
DELETE {name}                      delete an element
VIOLATIONS                         list linguistic violations
QUIT                               leave the editor";

/// Whatever an editor runs against: a bare replica or a networked session.
pub trait EditorBackend {
    fn model(&self) -> &PhysicalModel;
    fn submit(&mut self, cmd: &Command) -> Result<ApplyResult, String>;
}

impl EditorBackend for Replica {
    fn model(&self) -> &PhysicalModel {
        Replica::model(self)
    }

    fn submit(&mut self, cmd: &Command) -> Result<ApplyResult, String> {
        Ok(self.local(cmd).0)
    }
}

impl EditorBackend for ClientSession {
    fn model(&self) -> &PhysicalModel {
        ClientSession::model(self)
    }

    fn submit(&mut self, cmd: &Command) -> Result<ApplyResult, String> {
        ClientSession::submit(self, cmd).map_err(|e: ClientError| e.to_string())
    }
}

/// Result of running one editor line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Output(String),
    Quit,
}

/// Parses and runs one line, returning the text to show.
pub fn execute(backend: &mut dyn EditorBackend, line: &str) -> Outcome {
    let verb = match EditorVerb::parse(line) {
        Ok(v) => v,
        Err(VerbError::Empty) => return Outcome::Output(String::new()),
        Err(e) => return Outcome::Output(format!("error: {e}")),
    };
    Outcome::Output(match &verb {
        EditorVerb::Quit => return Outcome::Quit,
        EditorVerb::Read => render_read(&backend.model().read_model()),
        EditorVerb::Objects => render_objects(&backend.model().read_model()),
        EditorVerb::Violations => {
            let view = backend.model().read_model();
            render_violations(&view, &linguistic::check_view(&view))
        }
        _ => {
            let cmd = verb.to_command().expect("mutating verb");
            match backend.submit(&cmd) {
                Ok(ApplyResult::Applied(_)) => "ok".to_owned(),
                Ok(ApplyResult::Rejected) => "rejected: a newer edit already won".to_owned(),
                Ok(ApplyResult::Error(e)) => format!("error: {e}"),
                Err(e) => format!("error: {e}"),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn create_translates_to_typed_create() {
        let v = EditorVerb::parse("CREATE MindMap mindmap_0").unwrap();
        assert_eq!(
            v.to_command().unwrap().serialize(),
            "CREATE -name mindmap_0 -typedBy MindMap"
        );
    }

    #[test]
    fn link_translation() {
        let v = EditorVerb::parse("LINK mindmap_0.topic TO tasks").unwrap();
        assert_eq!(
            v.to_command().unwrap().serialize(),
            "LINK -from mindmap_0.topic -to tasks"
        );
    }

    #[test]
    fn update_translation() {
        let v = EditorVerb::parse("UPDATE mindmap_0 title todolist").unwrap();
        assert_eq!(
            v.to_command().unwrap().serialize(),
            "UPDATE -name mindmap_0 -title todolist"
        );
        let v = EditorVerb::parse("UPDATE marker_0 typedBy TextMarker").unwrap();
        assert_eq!(
            v.to_command().unwrap().serialize(),
            "UPDATE -name marker_0 -typedBy TextMarker"
        );
        let v = EditorVerb::parse(r#"UPDATE m title "Improve publication record""#).unwrap();
        assert_eq!(
            v.to_command().unwrap().serialize(),
            r#"UPDATE -name m -title "Improve publication record""#
        );
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            EditorVerb::parse("CREATE x"),
            Err(VerbError::Usage(_))
        ));
        assert!(matches!(
            EditorVerb::parse("LINK a TO b"),
            Err(VerbError::Usage(_))
        ));
        assert!(matches!(
            EditorVerb::parse("FLY"),
            Err(VerbError::UnknownVerb(_))
        ));
        assert_eq!(EditorVerb::parse("  "), Err(VerbError::Empty));
        assert_eq!(EditorVerb::parse("quit"), Ok(EditorVerb::Quit));
    }

    #[test]
    fn translation_is_injective_on_samples() {
        let lines = [
            "CREATE A b",
            "CREATE b A",
            "LINK a.p TO b",
            "LINK a.b TO p",
            "UPDATE a b c",
            "UPDATE a typedBy c",
            "DELETE a",
        ];
        let cmds: std::collections::HashSet<_> = lines
            .iter()
            .map(|l| EditorVerb::parse(l).unwrap().to_command().unwrap())
            .collect();
        assert_eq!(cmds.len(), lines.len());
    }

    #[test]
    fn display_reparses() {
        for l in [
            "CREATE MindMap mindmap_0",
            "LINK a.b TO c",
            "UPDATE m t \"x y\"",
            "DELETE q",
        ] {
            let v = EditorVerb::parse(l).unwrap();
            assert_eq!(EditorVerb::parse(&v.to_string()).unwrap(), v);
        }
    }

    #[test]
    fn execute_against_a_replica() {
        let mut r = Replica::new(crate::stamp::ReplicaId::from_u128(1));
        bootstrap_mindmap_metamodel(&mut r).unwrap();
        assert_eq!(
            execute(&mut r, "CREATE MindMap mindmap_0"),
            Outcome::Output("ok".into())
        );
        let Outcome::Output(out) = execute(&mut r, "READ") else {
            panic!()
        };
        assert!(out.contains("mindmap_0 : MindMap"), "{out}");
        assert_eq!(execute(&mut r, "QUIT"), Outcome::Quit);
        let Outcome::Output(err) = execute(&mut r, "DELETE ghost") else {
            panic!()
        };
        assert!(err.starts_with("error: "));
    }
}
