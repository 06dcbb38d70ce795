//! The textual command language: parsing, canonical serialization and
//! application to a [`PhysicalModel`].
//!
//! ```text
//! CREATE -name {name} [-typedBy {type}] [-{attr} {value}]*
//! LINK   [-name {name}] [-typedBy {type}] -from {from}.{port} -to {to} [-{attr} {value}]*
//! UPDATE (-name {name} | -id {uuid}) [-typedBy {type}] [-{attr} {value}]*
//! DELETE (-name {name} | -id {uuid})
//! ```
//!
//! Values are bare tokens or double-quoted strings with `\" \\ \n \t \r`
//! escapes. A value that is empty, starts with `-`, or contains whitespace,
//! a quote or a backslash is always quoted on output, so a serialized command
//! never contains a tab or a newline.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;
use uuid::Uuid;

use crate::linguistic::{self, ConformanceMode, Violation};
use crate::physical::{
    looks_like_uuid, split_attrs, MergeOutcome, PhysicalError, PhysicalKind, PhysicalModel,
    PhysicalOp, Potency, SplitAttrs, KIND_ATTR, POTENCY_ATTR,
};
use crate::stamp::Stamp;

pub use crate::physical::Selector;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Create {
        name: String,
        typed_by: Option<String>,
        attrs: Vec<(String, String)>,
    },
    Link {
        /// Explicit name for the association; chosen by the model when absent.
        name: Option<String>,
        typed_by: Option<String>,
        from: Selector,
        association: String,
        to: Selector,
        attrs: Vec<(String, String)>,
    },
    Update {
        selector: Selector,
        typed_by: Option<String>,
        attrs: Vec<(String, String)>,
    },
    Delete {
        selector: Selector,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {position}: {reason}")]
    SyntaxError { position: usize, reason: String },
    #[error("missing flag -{0}")]
    MissingFlag(String),
    #[error("both -name and -id given")]
    ConflictingSelector,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error(transparent)]
    Physical(#[from] PhysicalError),
    #[error("rejected by strict conformance: {}", .0.iter().map(|v| v.detail.as_str()).collect::<Vec<_>>().join("; "))]
    LinguisticViolation(Vec<Violation>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApplyResult {
    /// Took effect; carries the resolved operation to propagate.
    Applied(PhysicalOp),
    /// Lost the LWW race; nothing was recorded.
    Rejected,
    Error(ApplyError),
}

impl ApplyResult {
    pub fn is_applied(&self) -> bool {
        matches!(self, ApplyResult::Applied(_))
    }
}

// ---- lexing ------------------------------------------------------------------------

#[derive(Debug, PartialEq, Eq)]
enum Token {
    Flag(String),
    Value(String),
}

fn syntax(position: usize, reason: impl Into<String>) -> ParseError {
    ParseError::SyntaxError {
        position,
        reason: reason.into(),
    }
}

fn is_flag_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn lex(input: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b' ' => i += 1,
            b'"' => {
                let start = i;
                i += 1;
                let mut value = String::new();
                loop {
                    let Some(c) = input[i..].chars().next() else {
                        return Err(syntax(start, "unterminated quoted value"));
                    };
                    i += c.len_utf8();
                    match c {
                        '"' => break,
                        '\\' => {
                            let esc = input[i..].chars().next();
                            i += 1;
                            value.push(match esc {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('r') => '\r',
                                _ => return Err(syntax(i - 2, "invalid escape")),
                            });
                        }
                        c => value.push(c),
                    }
                }
                if i < bytes.len() && bytes[i] != b' ' {
                    return Err(syntax(i, "expected space after quoted value"));
                }
                out.push((start, Token::Value(value)));
            }
            _ => {
                let start = i;
                while i < bytes.len() && bytes[i] != b' ' {
                    i += 1;
                }
                let word = &input[start..i];
                if let Some(p) = word.find(['"', '\t', '\n', '\r']) {
                    return Err(syntax(start + p, "unexpected character in bare value"));
                }
                match word.strip_prefix('-') {
                    Some(flag) if is_flag_name(flag) => {
                        out.push((start, Token::Flag(flag.to_owned())))
                    }
                    Some(_) => return Err(syntax(start, format!("invalid flag {word:?}"))),
                    None => out.push((start, Token::Value(word.to_owned()))),
                }
            }
        }
    }
    Ok(out)
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s.starts_with('-')
        || s.starts_with('"')
        || s.contains([' ', '\t', '\n', '\r', '"', '\\'])
}

/// Quotes and escapes a value when it cannot be written bare.
pub fn quote(s: &str) -> String {
    if !needs_quotes(s) {
        return s.to_owned();
    }
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

// ---- parsing -----------------------------------------------------------------------

#[derive(Default)]
struct Flags {
    name: Option<(usize, String)>,
    id: Option<(usize, String)>,
    typed_by: Option<(usize, String)>,
    from: Option<(usize, String)>,
    to: Option<(usize, String)>,
    attrs: Vec<(String, String)>,
}

fn parse_flags(tokens: &[(usize, Token)]) -> Result<Flags, ParseError> {
    let mut flags = Flags::default();
    let mut it = tokens.iter();
    while let Some((pos, tok)) = it.next() {
        let Token::Flag(flag) = tok else {
            return Err(syntax(*pos, "expected a flag"));
        };
        let value = match it.next() {
            Some((_, Token::Value(v))) => v.clone(),
            _ => return Err(syntax(*pos, format!("flag -{flag} has no value"))),
        };
        let slot = match flag.as_str() {
            "name" => &mut flags.name,
            "id" => &mut flags.id,
            "typedBy" => &mut flags.typed_by,
            "from" => &mut flags.from,
            "to" => &mut flags.to,
            _ => {
                flags.attrs.push((flag.clone(), value));
                continue;
            }
        };
        if slot.is_some() {
            return Err(syntax(*pos, format!("duplicate flag -{flag}")));
        }
        *slot = Some((*pos, value));
    }
    Ok(flags)
}

fn reject(flag: &Option<(usize, String)>, name: &str, verb: &str) -> Result<(), ParseError> {
    match flag {
        Some((pos, _)) => Err(syntax(*pos, format!("-{name} is not allowed on {verb}"))),
        None => Ok(()),
    }
}

fn selector(flags: &Flags) -> Result<Selector, ParseError> {
    match (&flags.name, &flags.id) {
        (Some(_), Some(_)) => Err(ParseError::ConflictingSelector),
        (Some((_, n)), None) => Ok(Selector::ByName(n.clone())),
        (None, Some((pos, id))) => Uuid::try_parse(id)
            .ok()
            .filter(|_| looks_like_uuid(id))
            .map(Selector::ById)
            .ok_or_else(|| syntax(*pos, "-id expects a hyphenated UUID")),
        (None, None) => Err(ParseError::MissingFlag("name".into())),
    }
}

/// A name-or-id reference as used by LINK.
fn reference(s: &str) -> Selector {
    if looks_like_uuid(s) {
        Selector::ById(Uuid::parse_str(s).expect("checked shape"))
    } else {
        Selector::ByName(s.to_owned())
    }
}

impl Command {
    pub fn parse(input: &str) -> Result<Command, ParseError> {
        let tokens = lex(input)?;
        let Some(((vpos, Token::Value(verb)), rest)) = tokens.split_first() else {
            return Err(syntax(0, "expected a verb"));
        };
        let flags = parse_flags(rest)?;
        match verb.as_str() {
            "CREATE" => {
                reject(&flags.id, "id", "CREATE")?;
                reject(&flags.from, "from", "CREATE")?;
                reject(&flags.to, "to", "CREATE")?;
                let name = flags
                    .name
                    .ok_or_else(|| ParseError::MissingFlag("name".into()))?
                    .1;
                Ok(Command::Create {
                    name,
                    typed_by: flags.typed_by.map(|t| t.1),
                    attrs: flags.attrs,
                })
            }
            "LINK" => {
                reject(&flags.id, "id", "LINK")?;
                let (fpos, from) = flags
                    .from
                    .ok_or_else(|| ParseError::MissingFlag("from".into()))?;
                let to = flags
                    .to
                    .ok_or_else(|| ParseError::MissingFlag("to".into()))?
                    .1;
                let (owner, port) = from
                    .rsplit_once('.')
                    .ok_or_else(|| syntax(fpos, "-from expects {element}.{association}"))?;
                if owner.is_empty() || port.is_empty() || to.is_empty() {
                    return Err(syntax(fpos, "empty LINK reference"));
                }
                Ok(Command::Link {
                    name: flags.name.map(|n| n.1),
                    typed_by: flags.typed_by.map(|t| t.1),
                    from: reference(owner),
                    association: port.to_owned(),
                    to: reference(&to),
                    attrs: flags.attrs,
                })
            }
            "UPDATE" => {
                reject(&flags.from, "from", "UPDATE")?;
                reject(&flags.to, "to", "UPDATE")?;
                Ok(Command::Update {
                    selector: selector(&flags)?,
                    typed_by: flags.typed_by.map(|t| t.1),
                    attrs: flags.attrs,
                })
            }
            "DELETE" => {
                reject(&flags.typed_by, "typedBy", "DELETE")?;
                reject(&flags.from, "from", "DELETE")?;
                reject(&flags.to, "to", "DELETE")?;
                if !flags.attrs.is_empty() {
                    return Err(syntax(*vpos, "DELETE takes no attributes"));
                }
                Ok(Command::Delete {
                    selector: selector(&flags)?,
                })
            }
            other => Err(syntax(*vpos, format!("unknown verb {other:?}"))),
        }
    }

    /// Canonical form: `-name -id -typedBy -from -to`, then attributes.
    pub fn serialize(&self) -> String {
        self.to_string()
    }

    pub fn verb(&self) -> &'static str {
        match self {
            Command::Create { .. } => "CREATE",
            Command::Link { .. } => "LINK",
            Command::Update { .. } => "UPDATE",
            Command::Delete { .. } => "DELETE",
        }
    }
}

fn write_selector(f: &mut fmt::Formatter<'_>, sel: &Selector) -> fmt::Result {
    match sel {
        Selector::ByName(n) => write!(f, " -name {}", quote(n)),
        Selector::ById(id) => write!(f, " -id {}", id.hyphenated()),
    }
}

fn write_opt(f: &mut fmt::Formatter<'_>, flag: &str, v: &Option<String>) -> fmt::Result {
    match v {
        Some(v) => write!(f, " -{flag} {}", quote(v)),
        None => Ok(()),
    }
}

fn write_attrs(f: &mut fmt::Formatter<'_>, attrs: &[(String, String)]) -> fmt::Result {
    for (k, v) in attrs {
        write!(f, " -{k} {}", quote(v))?;
    }
    Ok(())
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.verb())?;
        match self {
            Command::Create {
                name,
                typed_by,
                attrs,
            } => {
                write!(f, " -name {}", quote(name))?;
                write_opt(f, "typedBy", typed_by)?;
                write_attrs(f, attrs)
            }
            Command::Link {
                name,
                typed_by,
                from,
                association,
                to,
                attrs,
            } => {
                write_opt(f, "name", name)?;
                write_opt(f, "typedBy", typed_by)?;
                write!(f, " -from {}", quote(&format!("{from}.{association}")))?;
                write!(f, " -to {}", quote(&to.to_string()))?;
                write_attrs(f, attrs)
            }
            Command::Update {
                selector,
                typed_by,
                attrs,
            } => {
                write_selector(f, selector)?;
                write_opt(f, "typedBy", typed_by)?;
                write_attrs(f, attrs)
            }
            Command::Delete { selector } => write_selector(f, selector),
        }
    }
}

impl FromStr for Command {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::parse(s)
    }
}

// ---- resolved form -------------------------------------------------------------------

fn physical_attrs(
    kind: &Option<PhysicalKind>,
    potency: &Option<Potency>,
    attrs: &[(String, String)],
) -> Vec<(String, String)> {
    kind.iter()
        .map(|k| (KIND_ATTR.to_owned(), k.name().to_owned()))
        .chain(
            potency
                .iter()
                .map(|p| (POTENCY_ATTR.to_owned(), p.to_string())),
        )
        .chain(attrs.iter().cloned())
        .collect()
}

impl From<&PhysicalOp> for Command {
    fn from(op: &PhysicalOp) -> Command {
        match op {
            PhysicalOp::Create {
                name,
                typed_by,
                kind,
                potency,
                attrs,
            } => Command::Create {
                name: name.clone(),
                typed_by: typed_by.clone(),
                attrs: physical_attrs(kind, potency, attrs),
            },
            PhysicalOp::Link {
                name,
                typed_by,
                kind,
                port,
                source,
                target,
                attrs,
            } => Command::Link {
                name: Some(name.clone()),
                typed_by: typed_by.clone(),
                from: Selector::ById(*source),
                association: port.clone(),
                to: Selector::ById(*target),
                attrs: physical_attrs(kind, &None, attrs),
            },
            PhysicalOp::Update {
                id,
                typed_by,
                kind,
                potency,
                attrs,
            } => Command::Update {
                selector: Selector::ById(*id),
                typed_by: typed_by.clone(),
                attrs: physical_attrs(kind, potency, attrs),
            },
            PhysicalOp::Delete { id } => Command::Delete {
                selector: Selector::ById(*id),
            },
        }
    }
}

impl Command {
    /// Converts a command that needs no name lookups. `Ok(None)` means the
    /// command references elements by name and must be resolved against a model.
    pub fn to_resolved_op(&self) -> Result<Option<PhysicalOp>, PhysicalError> {
        Ok(match self {
            Command::Create {
                name,
                typed_by,
                attrs,
            } => {
                let SplitAttrs {
                    kind,
                    potency,
                    user: attrs,
                } = split_attrs(attrs)?;
                Some(PhysicalOp::Create {
                    name: name.clone(),
                    typed_by: typed_by.clone(),
                    kind,
                    potency,
                    attrs,
                })
            }
            Command::Link {
                name: Some(name),
                typed_by,
                from: Selector::ById(source),
                association,
                to: Selector::ById(target),
                attrs,
            } => {
                let SplitAttrs {
                    kind, user: attrs, ..
                } = split_attrs(attrs)?;
                Some(PhysicalOp::Link {
                    name: name.clone(),
                    typed_by: typed_by.clone(),
                    kind,
                    port: association.clone(),
                    source: *source,
                    target: *target,
                    attrs,
                })
            }
            Command::Update {
                selector: Selector::ById(id),
                typed_by,
                attrs,
            } => {
                let SplitAttrs {
                    kind,
                    potency,
                    user: attrs,
                } = split_attrs(attrs)?;
                Some(PhysicalOp::Update {
                    id: *id,
                    typed_by: typed_by.clone(),
                    kind,
                    potency,
                    attrs,
                })
            }
            Command::Delete {
                selector: Selector::ById(id),
            } => Some(PhysicalOp::Delete { id: *id }),
            _ => None,
        })
    }

    /// Resolves the command against the current state of `m`.
    pub fn plan(&self, m: &mut PhysicalModel) -> Result<PhysicalOp, PhysicalError> {
        match self {
            Command::Create {
                name,
                typed_by,
                attrs,
            } => m.plan_create(name, typed_by.as_deref(), attrs),
            Command::Link {
                name,
                typed_by,
                from,
                association,
                to,
                attrs,
            } => m.plan_link(
                from,
                association,
                to,
                name.as_deref(),
                typed_by.as_deref(),
                attrs,
            ),
            Command::Update {
                selector,
                typed_by,
                attrs,
            } => m.plan_update(selector, typed_by.as_deref(), attrs),
            Command::Delete { selector } => m.plan_delete(selector),
        }
    }
}

/// Applies a local command: resolve, gate in strict mode, commit.
pub fn apply(cmd: &Command, m: &mut PhysicalModel, stamp: Stamp) -> ApplyResult {
    let op = match cmd.plan(m) {
        Ok(op) => op,
        Err(e) => return ApplyResult::Error(e.into()),
    };
    if m.conformance_mode() == ConformanceMode::Strict {
        let before = linguistic::check_conformance(m);
        let mut trial = m.clone();
        if trial.commit(&op, stamp) == crate::crdt::Outcome::Nop {
            return ApplyResult::Rejected;
        }
        let added = linguistic::introduced(&before, &linguistic::check_conformance(&trial));
        if !added.is_empty() {
            return ApplyResult::Error(ApplyError::LinguisticViolation(added));
        }
        *m = trial;
        return ApplyResult::Applied(op);
    }
    match m.commit(&op, stamp) {
        crate::crdt::Outcome::Applied => ApplyResult::Applied(op),
        crate::crdt::Outcome::Nop => ApplyResult::Rejected,
    }
}

/// Merges a command received from another replica. Never gated by
/// conformance; references that cannot be resolved yet yield `Deferred`.
pub fn merge_remote(
    cmd: &Command,
    m: &mut PhysicalModel,
    stamp: Stamp,
) -> Result<MergeOutcome, PhysicalError> {
    let op = match cmd.to_resolved_op()? {
        Some(op) => op,
        None => match cmd.plan(m) {
            Ok(op) => op,
            Err(
                PhysicalError::UnknownElement(_)
                | PhysicalError::UnknownVertex(_)
                | PhysicalError::AmbiguousName(_),
            ) => return Ok(MergeOutcome::Deferred),
            Err(e) => return Err(e),
        },
    };
    Ok(m.merge(&op, stamp))
}
