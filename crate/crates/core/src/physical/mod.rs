//! The physical metamodel: every linguistic element, whatever its meta-level,
//! is a [`Clabject`] backed by one vertex (or, for associations, one edge) of
//! a shared [`LwwGraph`](crate::crdt::LwwGraph).

mod model;
mod view;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

pub use model::{MergeOutcome, PhysicalModel, PhysicalOp};
pub use view::{Association, ModelView};

use crate::crdt::{EdgeId, VertexId};

/// Reserved map keys. User attribute names are identifiers and can never
/// start with `$`, so they never collide with these.
pub mod keys {
    pub const NAME: &str = "$name";
    pub const TYPE: &str = "$type";
    pub const KIND: &str = "$kind";
    pub const POTENCY: &str = "$potency";
    /// Association name a link was created through (`from.port`).
    pub const PORT: &str = "$port";
}

/// Attribute names with a physical meaning; written through the reserved keys.
pub const POTENCY_ATTR: &str = "potency";
pub const KIND_ATTR: &str = "kind";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhysicalKind {
    Node,
    Model,
    Clabject,
    Association,
    Composition,
    Aggregation,
    Attribute,
}

impl PhysicalKind {
    pub const ALL: [PhysicalKind; 7] = [
        PhysicalKind::Node,
        PhysicalKind::Model,
        PhysicalKind::Clabject,
        PhysicalKind::Association,
        PhysicalKind::Composition,
        PhysicalKind::Aggregation,
        PhysicalKind::Attribute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhysicalKind::Node => "Node",
            PhysicalKind::Model => "Model",
            PhysicalKind::Clabject => "Clabject",
            PhysicalKind::Association => "Association",
            PhysicalKind::Composition => "Composition",
            PhysicalKind::Aggregation => "Aggregation",
            PhysicalKind::Attribute => "Attribute",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        PhysicalKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Direct supertype in the physical metamodel.
    pub fn parent(self) -> Option<Self> {
        match self {
            PhysicalKind::Node => None,
            PhysicalKind::Model | PhysicalKind::Clabject | PhysicalKind::Attribute => {
                Some(PhysicalKind::Node)
            }
            PhysicalKind::Association => Some(PhysicalKind::Clabject),
            PhysicalKind::Composition | PhysicalKind::Aggregation => {
                Some(PhysicalKind::Association)
            }
        }
    }

    /// Reflexive, transitive subtype check.
    pub fn is_a(self, other: PhysicalKind) -> bool {
        let mut k = Some(self);
        while let Some(cur) = k {
            if cur == other {
                return true;
            }
            k = cur.parent();
        }
        false
    }

    pub fn is_association(self) -> bool {
        self.is_a(PhysicalKind::Association)
    }
}

impl fmt::Display for PhysicalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How many further (transitive) instantiations an element allows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Potency {
    Finite(u32),
    Infinite,
}

impl Potency {
    /// Potency of an instance of an element with this potency; `None` at zero.
    pub fn instantiate(self) -> Option<Potency> {
        match self {
            Potency::Infinite => Some(Potency::Infinite),
            Potency::Finite(0) => None,
            Potency::Finite(n) => Some(Potency::Finite(n - 1)),
        }
    }
}

impl fmt::Display for Potency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potency::Finite(n) => write!(f, "{n}"),
            Potency::Infinite => f.write_str("*"),
        }
    }
}

impl FromStr for Potency {
    type Err = PhysicalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "*" => Ok(Potency::Infinite),
            _ => s
                .parse::<u32>()
                .map(Potency::Finite)
                .map_err(|_| PhysicalError::InvalidValue {
                    key: POTENCY_ATTR.into(),
                    value: s.into(),
                }),
        }
    }
}

/// Command attributes separated into physical settings and user attributes.
pub(crate) struct SplitAttrs {
    pub potency: Option<Potency>,
    pub kind: Option<PhysicalKind>,
    pub user: Vec<(String, String)>,
}

pub(crate) fn split_attrs(attrs: &[(String, String)]) -> Result<SplitAttrs, PhysicalError> {
    let mut out = SplitAttrs {
        potency: None,
        kind: None,
        user: Vec::new(),
    };
    for (k, v) in attrs {
        match k.as_str() {
            POTENCY_ATTR => out.potency = Some(v.parse()?),
            KIND_ATTR => {
                out.kind =
                    Some(
                        PhysicalKind::from_name(v).ok_or_else(|| PhysicalError::InvalidValue {
                            key: k.clone(),
                            value: v.clone(),
                        })?,
                    )
            }
            _ => {
                if k.is_empty() || k.starts_with('$') || k.contains(char::is_whitespace) {
                    return Err(PhysicalError::InvalidName(k.clone()));
                }
                out.user.push((k.clone(), v.clone()));
            }
        }
    }
    Ok(out)
}

/// Where a clabject lives in the CRDT graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backing {
    Vertex(VertexId),
    Edge(EdgeId),
}

/// A physical element, read out of its backing vertex or edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clabject {
    pub id: Uuid,
    pub name: String,
    pub kind: PhysicalKind,
    pub typed_by: Option<String>,
    pub potency: Potency,
    pub attributes: std::collections::BTreeMap<String, String>,
    pub backing: Backing,
}

/// Element selector used by UPDATE, DELETE and LINK endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Selector {
    ByName(String),
    ById(Uuid),
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::ByName(n) => f.write_str(n),
            Selector::ById(id) => id.hyphenated().fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhysicalError {
    #[error("element name must not be empty")]
    EmptyName,
    #[error("invalid element name {0:?}")]
    InvalidName(String),
    #[error("a live element named {0:?} already exists")]
    DuplicateName(String),
    #[error("unknown type {0:?}")]
    UnknownType(String),
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("name {0:?} matches more than one live element")]
    AmbiguousName(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("potency of {0:?} is exhausted")]
    PotencyExhausted(String),
    #[error("invalid value {value:?} for {key}")]
    InvalidValue { key: String, value: String },
}

/// Whether a string is in canonical hyphenated UUID form. Such strings are
/// read as ids wherever a selector is expected, so names may not take it.
pub fn looks_like_uuid(s: &str) -> bool {
    s.len() == 36 && Uuid::try_parse(s).is_ok()
}
