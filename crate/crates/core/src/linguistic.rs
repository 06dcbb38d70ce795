//! Linguistic conformance. Violations are derived from a [`ModelView`] and
//! only ever reported; in strict mode they gate local edits, never merges.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::physical::{Clabject, ModelView, PhysicalKind, PhysicalModel, Potency};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConformanceMode {
    #[default]
    Tolerant,
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    UnresolvedType,
    MultiplicityViolation,
    UndeclaredAttribute,
    PotencyViolation,
    AmbiguousName,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: Uuid,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {}: {}", self.kind, self.subject, self.detail)
    }
}

/// Multiplicity bounds read from a declaration's `lower`/`upper` attributes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Multiplicity {
    pub lower: u64,
    /// `None` is unbounded (`*`).
    pub upper: Option<u64>,
}

impl Multiplicity {
    pub fn of(decl: &Clabject) -> Multiplicity {
        let lower = decl
            .attributes
            .get("lower")
            .and_then(|v| v.parse().ok())
            .unwrap_or(0);
        let upper = decl.attributes.get("upper").and_then(|v| v.parse().ok());
        Multiplicity { lower, upper }
    }

    pub fn admits(&self, n: u64) -> bool {
        n >= self.lower && self.upper.is_none_or(|u| n <= u)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            Some(u) => write!(f, "{}..{}", self.lower, u),
            None => write!(f, "{}..*", self.lower),
        }
    }
}

fn is_physical(typed_by: Option<&str>) -> bool {
    typed_by.is_none_or(|t| PhysicalKind::from_name(t).is_some())
}

pub fn check_conformance(m: &PhysicalModel) -> Vec<Violation> {
    check_view(&m.read_model())
}

/// All violations of a model view, sorted.
pub fn check_view(view: &ModelView) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut by_name: BTreeMap<&str, Vec<&Clabject>> = BTreeMap::new();
    for c in view.all() {
        by_name.entry(c.name.as_str()).or_default().push(c);
    }
    for (name, cs) in &by_name {
        if cs.len() > 1 {
            out.push(Violation {
                kind: ViolationKind::AmbiguousName,
                subject: cs.iter().map(|c| c.id).min().expect("non-empty"),
                detail: format!("{} live elements named {name}", cs.len()),
            });
        }
    }
    let unique = |name: &str| match by_name.get(name) {
        Some(cs) if cs.len() == 1 => Some(cs[0]),
        _ => None,
    };

    // declarations per owning type, instance links per source
    let mut decls: HashMap<Uuid, Vec<&Clabject>> = HashMap::new();
    let mut links: HashMap<(Uuid, &str), u64> = HashMap::new();
    let mut containers: HashMap<Uuid, u64> = HashMap::new();
    for a in &view.associations {
        let t = a.clabject.typed_by.as_deref();
        if is_physical(t) {
            decls.entry(a.source).or_default().push(&a.clabject);
        } else {
            *links.entry((a.source, t.expect("typed"))).or_default() += 1;
            if a.clabject.kind == PhysicalKind::Composition {
                *containers.entry(a.target).or_default() += 1;
            }
        }
    }

    for c in view.all() {
        let ty = match c.typed_by.as_deref() {
            None => {
                out.push(Violation {
                    kind: ViolationKind::UnresolvedType,
                    subject: c.id,
                    detail: format!("{} has no type", c.name),
                });
                continue;
            }
            Some(t) if by_name.contains_key(t) => match unique(t) {
                Some(ty) => ty,
                None => continue,
            },
            Some(t) if PhysicalKind::from_name(t).is_some() => continue,
            Some(t) => {
                out.push(Violation {
                    kind: ViolationKind::UnresolvedType,
                    subject: c.id,
                    detail: format!("{} is typed by unknown {t}", c.name),
                });
                continue;
            }
        };

        if let Potency::Finite(tp) = ty.potency {
            let ok = matches!(c.potency, Potency::Finite(p) if p < tp);
            if !ok {
                out.push(Violation {
                    kind: ViolationKind::PotencyViolation,
                    subject: c.id,
                    detail: format!(
                        "{} has potency {} but its type {} has {}",
                        c.name, c.potency, ty.name, ty.potency
                    ),
                });
            }
        }

        if !is_physical(ty.typed_by.as_deref()) {
            for attr in c.attributes.keys() {
                if !declared_in_chain(attr, ty, &unique) {
                    out.push(Violation {
                        kind: ViolationKind::UndeclaredAttribute,
                        subject: c.id,
                        detail: format!("{}.{attr} is not declared by {}", c.name, ty.name),
                    });
                }
            }
        }

        if let Some(ds) = decls.get(&ty.id) {
            for d in ds {
                let mult = Multiplicity::of(d);
                let n = links.get(&(c.id, d.name.as_str())).copied().unwrap_or(0);
                if !mult.admits(n) {
                    out.push(Violation {
                        kind: ViolationKind::MultiplicityViolation,
                        subject: c.id,
                        detail: format!("{} has {n} {} links, expected {mult}", c.name, d.name),
                    });
                }
            }
        }
    }

    for (id, n) in containers {
        if n > 1 {
            let name = view.by_id(id).map(|c| c.name.as_str()).unwrap_or("?");
            out.push(Violation {
                kind: ViolationKind::MultiplicityViolation,
                subject: id,
                detail: format!("{name} is contained by {n} compositions"),
            });
        }
    }
    out.sort();
    out
}

fn declared_in_chain<'a>(
    attr: &str,
    ty: &'a Clabject,
    unique: &impl Fn(&str) -> Option<&'a Clabject>,
) -> bool {
    let mut cur = Some(ty);
    let mut steps = 0;
    while let Some(t) = cur {
        if t.attributes.contains_key(attr) {
            return true;
        }
        steps += 1;
        if steps > 64 {
            break;
        }
        cur = t.typed_by.as_deref().and_then(unique);
    }
    false
}

/// Violations in `after` that were not already present in `before`.
pub fn introduced(before: &[Violation], after: &[Violation]) -> Vec<Violation> {
    after
        .iter()
        .filter(|v| before.binary_search(v).is_err())
        .cloned()
        .collect()
}
