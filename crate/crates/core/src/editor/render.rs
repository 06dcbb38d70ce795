use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use uuid::Uuid;

use crate::command::quote;
use crate::linguistic::Violation;
use crate::physical::{Association, Clabject, ModelView, PhysicalKind, Potency};

fn headline(c: &Clabject) -> String {
    let mut s = format!("{} : {}", c.name, c.typed_by.as_deref().unwrap_or("?"));
    if let Potency::Finite(p) = c.potency {
        let _ = write!(s, " @{p}");
    }
    for (k, v) in &c.attributes {
        let _ = write!(s, " {k}={}", quote(v));
    }
    s
}

struct Tree<'a> {
    view: &'a ModelView,
    out: HashMap<Uuid, Vec<&'a Association>>,
    seen: BTreeSet<Uuid>,
    text: String,
}

impl<'a> Tree<'a> {
    fn node(&mut self, c: &'a Clabject, depth: usize, prefix: &str) {
        let pad = "  ".repeat(depth);
        if !self.seen.insert(c.id) {
            let _ = writeln!(self.text, "{pad}{prefix}{} (see above)", c.name);
            return;
        }
        let _ = writeln!(self.text, "{pad}{prefix}{}", headline(c));
        let links = self.out.get(&c.id).cloned().unwrap_or_default();
        for a in links {
            let label = format!("{} [{}]", a.port, a.clabject.name);
            if a.clabject.kind == PhysicalKind::Composition {
                if let Some(child) = self.view.elements.iter().find(|e| e.id == a.target) {
                    self.node(child, depth + 1, &format!("{label}: "));
                }
            } else {
                let _ = writeln!(self.text, "{pad}  {label} -> {}", a.target_name);
            }
        }
    }
}

/// The model as an indented containment tree. Composition links nest their
/// targets; other links print as cross-references. Elements outside any
/// composition are roots, sorted by name.
pub fn render_read(view: &ModelView) -> String {
    let mut out: HashMap<Uuid, Vec<&Association>> = HashMap::new();
    let mut contained = BTreeSet::new();
    for a in &view.associations {
        out.entry(a.source).or_default().push(a);
        if a.clabject.kind == PhysicalKind::Composition {
            contained.insert(a.target);
        }
    }
    for links in out.values_mut() {
        links.sort_by(|x, y| {
            (&x.port, &x.clabject.name, x.clabject.id).cmp(&(
                &y.port,
                &y.clabject.name,
                y.clabject.id,
            ))
        });
    }
    let mut tree = Tree {
        view,
        out,
        seen: BTreeSet::new(),
        text: String::new(),
    };
    for c in view.elements.iter().filter(|c| !contained.contains(&c.id)) {
        tree.node(c, 0, "");
    }
    // containment cycles have no root
    for c in &view.elements {
        if !tree.seen.contains(&c.id) {
            tree.node(c, 0, "");
        }
    }
    if tree.text.is_empty() {
        tree.text.push_str("(empty model)\n");
    }
    tree.text
}

/// One line per live element: id, name, type and physical kind.
pub fn render_objects(view: &ModelView) -> String {
    let mut s = String::new();
    for c in view.all() {
        let _ = writeln!(
            s,
            "{} {} : {} ({})",
            c.id,
            c.name,
            c.typed_by.as_deref().unwrap_or("?"),
            c.kind
        );
    }
    if s.is_empty() {
        s.push_str("(no objects)\n");
    }
    s
}

pub fn render_violations(view: &ModelView, violations: &[Violation]) -> String {
    if violations.is_empty() {
        return "no violations\n".to_owned();
    }
    let mut s = String::new();
    for v in violations {
        let name = view
            .by_id(v.subject)
            .map(|c| c.name.as_str())
            .unwrap_or("?");
        let _ = writeln!(s, "{:?} {name}: {}", v.kind, v.detail);
    }
    s
}
