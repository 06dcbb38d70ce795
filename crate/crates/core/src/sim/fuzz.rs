//! Random edits drawn from what a client currently sees.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::command::{Command, Selector};
use crate::physical::{Clabject, ModelView, Potency};

const VALUES: &[&str] = &["", "a", "b", "todo", "two words", "x\ty", "q\"uote", "*"];
const SHARED: &[&str] = &["shared_0", "shared_1", "shared_2"];

/// Per-client generator state; names stay unique per client unless the
/// generator deliberately picks a shared one.
#[derive(Clone, Debug)]
pub struct Generator {
    client: usize,
    serial: u64,
}

impl Generator {
    pub fn new(client: usize) -> Self {
        Generator { client, serial: 0 }
    }

    fn fresh(&mut self, stem: &str) -> String {
        self.serial += 1;
        format!("{}_{}_{}", stem.to_lowercase(), self.client, self.serial)
    }

    pub fn next<R: Rng>(&mut self, view: &ModelView, rng: &mut R) -> Command {
        let roll = rng.random_range(0..100);
        let any: Vec<&Clabject> = view.all().collect();
        if any.is_empty() || roll < 30 {
            return self.create(view, rng);
        }
        if roll < 50 {
            if let Some(cmd) = self.link(view, rng) {
                return cmd;
            }
        }
        if roll < 80 {
            let target = any.choose(rng).expect("non-empty");
            return self.update(view, target, rng);
        }
        let target = any.choose(rng).expect("non-empty");
        Command::Delete {
            selector: select(target, rng),
        }
    }

    fn create<R: Rng>(&mut self, view: &ModelView, rng: &mut R) -> Command {
        let types: Vec<&Clabject> = view
            .elements
            .iter()
            .filter(|c| c.potency != Potency::Finite(0))
            .collect();
        let roll = rng.random_range(0..100);
        if types.is_empty() || roll < 15 {
            let base = if view.element("Class").is_some() && roll % 2 == 0 {
                "Class"
            } else {
                "Clabject"
            };
            let mut attrs = vec![("note".to_owned(), "String".to_owned())];
            if roll < 5 {
                attrs.push(("potency".into(), rng.random_range(0..3u32).to_string()));
            }
            return Command::Create {
                name: self.fresh("Kind"),
                typed_by: Some(base.into()),
                attrs,
            };
        }
        let ty = types.choose(rng).expect("non-empty");
        let name = if roll < 20 {
            (*SHARED.choose(rng).expect("non-empty")).to_owned()
        } else {
            self.fresh(&ty.name)
        };
        Command::Create {
            name,
            typed_by: Some(ty.name.clone()),
            attrs: vec![],
        }
    }

    fn link<R: Rng>(&mut self, view: &ModelView, rng: &mut R) -> Option<Command> {
        let source = view.elements.choose(rng)?;
        let decls: Vec<_> = source
            .typed_by
            .as_deref()
            .and_then(|t| view.element(t))
            .map(|t| view.outgoing(t.id).collect())
            .unwrap_or_default();
        if let Some(decl) = decls.choose(rng) {
            let targets: Vec<&Clabject> = view
                .elements
                .iter()
                .filter(|c| c.typed_by.as_deref() == Some(decl.target_name.as_str()))
                .collect();
            let target = targets
                .choose(rng)
                .copied()
                .or_else(|| view.elements.choose(rng))?;
            return Some(Command::Link {
                name: None,
                typed_by: None,
                from: select(source, rng),
                association: decl.port.clone(),
                to: select(target, rng),
                attrs: vec![],
            });
        }
        let target = view.elements.choose(rng)?;
        let mut attrs = vec![];
        if rng.random_bool(0.3) {
            attrs.push(("kind".to_owned(), "Composition".to_owned()));
            attrs.push(("upper".to_owned(), "1".to_owned()));
        }
        Some(Command::Link {
            name: None,
            typed_by: None,
            from: select(source, rng),
            association: format!("ref{}", rng.random_range(0..3)),
            to: select(target, rng),
            attrs,
        })
    }

    fn update<R: Rng>(&mut self, view: &ModelView, target: &Clabject, rng: &mut R) -> Command {
        let roll = rng.random_range(0..100);
        let selector = select(target, rng);
        if roll < 8 {
            let ty = view
                .elements
                .choose(rng)
                .map_or("Clabject".to_owned(), |c| c.name.clone());
            return Command::Update {
                selector,
                typed_by: Some(ty),
                attrs: vec![],
            };
        }
        if roll < 14 {
            let p = if roll % 3 == 0 {
                "*".to_owned()
            } else {
                rng.random_range(0..4u32).to_string()
            };
            return Command::Update {
                selector,
                typed_by: None,
                attrs: vec![("potency".into(), p)],
            };
        }
        let declared: Vec<String> = target
            .typed_by
            .as_deref()
            .and_then(|t| view.element(t))
            .map(|t| t.attributes.keys().cloned().collect())
            .unwrap_or_default();
        let key = declared
            .choose(rng)
            .cloned()
            .unwrap_or_else(|| "note".to_owned());
        let value = (*VALUES.choose(rng).expect("non-empty")).to_owned();
        Command::Update {
            selector,
            typed_by: None,
            attrs: vec![(key, value)],
        }
    }
}

fn select<R: Rng>(c: &Clabject, rng: &mut R) -> Selector {
    if rng.random_bool(0.3) {
        Selector::ById(c.id)
    } else {
        Selector::ByName(c.name.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replica::Replica;
    use crate::stamp::ReplicaId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_commands_mostly_apply() {
        let mut r = Replica::new(ReplicaId::from_u128(1));
        crate::editor::bootstrap_mindmap_metamodel(&mut r).unwrap();
        let mut g = Generator::new(0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut applied = 0;
        let mut verbs = std::collections::BTreeSet::new();
        for n in 0..400u64 {
            let cmd = g.next(&r.model().read_model(), &mut rng);
            let text = cmd.serialize();
            assert_eq!(Command::parse(&text).unwrap(), cmd, "{text}");
            if r.local_at(&cmd, 1_000 + n).0.is_applied() {
                applied += 1;
                verbs.insert(cmd.verb());
            }
        }
        assert!(applied > 200, "only {applied} applied");
        assert_eq!(verbs.len(), 4);
    }
}
