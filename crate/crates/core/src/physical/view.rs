use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::Clabject;

/// An edge-backed clabject with its endpoints resolved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Association {
    pub clabject: Clabject,
    /// Association name the link was made through (`from.port`).
    pub port: String,
    pub source: Uuid,
    pub source_name: String,
    pub target: Uuid,
    pub target_name: String,
}

/// Snapshot of the live model, ordered by `(name, id)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelView {
    pub elements: Vec<Clabject>,
    pub associations: Vec<Association>,
}

impl ModelView {
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty() && self.associations.is_empty()
    }

    /// First live element (vertex- or edge-backed) with this name.
    pub fn find(&self, name: &str) -> Option<&Clabject> {
        self.elements.iter().find(|c| c.name == name).or_else(|| {
            self.associations
                .iter()
                .map(|a| &a.clabject)
                .find(|c| c.name == name)
        })
    }

    pub fn element(&self, name: &str) -> Option<&Clabject> {
        self.elements.iter().find(|c| c.name == name)
    }

    pub fn association(&self, name: &str) -> Option<&Association> {
        self.associations.iter().find(|a| a.clabject.name == name)
    }

    pub fn by_id(&self, id: Uuid) -> Option<&Clabject> {
        self.elements.iter().find(|c| c.id == id).or_else(|| {
            self.associations
                .iter()
                .map(|a| &a.clabject)
                .find(|c| c.id == id)
        })
    }

    /// Every live clabject, vertices first.
    pub fn all(&self) -> impl Iterator<Item = &Clabject> + '_ {
        self.elements
            .iter()
            .chain(self.associations.iter().map(|a| &a.clabject))
    }

    pub fn outgoing(&self, id: Uuid) -> impl Iterator<Item = &Association> + '_ {
        self.associations.iter().filter(move |a| a.source == id)
    }

    pub fn incoming(&self, id: Uuid) -> impl Iterator<Item = &Association> + '_ {
        self.associations.iter().filter(move |a| a.target == id)
    }
}
