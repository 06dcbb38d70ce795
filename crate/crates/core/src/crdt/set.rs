use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::stamp::Stamp;

/// LWW-element-set: an add-set and a remove-set of `(value, stamp)`.
///
/// Only the newest stamp per value is kept in each set; older entries can
/// never change the outcome of [`LwwSet::lookup`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LwwSet<T: Ord> {
    added: BTreeMap<T, Stamp>,
    removed: BTreeMap<T, Stamp>,
}

impl<T: Ord> Default for LwwSet<T> {
    fn default() -> Self {
        LwwSet {
            added: BTreeMap::new(),
            removed: BTreeMap::new(),
        }
    }
}

fn raise<T: Ord>(map: &mut BTreeMap<T, Stamp>, value: T, stamp: Stamp) {
    map.entry(value)
        .and_modify(|s| *s = (*s).max(stamp))
        .or_insert(stamp);
}

impl<T: Ord + Clone> LwwSet<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: T, stamp: Stamp) {
        raise(&mut self.added, value, stamp);
    }

    pub fn remove(&mut self, value: T, stamp: Stamp) {
        raise(&mut self.removed, value, stamp);
    }

    /// Present iff added at some `t` and not removed at any `t' > t`.
    /// On equal stamps the add wins.
    pub fn lookup(&self, value: &T) -> bool {
        match (self.added.get(value), self.removed.get(value)) {
            (Some(a), Some(r)) => r <= a,
            (Some(_), None) => true,
            (None, _) => false,
        }
    }

    /// Whether the value was ever added, live or tombstoned.
    pub fn was_added(&self, value: &T) -> bool {
        self.added.contains_key(value)
    }

    /// Whether the value appears in either set.
    pub fn is_known(&self, value: &T) -> bool {
        self.added.contains_key(value) || self.removed.contains_key(value)
    }

    pub fn add_stamp(&self, value: &T) -> Option<Stamp> {
        self.added.get(value).copied()
    }

    pub fn remove_stamp(&self, value: &T) -> Option<Stamp> {
        self.removed.get(value).copied()
    }

    /// Live values in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = &T> + '_ {
        self.added.keys().filter(move |v| self.lookup(v))
    }

    pub fn add_set(&self) -> &BTreeMap<T, Stamp> {
        &self.added
    }

    pub fn remove_set(&self) -> &BTreeMap<T, Stamp> {
        &self.removed
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.iter().next().is_none()
    }
}
