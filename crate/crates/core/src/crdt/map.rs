use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::stamp::Stamp;

/// LWW map of string keys to string values, stored as an LWW set of
/// `((key, value), stamp)` pairs.
///
/// Every value ever written for a key stays in the add-set (soft delete).
/// Removals are recorded per key: a tombstone at `t'` covers every
/// `((key, _), t)` with `t < t'`, which is exactly the set of pair-removals
/// the updating replica would issue, but independent of what that replica
/// had seen. This keeps `remove` and `update` commutative with concurrent
/// adds of other values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LwwMap {
    added: BTreeMap<String, KeyHistory>,
    removed: BTreeMap<String, Stamp>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct KeyHistory {
    values: BTreeMap<String, Stamp>,
    /// Max `(stamp, value)` over `values`; decides lookup and query.
    newest: (Stamp, String),
}

/// A value hidden by a newer removal of its key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tombstone<'a> {
    pub key: &'a str,
    pub value: &'a str,
    pub added: Stamp,
    pub removed: Stamp,
}

impl LwwMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: &str, value: &str, stamp: Stamp) {
        match self.added.get_mut(key) {
            Some(h) => {
                let s = h.values.entry(value.to_owned()).or_insert(stamp);
                *s = (*s).max(stamp);
                if (stamp, value) > (h.newest.0, h.newest.1.as_str()) {
                    h.newest = (stamp, value.to_owned());
                }
            }
            None => {
                let mut values = BTreeMap::new();
                values.insert(value.to_owned(), stamp);
                self.added.insert(
                    key.to_owned(),
                    KeyHistory {
                        values,
                        newest: (stamp, value.to_owned()),
                    },
                );
            }
        }
    }

    pub fn remove(&mut self, key: &str, stamp: Stamp) {
        match self.removed.get_mut(key) {
            Some(s) => *s = (*s).max(stamp),
            None => {
                self.removed.insert(key.to_owned(), stamp);
            }
        }
    }

    /// `add((key, value), t) ∘ remove((key, old), t − ε)`.
    pub fn update(&mut self, key: &str, value: &str, stamp: Stamp) {
        self.add(key, value, stamp);
        self.remove(key, stamp.minus_epsilon());
    }

    pub fn lookup(&self, key: &str) -> bool {
        self.live_newest(key).is_some()
    }

    /// Value of the newest live entry for `key`.
    pub fn query(&self, key: &str) -> Option<&str> {
        self.live_newest(key).map(|(_, v)| v)
    }

    /// Stamp of the newest live entry for `key`.
    pub fn query_stamp(&self, key: &str) -> Option<Stamp> {
        self.live_newest(key).map(|(s, _)| s)
    }

    fn live_newest(&self, key: &str) -> Option<(Stamp, &str)> {
        let h = self.added.get(key)?;
        let (stamp, value) = (&h.newest.0, h.newest.1.as_str());
        match self.removed.get(key) {
            Some(r) if r > stamp => None,
            _ => Some((*stamp, value)),
        }
    }

    /// Live `(key, value)` pairs in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.added
            .keys()
            .filter_map(move |k| self.query(k).map(|v| (k.as_str(), v)))
    }

    /// Every value ever added under `key` with its newest add stamp.
    pub fn history(&self, key: &str) -> impl Iterator<Item = (&str, Stamp)> + '_ {
        self.added
            .get(key)
            .into_iter()
            .flat_map(|h| h.values.iter().map(|(v, s)| (v.as_str(), *s)))
    }

    /// Entries hidden by a key removal.
    pub fn tombstones(&self) -> Vec<Tombstone<'_>> {
        let mut out = Vec::new();
        for (key, h) in &self.added {
            let Some(removed) = self.removed.get(key) else {
                continue;
            };
            for (value, added) in &h.values {
                if removed > added {
                    out.push(Tombstone {
                        key,
                        value,
                        added: *added,
                        removed: *removed,
                    });
                }
            }
        }
        out
    }

    /// Number of keys carrying a removal record. Never decreases.
    pub fn removal_count(&self) -> usize {
        self.removed.len()
    }

    pub fn removal_stamp(&self, key: &str) -> Option<Stamp> {
        self.removed.get(key).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal multiset reading of the pair-based formulas, with key removal
    /// expanded into one pair-removal per value seen anywhere.
    fn naive_query(
        adds: &[(&str, &str, u64)],
        removes: &[(&str, u64)],
        key: &str,
    ) -> Option<String> {
        adds.iter()
            .filter(|(k, _, t)| *k == key && !removes.iter().any(|(rk, rt)| *rk == key && rt > t))
            .max_by_key(|(_, v, t)| (*t, *v))
            .map(|(_, v, _)| v.to_string())
    }

    #[test]
    fn add_then_query() {
        let mut m = LwwMap::new();
        m.add("title", "todolist", Stamp::at(8));
        assert_eq!(m.query("title"), Some("todolist"));
        assert!(m.lookup("title"));
    }

    #[test]
    fn absent_key() {
        let m = LwwMap::new();
        assert_eq!(m.query("nope"), None);
        assert!(!m.lookup("nope"));
    }

    #[test]
    fn newest_value_wins() {
        let mut m = LwwMap::new();
        m.add("k", "1", Stamp::at(2));
        m.add("k", "9", Stamp::at(5));
        assert_eq!(
            naive_query(&[("k", "1", 2), ("k", "9", 5)], &[], "k").as_deref(),
            Some("9")
        );
        assert_eq!(m.query("k"), Some("9"));
    }

    #[test]
    fn update_tombstones_previous_value_one_ns_earlier() {
        let mut m = LwwMap::new();
        m.add("title", "mindmap_0", Stamp::at(3));
        m.update("title", "todolist", Stamp::at(8));
        assert_eq!(m.query("title"), Some("todolist"));
        let ts = m.tombstones();
        assert_eq!(ts.len(), 1);
        assert_eq!((ts[0].key, ts[0].value), ("title", "mindmap_0"));
        assert_eq!(ts[0].removed, Stamp::at(7));
        // previous and current values both stay in the add-set
        let hist: Vec<_> = m.history("title").map(|(v, _)| v).collect();
        assert_eq!(hist, vec!["mindmap_0", "todolist"]);
    }

    #[test]
    fn update_on_absent_key_is_an_add() {
        let mut a = LwwMap::new();
        a.update("k", "v", Stamp::at(4));
        assert_eq!(a.query("k"), Some("v"));
        assert!(a.tombstones().is_empty());
    }

    #[test]
    fn concurrent_updates_converge_to_newest() {
        let mut x = LwwMap::new();
        x.add("k", "base", Stamp::at(1));
        let mut y = x.clone();
        x.update("k", "s1", Stamp::at(3));
        x.update("k", "s2", Stamp::at(5));
        y.update("k", "s2", Stamp::at(5));
        y.update("k", "s1", Stamp::at(3));
        assert_eq!(x, y);
        assert_eq!(x.query("k"), Some("s2"));
    }

    #[test]
    fn remove_hides_older_values_only() {
        let mut m = LwwMap::new();
        m.add("k", "a", Stamp::at(1));
        m.remove("k", Stamp::at(2));
        assert_eq!(m.query("k"), None);
        m.add("k", "b", Stamp::at(3));
        assert_eq!(m.query("k"), Some("b"));
        assert_eq!(m.removal_count(), 1);
    }

    #[test]
    fn matches_naive_reading() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let keys = ["a", "b"];
        let vals = ["x", "y", "z"];
        for _ in 0..400 {
            let mut m = LwwMap::new();
            let mut adds = Vec::new();
            let mut removes = Vec::new();
            for _ in 0..rng.random_range(0..10) {
                let k = keys[rng.random_range(0..2)];
                let t = rng.random_range(1..20u64);
                if rng.random_bool(0.6) {
                    let v = vals[rng.random_range(0..3)];
                    m.add(k, v, Stamp::at(t));
                    adds.push((k, v, t));
                } else {
                    m.remove(k, Stamp::at(t));
                    removes.push((k, t));
                }
            }
            for k in keys {
                assert_eq!(
                    m.query(k).map(str::to_owned),
                    naive_query(&adds, &removes, k)
                );
            }
        }
    }
}
