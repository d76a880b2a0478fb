use std::collections::{BTreeMap, BTreeSet};

use super::Value;

/// Similarity facts per attribute domain, kept reflexively and symmetrically
/// closed. Identical non-null values are always similar; Null never is.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimilarityFactStore {
    adj: BTreeMap<String, BTreeMap<Value, BTreeSet<Value>>>,
}

impl SimilarityFactStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `a ≈ b` in domain `tag`. Facts involving Null are ignored.
    pub fn insert(&mut self, tag: &str, a: Value, b: Value) -> bool {
        if a.is_null() || b.is_null() {
            return false;
        }
        let dom = self.adj.entry(tag.to_string()).or_default();
        for v in [&a, &b] {
            dom.entry(v.clone()).or_default().insert(v.clone());
        }
        let fresh = dom.get_mut(&a).unwrap().insert(b.clone());
        dom.get_mut(&b).unwrap().insert(a);
        fresh
    }

    pub fn add(&mut self, tag: &str, a: &str, b: &str) -> bool {
        self.insert(tag, Value::atomic(a), Value::atomic(b))
    }

    /// Registers a value with only its reflexive fact.
    pub fn touch(&mut self, tag: &str, a: Value) {
        if !a.is_null() {
            self.adj
                .entry(tag.to_string())
                .or_default()
                .entry(a.clone())
                .or_default()
                .insert(a);
        }
    }

    pub fn similar(&self, tag: &str, a: &Value, b: &Value) -> bool {
        if a.is_null() || b.is_null() {
            return false;
        }
        if a == b {
            return true;
        }
        self.adj
            .get(tag)
            .and_then(|d| d.get(a))
            .is_some_and(|n| n.contains(b))
    }

    /// Values recorded as similar to `a`, including `a` itself when non-null.
    /// Borrowed neighbours of `a`, excluding `a` itself unless recorded.
    pub fn neighbors_iter<'s>(&'s self, tag: &str, a: &Value) -> impl Iterator<Item = &'s Value> + 's {
        self.adj.get(tag).and_then(|d| d.get(a)).into_iter().flatten()
    }

    pub fn neighbors(&self, tag: &str, a: &Value) -> BTreeSet<Value> {
        if a.is_null() {
            return BTreeSet::new();
        }
        let mut out = self
            .adj
            .get(tag)
            .and_then(|d| d.get(a))
            .cloned()
            .unwrap_or_default();
        out.insert(a.clone());
        out
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.adj.keys().map(String::as_str)
    }

    /// All facts, both orientations and reflexive pairs included.
    pub fn facts(&self) -> impl Iterator<Item = (&str, &Value, &Value)> {
        self.adj.iter().flat_map(|(tag, dom)| {
            dom.iter()
                .flat_map(move |(a, ns)| ns.iter().map(move |b| (tag.as_str(), a, b)))
        })
    }

    /// Facts with `a < b`, one per unordered non-reflexive pair.
    pub fn distinct_pairs(&self) -> Vec<(String, Value, Value)> {
        self.facts()
            .filter(|(_, a, b)| a < b)
            .map(|(t, a, b)| (t.to_string(), a.clone(), b.clone()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.facts().count()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn extend(&mut self, other: &SimilarityFactStore) {
        for (t, a, b) in other.facts() {
            self.insert(t, a.clone(), b.clone());
        }
    }
}
