use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Object-set value: attribute/value pairs, where a key may carry several
/// alternative values after a union merge.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectSet {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl ObjectSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(key: impl Into<String>, value: impl Into<String>) -> Self {
        let mut set = Self::new();
        set.insert(key, value);
        set
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries
            .entry(key.into())
            .or_default()
            .insert(value.into());
    }

    pub fn get(&self, key: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Key-wise union. Conflicting values under one key are all kept.
    pub fn union(&self, other: &ObjectSet) -> ObjectSet {
        let mut out = self.clone();
        for (k, vs) in &other.entries {
            out.entries
                .entry(k.clone())
                .or_default()
                .extend(vs.iter().cloned());
        }
        out
    }

    pub fn is_subset(&self, other: &ObjectSet) -> bool {
        self.entries.iter().all(|(k, vs)| match other.entries.get(k) {
            Some(ws) => vs.is_subset(ws),
            None => false,
        })
    }

    /// True when the two objects share at least one key/value pair.
    pub fn intersects(&self, other: &ObjectSet) -> bool {
        self.entries.iter().any(|(k, vs)| {
            other
                .entries
                .get(k)
                .is_some_and(|ws| !vs.is_disjoint(ws))
        })
    }

    /// `key=value;key=value` sorted by key, multi-valued entries as `key=v1|v2`.
    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, vs)| {
                let joined: Vec<&str> = vs.iter().map(String::as_str).collect();
                format!("{}={}", k, joined.join("|"))
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Inverse of [`ObjectSet::render`].
    pub fn parse(text: &str) -> Option<ObjectSet> {
        let mut set = ObjectSet::new();
        if text.is_empty() {
            return Some(set);
        }
        for part in text.split(';') {
            let (k, v) = part.split_once('=')?;
            if k.is_empty() {
                return None;
            }
            for alt in v.split('|') {
                set.insert(k, alt);
            }
        }
        Some(set)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Null,
    Atomic(String),
    ObjectSet(ObjectSet),
}

impl Value {
    pub fn atomic(text: impl Into<String>) -> Self {
        Value::Atomic(text.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_atomic(&self) -> Option<&str> {
        match self {
            Value::Atomic(s) => Some(s),
            _ => None,
        }
    }

    /// Lift to an object-set; atomic values become `{key: value}`.
    pub fn lift(&self, key: &str) -> ObjectSet {
        match self {
            Value::Null => ObjectSet::new(),
            Value::Atomic(s) => ObjectSet::singleton(key, s.clone()),
            Value::ObjectSet(o) => o.clone(),
        }
    }

    /// Plain text used when a value is fed to a string similarity function.
    pub fn text(&self) -> Option<String> {
        match self {
            Value::Null => None,
            Value::Atomic(s) => Some(s.clone()),
            Value::ObjectSet(o) => Some(
                o.iter()
                    .flat_map(|(_, vs)| vs.iter().cloned())
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Value::Null => String::new(),
            Value::Atomic(s) => s.clone(),
            Value::ObjectSet(o) => o.render(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("NULL"),
            other => f.write_str(&other.render()),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Atomic(s.to_string())
    }
}
