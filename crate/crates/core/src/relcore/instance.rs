use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use super::{RelError, RelationSchema, Value};

pub type Tid = u64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple {
    pub tid: Tid,
    /// Full row, position 0 holds the tid itself.
    pub values: Vec<Value>,
}

impl Tuple {
    /// Builds a tuple from the non-id attribute values.
    pub fn new(tid: Tid, tail: Vec<Value>) -> Self {
        let mut values = Vec::with_capacity(tail.len() + 1);
        values.push(Value::Atomic(tid.to_string()));
        values.extend(tail);
        Tuple { tid, values }
    }

    pub fn get(&self, pos: usize) -> &Value {
        &self.values[pos]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    pub schema: RelationSchema,
    pub tuples: BTreeMap<Tid, Tuple>,
}

impl Relation {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tuple> {
        self.tuples.values()
    }
}

/// Finite set of relations over globally unique tids. Updates return a new
/// snapshot with a bumped version; equality ignores the version.
#[derive(Debug, Clone, Default)]
pub struct Instance {
    relations: BTreeMap<String, Relation>,
    owner: BTreeMap<Tid, String>,
    version: u64,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.relations == other.relations
    }
}

impl Eq for Instance {}

impl Hash for Instance {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.relations.hash(state);
    }
}

impl Instance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_schemas(schemas: impl IntoIterator<Item = RelationSchema>) -> Result<Self, RelError> {
        let mut inst = Instance::new();
        for s in schemas {
            inst.add_relation(s)?;
        }
        Ok(inst)
    }

    pub fn add_relation(&mut self, schema: RelationSchema) -> Result<(), RelError> {
        let name = schema.name().to_string();
        if self.relations.contains_key(&name) {
            return Err(RelError::InvalidSchema {
                relation: name,
                reason: "relation declared twice".into(),
            });
        }
        self.relations.insert(
            name,
            Relation {
                schema,
                tuples: BTreeMap::new(),
            },
        );
        Ok(())
    }

    pub fn insert(&mut self, relation: &str, tuple: Tuple) -> Result<(), RelError> {
        let rel = self
            .relations
            .get_mut(relation)
            .ok_or_else(|| RelError::UnknownRelation(relation.to_string()))?;
        if tuple.values.len() != rel.schema.arity() {
            return Err(RelError::ArityMismatch {
                relation: relation.to_string(),
                expected: rel.schema.arity(),
                found: tuple.values.len(),
            });
        }
        if tuple.tid == 0 || tuple.values[0] != Value::Atomic(tuple.tid.to_string()) {
            return Err(RelError::BadTid(tuple.values[0].render()));
        }
        for (i, v) in tuple.values.iter().enumerate() {
            if v.is_null() && !rel.schema.attr(i).nullable {
                return Err(RelError::NonNullableNull {
                    tid: tuple.tid,
                    attribute: rel.schema.attr(i).name.clone(),
                });
            }
        }
        if self.owner.contains_key(&tuple.tid) {
            return Err(RelError::DuplicateTid(tuple.tid));
        }
        self.owner.insert(tuple.tid, relation.to_string());
        rel.tuples.insert(tuple.tid, tuple);
        self.version += 1;
        Ok(())
    }

    /// Fixture helper: empty cells become Null and a missing block column
    /// is filled with the tid.
    pub fn insert_row(&mut self, relation: &str, tid: Tid, cells: &[&str]) -> Result<(), RelError> {
        let schema = self
            .schema(relation)
            .ok_or_else(|| RelError::UnknownRelation(relation.to_string()))?;
        let mut tail: Vec<Value> = cells
            .iter()
            .map(|c| if c.is_empty() { Value::Null } else { Value::atomic(*c) })
            .collect();
        if schema.block_position().is_some() && tail.len() + 2 == schema.arity() {
            tail.push(Value::Atomic(tid.to_string()));
        }
        self.insert(relation, Tuple::new(tid, tail))
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Relation)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn schema(&self, name: &str) -> Option<&RelationSchema> {
        self.relations.get(name).map(|r| &r.schema)
    }

    pub fn schemas(&self) -> impl Iterator<Item = &RelationSchema> {
        self.relations.values().map(|r| &r.schema)
    }

    pub fn relation_of(&self, tid: Tid) -> Option<&str> {
        self.owner.get(&tid).map(String::as_str)
    }

    pub fn tuple(&self, tid: Tid) -> Option<&Tuple> {
        let rel = self.owner.get(&tid)?;
        self.relations[rel].tuples.get(&tid)
    }

    pub fn tids(&self) -> impl Iterator<Item = Tid> + '_ {
        self.owner.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    /// New snapshot with the given cells replaced.
    pub fn with_updates(&self, updates: &[(Tid, usize, Value)]) -> Result<Instance, RelError> {
        let mut next = self.clone();
        for (tid, pos, value) in updates {
            let rel = next
                .owner
                .get(tid)
                .ok_or(RelError::UnknownTid(*tid))?
                .clone();
            let relation = next.relations.get_mut(&rel).expect("owner index in sync");
            if *pos == 0 || *pos >= relation.schema.arity() {
                return Err(RelError::ArityMismatch {
                    relation: rel,
                    expected: relation.schema.arity(),
                    found: *pos,
                });
            }
            let tuple = relation.tuples.get_mut(tid).expect("owner index in sync");
            tuple.values[*pos] = value.clone();
        }
        next.version = self.version + 1;
        Ok(next)
    }

    /// Copy restricted to the given tids, keeping all schemas.
    pub fn restrict(&self, keep: &BTreeSet<Tid>) -> Instance {
        let mut out = Instance {
            relations: BTreeMap::new(),
            owner: BTreeMap::new(),
            version: self.version,
        };
        for (name, rel) in &self.relations {
            let tuples: BTreeMap<Tid, Tuple> = rel
                .tuples
                .iter()
                .filter(|(t, _)| keep.contains(t))
                .map(|(t, tu)| (*t, tu.clone()))
                .collect();
            for t in tuples.keys() {
                out.owner.insert(*t, name.clone());
            }
            out.relations.insert(
                name.clone(),
                Relation {
                    schema: rel.schema.clone(),
                    tuples,
                },
            );
        }
        out
    }

    /// Multiset (here: set) of tids per relation.
    pub fn tid_layout(&self) -> BTreeMap<String, Vec<Tid>> {
        self.relations
            .iter()
            .map(|(k, r)| (k.clone(), r.tuples.keys().copied().collect()))
            .collect()
    }
}
