//! Merging of classifier-confirmed duplicates: one rid-keyed rule per tail
//! attribute, enforced by the chase with union matching functions, then
//! one survivor per group of identical tails.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::chase::{chase, ChaseError, ChaseStep, DEFAULT_STEP_BUDGET};
use crate::mdlang::{is_interaction_free, Atom, Catalog, MatchDependency, MatchingFunctionDef, MdError, MfRegistry, SimAtom};
use crate::relcore::{write_relation_csv, Instance, RelError, RelationSchema, SimilarityFactStore, Tid, Value};

#[derive(Debug, thiserror::Error)]
pub enum MergeError {
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error(transparent)]
    Md(#[from] MdError),
    #[error(transparent)]
    Rel(#[from] RelError),
    #[error("duplicate pair ({0}, {1}) mentions an unknown tid")]
    UnknownTid(Tid, Tid),
    #[error("duplicate pair ({left}, {right}) crosses relations {relation} and {other}")]
    CrossRelation {
        left: Tid,
        right: Tid,
        relation: String,
        other: String,
    },
    #[error("prediction ({0}, {1}) has label {2}, expected 0 or 1")]
    BadLabel(Tid, Tid, u8),
}

/// The set M of duplicate pairs, stored as `(smaller, larger)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DuplicatePairSet {
    pairs: BTreeSet<(Tid, Tid)>,
}

impl DuplicatePairSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: Tid, b: Tid) -> bool {
        a != b && self.pairs.insert((a.min(b), a.max(b)))
    }

    pub fn contains(&self, a: Tid, b: Tid) -> bool {
        self.pairs.contains(&(a.min(b), a.max(b)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Tid, Tid)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl FromIterator<(Tid, Tid)> for DuplicatePairSet {
    fn from_iter<I: IntoIterator<Item = (Tid, Tid)>>(iter: I) -> Self {
        let mut m = DuplicatePairSet::new();
        for (a, b) in iter {
            m.insert(a, b);
        }
        m
    }
}

/// Pairs predicted as duplicates (label 1).
pub fn pairs_from_predictions(triples: &[(Tid, Tid, u8)]) -> Result<DuplicatePairSet, MergeError> {
    let mut m = DuplicatePairSet::new();
    for &(a, b, l) in triples {
        match l {
            0 => {}
            1 => {
                m.insert(a, b);
            }
            _ => return Err(MergeError::BadLabel(a, b, l)),
        }
    }
    Ok(m)
}

/// Key-wise union; atomic values are lifted under `key`.
pub fn union_mf(v1: &Value, v2: &Value, key: &str) -> Value {
    MatchingFunctionDef::union(key, Some(key))
        .apply(v1, v2)
        .expect("union is total")
}

/// Similarity tag carrying M for `relation`'s rids.
pub fn duplicate_tag(relation: &str) -> String {
    format!("{relation}.Duplicate")
}

/// One rule per tail attribute: tuples with rids related by M get that
/// attribute identified.
pub fn merge_mds(schema: &RelationSchema) -> Result<Vec<MatchDependency>, MdError> {
    let n = schema.arity();
    let v1: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let v2: Vec<String> = (0..n).map(|i| format!("y{i}")).collect();
    let atom = |vs: &[String]| Atom {
        relation: schema.name().to_string(),
        vars: vs.to_vec(),
    };
    let sim = SimAtom {
        tag: duplicate_tag(schema.name()),
        left: v1[0].clone(),
        right: v2[0].clone(),
    };
    schema
        .tail_positions()
        .into_iter()
        .map(|p| {
            MatchDependency::new(
                &format!("merge_{}_{}", schema.name(), schema.attr(p).name),
                [atom(&v1), atom(&v2)],
                vec![],
                vec![sim.clone()],
                (&v1[p], &v2[p]),
            )
        })
        .collect()
}

/// Checks the merge rules rather than assuming their shape.
pub fn is_merge_set_interaction_free(mds: &[MatchDependency], catalog: &Catalog) -> bool {
    is_interaction_free(mds, catalog)
}

/// Union matching functions, lifted by attribute name, for every tail
/// attribute of `relations` not already covered by `base`.
pub fn union_registry(inst: &Instance, relations: &[&str], base: &MfRegistry) -> MfRegistry {
    let mut reg = base.clone();
    for s in inst.schemas().filter(|s| relations.contains(&s.name())) {
        for p in s.tail_positions() {
            let tag = s.domain_tag(p);
            if reg.get(&tag).is_none() {
                reg.register(MatchingFunctionDef::union(&tag, Some(&s.attr(p).name)));
            }
        }
    }
    reg
}

#[derive(Debug, Clone)]
pub struct MergeResult {
    pub resolved: Instance,
    pub kept_rids: BTreeSet<Tid>,
    pub trace: Vec<ChaseStep>,
}

/// Chases the merge rules of every relation touched by `m`, then keeps the
/// smallest rid of each group of tuples with identical tails. Attributes
/// without a matching function in `mfs` are merged by union.
pub fn merge(inst: &Instance, m: &DuplicatePairSet, mfs: &MfRegistry) -> Result<MergeResult, MergeError> {
    let mut facts = SimilarityFactStore::new();
    let mut relations = BTreeSet::new();
    for (a, b) in m.iter() {
        let (ra, rb) = match (inst.relation_of(a), inst.relation_of(b)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(MergeError::UnknownTid(a, b)),
        };
        if ra != rb {
            return Err(MergeError::CrossRelation {
                left: a,
                right: b,
                relation: ra.to_string(),
                other: rb.to_string(),
            });
        }
        facts.add(&duplicate_tag(ra), &a.to_string(), &b.to_string());
        relations.insert(ra.to_string());
    }
    let mut mds = Vec::new();
    for r in &relations {
        mds.extend(merge_mds(inst.schema(r).expect("relation of a known tid"))?);
    }
    let rels: Vec<&str> = relations.iter().map(String::as_str).collect();
    let registry = union_registry(inst, &rels, mfs);
    let result = chase(inst, &mds, &facts, &registry, DEFAULT_STEP_BUDGET)?;
    let kept_rids = survivors(&result.final_instance);
    Ok(MergeResult {
        resolved: result.final_instance.restrict(&kept_rids),
        kept_rids,
        trace: result.trace,
    })
}

/// Smallest rid per group of identical tails, per relation.
pub fn survivors(inst: &Instance) -> BTreeSet<Tid> {
    let mut kept = BTreeSet::new();
    for (_, rel) in inst.relations() {
        let tail = rel.schema.tail_positions();
        let mut first: BTreeMap<Vec<&Value>, Tid> = BTreeMap::new();
        for t in rel.iter() {
            let key: Vec<&Value> = tail.iter().map(|p| t.get(*p)).collect();
            first.entry(key).or_insert(t.tid);
        }
        kept.extend(first.into_values());
    }
    kept
}

/// The resolved relation as CSV, object-set values in their text form.
pub fn write_resolved_csv<W: Write>(result: &MergeResult, relation: &str, out: W) -> Result<(), RelError> {
    write_relation_csv(&result.resolved, relation, out)
}
