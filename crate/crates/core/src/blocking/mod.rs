//! MD-based collective blocking: block-number rules enforced by the chase
//! under `max`, block extraction, candidate pairs and the SB / MDSB / MDCB
//! comparison modes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use crate::chase::{chase, ChaseError, ChaseResult, DEFAULT_STEP_BUDGET};
use crate::mdlang::{catalog_of, Atom, MatchDependency, MatchingFunctionDef, MdError, MfRegistry, SimAtom};
use crate::relcore::{AttrKind, Instance, RelError, RelationSchema, SimilarityFactStore, Tid, Value};

#[derive(Debug, thiserror::Error)]
pub enum BlockingError {
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error(transparent)]
    Md(#[from] MdError),
    #[error(transparent)]
    Rel(#[from] RelError),
    #[error("{md}: blocking rules must identify block-number attributes")]
    NonBlockRhs { md: String },
    #[error("{md}: block numbers cannot be compared by similarity")]
    BlockSimilarity { md: String },
    #[error("{relation}: block number {value:?} of tid {tid} is not a positive integer")]
    BadBlockNumber { relation: String, tid: Tid, value: String },
    #[error("{relation}: blocking key must name at least one attribute")]
    EmptyKey { relation: String },
    #[error("{relation}: {attribute} cannot be a blocking key attribute")]
    BadKeyAttribute { relation: String, attribute: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockingMode {
    Sb,
    Mdsb,
    Mdcb,
}

impl BlockingMode {
    pub const ALL: [BlockingMode; 3] = [BlockingMode::Sb, BlockingMode::Mdsb, BlockingMode::Mdcb];

    pub fn parse(s: &str) -> Option<BlockingMode> {
        match s.to_ascii_uppercase().as_str() {
            "SB" => Some(BlockingMode::Sb),
            "MDSB" => Some(BlockingMode::Mdsb),
            "MDCB" => Some(BlockingMode::Mdcb),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockingMode::Sb => "SB",
            BlockingMode::Mdsb => "MDSB",
            BlockingMode::Mdcb => "MDCB",
        }
    }
}

impl fmt::Display for BlockingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Block number per tid, per relation.
pub type BlockAssignment = BTreeMap<String, BTreeMap<Tid, Tid>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePairSet {
    pub relation: String,
    /// Unordered pairs stored as `(smaller, larger)`.
    pub pairs: BTreeSet<(Tid, Tid)>,
}

impl CandidatePairSet {
    pub fn count(&self) -> usize {
        self.pairs.len()
    }
}

pub fn block_mf(i: Tid, j: Tid) -> Tid {
    i.max(j)
}

/// Block-number matching functions, one `max` per relation with a block column.
pub fn block_registry(inst: &Instance) -> MfRegistry {
    let mut reg = MfRegistry::new();
    for s in inst.schemas() {
        if let Some(b) = s.block_position() {
            reg.register(MatchingFunctionDef::max_numeric(&s.domain_tag(b)));
        }
    }
    reg
}

fn block_tags(inst: &Instance) -> BTreeSet<String> {
    inst.schemas()
        .filter_map(|s| s.block_position().map(|b| s.domain_tag(b)))
        .collect()
}

pub fn validate_blocking_mds(inst: &Instance, mds: &[MatchDependency]) -> Result<(), BlockingError> {
    let catalog = catalog_of(inst);
    let tags = block_tags(inst);
    for md in mds {
        md.validate(&catalog)?;
        for k in 0..2 {
            let schema = &catalog[&md.leading[k].relation];
            if schema.block_position() != Some(md.identity_pos(k)) {
                return Err(BlockingError::NonBlockRhs { md: md.name.clone() });
            }
        }
        if md.sims.iter().any(|s| tags.contains(&s.tag)) {
            return Err(BlockingError::BlockSimilarity { md: md.name.clone() });
        }
    }
    Ok(())
}

/// Block numbers as stored in the instance's block columns.
pub fn read_assignment(inst: &Instance) -> Result<BlockAssignment, BlockingError> {
    let mut out = BlockAssignment::new();
    for (name, rel) in inst.relations() {
        let Some(b) = rel.schema.block_position() else { continue };
        let blocks = out.entry(name.to_string()).or_default();
        for t in rel.iter() {
            let v = t.get(b);
            let n = v
                .as_atomic()
                .and_then(|s| s.trim().parse::<Tid>().ok())
                .filter(|n| *n > 0)
                .ok_or_else(|| BlockingError::BadBlockNumber {
                    relation: name.to_string(),
                    tid: t.tid,
                    value: v.render(),
                })?;
            blocks.insert(t.tid, n);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BlockingOutcome {
    pub instance: Instance,
    pub assignment: BlockAssignment,
    pub chase: ChaseResult,
}

pub fn apply_blocking(
    inst: &Instance,
    mds: &[MatchDependency],
    sims: &SimilarityFactStore,
) -> Result<BlockingOutcome, BlockingError> {
    validate_blocking_mds(inst, mds)?;
    let result = chase(inst, mds, sims, &block_registry(inst), DEFAULT_STEP_BUDGET)?;
    let assignment = read_assignment(&result.final_instance)?;
    Ok(BlockingOutcome {
        instance: result.final_instance.clone(),
        assignment,
        chase: result,
    })
}

pub fn candidate_pairs(assignment: &BlockAssignment, relation: &str) -> CandidatePairSet {
    let mut by_block: BTreeMap<Tid, Vec<Tid>> = BTreeMap::new();
    for (t, b) in assignment.get(relation).into_iter().flatten() {
        by_block.entry(*b).or_default().push(*t);
    }
    let mut pairs = BTreeSet::new();
    for tids in by_block.values() {
        for (i, a) in tids.iter().enumerate() {
            for b in &tids[i + 1..] {
                pairs.insert((*a.min(b), *a.max(b)));
            }
        }
    }
    CandidatePairSet {
        relation: relation.to_string(),
        pairs,
    }
}

/// `1 − S / n²`.
pub fn reduction_ratio(s: usize, n: usize) -> f64 {
    assert!(n >= 1, "reduction ratio needs at least one record");
    1.0 - s as f64 / (n as f64 * n as f64)
}

fn key_positions(schema: &RelationSchema, key_attrs: &[&str]) -> Result<Vec<usize>, BlockingError> {
    if key_attrs.is_empty() {
        return Err(BlockingError::EmptyKey {
            relation: schema.name().to_string(),
        });
    }
    key_attrs
        .iter()
        .map(|a| {
            schema
                .position(a)
                .filter(|p| *p > 0 && schema.attr(*p).kind != AttrKind::BlockNumber)
                .ok_or_else(|| BlockingError::BadKeyAttribute {
                    relation: schema.name().to_string(),
                    attribute: a.to_string(),
                })
        })
        .collect()
}

/// Standard blocking: identical values on every key attribute, block number
/// the smallest rid of the group. A Null key value matches nothing.
pub fn sb_blocking(inst: &Instance, relation: &str, key_attrs: &[&str]) -> Result<BTreeMap<Tid, Tid>, BlockingError> {
    let rel = inst
        .relation(relation)
        .ok_or_else(|| RelError::UnknownRelation(relation.to_string()))?;
    let pos = key_positions(&rel.schema, key_attrs)?;
    let mut groups: BTreeMap<Vec<&Value>, Tid> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for t in rel.iter() {
        let key: Vec<&Value> = pos.iter().map(|p| t.get(*p)).collect();
        if key.iter().any(|v| v.is_null()) {
            out.insert(t.tid, t.tid);
            continue;
        }
        let rep = *groups.entry(key).or_insert(t.tid);
        out.insert(t.tid, rep);
    }
    Ok(out)
}

/// Single-relation blocking rule comparing `key_attrs` by equality, except
/// those listed in `similar` which use their domain's similarity.
pub fn key_rule(
    name: &str,
    schema: &RelationSchema,
    key_attrs: &[&str],
    similar: &[&str],
) -> Result<MatchDependency, BlockingError> {
    let pos = key_positions(schema, key_attrs)?;
    let bpos = schema.block_position().ok_or_else(|| BlockingError::NonBlockRhs { md: name.to_string() })?;
    let mut v1: Vec<String> = (0..schema.arity()).map(|i| format!("u{i}")).collect();
    let mut v2: Vec<String> = (0..schema.arity()).map(|i| format!("v{i}")).collect();
    let mut sims = Vec::new();
    for (p, attr) in pos.iter().zip(key_attrs) {
        if similar.contains(attr) {
            sims.push(SimAtom {
                tag: schema.domain_tag(*p),
                left: v1[*p].clone(),
                right: v2[*p].clone(),
            });
        } else {
            v1[*p] = format!("k{p}");
            v2[*p] = format!("k{p}");
        }
    }
    let atom = |vs: &[String]| Atom {
        relation: schema.name().to_string(),
        vars: vs.to_vec(),
    };
    let (y1, y2) = (v1[bpos].clone(), v2[bpos].clone());
    Ok(MatchDependency::new(name, [atom(&v1), atom(&v2)], vec![], sims, (&y1, &y2))?)
}

/// Blocks report: `relation,tid,block` sorted by relation, block, tid.
pub fn write_blocks_report<W: Write>(assignment: &BlockAssignment, out: W) -> Result<(), RelError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["relation", "tid", "block"])?;
    for (rel, blocks) in assignment {
        let mut rows: Vec<(Tid, Tid)> = blocks.iter().map(|(t, b)| (*b, *t)).collect();
        rows.sort();
        for (b, t) in rows {
            w.write_record([rel.as_str(), &t.to_string(), &b.to_string()])?;
        }
    }
    w.flush().map_err(|e| RelError::Io {
        path: "blocks report".into(),
        source: e,
    })?;
    Ok(())
}

/// Blocks of one relation as sorted tid sets, singletons included.
pub fn blocks_of(assignment: &BlockAssignment, relation: &str) -> Vec<BTreeSet<Tid>> {
    let mut by_block: BTreeMap<Tid, BTreeSet<Tid>> = BTreeMap::new();
    for (t, b) in assignment.get(relation).into_iter().flatten() {
        by_block.entry(*b).or_default().insert(*t);
    }
    let mut out: Vec<BTreeSet<Tid>> = by_block.into_values().collect();
    out.sort();
    out
}
