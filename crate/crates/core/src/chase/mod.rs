//! MD enforcement by the chase: a deterministic run to a stable instance and
//! an exhaustive all-orders oracle for small inputs.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::mdlang::cq::{ConjunctiveQuery, CqAtom, CqEvaluator, CqSim};
use crate::mdlang::{catalog_of, MatchDependency, MdError, MfRegistry};
use crate::relcore::{Instance, RelError, SimilarityFactStore, Tid, Value};

mod schedule;

pub use schedule::{DeclarationOrder, ReverseOrder, Scheduler, Scripted, SeededRandom};

pub const DEFAULT_STEP_BUDGET: usize = 10_000;
pub const DEFAULT_NODE_BUDGET: usize = 100_000;

#[derive(Debug, thiserror::Error)]
pub enum ChaseError {
    #[error(transparent)]
    Md(#[from] MdError),
    #[error(transparent)]
    Rel(#[from] RelError),
    #[error("chase exceeded {budget} steps")]
    ChaseBudgetExceeded { budget: usize },
    #[error("all-orders search exceeded {budget} nodes")]
    OracleBudgetExceeded { budget: usize },
    #[error("all-orders search limited to {max_tuples} tuples and {max_mds} rules, got {tuples} and {mds}")]
    OracleInputTooLarge {
        max_tuples: usize,
        max_mds: usize,
        tuples: usize,
        mds: usize,
    },
    #[error("{md}: identity attributes {left} and {right} have different domains")]
    DomainMismatch { md: String, left: String, right: String },
    #[error("scripted step {step}: {md} on ({t1}, {t2}) is not applicable")]
    ScriptMismatch { step: usize, md: String, t1: Tid, t2: Tid },
}

/// One way of satisfying an MD's premise, reduced to the two leading tuples.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub md: usize,
    pub pair: (Tid, Tid),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChaseStep {
    pub md_name: String,
    pub tids: (Tid, Tid),
    /// `Rel.Attr` of each identified position.
    pub attributes: (String, String),
    pub old: (Value, Value),
    pub merged: Value,
}

impl fmt::Display for ChaseStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let attr = if self.attributes.0 == self.attributes.1 {
            self.attributes.0.clone()
        } else {
            format!("{}/{}", self.attributes.0, self.attributes.1)
        };
        write!(
            f,
            "{}\t{},{}\t{}\t{} | {} -> {}",
            self.md_name,
            self.tids.0,
            self.tids.1,
            attr,
            self.old.0.render(),
            self.old.1.render(),
            self.merged.render()
        )
    }
}

#[derive(Debug, Clone)]
pub struct ChaseResult {
    pub final_instance: Instance,
    pub trace: Vec<ChaseStep>,
    pub steps_taken: usize,
}

impl ChaseResult {
    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|s| format!("{s}\n")).collect()
    }
}

fn premise_query(md: &MatchDependency) -> ConjunctiveQuery {
    ConjunctiveQuery {
        atoms: md
            .atoms()
            .map(|a| CqAtom {
                relation: a.relation.clone(),
                vars: a.vars.clone(),
            })
            .collect(),
        sims: md
            .sims
            .iter()
            .map(|s| CqSim {
                tag: s.tag.clone(),
                left: s.left.clone(),
                right: s.right.clone(),
            })
            .collect(),
        distinct: vec![(0, 1)],
    }
}

/// Both identified columns hold the same attribute, so `(t1, t2)` and
/// `(t2, t1)` describe the same enforcement.
fn symmetric_identity(md: &MatchDependency, inst: &Instance) -> bool {
    md.leading[0].relation == md.leading[1].relation && {
        let s = inst.schema(&md.leading[0].relation);
        s.map(|s| s.attr(md.identity_pos(0)).name == s.attr(md.identity_pos(1)).name)
            .unwrap_or(false)
    }
}

fn identity_values<'i>(inst: &'i Instance, md: &MatchDependency, pair: (Tid, Tid)) -> Option<(&'i Value, &'i Value)> {
    let a = inst.tuple(pair.0)?.get(md.identity_pos(0));
    let b = inst.tuple(pair.1)?.get(md.identity_pos(1));
    Some((a, b))
}

fn assignments_for(ev: &CqEvaluator<'_>, inst: &Instance, md_index: usize, md: &MatchDependency) -> BTreeSet<Assignment> {
    let sym = symmetric_identity(md, inst);
    let key = |a: Tid, b: Tid| {
        let pair = if sym && b < a { (b, a) } else { (a, b) };
        match identity_values(inst, md, pair) {
            Some((x, y)) if x != y => Some(pair),
            _ => None,
        }
    };
    ev.leading_pairs(&premise_query(md), &key)
        .into_iter()
        .map(|pair| Assignment { md: md_index, pair })
        .collect()
}

/// Premise matches of `md` whose identified values still differ, by
/// ascending leading-tuple pair.
pub fn applicable(inst: &Instance, sims: &SimilarityFactStore, md: &MatchDependency) -> Vec<Assignment> {
    let ev = CqEvaluator::new(inst, sims);
    assignments_for(&ev, inst, 0, md).into_iter().collect()
}

/// Every applicable assignment of every MD, by MD order then tids.
pub fn all_applicable(inst: &Instance, sims: &SimilarityFactStore, mds: &[MatchDependency]) -> Vec<Assignment> {
    let ev = CqEvaluator::new(inst, sims);
    let mut out = Vec::new();
    for (i, md) in mds.iter().enumerate() {
        out.extend(assignments_for(&ev, inst, i, md));
    }
    out
}

pub fn enforce_step(
    inst: &Instance,
    md: &MatchDependency,
    pair: (Tid, Tid),
    mfs: &MfRegistry,
) -> Result<(Instance, ChaseStep), ChaseError> {
    let (p0, p1) = (md.identity_pos(0), md.identity_pos(1));
    let schema_of = |t: Tid| {
        inst.relation_of(t)
            .and_then(|r| inst.schema(r))
            .ok_or(RelError::UnknownTid(t))
    };
    let (s0, s1) = (schema_of(pair.0)?, schema_of(pair.1)?);
    let (tag0, tag1) = (s0.domain_tag(p0), s1.domain_tag(p1));
    let attr0 = format!("{}.{}", s0.name(), s0.attr(p0).name);
    let attr1 = format!("{}.{}", s1.name(), s1.attr(p1).name);
    if tag0 != tag1 {
        return Err(ChaseError::DomainMismatch {
            md: md.name.clone(),
            left: attr0,
            right: attr1,
        });
    }
    let (a, b) = identity_values(inst, md, pair).ok_or(RelError::UnknownTid(pair.0))?;
    let merged = mfs.merge(&tag0, a, b)?;
    let next = inst.with_updates(&[(pair.0, p0, merged.clone()), (pair.1, p1, merged.clone())])?;
    let step = ChaseStep {
        md_name: md.name.clone(),
        tids: pair,
        attributes: (attr0, attr1),
        old: (a.clone(), b.clone()),
        merged,
    };
    Ok((next, step))
}

pub fn chase(
    inst: &Instance,
    mds: &[MatchDependency],
    sims: &SimilarityFactStore,
    mfs: &MfRegistry,
    budget: usize,
) -> Result<ChaseResult, ChaseError> {
    chase_with(inst, mds, sims, mfs, budget, &mut DeclarationOrder)
}

pub fn chase_with(
    inst: &Instance,
    mds: &[MatchDependency],
    sims: &SimilarityFactStore,
    mfs: &MfRegistry,
    budget: usize,
    scheduler: &mut dyn Scheduler,
) -> Result<ChaseResult, ChaseError> {
    let catalog = catalog_of(inst);
    for md in mds {
        md.validate(&catalog)?;
    }
    let mut current = inst.clone();
    let mut trace = Vec::new();
    loop {
        let cands = all_applicable(&current, sims, mds);
        if cands.is_empty() {
            break;
        }
        if trace.len() >= budget {
            return Err(ChaseError::ChaseBudgetExceeded { budget });
        }
        let pick = scheduler.pick(trace.len(), &cands, mds)?;
        let a = &cands[pick];
        let (next, step) = enforce_step(&current, &mds[a.md], a.pair, mfs)?;
        current = next;
        trace.push(step);
    }
    let steps_taken = trace.len();
    Ok(ChaseResult {
        final_instance: current,
        trace,
        steps_taken,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_tuples: usize,
    pub max_mds: usize,
    pub node_budget: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_tuples: 6,
            max_mds: 4,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Every stable instance reachable by some enforcement order, sorted by
/// their rendered form. Instances already explored are not re-expanded.
pub fn chase_all_orders(
    inst: &Instance,
    mds: &[MatchDependency],
    sims: &SimilarityFactStore,
    mfs: &MfRegistry,
    limits: OracleLimits,
) -> Result<Vec<Instance>, ChaseError> {
    if inst.len() > limits.max_tuples || mds.len() > limits.max_mds {
        return Err(ChaseError::OracleInputTooLarge {
            max_tuples: limits.max_tuples,
            max_mds: limits.max_mds,
            tuples: inst.len(),
            mds: mds.len(),
        });
    }
    let catalog = catalog_of(inst);
    for md in mds {
        md.validate(&catalog)?;
    }
    let mut seen: HashSet<Instance> = HashSet::new();
    let mut stable: HashSet<Instance> = HashSet::new();
    let mut stack = vec![inst.clone()];
    while let Some(cur) = stack.pop() {
        if !seen.insert(cur.clone()) {
            continue;
        }
        if seen.len() > limits.node_budget {
            return Err(ChaseError::OracleBudgetExceeded {
                budget: limits.node_budget,
            });
        }
        let cands = all_applicable(&cur, sims, mds);
        if cands.is_empty() {
            stable.insert(cur);
            continue;
        }
        for a in cands.iter().rev() {
            let (next, _) = enforce_step(&cur, &mds[a.md], a.pair, mfs)?;
            if !seen.contains(&next) {
                stack.push(next);
            }
        }
    }
    let mut out: Vec<Instance> = stable.into_iter().collect();
    out.sort_by_cached_key(render_instance);
    Ok(out)
}

/// Deterministic text form of an instance, one tuple per line.
pub fn render_instance(inst: &Instance) -> String {
    let mut s = String::new();
    for (name, rel) in inst.relations() {
        for t in rel.iter() {
            let cells: Vec<String> = t.values.iter().map(Value::render).collect();
            s.push_str(&format!("{name}({})\n", cells.join(", ")));
        }
    }
    s
}
