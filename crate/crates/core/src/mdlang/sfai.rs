//! SFAI membership through one Boolean conjunctive query per interaction
//! case `(φ1, φ2, R[A])`, `R[A] ∈ ARHS(φ1) ∩ ALHS(φ2)`.
//!
//! A case is violated when some tuple is at once a leading tuple of a
//! satisfied `φ1` whose identified attribute is `R[A]`, and a tuple of a
//! satisfied `φ2` whose `A` value is compared (by similarity or by a join)
//! against a different tuple. Leading atoms of one MD match distinct tuples.
//! The query for a case is the union of one conjunctive branch per way of
//! placing the shared tuple.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::relcore::{Instance, SimilarityFactStore, Tid};

use super::analysis::{arhs, interaction_cases};
use super::cq::{ConjunctiveQuery, CqAtom, CqEvaluator, CqSim};
use super::model::{catalog_of, AttrRef, Catalog, MatchDependency, Site};
use super::MdError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SfaiBranch {
    pub query: ConjunctiveQuery,
    /// Atoms before this index come from `φ1`.
    pub split: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SfaiQuery {
    pub phi1: String,
    pub phi2: String,
    pub attribute: AttrRef,
    pub branches: Vec<SfaiBranch>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SfaiWitness {
    pub phi1: String,
    pub phi2: String,
    pub attribute: AttrRef,
    pub s1: BTreeSet<Tid>,
    pub s2: BTreeSet<Tid>,
}

impl fmt::Display for SfaiWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &BTreeSet<Tid>| s.iter().map(|t| format!("t{t}")).collect::<Vec<_>>().join(",");
        write!(
            f,
            "({}, {}) on {}: S1={{{}}} S2={{{}}}",
            self.phi1,
            self.phi2,
            self.attribute,
            show(&self.s1),
            show(&self.s2)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SfaiVerdict {
    pub is_sfai: bool,
    pub witnesses: Vec<SfaiWitness>,
}

struct UnionFind {
    parent: BTreeMap<String, String>,
}

impl UnionFind {
    fn find(&mut self, v: &str) -> String {
        let p = match self.parent.get(v) {
            Some(p) if p != v => p.clone(),
            _ => return v.to_string(),
        };
        let root = self.find(&p);
        self.parent.insert(v.to_string(), root.clone());
        root
    }

    fn union(&mut self, a: &str, b: &str) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(hi, lo);
        }
    }
}

/// Atoms of `md` other than `site.atom` whose compared columns meet the
/// column at `site`.
fn comparison_partners(md: &MatchDependency, site: Site) -> BTreeSet<usize> {
    let var = &md.atom(site.atom).vars[site.pos];
    let mut partner_vars = vec![var.clone()];
    for s in &md.sims {
        if &s.left == var {
            partner_vars.push(s.right.clone());
        }
        if &s.right == var {
            partner_vars.push(s.left.clone());
        }
    }
    let mut out = BTreeSet::new();
    for pv in &partner_vars {
        for s in md.sites_of(pv) {
            if s.pos > 0 && s.atom != site.atom {
                out.insert(s.atom);
            }
        }
    }
    out
}

fn build_branch(phi1: &MatchDependency, lead: usize, phi2: &MatchDependency, alpha: usize, beta: usize) -> SfaiBranch {
    let name = |k: u8, v: &str| format!("{k}:{v}");
    let mut uf = UnionFind {
        parent: BTreeMap::new(),
    };
    for (a, b) in phi1.leading[lead].vars.iter().zip(&phi2.atom(alpha).vars) {
        uf.union(&name(1, a), &name(2, b));
    }
    let mut atoms = Vec::new();
    let mut sims = Vec::new();
    for (k, md) in [(1u8, phi1), (2u8, phi2)] {
        for a in md.atoms() {
            atoms.push(CqAtom {
                relation: a.relation.clone(),
                vars: a.vars.iter().map(|v| uf.find(&name(k, v))).collect(),
            });
        }
        for s in &md.sims {
            sims.push(CqSim {
                tag: s.tag.clone(),
                left: uf.find(&name(k, &s.left)),
                right: uf.find(&name(k, &s.right)),
            });
        }
    }
    let n1 = phi1.atom_count();
    SfaiBranch {
        query: ConjunctiveQuery {
            atoms,
            sims,
            distinct: vec![(0, 1), (n1, n1 + 1), (n1 + alpha, n1 + beta)],
        },
        split: n1,
    }
}

pub fn build_sfai_queries(mds: &[MatchDependency], catalog: &Catalog) -> Vec<SfaiQuery> {
    let mut out = Vec::new();
    for (i, j, attr) in interaction_cases(mds, catalog) {
        let (phi1, phi2) = (&mds[i], &mds[j]);
        let rhs = arhs(phi1, catalog);
        let mut branches: Vec<SfaiBranch> = Vec::new();
        for lead in (0..2).filter(|k| rhs[*k] == attr) {
            for (ai, atom) in phi2.atoms().enumerate() {
                if atom.relation != attr.relation {
                    continue;
                }
                for pos in 1..atom.vars.len() {
                    let site = Site { atom: ai, pos };
                    if phi2.attr_at(site, catalog) != attr {
                        continue;
                    }
                    for beta in comparison_partners(phi2, site) {
                        let b = build_branch(phi1, lead, phi2, ai, beta);
                        if !branches.contains(&b) {
                            branches.push(b);
                        }
                    }
                }
            }
        }
        out.push(SfaiQuery {
            phi1: phi1.name.clone(),
            phi2: phi2.name.clone(),
            attribute: attr,
            branches,
        });
    }
    out
}

pub fn is_sfai(mds: &[MatchDependency], inst: &Instance, sims: &SimilarityFactStore) -> Result<SfaiVerdict, MdError> {
    let catalog = catalog_of(inst);
    for md in mds {
        md.validate(&catalog)?;
    }
    let ev = CqEvaluator::new(inst, sims);
    let mut witnesses = Vec::new();
    for q in build_sfai_queries(mds, &catalog) {
        for b in &q.branches {
            if let Some(m) = ev.exists(&b.query) {
                witnesses.push(SfaiWitness {
                    phi1: q.phi1.clone(),
                    phi2: q.phi2.clone(),
                    attribute: q.attribute.clone(),
                    s1: m.tids[..b.split].iter().copied().collect(),
                    s2: m.tids[b.split..].iter().copied().collect(),
                });
                break;
            }
        }
    }
    Ok(SfaiVerdict {
        is_sfai: witnesses.is_empty(),
        witnesses,
    })
}
