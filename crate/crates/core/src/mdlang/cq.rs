//! Boolean / enumerating conjunctive queries with similarity built-ins,
//! evaluated by backtracking homomorphism search.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::ControlFlow;

use crate::relcore::{Instance, Relation, SimilarityFactStore, Tid, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CqAtom {
    pub relation: String,
    pub vars: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CqSim {
    pub tag: String,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConjunctiveQuery {
    pub atoms: Vec<CqAtom>,
    pub sims: Vec<CqSim>,
    /// Atom index pairs that must map to different tuples.
    pub distinct: Vec<(usize, usize)>,
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| format!("{}({})", a.relation, a.vars.join(", ")))
            .collect();
        parts.extend(self.sims.iter().map(|s| format!("sim({}: {}, {})", s.tag, s.left, s.right)));
        parts.extend(
            self.distinct
                .iter()
                .map(|(a, b)| format!("{} != {}", self.atoms[*a].vars[0], self.atoms[*b].vars[0])),
        );
        write!(f, "exists: {}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CqMatch {
    /// Tuple chosen for each atom, in query order.
    pub tids: Vec<Tid>,
    pub binding: BTreeMap<String, Value>,
}

type Postings<'a> = HashMap<&'a Value, Vec<Tid>>;

pub struct CqEvaluator<'a> {
    inst: &'a Instance,
    sims: &'a SimilarityFactStore,
    /// Tuples per (relation, position, value).
    index: HashMap<(&'a str, usize), Postings<'a>>,
}

enum Sink<'q> {
    Matches(&'q mut dyn FnMut(&CqMatch) -> ControlFlow<()>),
    /// One witness per key of the first two atoms' tuples; `None` keys are pruned.
    Pairs {
        key: &'q dyn Fn(Tid, Tid) -> Option<(Tid, Tid)>,
        found: BTreeSet<(Tid, Tid)>,
    },
}

struct PlannedAtom<'q, 'a> {
    rel: &'a Relation,
    vars: Vec<usize>,
    postings: Vec<Option<&'q Postings<'a>>>,
}

enum Cands<'q> {
    All,
    Slice(&'q [Tid]),
    Owned(Vec<Tid>),
}

struct Search<'q, 'a> {
    ev: &'q CqEvaluator<'a>,
    atoms: Vec<PlannedAtom<'q, 'a>>,
    names: Vec<&'q str>,
    distinct: &'q [(usize, usize)],
    assigned: Vec<Option<Tid>>,
    binding: Vec<Option<&'a Value>>,
    /// Similarity partners (tag, variable) per variable.
    sims_of: Vec<Vec<(&'q str, usize)>>,
    sink: Sink<'q>,
}

impl<'a> CqEvaluator<'a> {
    pub fn new(inst: &'a Instance, sims: &'a SimilarityFactStore) -> Self {
        let mut index: HashMap<(&str, usize), Postings<'a>> = HashMap::new();
        for (name, rel) in inst.relations() {
            for t in rel.iter() {
                for (pos, v) in t.values.iter().enumerate() {
                    if !v.is_null() {
                        index.entry((name, pos)).or_default().entry(v).or_default().push(t.tid);
                    }
                }
            }
        }
        CqEvaluator { inst, sims, index }
    }

    pub fn exists(&self, q: &ConjunctiveQuery) -> Option<CqMatch> {
        let mut found = None;
        self.for_each(q, &mut |m| {
            found = Some(m.clone());
            ControlFlow::Break(())
        });
        found
    }

    pub fn all(&self, q: &ConjunctiveQuery) -> Vec<CqMatch> {
        let mut out = Vec::new();
        self.for_each(q, &mut |m| {
            out.push(m.clone());
            ControlFlow::Continue(())
        });
        out
    }

    pub fn for_each(&self, q: &ConjunctiveQuery, f: &mut dyn FnMut(&CqMatch) -> ControlFlow<()>) {
        let _ = self.search(q, Sink::Matches(f));
    }

    /// Distinct keys of the tuples matched by the first two atoms, for
    /// queries with at least two atoms. `key` normalises a pair or rejects
    /// it, in which case no completion is attempted.
    pub fn leading_pairs(&self, q: &ConjunctiveQuery, key: &dyn Fn(Tid, Tid) -> Option<(Tid, Tid)>) -> BTreeSet<(Tid, Tid)> {
        if q.atoms.len() < 2 {
            return BTreeSet::new();
        }
        match self.search(q, Sink::Pairs { key, found: BTreeSet::new() }) {
            Some(Sink::Pairs { found, .. }) => found,
            _ => BTreeSet::new(),
        }
    }

    fn search<'q>(&'q self, q: &'q ConjunctiveQuery, sink: Sink<'q>) -> Option<Sink<'q>> {
        let mut names: Vec<&str> = Vec::new();
        let var_id = |v: &'q str, names: &mut Vec<&'q str>| match names.iter().position(|n| *n == v) {
            Some(i) => i,
            None => {
                names.push(v);
                names.len() - 1
            }
        };
        let mut atoms = Vec::with_capacity(q.atoms.len());
        for a in &q.atoms {
            let rel = self.inst.relation(&a.relation)?;
            if rel.schema.arity() != a.vars.len() {
                return None;
            }
            atoms.push(PlannedAtom {
                rel,
                vars: a.vars.iter().map(|v| var_id(v, &mut names)).collect(),
                postings: (0..a.vars.len())
                    .map(|pos| self.index.get(&(a.relation.as_str(), pos)))
                    .collect(),
            });
        }
        let mut sims_of = vec![Vec::new(); names.len()];
        for s in &q.sims {
            let (l, r) = (var_id(&s.left, &mut names), var_id(&s.right, &mut names));
            sims_of.resize(names.len(), Vec::new());
            sims_of[l].push((s.tag.as_str(), r));
            sims_of[r].push((s.tag.as_str(), l));
        }
        let mut search = Search {
            ev: self,
            atoms,
            binding: vec![None; names.len()],
            names,
            distinct: &q.distinct,
            assigned: vec![None; q.atoms.len()],
            sims_of,
            sink,
        };
        let _ = search.run();
        Some(search.sink)
    }
}

impl<'q, 'a> Search<'q, 'a> {
    /// Candidate tuples for atom `i` under the current binding, with their count.
    fn candidates(&self, i: usize) -> (usize, Cands<'q>) {
        let atom = &self.atoms[i];
        let mut best = (atom.rel.tuples.len(), Cands::All);
        for (pos, &var) in atom.vars.iter().enumerate() {
            if let Some(v) = self.binding[var] {
                let list: &'q [Tid] = atom.postings[pos]
                    .and_then(|m| m.get(v))
                    .map_or(&[], Vec::as_slice);
                if list.len() < best.0 {
                    best = (list.len(), Cands::Slice(list));
                }
                continue;
            }
            for &(tag, other) in &self.sims_of[var] {
                let Some(u) = self.binding[other] else { continue };
                let mut list: Vec<Tid> = Vec::new();
                if !u.is_null() {
                    if let Some(m) = atom.postings[pos] {
                        for n in std::iter::once(u).chain(self.ev.sims.neighbors_iter(tag, u)) {
                            if let Some(ts) = m.get(n) {
                                list.extend_from_slice(ts);
                            }
                        }
                    }
                    list.sort_unstable();
                    list.dedup();
                }
                if list.len() < best.0 {
                    best = (list.len(), Cands::Owned(list));
                }
            }
        }
        best
    }

    fn leading_key(&self) -> Option<Option<(Tid, Tid)>> {
        match (&self.sink, self.assigned[0], self.assigned.get(1).copied().flatten()) {
            (Sink::Pairs { key, .. }, Some(a), Some(b)) => Some(key(a, b)),
            _ => None,
        }
    }

    fn run(&mut self) -> ControlFlow<()> {
        let lead = self.leading_key();
        if let (Some(k), Sink::Pairs { found, .. }) = (lead, &self.sink) {
            match k {
                Some(k) if !found.contains(&k) => {}
                _ => return ControlFlow::Continue(()),
            }
        }
        let mut pick: Option<(usize, usize, Cands<'q>)> = None;
        for i in 0..self.atoms.len() {
            if self.assigned[i].is_some() {
                continue;
            }
            let (n, c) = self.candidates(i);
            if pick.as_ref().map_or(true, |(_, b, _)| n < *b) {
                pick = Some((i, n, c));
            }
        }
        let Some((i, _, cands)) = pick else {
            return self.emit(lead);
        };
        let rel = self.atoms[i].rel;
        let list: Vec<Tid> = match cands {
            Cands::All => rel.tuples.keys().copied().collect(),
            Cands::Slice(s) => s.to_vec(),
            Cands::Owned(v) => v,
        };
        for tid in list {
            if let Some(newly) = self.try_bind(i, tid) {
                self.assigned[i] = Some(tid);
                let flow = self.run();
                self.assigned[i] = None;
                for v in newly {
                    self.binding[v] = None;
                }
                flow?;
            }
        }
        ControlFlow::Continue(())
    }

    fn emit(&mut self, lead: Option<Option<(Tid, Tid)>>) -> ControlFlow<()> {
        match &mut self.sink {
            Sink::Matches(f) => {
                let m = CqMatch {
                    tids: self.assigned.iter().map(|t| t.expect("all assigned")).collect(),
                    binding: self
                        .names
                        .iter()
                        .zip(&self.binding)
                        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v.clone())))
                        .collect(),
                };
                f(&m)
            }
            Sink::Pairs { found, .. } => {
                if let Some(Some(k)) = lead {
                    found.insert(k);
                }
                ControlFlow::Continue(())
            }
        }
    }

    /// Binds atom `i` to `tid`; returns the variables it newly bound, or
    /// `None` (with no change) when a constraint fails.
    fn try_bind(&mut self, i: usize, tid: Tid) -> Option<Vec<usize>> {
        for &(a, b) in self.distinct {
            let other = if a == i { b } else if b == i { a } else { continue };
            if self.assigned[other] == Some(tid) {
                return None;
            }
        }
        let tuple = self.atoms[i].rel.tuples.get(&tid)?;
        let mut newly: Vec<usize> = Vec::new();
        let mut ok = true;
        for (pos, &var) in self.atoms[i].vars.iter().enumerate() {
            let val = &tuple.values[pos];
            match self.binding[var] {
                Some(bound) => {
                    if bound.is_null() || val.is_null() || bound != val {
                        ok = false;
                        break;
                    }
                }
                None => {
                    self.binding[var] = Some(val);
                    newly.push(var);
                }
            }
        }
        if ok {
            'sims: for &v in &newly {
                for &(tag, other) in &self.sims_of[v] {
                    if let (Some(x), Some(y)) = (self.binding[v], self.binding[other]) {
                        if !self.ev.sims.similar(tag, x, y) {
                            ok = false;
                            break 'sims;
                        }
                    }
                }
            }
        }
        if ok {
            Some(newly)
        } else {
            for v in newly {
                self.binding[v] = None;
            }
            None
        }
    }
}
