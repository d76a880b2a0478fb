#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::OnceLock;

use rand::Rng;

use mder::mdlang::{parse_mds, MatchDependency, MatchingFunctionDef, MfRegistry};
use mder::relcore::{Instance, RelationSchema, SimilarityFactStore, Tid, Tuple, Value};

/// Table MF over `{prefix}S` for non-empty `S ⊆ {1..=k}`, merging by union.
pub fn subset_mf(tag: &str, prefix: &str, k: u32) -> MatchingFunctionDef {
    let name = |mask: u32| {
        let digits: String = (1..=k).filter(|i| mask & (1 << (i - 1)) != 0).map(|i| i.to_string()).collect();
        format!("{prefix}{digits}")
    };
    let mut entries = Vec::new();
    for a in 1..(1u32 << k) {
        for b in 1..(1u32 << k) {
            entries.push((name(a), name(b), name(a | b)));
        }
    }
    let refs: Vec<(&str, &str, &str)> = entries.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    MatchingFunctionDef::table(tag, &refs)
}

pub struct Case {
    pub instance: Instance,
    pub mds: Vec<MatchDependency>,
    pub sims: SimilarityFactStore,
    pub mfs: MfRegistry,
    pub rules: String,
}

const R_ATTRS: [&str; 3] = ["A", "B", "C"];
const POOL: u32 = 5;

/// Random `R(A,B,C)` instance with up to `max_tuples` tuples (some of them in
/// `S(A,D)` when `relational`), up to `max_mds` rules and random similarity
/// facts between initial values.
pub fn random_case(rng: &mut impl Rng, max_tuples: usize, max_mds: usize, relational: bool) -> Case {
    let schemas = [
        RelationSchema::simple("R", &R_ATTRS, false).unwrap(),
        RelationSchema::simple("S", &["A", "D"], false).unwrap(),
    ];
    let mut inst = Instance::with_schemas(schemas).unwrap();
    let total = rng.gen_range(2..=max_tuples);
    let n_s = if relational && total >= 4 { rng.gen_range(1..=total - 2) } else { 0 };
    let n_r = total - n_s;
    let spread = (n_r as u32).min(POOL);
    let mut tid: Tid = 1;
    for _ in 0..n_r {
        let row: Vec<String> = R_ATTRS
            .iter()
            .map(|a| format!("{}{}", a.to_lowercase(), rng.gen_range(1..=spread)))
            .collect();
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        inst.insert_row("R", tid, &cells).unwrap();
        tid += 1;
    }
    for _ in 0..n_s {
        let a = format!("a{}", rng.gen_range(1..=spread));
        let d = format!("d{}", rng.gen_range(1..=2));
        inst.insert_row("S", tid, &[&a, &d]).unwrap();
        tid += 1;
    }

    let mut rules = String::new();
    for m in 0..rng.gen_range(1..=max_mds) {
        let mut lhs: Vec<&str> = R_ATTRS.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
        if lhs.is_empty() {
            lhs.push(R_ATTRS[rng.gen_range(0..3)]);
        }
        let rhs = R_ATTRS[rng.gen_range(0..3)].to_lowercase();
        let mut atoms = vec!["R(t1, a1, b1, c1)".to_string(), "R(t2, a2, b2, c2)".to_string()];
        if n_s > 0 && rng.gen_bool(0.5) {
            atoms.push("S(t3, a1, d)".into());
            atoms.push("S(t4, a2, d)".into());
        }
        let sims: Vec<String> = lhs
            .iter()
            .map(|a| {
                let v = a.to_lowercase();
                format!("sim({a}: {v}1, {v}2)")
            })
            .collect();
        rules.push_str(&format!(
            "md m{m}: {}, {} -> ident({rhs}1, {rhs}2);\n",
            atoms.join(", "),
            sims.join(", ")
        ));
    }

    let mut sims = SimilarityFactStore::new();
    for tag in ["A", "B", "C", "D"] {
        let p = tag.to_lowercase();
        for i in 1..=POOL {
            for j in i + 1..=POOL {
                if rng.gen_bool(0.3) {
                    sims.add(tag, &format!("{p}{i}"), &format!("{p}{j}"));
                }
            }
        }
    }
    static MFS: OnceLock<MfRegistry> = OnceLock::new();
    let mfs = MFS
        .get_or_init(|| {
            let mut mfs = MfRegistry::new();
            for tag in R_ATTRS {
                mfs.register(subset_mf(tag, &tag.to_lowercase(), POOL));
            }
            mfs
        })
        .clone();
    Case {
        instance: inst,
        mds: parse_mds(&rules).unwrap(),
        sims,
        mfs,
        rules,
    }
}

/// Direct subset enumeration of the semantic condition: the combination
/// fails when some `S1, S2 ⊆ D` share a tuple `r` of relation `R` such that
/// `LHS(φ1)` holds in `S1` with `r` as a leading tuple whose identified
/// attribute is `R[A]`, and `LHS(φ2)` holds in `S2` with `r`'s `A` value
/// compared against a different tuple. Returns true when no such case exists.
pub fn brute_force_sfai(mds: &[MatchDependency], inst: &Instance, store: &SimilarityFactStore) -> bool {
    let tuples: Vec<(String, Tuple)> = inst
        .relations()
        .flat_map(|(name, rel)| rel.iter().map(move |t| (name.to_string(), t.clone())))
        .collect();
    assert!(tuples.len() <= 12, "subset enumeration is exponential");
    let facts: HashSet<(String, Value, Value)> = store
        .facts()
        .map(|(t, a, b)| (t.to_string(), a.clone(), b.clone()))
        .collect();
    let similar = |tag: &str, a: &Value, b: &Value| a == b || facts.contains(&(tag.to_string(), a.clone(), b.clone()));
    let attr_name = |rel: &str, pos: usize| inst.schema(rel).unwrap().attr(pos).name.clone();

    // Homomorphisms of an MD premise into the tuples selected by `mask`, as
    // the tuple index chosen for each atom.
    let homs = |md: &MatchDependency, mask: u32| -> Vec<Vec<usize>> {
        let atoms: Vec<_> = md.atoms().collect();
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        fn rec(
            atoms: &[&mder::mdlang::Atom],
            tuples: &[(String, Tuple)],
            mask: u32,
            chosen: &mut Vec<usize>,
            bind: &mut BTreeMap<String, Value>,
            out: &mut Vec<Vec<usize>>,
        ) {
            let i = chosen.len();
            if i == atoms.len() {
                out.push(chosen.clone());
                return;
            }
            for (k, (rel, t)) in tuples.iter().enumerate() {
                if mask & (1 << k) == 0 || rel != &atoms[i].relation {
                    continue;
                }
                let mut added = Vec::new();
                let mut ok = true;
                for (v, val) in atoms[i].vars.iter().zip(&t.values) {
                    match bind.get(v) {
                        Some(b) if b != val => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            bind.insert(v.clone(), val.clone());
                            added.push(v.clone());
                        }
                    }
                }
                if ok {
                    chosen.push(k);
                    rec(atoms, tuples, mask, chosen, bind, out);
                    chosen.pop();
                }
                for v in added {
                    bind.remove(&v);
                }
            }
        }
        rec(&atoms, &tuples, mask, &mut chosen, &mut BTreeMap::new(), &mut out);
        out.retain(|h| {
            if h[0] == h[1] {
                return false;
            }
            let val = |var: &str| {
                for (ai, a) in atoms.iter().enumerate() {
                    if let Some(p) = a.vars.iter().position(|v| v == var) {
                        return tuples[h[ai]].1.values[p].clone();
                    }
                }
                unreachable!("sim variable not bound by any atom")
            };
            md.sims.iter().all(|s| similar(&s.tag, &val(&s.left), &val(&s.right)))
        });
        out
    };

    // Tuples that can play the φ1 role (leading, identified attribute R[A]).
    let rhs_roles = |md: &MatchDependency, mask: u32, rel: &str, attr: &str| -> BTreeSet<usize> {
        let ids = [&md.identity.0, &md.identity.1];
        let mut out = BTreeSet::new();
        for h in homs(md, mask) {
            for k in 0..2 {
                let lead = &md.leading[k];
                let pos = lead.vars.iter().position(|v| v == ids[k]).unwrap();
                if lead.relation == rel && attr_name(rel, pos) == attr {
                    out.insert(h[k]);
                }
            }
        }
        out
    };

    // Tuples that can play the φ2 role (their R[A] value compared with another tuple).
    let lhs_roles = |md: &MatchDependency, mask: u32, rel: &str, attr: &str| -> BTreeSet<usize> {
        let atoms: Vec<_> = md.atoms().collect();
        let mut out = BTreeSet::new();
        for h in homs(md, mask) {
            for (ai, a) in atoms.iter().enumerate() {
                if a.relation != rel {
                    continue;
                }
                for (p, v) in a.vars.iter().enumerate().skip(1) {
                    if attr_name(rel, p) != attr {
                        continue;
                    }
                    let mut partners: BTreeSet<&String> = [v].into_iter().collect();
                    for s in &md.sims {
                        if &s.left == v {
                            partners.insert(&s.right);
                        }
                        if &s.right == v {
                            partners.insert(&s.left);
                        }
                    }
                    let compared = atoms.iter().enumerate().any(|(bi, b)| {
                        bi != ai && h[bi] != h[ai] && b.vars.iter().skip(1).any(|w| partners.contains(w))
                    });
                    if compared {
                        out.insert(h[ai]);
                    }
                }
            }
        }
        out
    };

    // Interaction cases, recomputed from the rule text.
    let compared_attrs = |md: &MatchDependency| -> BTreeSet<(String, String)> {
        let atoms: Vec<_> = md.atoms().collect();
        let mut count: HashMap<&String, usize> = HashMap::new();
        for a in &atoms {
            for v in a.vars.iter().skip(1) {
                *count.entry(v).or_default() += 1;
            }
        }
        let sim_vars: BTreeSet<&String> = md.sims.iter().flat_map(|s| [&s.left, &s.right]).collect();
        let mut out = BTreeSet::new();
        for a in &atoms {
            for (p, v) in a.vars.iter().enumerate().skip(1) {
                if sim_vars.contains(v) || count[v] > 1 {
                    out.insert((a.relation.clone(), attr_name(&a.relation, p)));
                }
            }
        }
        out
    };
    let rhs_attrs = |md: &MatchDependency| -> BTreeSet<(String, String)> {
        let ids = [&md.identity.0, &md.identity.1];
        (0..2)
            .map(|k| {
                let lead = &md.leading[k];
                let pos = lead.vars.iter().position(|v| v == ids[k]).unwrap();
                (lead.relation.clone(), attr_name(&lead.relation, pos))
            })
            .collect()
    };

    let full = (1u32 << tuples.len()) - 1;
    for phi1 in mds {
        for phi2 in mds {
            for (rel, attr) in rhs_attrs(phi1).intersection(&compared_attrs(phi2)) {
                let r1: Vec<BTreeSet<usize>> = (0..=full).map(|m| rhs_roles(phi1, m, rel, attr)).collect();
                let r2: Vec<BTreeSet<usize>> = (0..=full).map(|m| lhs_roles(phi2, m, rel, attr)).collect();
                for s1 in 0..=full {
                    for s2 in 0..=full {
                        if r1[s1 as usize].intersection(&r2[s2 as usize]).next().is_some() {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}
