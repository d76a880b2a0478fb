use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::relcore::{MergeLookup, SimilarityFactStore, Value};

use super::MdError;

pub const CLOSURE_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MfKind {
    /// Numeric maximum; non-numeric text sorts above every number.
    MaxNumeric,
    /// Key-wise union of object-sets; atomic values are lifted under
    /// `lift_key` (the domain tag when unset).
    UnionObjectSet { lift_key: Option<String> },
    /// Explicit table. `(a, b)` is looked up, then `(b, a)`; `m(a, a) = a`.
    Table(BTreeMap<(Value, Value), Value>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingFunctionDef {
    pub domain_tag: String,
    pub kind: MfKind,
}

fn numeric_key(v: &str) -> (u8, f64, &str) {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => (0, x, v),
        _ => (1, 0.0, v),
    }
}

fn cmp_numeric(a: &str, b: &str) -> Ordering {
    let (ka, xa, sa) = numeric_key(a);
    let (kb, xb, sb) = numeric_key(b);
    ka.cmp(&kb)
        .then(xa.partial_cmp(&xb).unwrap_or(Ordering::Equal))
        .then(sa.cmp(sb))
}

impl MatchingFunctionDef {
    pub fn max_numeric(tag: &str) -> Self {
        MatchingFunctionDef {
            domain_tag: tag.to_string(),
            kind: MfKind::MaxNumeric,
        }
    }

    pub fn union(tag: &str, lift_key: Option<&str>) -> Self {
        MatchingFunctionDef {
            domain_tag: tag.to_string(),
            kind: MfKind::UnionObjectSet {
                lift_key: lift_key.map(str::to_string),
            },
        }
    }

    pub fn table(tag: &str, entries: &[(&str, &str, &str)]) -> Self {
        let map = entries
            .iter()
            .map(|(a, b, c)| ((Value::atomic(*a), Value::atomic(*b)), Value::atomic(*c)))
            .collect();
        MatchingFunctionDef {
            domain_tag: tag.to_string(),
            kind: MfKind::Table(map),
        }
    }

    pub fn apply(&self, a: &Value, b: &Value) -> Result<Value, MdError> {
        if a.is_null() {
            return Ok(b.clone());
        }
        if b.is_null() || a == b {
            return Ok(a.clone());
        }
        match &self.kind {
            MfKind::MaxNumeric => match (a, b) {
                (Value::Atomic(x), Value::Atomic(y)) => Ok(if cmp_numeric(x, y) == Ordering::Less {
                    b.clone()
                } else {
                    a.clone()
                }),
                _ => Err(MdError::MfTypeMismatch {
                    tag: self.domain_tag.clone(),
                    value: if a.as_atomic().is_none() { a.render() } else { b.render() },
                }),
            },
            MfKind::UnionObjectSet { lift_key } => {
                let key = lift_key.as_deref().unwrap_or(&self.domain_tag);
                Ok(Value::ObjectSet(a.lift(key).union(&b.lift(key))))
            }
            MfKind::Table(map) => map
                .get(&(a.clone(), b.clone()))
                .or_else(|| map.get(&(b.clone(), a.clone())))
                .cloned()
                .ok_or_else(|| MdError::UndefinedMerge {
                    tag: self.domain_tag.clone(),
                    left: a.render(),
                    right: b.render(),
                }),
        }
    }

    /// `a ⪯ b` iff `m(a, b) = b`.
    pub fn leq(&self, a: &Value, b: &Value) -> bool {
        matches!(self.apply(a, b), Ok(m) if &m == b)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MfRegistry {
    defs: BTreeMap<String, MatchingFunctionDef>,
}

impl MfRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, def: MatchingFunctionDef) {
        self.defs.insert(def.domain_tag.clone(), def);
    }

    pub fn with(mut self, def: MatchingFunctionDef) -> Self {
        self.register(def);
        self
    }

    pub fn get(&self, tag: &str) -> Option<&MatchingFunctionDef> {
        self.defs.get(tag)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MatchingFunctionDef> {
        self.defs.values()
    }

    pub fn merge(&self, tag: &str, a: &Value, b: &Value) -> Result<Value, MdError> {
        self.get(tag)
            .ok_or_else(|| MdError::MissingMatchingFunction(tag.to_string()))?
            .apply(a, b)
    }
}

impl MergeLookup for MfRegistry {
    fn merge_values(&self, tag: &str, a: &Value, b: &Value) -> Option<Value> {
        self.merge(tag, a, b).ok()
    }
}

/// Smallest superset of `sample` closed under `mf`. An undefined table entry
/// is reported as an error, as is exceeding `budget` values.
pub fn closure(mf: &MatchingFunctionDef, sample: &BTreeSet<Value>, budget: usize) -> Result<BTreeSet<Value>, MdError> {
    let mut all: Vec<Value> = sample.iter().filter(|v| !v.is_null()).cloned().collect();
    let mut seen: BTreeSet<Value> = all.iter().cloned().collect();
    if seen.len() > budget {
        return Err(MdError::ClosureBudgetExceeded { budget });
    }
    let mut frontier = 0;
    while frontier < all.len() {
        let end = all.len();
        for i in frontier..end {
            for j in 0..end {
                let m = mf.apply(&all[i], &all[j])?;
                if seen.insert(m.clone()) {
                    if seen.len() > budget {
                        return Err(MdError::ClosureBudgetExceeded { budget });
                    }
                    all.push(m);
                }
            }
        }
        frontier = end;
    }
    Ok(seen)
}

fn closure_or_false(mf: &MatchingFunctionDef, sample: &BTreeSet<Value>) -> Result<Option<Vec<Value>>, MdError> {
    match closure(mf, sample, CLOSURE_BUDGET) {
        Ok(c) => Ok(Some(c.into_iter().collect())),
        Err(MdError::ClosureBudgetExceeded { budget }) => Err(MdError::ClosureBudgetExceeded { budget }),
        Err(_) => Ok(None),
    }
}

/// Idempotence, commutativity, associativity and `a ⪯ m(a, a')` on the
/// closure of `sample`. A partial table counts as a violation.
pub fn check_mf_laws(mf: &MatchingFunctionDef, sample: &BTreeSet<Value>) -> Result<bool, MdError> {
    let Some(c) = closure_or_false(mf, sample)? else {
        return Ok(false);
    };
    let m = |a: &Value, b: &Value| mf.apply(a, b).ok();
    for a in &c {
        if m(a, a).as_ref() != Some(a) {
            return Ok(false);
        }
    }
    for a in &c {
        for b in &c {
            let ab = m(a, b);
            if ab != m(b, a) {
                return Ok(false);
            }
            let Some(ab) = ab else { return Ok(false) };
            if !mf.leq(a, &ab) || !mf.leq(b, &ab) {
                return Ok(false);
            }
            for d in &c {
                let left = m(&ab, d);
                let right = m(b, d).and_then(|bd| m(a, &bd));
                if left.is_none() || left != right {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `a ≈ a'` implies `a ≈ m(a', a'')` for all closure values; the premise
/// ranges over every similar pair, identical pairs included.
pub fn is_similarity_preserving(
    mf: &MatchingFunctionDef,
    sample: &BTreeSet<Value>,
    sim: &dyn Fn(&Value, &Value) -> bool,
) -> Result<bool, MdError> {
    let Some(c) = closure_or_false(mf, sample)? else {
        return Ok(false);
    };
    for a in &c {
        for a1 in &c {
            if !sim(a, a1) {
                continue;
            }
            for a2 in &c {
                match mf.apply(a1, a2) {
                    Ok(m) if sim(a, &m) => {}
                    _ => return Ok(false),
                }
            }
        }
    }
    Ok(true)
}

/// Similarity-preservation where `≈` is read from stored facts of `mf`'s domain.
pub fn is_similarity_preserving_in_store(
    mf: &MatchingFunctionDef,
    store: &SimilarityFactStore,
    sample: &BTreeSet<Value>,
) -> Result<bool, MdError> {
    let tag = mf.domain_tag.clone();
    is_similarity_preserving(mf, sample, &|a, b| store.similar(&tag, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relcore::ObjectSet;
    use proptest::prelude::*;

    fn vals(xs: &[&str]) -> BTreeSet<Value> {
        xs.iter().map(|x| Value::atomic(*x)).collect()
    }

    #[test]
    fn max_numeric_laws() {
        assert!(check_mf_laws(&MatchingFunctionDef::max_numeric("Bl"), &vals(&["1", "2", "3"])).unwrap());
        let m = MatchingFunctionDef::max_numeric("Bl");
        assert_eq!(m.apply(&Value::atomic("9"), &Value::atomic("10")).unwrap(), Value::atomic("10"));
    }

    #[test]
    fn union_laws_on_singletons() {
        let a = Value::ObjectSet(ObjectSet::singleton("k", "1"));
        let b = Value::ObjectSet(ObjectSet::singleton("j", "2"));
        let sample: BTreeSet<Value> = [a, b].into_iter().collect();
        assert!(check_mf_laws(&MatchingFunctionDef::union("Addr", None), &sample).unwrap());
    }

    #[test]
    fn non_commutative_table_fails() {
        let t = MatchingFunctionDef::table("X", &[("a", "b", "c"), ("b", "a", "d")]);
        assert!(!check_mf_laws(&t, &vals(&["a", "b"])).unwrap());
    }

    #[test]
    fn unbounded_closure_hits_budget() {
        let u = MatchingFunctionDef::union("K", None);
        let sample: BTreeSet<Value> = (0..16).map(|i| Value::atomic(i.to_string())).collect();
        assert!(matches!(check_mf_laws(&u, &sample), Err(MdError::ClosureBudgetExceeded { .. })));
    }

    #[test]
    fn equality_similarity_on_a_single_value_is_preserved() {
        let m = MatchingFunctionDef::max_numeric("A");
        assert!(is_similarity_preserving(&m, &vals(&["7"]), &|a, b| a == b).unwrap());
    }

    #[test]
    fn union_with_intersection_similarity_is_preserved() {
        let u = MatchingFunctionDef::union("K", None);
        let sample: BTreeSet<Value> = ["1", "2", "3", "4"]
            .iter()
            .map(|x| Value::ObjectSet(ObjectSet::singleton("K", *x)))
            .collect();
        let inter = |a: &Value, b: &Value| a.lift("K").intersects(&b.lift("K"));
        assert!(is_similarity_preserving(&u, &sample, &inter).unwrap());
    }

    fn objset() -> impl Strategy<Value = Value> {
        prop::collection::btree_map("[a-c]", prop::collection::btree_set("[x-z]", 1..3), 0..3).prop_map(|m| {
            let mut o = ObjectSet::new();
            for (k, vs) in m {
                for v in vs {
                    o.insert(k.clone(), v);
                }
            }
            Value::ObjectSet(o)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn max_numeric_semilattice(a in 0u32..50, b in 0u32..50, c in 0u32..50) {
            let m = MatchingFunctionDef::max_numeric("N");
            let (a, b, c) = (Value::atomic(a.to_string()), Value::atomic(b.to_string()), Value::atomic(c.to_string()));
            let ab = m.apply(&a, &b).unwrap();
            prop_assert_eq!(m.apply(&a, &a).unwrap(), a.clone());
            prop_assert_eq!(&ab, &m.apply(&b, &a).unwrap());
            prop_assert_eq!(m.apply(&ab, &c).unwrap(), m.apply(&a, &m.apply(&b, &c).unwrap()).unwrap());
            prop_assert!(m.leq(&a, &ab) && m.leq(&b, &ab));
        }

        #[test]
        fn union_semilattice(a in objset(), b in objset(), c in objset()) {
            let m = MatchingFunctionDef::union("K", None);
            let ab = m.apply(&a, &b).unwrap();
            prop_assert_eq!(m.apply(&a, &a).unwrap(), a.clone());
            prop_assert_eq!(&ab, &m.apply(&b, &a).unwrap());
            prop_assert_eq!(m.apply(&ab, &c).unwrap(), m.apply(&a, &m.apply(&b, &c).unwrap()).unwrap());
            prop_assert!(m.leq(&a, &ab) && m.leq(&b, &ab));
        }
    }
}
