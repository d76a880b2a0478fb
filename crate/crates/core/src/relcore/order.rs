use std::collections::{BTreeMap, BTreeSet};

use super::{AttrKind, Instance, RelError, Value};

/// Source of matching functions, looked up by attribute domain tag.
pub trait MergeLookup {
    /// `None` when no function is registered for the domain.
    fn merge_values(&self, tag: &str, a: &Value, b: &Value) -> Option<Value>;
}

/// `a ⪯ b` iff `m(a, b) = b`; without a registered function only `a = b`.
pub fn value_leq(mfs: &dyn MergeLookup, tag: &str, a: &Value, b: &Value) -> bool {
    if a == b {
        return true;
    }
    match mfs.merge_values(tag, a, b) {
        Some(m) => &m == b,
        None => false,
    }
}

pub fn active_domain(inst: &Instance) -> BTreeMap<String, BTreeSet<Value>> {
    let mut out: BTreeMap<String, BTreeSet<Value>> = BTreeMap::new();
    for (_, rel) in inst.relations() {
        for (pos, attr) in rel.schema.attrs().iter().enumerate() {
            if attr.kind == AttrKind::ReferenceId {
                continue;
            }
            let tag = rel.schema.domain_tag(pos);
            for t in rel.iter() {
                let v = t.get(pos);
                if !v.is_null() {
                    out.entry(tag.clone()).or_default().insert(v.clone());
                }
            }
        }
    }
    out
}

/// Pointwise order on instances over the same tids and schemas.
pub fn instance_leq(d1: &Instance, d2: &Instance, mfs: &dyn MergeLookup) -> Result<bool, RelError> {
    if d1.tid_layout() != d2.tid_layout() {
        return Err(RelError::TidMismatch);
    }
    for (name, r1) in d1.relations() {
        let r2 = d2.relation(name).ok_or(RelError::TidMismatch)?;
        if r1.schema != r2.schema {
            return Err(RelError::TidMismatch);
        }
        for (tid, t1) in &r1.tuples {
            let t2 = &r2.tuples[tid];
            for pos in 1..r1.schema.arity() {
                let tag = r1.schema.domain_tag(pos);
                if !value_leq(mfs, &tag, t1.get(pos), t2.get(pos)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
