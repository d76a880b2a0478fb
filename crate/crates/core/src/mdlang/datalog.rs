//! Text rendering of the stratified programs equivalent to blocking and
//! merging MD sets. Documentation output only; the chase is what executes.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::relcore::{AttrKind, RelationSchema};

use super::model::{is_anonymous, Atom, Catalog, MatchDependency};
use super::MdError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgramMode {
    Blocking,
    Merging,
}

fn var(v: &str) -> String {
    if is_anonymous(v) {
        return "_".into();
    }
    let mut cs = v.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

fn functional(rel: &str, vars: &[String], value: &str) -> String {
    format!("{}[{}] = {}", rel, vars.join(", "), value)
}

fn render_atom(a: &Atom, schema: &RelationSchema, block_override: Option<&str>) -> String {
    let vars: Vec<String> = a.vars.iter().map(|v| var(v)).collect();
    match schema.block_position() {
        Some(b) => functional(&a.relation, &vars[..b], block_override.map_or(&vars[b], |s| s)),
        None => format!("{}({})", a.relation, vars.join(", ")),
    }
}

fn schema_for<'c>(catalog: &'c Catalog, md: &MatchDependency, rel: &str) -> Result<&'c RelationSchema, MdError> {
    catalog.get(rel).ok_or_else(|| MdError::UnknownRelation {
        md: md.name.clone(),
        relation: rel.to_string(),
    })
}

fn tail_vars(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn blocking_rule(md: &MatchDependency, catalog: &Catalog) -> Result<String, MdError> {
    let mut body = Vec::new();
    let mut head = Vec::new();
    let y2 = var(&md.identity.1);
    for (k, lead) in md.leading.iter().enumerate() {
        let schema = schema_for(catalog, md, &lead.relation)?;
        if schema.block_position() != Some(md.identity_pos(k)) {
            return Err(MdError::ModeMismatch {
                md: md.name.clone(),
                reason: "blocking rules must identify block-number attributes".into(),
            });
        }
        head.push(render_atom(lead, schema, Some(&y2)));
        body.push(render_atom(lead, schema, None));
    }
    for a in &md.context {
        body.push(render_atom(a, schema_for(catalog, md, &a.relation)?, None));
    }
    for s in &md.sims {
        if s.tag.ends_with(".Bl") {
            return Err(MdError::ModeMismatch {
                md: md.name.clone(),
                reason: "block numbers cannot be compared by similarity".into(),
            });
        }
        body.push(format!("{}-Sim({}, {})", s.tag, var(&s.left), var(&s.right)));
    }
    body.push(format!("{} < {}", var(&md.identity.0), y2));
    Ok(format!("{} <-\n    {}.", head.join(", "), body.join(",\n    ")))
}

fn block_scaffold(out: &mut String, rel: &str, tail: usize) {
    let xs = [vec!["Rid".to_string()], tail_vars("X", tail)].concat();
    let args = xs.join(", ");
    let _ = writeln!(
        out,
        "{rel}-OldVer({args}, Bl1) <- {}, {}, Bl1 < Bl2.",
        functional(rel, &xs, "Bl1"),
        functional(rel, &xs, "Bl2")
    );
    let _ = writeln!(
        out,
        "{} <- {}, not {rel}-OldVer({args}, Bl).",
        functional(&format!("{rel}-Block"), &xs, "Bl"),
        functional(rel, &xs, "Bl")
    );
}

fn merge_scaffold(out: &mut String, rel: &str, tail: usize) {
    let xs = tail_vars("X", tail).join(", ");
    let ys = tail_vars("Y", tail).join(", ");
    let zs = tail_vars("Z", tail).join(", ");
    let mfs: Vec<String> = (1..=tail).map(|i| format!("m{i}(X{i}, Y{i}) = Z{i}")).collect();
    let _ = writeln!(out, "% 2. merge rule");
    let _ = writeln!(
        out,
        "{rel}(R1, {zs}), {rel}(R2, {zs}) <-\n    {rel}-Duplicate(R1, R2), {rel}(R1, {xs}), {rel}(R2, {ys}),\n    {}.",
        mfs.join(", ")
    );
    let _ = writeln!(out, "% 3. old versions");
    let _ = writeln!(out, "{rel}-OldVer(R1, {xs}) <- {rel}(R1, {xs}), {rel}(R1, {ys}), ({xs}) < ({ys}).");
    let _ = writeln!(out, "% 4. latest versions");
    let _ = writeln!(out, "{rel}-ER(R1, {xs}) <- {rel}(R1, {xs}), not {rel}-OldVer(R1, {xs}).");
}

pub fn emit_datalog(mds: &[MatchDependency], catalog: &Catalog, mode: ProgramMode) -> Result<String, MdError> {
    let mut out = String::new();
    let mut targets: BTreeSet<String> = BTreeSet::new();
    match mode {
        ProgramMode::Blocking => {
            let _ = writeln!(out, "% 1. R[Rid, X1, ..., Xn] = Rid for every initial tuple");
            let tags: BTreeSet<&str> = mds.iter().flat_map(|m| m.sims.iter().map(|s| s.tag.as_str())).collect();
            let _ = writeln!(out, "% 2. similarity facts");
            for t in &tags {
                let _ = writeln!(out, "%    {t}-Sim(A1, A2)");
            }
            for md in mds {
                md.validate(catalog)?;
                let _ = writeln!(out, "% 3. {}", md.name);
                let _ = writeln!(out, "{}", blocking_rule(md, catalog)?);
                targets.extend(md.leading.iter().map(|a| a.relation.clone()));
            }
            if targets.is_empty() {
                let _ = writeln!(out, "% 4. old versions\n% 5. latest versions form blocks");
                block_scaffold(&mut out, "R", 1);
            }
            for rel in &targets {
                let tail = catalog[rel].arity() - 2;
                let _ = writeln!(out, "% 4. old versions\n% 5. latest versions form blocks");
                block_scaffold(&mut out, rel, tail);
            }
        }
        ProgramMode::Merging => {
            for md in mds {
                md.validate(catalog)?;
                for k in 0..2 {
                    let schema = &catalog[&md.leading[k].relation];
                    if schema.attr(md.identity_pos(k)).kind == AttrKind::BlockNumber {
                        return Err(MdError::ModeMismatch {
                            md: md.name.clone(),
                            reason: "merge rules cannot identify block numbers".into(),
                        });
                    }
                }
                targets.extend(md.leading.iter().map(|a| a.relation.clone()));
            }
            let _ = writeln!(out, "% 1. R-Duplicate(R1, R2) facts and m_A(A1, A2) = A3 facts");
            if targets.is_empty() {
                merge_scaffold(&mut out, "R", 1);
            }
            for rel in &targets {
                merge_scaffold(&mut out, rel, catalog[rel].tail_positions().len());
            }
        }
    }
    Ok(out)
}
