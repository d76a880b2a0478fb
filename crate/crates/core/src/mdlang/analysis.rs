use std::collections::BTreeSet;

use super::model::{AttrRef, Catalog, MatchDependency, Site};

/// Sites whose column takes part in a comparison: sim-atom variables and
/// variables repeated across non-tid positions.
pub fn compared_sites(md: &MatchDependency) -> BTreeSet<Site> {
    let mut out = BTreeSet::new();
    for s in &md.sims {
        for v in [&s.left, &s.right] {
            out.extend(md.sites_of(v).into_iter().filter(|s| s.pos > 0));
        }
    }
    for eq in &md.equalities {
        if eq.first.pos > 0 && eq.other.pos > 0 {
            out.insert(eq.first);
            out.insert(eq.other);
        }
    }
    out
}

pub fn alhs(md: &MatchDependency, catalog: &Catalog) -> BTreeSet<AttrRef> {
    compared_sites(md)
        .into_iter()
        .map(|s| md.attr_at(s, catalog))
        .collect()
}

pub fn arhs(md: &MatchDependency, catalog: &Catalog) -> [AttrRef; 2] {
    [0, 1].map(|k| {
        md.attr_at(
            Site {
                atom: k,
                pos: md.identity_pos(k),
            },
            catalog,
        )
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdAnalysis {
    pub name: String,
    pub alhs: BTreeSet<AttrRef>,
    pub arhs: [AttrRef; 2],
}

pub fn analyze(mds: &[MatchDependency], catalog: &Catalog) -> Vec<MdAnalysis> {
    mds.iter()
        .map(|md| MdAnalysis {
            name: md.name.clone(),
            alhs: alhs(md, catalog),
            arhs: arhs(md, catalog),
        })
        .collect()
}

/// Ordered interaction cases `(i, j, R[A])` with `R[A] ∈ ARHS(φi) ∩ ALHS(φj)`.
pub fn interaction_cases(mds: &[MatchDependency], catalog: &Catalog) -> Vec<(usize, usize, AttrRef)> {
    let an = analyze(mds, catalog);
    let mut out = Vec::new();
    for (i, a1) in an.iter().enumerate() {
        let rhs: BTreeSet<&AttrRef> = a1.arhs.iter().collect();
        for (j, a2) in an.iter().enumerate() {
            for attr in rhs.iter().filter(|r| a2.alhs.contains(**r)) {
                out.push((i, j, (*attr).clone()));
            }
        }
    }
    out
}

pub fn is_interaction_free(mds: &[MatchDependency], catalog: &Catalog) -> bool {
    interaction_cases(mds, catalog).is_empty()
}
