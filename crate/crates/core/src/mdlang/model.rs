use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::relcore::{Instance, RelationSchema};

use super::MdError;

pub type Catalog = BTreeMap<String, RelationSchema>;

pub fn catalog_of(inst: &Instance) -> Catalog {
    inst.schemas().map(|s| (s.name().to_string(), s.clone())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: String,
    /// Variable per attribute position; position 0 is the tid variable.
    pub vars: Vec<String>,
}

impl Atom {
    pub fn new(relation: &str, vars: &[&str]) -> Self {
        Atom {
            relation: relation.to_string(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimAtom {
    pub tag: String,
    pub left: String,
    pub right: String,
}

/// Attribute position inside an MD: atom index (leading atoms first) and
/// column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub atom: usize,
    pub pos: usize,
}

/// Implicit equality from a repeated variable, relative to its first site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EqualityAtom {
    pub var: String,
    pub first: Site,
    pub other: Site,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrRef {
    pub relation: String,
    pub attribute: String,
}

impl AttrRef {
    pub fn new(relation: &str, attribute: &str) -> Self {
        AttrRef {
            relation: relation.to_string(),
            attribute: attribute.to_string(),
        }
    }
}

impl fmt::Display for AttrRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.relation, self.attribute)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatchDependency {
    pub name: String,
    pub leading: [Atom; 2],
    pub context: Vec<Atom>,
    pub sims: Vec<SimAtom>,
    pub identity: (String, String),
    pub equalities: Vec<EqualityAtom>,
}

pub(crate) fn is_anonymous(var: &str) -> bool {
    var.starts_with("_#")
}

impl MatchDependency {
    pub fn new(
        name: &str,
        leading: [Atom; 2],
        context: Vec<Atom>,
        sims: Vec<SimAtom>,
        identity: (&str, &str),
    ) -> Result<Self, MdError> {
        let mut md = MatchDependency {
            name: name.to_string(),
            leading,
            context,
            sims,
            identity: (identity.0.to_string(), identity.1.to_string()),
            equalities: Vec::new(),
        };
        md.check_shape()?;
        md.equalities = md.compute_equalities();
        Ok(md)
    }

    fn check_shape(&self) -> Result<(), MdError> {
        let bound: BTreeSet<&str> = self
            .atoms()
            .flat_map(|a| a.vars.iter().map(String::as_str))
            .collect();
        for s in &self.sims {
            for v in [&s.left, &s.right] {
                if !bound.contains(v.as_str()) {
                    return Err(MdError::UnboundVariable {
                        md: self.name.clone(),
                        var: v.clone(),
                    });
                }
            }
        }
        for (k, y) in [&self.identity.0, &self.identity.1].into_iter().enumerate() {
            if !bound.contains(y.as_str()) {
                return Err(MdError::UnboundVariable {
                    md: self.name.clone(),
                    var: y.clone(),
                });
            }
            match self.leading[k].vars.iter().position(|v| v == y) {
                Some(0) => {
                    return Err(MdError::InvalidIdentity {
                        md: self.name.clone(),
                        reason: format!("{y} is a tid variable"),
                    })
                }
                Some(_) => {}
                None => {
                    return Err(MdError::IdentityOutsideLeadingAtoms {
                        md: self.name.clone(),
                        var: y.clone(),
                    })
                }
            }
        }
        if !self.context.is_empty() {
            let ctx: BTreeSet<&str> = self
                .context
                .iter()
                .flat_map(|a| a.vars.iter().map(String::as_str))
                .collect();
            for lead in &self.leading {
                if !lead.vars.iter().any(|v| ctx.contains(v.as_str())) {
                    return Err(MdError::DisconnectedContext {
                        md: self.name.clone(),
                        relation: lead.relation.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    fn compute_equalities(&self) -> Vec<EqualityAtom> {
        let mut first: BTreeMap<&str, Site> = BTreeMap::new();
        let mut out = Vec::new();
        for (ai, atom) in self.atoms().enumerate() {
            for (pos, v) in atom.vars.iter().enumerate() {
                let site = Site { atom: ai, pos };
                match first.get(v.as_str()) {
                    Some(f) => out.push(EqualityAtom {
                        var: v.clone(),
                        first: *f,
                        other: site,
                    }),
                    None => {
                        first.insert(v, site);
                    }
                }
            }
        }
        out
    }

    /// Leading atoms followed by context atoms.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.leading.iter().chain(self.context.iter())
    }

    pub fn atom(&self, i: usize) -> &Atom {
        if i < 2 {
            &self.leading[i]
        } else {
            &self.context[i - 2]
        }
    }

    pub fn atom_count(&self) -> usize {
        2 + self.context.len()
    }

    pub fn is_classical(&self) -> bool {
        self.context.is_empty()
    }

    pub fn sites_of(&self, var: &str) -> Vec<Site> {
        let mut out = Vec::new();
        for (ai, atom) in self.atoms().enumerate() {
            for (pos, v) in atom.vars.iter().enumerate() {
                if v == var {
                    out.push(Site { atom: ai, pos });
                }
            }
        }
        out
    }

    /// Column of the identity variable in leading atom `k`.
    pub fn identity_pos(&self, k: usize) -> usize {
        let y = if k == 0 { &self.identity.0 } else { &self.identity.1 };
        self.leading[k]
            .vars
            .iter()
            .position(|v| v == y)
            .expect("validated identity variable")
    }

    pub fn validate(&self, catalog: &Catalog) -> Result<(), MdError> {
        for atom in self.atoms() {
            let schema = catalog
                .get(&atom.relation)
                .ok_or_else(|| MdError::UnknownRelation {
                    md: self.name.clone(),
                    relation: atom.relation.clone(),
                })?;
            if schema.arity() != atom.vars.len() {
                return Err(MdError::ArityMismatch {
                    md: self.name.clone(),
                    relation: atom.relation.clone(),
                    expected: schema.arity(),
                    found: atom.vars.len(),
                });
            }
        }
        Ok(())
    }

    pub fn attr_at(&self, site: Site, catalog: &Catalog) -> AttrRef {
        let atom = self.atom(site.atom);
        let schema = &catalog[&atom.relation];
        AttrRef::new(&atom.relation, &schema.attr(site.pos).name)
    }

    /// Rule text accepted by the parser.
    pub fn render(&self) -> String {
        let mut items: Vec<String> = self.atoms().map(render_atom).collect();
        items.extend(
            self.sims
                .iter()
                .map(|s| format!("sim({}: {}, {})", s.tag, show_var(&s.left), show_var(&s.right))),
        );
        format!(
            "md {}: {} -> ident({}, {});",
            self.name,
            items.join(", "),
            self.identity.0,
            self.identity.1
        )
    }
}

fn show_var(v: &str) -> &str {
    if is_anonymous(v) {
        "_"
    } else {
        v
    }
}

fn render_atom(a: &Atom) -> String {
    let vars: Vec<&str> = a.vars.iter().map(|v| show_var(v)).collect();
    format!("{}({})", a.relation, vars.join(", "))
}

impl fmt::Display for MatchDependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
