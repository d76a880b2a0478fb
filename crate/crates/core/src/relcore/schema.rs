use std::collections::BTreeSet;
use std::fmt;

use super::RelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttrKind {
    ShortString,
    LongText,
    NumericString,
    ReferenceId,
    BlockNumber,
}

impl AttrKind {
    pub fn parse(s: &str) -> Option<AttrKind> {
        Some(match s {
            "short-string" | "short" => AttrKind::ShortString,
            "long-text" | "long" => AttrKind::LongText,
            "numeric-string" | "numeric" => AttrKind::NumericString,
            "reference-id" | "rid" => AttrKind::ReferenceId,
            "block-number" | "block" => AttrKind::BlockNumber,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AttrKind::ShortString => "short-string",
            AttrKind::LongText => "long-text",
            AttrKind::NumericString => "numeric-string",
            AttrKind::ReferenceId => "reference-id",
            AttrKind::BlockNumber => "block-number",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttrKind,
    pub nullable: bool,
    /// Similarity / matching-function domain. `None` means the default tag.
    pub domain: Option<String>,
}

impl AttributeSpec {
    pub fn new(name: impl Into<String>, kind: AttrKind) -> Self {
        AttributeSpec {
            name: name.into(),
            kind,
            nullable: false,
            domain: None,
        }
    }

    pub fn nullable(mut self) -> Self {
        self.nullable = true;
        self
    }

    pub fn with_domain(mut self, tag: impl Into<String>) -> Self {
        self.domain = Some(tag.into());
        self
    }

    /// Parses `Name:kind`, optionally followed by `?` (nullable) and
    /// `@tag` (domain), e.g. `CID:short-string?@Venue`.
    pub fn parse(text: &str) -> Option<AttributeSpec> {
        let (name, rest) = text.trim().split_once(':')?;
        let (rest, domain) = match rest.split_once('@') {
            Some((r, d)) => (r, Some(d.trim())),
            None => (rest, None),
        };
        let (kind, nullable) = match rest.trim().strip_suffix('?') {
            Some(k) => (k, true),
            None => (rest.trim(), false),
        };
        let name = name.trim();
        if name.is_empty() || domain == Some("") {
            return None;
        }
        let mut spec = AttributeSpec::new(name, AttrKind::parse(kind)?);
        spec.nullable = nullable;
        spec.domain = domain.map(str::to_string);
        Some(spec)
    }
}

impl fmt::Display for AttributeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.kind.name())?;
        if self.nullable {
            write!(f, "?")?;
        }
        if let Some(d) = &self.domain {
            write!(f, "@{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationSchema {
    name: String,
    attrs: Vec<AttributeSpec>,
}

impl RelationSchema {
    pub fn new(name: impl Into<String>, attrs: Vec<AttributeSpec>) -> Result<Self, RelError> {
        let name = name.into();
        let bad = |reason: &str| RelError::InvalidSchema {
            relation: name.clone(),
            reason: reason.to_string(),
        };
        match attrs.first() {
            Some(a) if a.kind == AttrKind::ReferenceId => {}
            _ => return Err(bad("position 0 must be the reference-id attribute")),
        }
        if attrs[0].nullable {
            return Err(bad("reference-id cannot be nullable"));
        }
        if attrs[1..].iter().any(|a| a.kind == AttrKind::ReferenceId) {
            return Err(bad("only one reference-id attribute allowed"));
        }
        let blocks: Vec<usize> = attrs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.kind == AttrKind::BlockNumber)
            .map(|(i, _)| i)
            .collect();
        if blocks.len() > 1 {
            return Err(bad("at most one block-number attribute allowed"));
        }
        if let Some(&i) = blocks.first() {
            if i != attrs.len() - 1 {
                return Err(bad("block-number attribute must be last"));
            }
        }
        let mut seen = BTreeSet::new();
        for a in &attrs {
            if !seen.insert(a.name.as_str()) {
                return Err(bad(&format!("duplicate attribute name {}", a.name)));
            }
        }
        Ok(RelationSchema { name, attrs })
    }

    /// Shorthand: `RelationSchema::simple("R", &["A", "B"], true)` builds
    /// `R(tid, A, B[, Bl])` with short-string attributes.
    pub fn simple(name: &str, attrs: &[&str], with_block: bool) -> Result<Self, RelError> {
        let mut specs = vec![AttributeSpec::new("tid", AttrKind::ReferenceId)];
        specs.extend(
            attrs
                .iter()
                .map(|a| AttributeSpec::new(*a, AttrKind::ShortString)),
        );
        if with_block {
            specs.push(AttributeSpec::new("Bl", AttrKind::BlockNumber));
        }
        RelationSchema::new(name, specs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attrs(&self) -> &[AttributeSpec] {
        &self.attrs
    }

    pub fn arity(&self) -> usize {
        self.attrs.len()
    }

    pub fn position(&self, attr: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a.name == attr)
    }

    pub fn attr(&self, pos: usize) -> &AttributeSpec {
        &self.attrs[pos]
    }

    pub fn block_position(&self) -> Option<usize> {
        self.attrs
            .iter()
            .position(|a| a.kind == AttrKind::BlockNumber)
    }

    /// Domain tag of an attribute. Block numbers get one domain per relation.
    pub fn domain_tag(&self, pos: usize) -> String {
        let a = &self.attrs[pos];
        match (&a.domain, a.kind) {
            (Some(d), _) => d.clone(),
            (None, AttrKind::BlockNumber) => format!("{}.{}", self.name, a.name),
            (None, _) => a.name.clone(),
        }
    }

    /// Positions other than the rid and the block number.
    pub fn tail_positions(&self) -> Vec<usize> {
        (1..self.attrs.len())
            .filter(|&i| self.attrs[i].kind != AttrKind::BlockNumber)
            .collect()
    }
}

impl fmt::Display for RelationSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.attrs.iter().map(|a| a.name.as_str()).collect();
        write!(f, "{}({})", self.name, names.join(", "))
    }
}
