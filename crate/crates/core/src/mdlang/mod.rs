//! Matching-dependency language: rule model and parser, matching functions,
//! interaction analysis, the SFAI check and program rendering.

pub mod analysis;
pub mod cq;
pub mod datalog;
pub mod mf;
mod model;
mod parser;
pub mod sfai;

pub use analysis::{alhs, arhs, interaction_cases, is_interaction_free, MdAnalysis};
pub use datalog::{emit_datalog, ProgramMode};
pub use mf::{
    check_mf_laws, closure, is_similarity_preserving, is_similarity_preserving_in_store, MatchingFunctionDef,
    MfKind, MfRegistry, CLOSURE_BUDGET,
};
pub use model::{catalog_of, Atom, AttrRef, Catalog, EqualityAtom, MatchDependency, SimAtom, Site};
pub use parser::{parse_md, parse_mds};
pub use sfai::{build_sfai_queries, is_sfai, SfaiQuery, SfaiVerdict, SfaiWitness};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MdError {
    #[error("syntax error at byte {pos}: expected {expected}, found {found:?}")]
    SyntaxError {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("{md}: variable {var} does not occur in any relational atom")]
    UnboundVariable { md: String, var: String },
    #[error("{md}: identity variable {var} is not in its leading atom")]
    IdentityOutsideLeadingAtoms { md: String, var: String },
    #[error("{md}: {reason}")]
    InvalidIdentity { md: String, reason: String },
    #[error("{md}: context atoms share no variable with leading atom {relation}")]
    DisconnectedContext { md: String, relation: String },
    #[error("{md}: at least two relational atoms are required")]
    MissingLeadingAtoms { md: String },
    #[error("duplicate rule name {0}")]
    DuplicateName(String),
    #[error("{md}: unknown relation {relation}")]
    UnknownRelation { md: String, relation: String },
    #[error("{md}: {relation} expects {expected} variables, found {found}")]
    ArityMismatch {
        md: String,
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("{md}: {reason}")]
    ModeMismatch { md: String, reason: String },
    #[error("no matching function for domain {0}")]
    MissingMatchingFunction(String),
    #[error("matching function for {tag} is undefined on ({left}, {right})")]
    UndefinedMerge { tag: String, left: String, right: String },
    #[error("matching function for {tag} cannot take value {value:?}")]
    MfTypeMismatch { tag: String, value: String },
    #[error("closure exceeded {budget} values")]
    ClosureBudgetExceeded { budget: usize },
}
