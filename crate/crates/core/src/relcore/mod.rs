//! Relational data model: schemas, identified tuples, atomic and object-set
//! values, instances, similarity facts and the information order on instances.

mod csvio;
mod instance;
mod order;
mod schema;
mod simstore;
mod value;

pub use csvio::{
    load_csv, load_csv_reader, load_sim_facts, load_sim_facts_reader, write_relation_csv, write_sim_facts,
};
pub use instance::{Instance, Relation, Tid, Tuple};
pub use order::{active_domain, instance_leq, value_leq, MergeLookup};
pub use schema::{AttrKind, AttributeSpec, RelationSchema};
pub use simstore::SimilarityFactStore;
pub use value::{ObjectSet, Value};

#[derive(Debug, thiserror::Error)]
pub enum RelError {
    #[error("invalid schema for {relation}: {reason}")]
    InvalidSchema { relation: String, reason: String },
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("unknown tid {0}")]
    UnknownTid(Tid),
    #[error("{relation}: expected {expected} values, found {found}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: expected {expected} cells, found {found}")]
    MalformedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{relation}: header {found:?} does not match {expected:?}")]
    HeaderMismatch {
        relation: String,
        expected: String,
        found: String,
    },
    #[error("tid {0:?} is not a positive integer")]
    BadTid(String),
    #[error("duplicate tid {0}")]
    DuplicateTid(Tid),
    #[error("tid {tid}: attribute {attribute} is not nullable")]
    NonNullableNull { tid: Tid, attribute: String },
    #[error("instances do not share tids and schemas")]
    TidMismatch,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
