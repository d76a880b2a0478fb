//! Weight vectors for record pairs, a linear soft-margin SVM trained by
//! full-batch subgradient descent, and the 70/30 evaluation split.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::relcore::{AttrKind, RelError, RelationSchema, Tid, Tuple};
use crate::simlib::{CorpusStats, SimFunction};

mod model_file;
mod svm;

pub use model_file::{parse_model, render_model};
pub use svm::{objective, objective_subgradient, svm_predict, svm_predict_dual, svm_train, SupportVector, SvmModel, SvmParams};

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("feature vectors have different lengths ({expected} and {found})")]
    RaggedVectors { expected: usize, found: usize },
    #[error("training needs both labels; only label {label} present")]
    SingleClassTraining { label: u8 },
    #[error("vector has {found} entries, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("label {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("{relation}: feature {attribute}: {reason}")]
    BadFeature {
        relation: String,
        attribute: String,
        reason: String,
    },
    #[error("model file line {line}: {reason}")]
    BadModelFile { line: usize, reason: String },
    #[error(transparent)]
    Rel(#[from] RelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub attribute: String,
    pub function: SimFunction,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub relation: String,
    pub features: Vec<Feature>,
}

impl FeatureSpec {
    pub fn new(relation: &str) -> Self {
        FeatureSpec {
            relation: relation.to_string(),
            features: Vec::new(),
        }
    }

    pub fn with(mut self, attribute: &str, function: SimFunction, weight: f64) -> Self {
        self.features.push(Feature {
            attribute: attribute.to_string(),
            function,
            weight,
        });
        self
    }

    /// Attribute names, qualified as `Attr:function` when an attribute is
    /// scored more than once.
    pub fn names(&self) -> Vec<String> {
        self.features
            .iter()
            .map(|f| {
                if self.features.iter().filter(|g| g.attribute == f.attribute).count() > 1 {
                    format!("{}:{}", f.attribute, f.function.name())
                } else {
                    f.attribute.clone()
                }
            })
            .collect()
    }

    /// Column of each feature in `schema`.
    pub fn positions(&self, schema: &RelationSchema) -> Result<Vec<usize>, ClassifyError> {
        let bad = |f: &Feature, reason: &str| ClassifyError::BadFeature {
            relation: self.relation.clone(),
            attribute: f.attribute.clone(),
            reason: reason.to_string(),
        };
        self.features
            .iter()
            .map(|f| {
                if !(f.weight > 0.0 && f.weight.is_finite()) {
                    return Err(bad(f, "weight must be positive"));
                }
                let p = schema.position(&f.attribute).ok_or_else(|| bad(f, "unknown attribute"))?;
                if p == 0 || schema.attr(p).kind == AttrKind::BlockNumber {
                    return Err(bad(f, "rid and block columns cannot be features"));
                }
                Ok(p)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub id: (Tid, Tid),
    pub entries: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub vector: WeightVector,
    pub label: u8,
}

/// Corpus statistics per feature attribute, for TF-IDF features.
pub type FeatureStats = BTreeMap<String, CorpusStats>;

pub fn feature_stats<'a>(spec: &FeatureSpec, schema: &RelationSchema, tuples: impl IntoIterator<Item = &'a Tuple> + Clone) -> FeatureStats {
    let mut out = FeatureStats::new();
    for f in &spec.features {
        if f.function != SimFunction::TfidfCosine {
            continue;
        }
        if let Some(p) = schema.position(&f.attribute) {
            let texts: Vec<String> = tuples.clone().into_iter().filter_map(|t| t.get(p).text()).collect();
            out.insert(f.attribute.clone(), CorpusStats::from_texts(texts.iter().map(String::as_str)));
        }
    }
    out
}

/// Entry `i` is `wᵢ · fᵢ(r1[Aᵢ], r2[Aᵢ])`; a Null on either side gives 0.
pub fn weight_vector(
    r1: &Tuple,
    r2: &Tuple,
    spec: &FeatureSpec,
    positions: &[usize],
    stats: &FeatureStats,
) -> WeightVector {
    let entries = spec
        .features
        .iter()
        .zip(positions)
        .map(|(f, p)| match (r1.get(*p).text(), r2.get(*p).text()) {
            (Some(a), Some(b)) => f.weight * f.function.score(&a, &b, stats.get(&f.attribute)),
            _ => 0.0,
        })
        .collect();
    WeightVector {
        id: (r1.tid, r2.tid),
        entries,
    }
}

/// Row-per-vector matrix and the aligned labels.
pub fn build_training_matrix(examples: &[TrainingExample]) -> Result<(Vec<Vec<f64>>, Vec<u8>), ClassifyError> {
    let mut rows = Vec::with_capacity(examples.len());
    let mut labels = Vec::with_capacity(examples.len());
    for e in examples {
        if let Some(first) = rows.first().map(|r: &Vec<f64>| r.len()) {
            if e.vector.entries.len() != first {
                return Err(ClassifyError::RaggedVectors {
                    expected: first,
                    found: e.vector.entries.len(),
                });
            }
        }
        if e.label > 1 {
            return Err(ClassifyError::BadLabel(e.label));
        }
        rows.push(e.vector.entries.clone());
        labels.push(e.label);
    }
    Ok((rows, labels))
}

/// Training matrix as CSV: `id1,id2,<feature names…>,label`.
pub fn write_training_csv<W: Write>(examples: &[TrainingExample], names: &[String], out: W) -> Result<(), RelError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id1".to_string(), "id2".to_string()];
    header.extend(names.iter().cloned());
    header.push("label".into());
    w.write_record(&header)?;
    for e in examples {
        let mut row = vec![e.vector.id.0.to_string(), e.vector.id.1.to_string()];
        row.extend(e.vector.entries.iter().map(|x| x.to_string()));
        row.push(e.label.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| RelError::Io {
        path: "training matrix".into(),
        source: e,
    })?;
    Ok(())
}

/// Seeded shuffle, then the first `⌈0.7·n⌉` go to training. When a class
/// has at least two examples, each half keeps one of them.
pub fn split_70_30<T: Clone>(examples: &[T], label: impl Fn(&T) -> u8, seed: u64) -> (Vec<T>, Vec<T>) {
    let n = examples.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = (7 * n).div_ceil(10);
    let (mut train, mut test) = (idx[..k].to_vec(), idx[k..].to_vec());
    for c in [0u8, 1] {
        let total = idx.iter().filter(|i| label(&examples[**i]) == c).count();
        if total < 2 {
            continue;
        }
        let has = |v: &[usize]| v.iter().any(|i| label(&examples[*i]) == c);
        if !has(&train) {
            trade(&mut train, &mut test, |i| label(&examples[i]) == c);
        }
        if !has(&test) {
            trade(&mut test, &mut train, |i| label(&examples[i]) == c);
        }
    }
    let pick = |v: &[usize]| v.iter().map(|i| examples[*i].clone()).collect();
    (pick(&train), pick(&test))
}

/// Swaps one matching index of `from` with one non-matching index of `to`.
fn trade(to: &mut [usize], from: &mut [usize], is_c: impl Fn(usize) -> bool) {
    let give = from.iter().position(|i| is_c(*i));
    let take = to.iter().position(|i| !is_c(*i));
    if let (Some(g), Some(t)) = (give, take) {
        std::mem::swap(&mut from[g], &mut to[t]);
    }
}

#[cfg(test)]
mod tests;
