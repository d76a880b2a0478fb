//! End-to-end orchestration: ingest, similarity facts, blocking, training,
//! classification of candidate pairs, merging, and evaluation reports.

mod config;
mod metrics;
mod stages;
pub mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::blocking::{
    apply_blocking, candidate_pairs, key_rule, sb_blocking, validate_blocking_mds, BlockAssignment,
    BlockingMode, CandidatePairSet,
};
use crate::classify::{
    build_training_matrix, feature_stats, parse_model, split_70_30, svm_predict, svm_train,
    weight_vector, FeatureSpec, FeatureStats, SvmModel, TrainingExample,
};
use crate::mdlang::{parse_mds, MatchDependency};
use crate::merge::{merge, pairs_from_predictions, DuplicatePairSet, MergeError, MergeResult};
use crate::relcore::{load_csv, load_sim_facts, Instance, SimilarityFactStore, Tid};
use crate::simlib::materialize_sim_facts;

pub use config::{
    BlockingSection, FeatureSection, MergeSection, PipelineConfig, SchemaSection, SimRuleSection, SimilaritySection,
    SvmSection,
};
pub use metrics::{precision_recall, write_metrics_csv, MetricsReport, PairCounts};
pub use stages::{
    block, check, classify_pairs, datalog, merge_file, read_duplicates, write_blocking, write_merge, write_metrics, write_predictions,
    write_training, CheckReport, Classified,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Similarity,
    Blocking,
    Training,
    Classification,
    Merging,
    Reporting,
    Analysis,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Ingest => "ingest",
            Stage::Similarity => "similarity",
            Stage::Blocking => "blocking",
            Stage::Training => "training",
            Stage::Classification => "classification",
            Stage::Merging => "merging",
            Stage::Reporting => "reporting",
            Stage::Analysis => "analysis",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Data { stage: Stage, message: String },
    #[error("{stage}: {message}")]
    Analysis { stage: Stage, message: String },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Data { .. } => 3,
            PipelineError::Analysis { .. } => 4,
        }
    }
}

fn data<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Data {
        stage,
        message: e.to_string(),
    }
}

fn io(stage: Stage, path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Data {
        stage,
        message: format!("{}: {e}", path.display()),
    }
}

fn merge_error(e: MergeError) -> PipelineError {
    match e {
        MergeError::Chase(c) => PipelineError::Analysis {
            stage: Stage::Merging,
            message: c.to_string(),
        },
        other => data(Stage::Merging)(other),
    }
}

/// Loads every configured relation.
pub fn ingest(cfg: &PipelineConfig) -> Result<Instance, PipelineError> {
    let schemas = cfg.relation_schemas().map_err(PipelineError::Config)?;
    let mut inst = Instance::with_schemas(schemas.clone()).map_err(|e| PipelineError::Config(e.to_string()))?;
    for s in &schemas {
        let path = cfg.resolve(&cfg.schemas[s.name()].file);
        let tuples = load_csv(&path, s).map_err(|e| PipelineError::Data {
            stage: Stage::Ingest,
            message: format!("{}: {e}", path.display()),
        })?;
        for t in tuples {
            inst.insert(s.name(), t).map_err(data(Stage::Ingest))?;
        }
    }
    Ok(inst)
}

/// Materialized facts for the configured rules plus any precomputed facts.
pub fn similarity_facts(cfg: &PipelineConfig, inst: &Instance) -> Result<SimilarityFactStore, PipelineError> {
    let sim_cfg = cfg.similarity_config().map_err(PipelineError::Config)?;
    let mut store = materialize_sim_facts(inst, &sim_cfg);
    if let Some(p) = &cfg.similarity.facts {
        let loaded = load_sim_facts(&cfg.resolve(p)).map_err(data(Stage::Similarity))?;
        store.extend(&loaded);
    }
    Ok(store)
}

/// Blocking rules from the configured file, validated against the schemas.
pub fn load_rules(cfg: &PipelineConfig, inst: &Instance) -> Result<Vec<MatchDependency>, PipelineError> {
    let Some(p) = &cfg.blocking.rules else { return Ok(Vec::new()) };
    let path = cfg.resolve(p);
    let text = fs::read_to_string(&path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    let mds = parse_mds(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    validate_blocking_mds(inst, &mds).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    Ok(mds)
}

/// Rules enforced by an MD-based mode: the standard-blocking keys as
/// equality rules, plus the single-relation rules (MDSB) or every rule
/// (MDCB). The three modes therefore use nested rule sets.
pub fn mode_rules(
    mode: BlockingMode,
    cfg: &PipelineConfig,
    inst: &Instance,
    rules: &[MatchDependency],
) -> Result<Vec<MatchDependency>, PipelineError> {
    let mut out = Vec::new();
    for (rel, keys) in &cfg.blocking.keys {
        let schema = inst
            .schema(rel)
            .ok_or_else(|| PipelineError::Config(format!("blocking keys: unknown relation {rel}")))?;
        let keys: Vec<&str> = keys.iter().map(String::as_str).collect();
        out.push(key_rule(&format!("sb_{rel}"), schema, &keys, &[]).map_err(|e| PipelineError::Config(e.to_string()))?);
    }
    match mode {
        BlockingMode::Sb => {}
        BlockingMode::Mdsb => out.extend(rules.iter().filter(|m| m.context.is_empty()).cloned()),
        BlockingMode::Mdcb => out.extend(rules.iter().cloned()),
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BlockingRun {
    pub mode: BlockingMode,
    pub assignment: BlockAssignment,
    pub trace: String,
}

pub fn run_blocking(
    mode: BlockingMode,
    cfg: &PipelineConfig,
    inst: &Instance,
    sims: &SimilarityFactStore,
    rules: &[MatchDependency],
) -> Result<BlockingRun, PipelineError> {
    if mode == BlockingMode::Sb {
        let mut assignment = BlockAssignment::new();
        for (name, rel) in inst.relations() {
            let blocks = match cfg.blocking.keys.get(name) {
                Some(keys) => {
                    let keys: Vec<&str> = keys.iter().map(String::as_str).collect();
                    sb_blocking(inst, name, &keys).map_err(|e| PipelineError::Config(e.to_string()))?
                }
                None => rel.iter().map(|t| (t.tid, t.tid)).collect(),
            };
            assignment.insert(name.to_string(), blocks);
        }
        return Ok(BlockingRun {
            mode,
            assignment,
            trace: String::new(),
        });
    }
    let mds = mode_rules(mode, cfg, inst, rules)?;
    let out = apply_blocking(inst, &mds, sims).map_err(|e| match e {
        crate::blocking::BlockingError::Chase(c) => PipelineError::Analysis {
            stage: Stage::Blocking,
            message: c.to_string(),
        },
        other => data(Stage::Blocking)(other),
    })?;
    let mut assignment = out.assignment;
    for (name, rel) in inst.relations() {
        if !assignment.contains_key(name) {
            assignment.insert(name.to_string(), rel.iter().map(|t| (t.tid, t.tid)).collect());
        }
    }
    Ok(BlockingRun {
        mode,
        assignment,
        trace: out.chase.trace_text(),
    })
}

/// Weight-vector machinery for one relation.
#[derive(Debug, Clone)]
pub struct PairScorer {
    pub spec: FeatureSpec,
    positions: Vec<usize>,
    stats: FeatureStats,
}

impl PairScorer {
    pub fn new(spec: &FeatureSpec, inst: &Instance) -> Result<Self, PipelineError> {
        let rel = inst
            .relation(&spec.relation)
            .ok_or_else(|| PipelineError::Config(format!("features: unknown relation {}", spec.relation)))?;
        let positions = spec.positions(&rel.schema).map_err(|e| PipelineError::Config(e.to_string()))?;
        let stats = feature_stats(spec, &rel.schema, rel.tuples.values());
        Ok(PairScorer {
            spec: spec.clone(),
            positions,
            stats,
        })
    }

    pub fn vector(&self, inst: &Instance, a: Tid, b: Tid) -> Result<crate::classify::WeightVector, PipelineError> {
        let t = |x: Tid| {
            inst.tuple(x).ok_or_else(|| PipelineError::Data {
                stage: Stage::Classification,
                message: format!("unknown tid {x}"),
            })
        };
        Ok(weight_vector(t(a)?, t(b)?, &self.spec, &self.positions, &self.stats))
    }
}

pub fn scorers(cfg: &PipelineConfig, inst: &Instance) -> Result<BTreeMap<String, PairScorer>, PipelineError> {
    cfg.feature_specs()
        .map_err(PipelineError::Config)?
        .iter()
        .map(|(rel, spec)| Ok((rel.clone(), PairScorer::new(spec, inst)?)))
        .collect()
}

/// Reads `id1,id2[,label]` rows; a missing label means 1.
pub fn read_labelled_pairs(path: &Path) -> Result<Vec<(Tid, Tid, u8)>, PipelineError> {
    let text = fs::read_to_string(path).map_err(io(Stage::Ingest, path))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(data(Stage::Ingest))?;
        let bad = |what: &str| PipelineError::Data {
            stage: Stage::Ingest,
            message: format!("{}: row {}: {what}", path.display(), i + 2),
        };
        let num = |k: usize| rec.get(k).and_then(|s| s.trim().parse::<Tid>().ok()).ok_or_else(|| bad("bad id"));
        let (a, b) = (num(0)?, num(1)?);
        let label = match rec.get(2).map(str::trim) {
            None | Some("") => 1,
            Some("0") => 0,
            Some("1") => 1,
            Some(_) => return Err(bad("label must be 0 or 1")),
        };
        out.push((a, b, label));
    }
    Ok(out)
}

/// Labelled pairs grouped by the relation of their tids.
fn pairs_by_relation(inst: &Instance, pairs: &[(Tid, Tid, u8)], stage: Stage) -> Result<BTreeMap<String, Vec<(Tid, Tid, u8)>>, PipelineError> {
    let mut out: BTreeMap<String, Vec<(Tid, Tid, u8)>> = BTreeMap::new();
    for &(a, b, l) in pairs {
        let (ra, rb) = (inst.relation_of(a), inst.relation_of(b));
        match (ra, rb) {
            (Some(x), Some(y)) if x == y => out.entry(x.to_string()).or_default().push((a, b, l)),
            _ => {
                return Err(PipelineError::Data {
                    stage,
                    message: format!("pair ({a}, {b}) does not name two tuples of one relation"),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub relation: String,
    pub train_size: usize,
    pub test_size: usize,
    pub test_accuracy: Option<f64>,
    pub converged: bool,
    pub epochs: usize,
}

#[derive(Debug, Clone)]
pub struct TrainedModels {
    pub models: BTreeMap<String, SvmModel>,
    pub reports: Vec<TrainingReport>,
    pub training_sets: BTreeMap<String, Vec<TrainingExample>>,
    pub warnings: Vec<String>,
}

/// Pre-trained models where configured; otherwise trains on 70% of the
/// labelled pairs and reports accuracy on the remaining 30%.
pub fn train_models(
    cfg: &PipelineConfig,
    inst: &Instance,
    scorers: &BTreeMap<String, PairScorer>,
    strict: bool,
) -> Result<TrainedModels, PipelineError> {
    let mut out = TrainedModels {
        models: BTreeMap::new(),
        reports: Vec::new(),
        training_sets: BTreeMap::new(),
        warnings: Vec::new(),
    };
    let labelled = match &cfg.svm.training {
        Some(p) => pairs_by_relation(inst, &read_labelled_pairs(&cfg.resolve(p))?, Stage::Training)?,
        None => BTreeMap::new(),
    };
    for (rel, scorer) in scorers {
        if let Some(p) = cfg.svm.models.get(rel) {
            let path = cfg.resolve(p);
            let text = fs::read_to_string(&path).map_err(io(Stage::Training, &path))?;
            let model = parse_model(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
            if model.feature_names != scorer.spec.names() {
                return Err(PipelineError::Config(format!(
                    "{}: model features {:?} differ from configured {:?}",
                    path.display(),
                    model.feature_names,
                    scorer.spec.names()
                )));
            }
            out.models.insert(rel.clone(), model);
            continue;
        }
        let pairs = labelled.get(rel).cloned().unwrap_or_default();
        if pairs.is_empty() {
            out.warnings.push(format!("{rel}: no labelled pairs, nothing will be classified"));
            continue;
        }
        let examples = pairs
            .iter()
            .map(|&(a, b, label)| {
                Ok(TrainingExample {
                    vector: scorer.vector(inst, a, b)?,
                    label,
                })
            })
            .collect::<Result<Vec<_>, PipelineError>>()?;
        let (train, test) = split_70_30(&examples, |e| e.label, cfg.seed);
        let (x, y) = build_training_matrix(&train).map_err(data(Stage::Training))?;
        let model = svm_train(&x, &y, &scorer.spec.names(), cfg.svm_params()).map_err(data(Stage::Training))?;
        if !model.converged {
            let msg = format!("{rel}: SVM did not converge within {} epochs", model.params.max_epochs);
            if strict {
                return Err(PipelineError::Analysis {
                    stage: Stage::Training,
                    message: msg,
                });
            }
            out.warnings.push(msg);
        }
        let correct = test
            .iter()
            .filter(|e| svm_predict(&model, &e.vector).map(|p| p == e.label).unwrap_or(false))
            .count();
        out.reports.push(TrainingReport {
            relation: rel.clone(),
            train_size: train.len(),
            test_size: test.len(),
            test_accuracy: (!test.is_empty()).then(|| correct as f64 / test.len() as f64),
            converged: model.converged,
            epochs: model.epochs,
        });
        out.training_sets.insert(rel.clone(), train);
        out.models.insert(rel.clone(), model);
    }
    Ok(out)
}

/// Classifier verdicts `(id1, id2, label)` for every candidate pair of a
/// relation that has a model.
pub fn classify_candidates(
    inst: &Instance,
    scorers: &BTreeMap<String, PairScorer>,
    models: &BTreeMap<String, SvmModel>,
    candidates: &BTreeMap<String, CandidatePairSet>,
) -> Result<BTreeMap<String, Vec<(Tid, Tid, u8)>>, PipelineError> {
    let mut out = BTreeMap::new();
    for (rel, model) in models {
        let scorer = &scorers[rel];
        let mut verdicts = Vec::new();
        for &(a, b) in candidates.get(rel).map(|c| &c.pairs).into_iter().flatten() {
            let v = scorer.vector(inst, a, b)?;
            verdicts.push((a, b, svm_predict(model, &v).map_err(data(Stage::Classification))?));
        }
        out.insert(rel.clone(), verdicts);
    }
    Ok(out)
}

pub fn all_candidates(assignment: &BlockAssignment) -> BTreeMap<String, CandidatePairSet> {
    assignment.keys().map(|r| (r.clone(), candidate_pairs(assignment, r))).collect()
}

/// Ground truth per relation.
pub fn load_truth(cfg: &PipelineConfig, inst: &Instance) -> Result<Option<BTreeMap<String, DuplicatePairSet>>, PipelineError> {
    let Some(p) = &cfg.truth else { return Ok(None) };
    let pairs = read_labelled_pairs(&cfg.resolve(p))?;
    let grouped = pairs_by_relation(inst, &pairs, Stage::Reporting)?;
    Ok(Some(
        grouped
            .into_iter()
            .map(|(r, ps)| (r, ps.iter().filter(|p| p.2 == 1).map(|p| (p.0, p.1)).collect()))
            .collect(),
    ))
}

/// Metric rows for the classified relations plus an `ALL` row.
pub fn evaluate(
    mode: BlockingMode,
    inst: &Instance,
    relations: &BTreeSet<String>,
    candidates: &BTreeMap<String, CandidatePairSet>,
    predictions: &BTreeMap<String, Vec<(Tid, Tid, u8)>>,
    truth: Option<&BTreeMap<String, DuplicatePairSet>>,
) -> Vec<MetricsReport> {
    let mut rows = Vec::new();
    let mut total = PairCounts::default();
    let empty = DuplicatePairSet::new();
    for rel in relations {
        let n = inst.relation(rel).map_or(0, |r| r.len());
        if n == 0 {
            continue;
        }
        let predicted: DuplicatePairSet = predictions
            .get(rel)
            .into_iter()
            .flatten()
            .filter(|p| p.2 == 1)
            .map(|p| (p.0, p.1))
            .collect();
        let t = truth.map(|t| t.get(rel).unwrap_or(&empty));
        let counts = PairCounts::new(n, candidates.get(rel).map_or(0, |c| c.count()), &predicted, t);
        total.add(&counts);
        rows.push(MetricsReport::new(mode, rel, counts, truth.is_some()));
    }
    if total.records > 0 {
        rows.push(MetricsReport::new(mode, "ALL", total, truth.is_some()));
    }
    rows
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub blocking: BlockingRun,
    pub training: TrainedModels,
    pub predictions: BTreeMap<String, Vec<(Tid, Tid, u8)>>,
    pub merge: MergeResult,
    pub metrics: Vec<MetricsReport>,
    pub warnings: Vec<String>,
}

/// Runs every stage and writes its artifacts into `out_dir`.
pub fn run_pipeline(cfg: &PipelineConfig, out_dir: &Path, strict: bool) -> Result<PipelineOutput, PipelineError> {
    cfg.validate().map_err(PipelineError::Config)?;
    let mode = cfg.mode().map_err(PipelineError::Config)?;
    let inst = ingest(cfg)?;
    let rules = load_rules(cfg, &inst)?;
    let scorers = scorers(cfg, &inst)?;
    let sims = similarity_facts(cfg, &inst)?;
    let blocking = run_blocking(mode, cfg, &inst, &sims, &rules)?;
    let candidates = all_candidates(&blocking.assignment);
    let training = train_models(cfg, &inst, &scorers, strict)?;
    let predictions = classify_candidates(&inst, &scorers, &training.models, &candidates)?;
    let flat: Vec<(Tid, Tid, u8)> = predictions.values().flatten().copied().collect();
    let m = pairs_from_predictions(&flat).map_err(data(Stage::Merging))?;
    let mfs = cfg.merge_functions().map_err(PipelineError::Config)?;
    let merged = merge(&inst, &m, &mfs).map_err(merge_error)?;
    let truth = load_truth(cfg, &inst)?;
    let relations: BTreeSet<String> = scorers.keys().cloned().collect();
    let metrics = evaluate(mode, &inst, &relations, &candidates, &predictions, truth.as_ref());
    let out = PipelineOutput {
        warnings: training.warnings.clone(),
        blocking,
        training,
        predictions,
        merge: merged,
        metrics,
    };
    write_artifacts(&out, &candidates, out_dir)?;
    Ok(out)
}

fn write_artifacts(out: &PipelineOutput, candidates: &BTreeMap<String, CandidatePairSet>, dir: &Path) -> Result<(), PipelineError> {
    write_blocking(dir, &out.blocking, candidates)?;
    write_training(dir, &out.training)?;
    write_predictions(dir, &out.predictions)?;
    write_merge(dir, &out.merge)?;
    write_metrics(dir, &out.metrics)
}

/// Blocking plus classification under each mode, with one set of
/// similarity facts, one model per relation and one seed shared by all.
pub fn compare_modes(cfg: &PipelineConfig, strict: bool) -> Result<Vec<MetricsReport>, PipelineError> {
    let mut cfg = cfg.clone();
    if cfg.blocking.rules.is_none() {
        return Err(PipelineError::Config("compare needs [blocking] rules".into()));
    }
    if cfg.blocking.keys.is_empty() {
        return Err(PipelineError::Config("compare needs [blocking] keys".into()));
    }
    cfg.blocking.mode = "MDCB".into();
    cfg.validate().map_err(PipelineError::Config)?;
    let inst = ingest(&cfg)?;
    let rules = load_rules(&cfg, &inst)?;
    let scorers = scorers(&cfg, &inst)?;
    let sims = similarity_facts(&cfg, &inst)?;
    let training = train_models(&cfg, &inst, &scorers, strict)?;
    let truth = load_truth(&cfg, &inst)?;
    let relations: BTreeSet<String> = scorers.keys().cloned().collect();
    let mut rows = Vec::new();
    for mode in BlockingMode::ALL {
        let blocking = run_blocking(mode, &cfg, &inst, &sims, &rules)?;
        let candidates = all_candidates(&blocking.assignment);
        let predictions = classify_candidates(&inst, &scorers, &training.models, &candidates)?;
        rows.extend(evaluate(mode, &inst, &relations, &candidates, &predictions, truth.as_ref()));
    }
    Ok(rows)
}
