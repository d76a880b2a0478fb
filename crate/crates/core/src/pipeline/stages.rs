//! Stage artifacts and the standalone stage entry points behind the CLI.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::blocking::{block_registry, write_blocks_report, BlockingMode, CandidatePairSet};
use crate::classify::{render_model, write_training_csv};
use crate::mdlang::{catalog_of, check_mf_laws, emit_datalog, is_interaction_free, is_sfai, MatchDependency, ProgramMode};
use crate::merge::{merge_mds, union_registry, DuplicatePairSet, MergeResult};
use crate::relcore::{active_domain, write_relation_csv, Instance, Tid};

use super::*;

const MF_SAMPLE: usize = 6;

pub(super) fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(io(Stage::Reporting, &path))
}

pub(super) fn create_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(io(Stage::Reporting, dir))
}

fn pairs_csv(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

/// `blocks.csv`, `blocking_trace.txt` and `candidates.csv`.
pub fn write_blocking(
    dir: &Path,
    run: &BlockingRun,
    candidates: &BTreeMap<String, CandidatePairSet>,
) -> Result<(), PipelineError> {
    create_dir(dir)?;
    let mut buf = Vec::new();
    write_blocks_report(&run.assignment, &mut buf).map_err(data(Stage::Reporting))?;
    write_file(dir, "blocks.csv", &buf)?;
    write_file(dir, "blocking_trace.txt", run.trace.as_bytes())?;
    let cands = candidates
        .iter()
        .flat_map(|(r, c)| c.pairs.iter().map(move |(a, b)| format!("{r},{a},{b}")));
    write_file(dir, "candidates.csv", pairs_csv("relation,id1,id2", cands).as_bytes())
}

/// `model_<Rel>.txt`, `training_<Rel>.csv` and `training_report.csv`.
pub fn write_training(dir: &Path, training: &TrainedModels) -> Result<(), PipelineError> {
    create_dir(dir)?;
    for (rel, model) in &training.models {
        write_file(dir, &format!("model_{rel}.txt"), render_model(model).as_bytes())?;
    }
    for (rel, examples) in &training.training_sets {
        let mut buf = Vec::new();
        write_training_csv(examples, &training.models[rel].feature_names, &mut buf).map_err(data(Stage::Reporting))?;
        write_file(dir, &format!("training_{rel}.csv"), &buf)?;
    }
    let mut report = String::from("relation,train,test,test_accuracy,converged,epochs\n");
    for r in &training.reports {
        report.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.relation,
            r.train_size,
            r.test_size,
            r.test_accuracy.map_or(String::new(), |a| format!("{a:.4}")),
            r.converged,
            r.epochs
        ));
    }
    write_file(dir, "training_report.csv", report.as_bytes())
}

/// `predictions.csv` with every verdict and `duplicates.csv` with the positives.
pub fn write_predictions(dir: &Path, predictions: &BTreeMap<String, Vec<(Tid, Tid, u8)>>) -> Result<(), PipelineError> {
    create_dir(dir)?;
    let preds = predictions
        .iter()
        .flat_map(|(r, ps)| ps.iter().map(move |(a, b, l)| format!("{r},{a},{b},{l}")));
    write_file(dir, "predictions.csv", pairs_csv("relation,id1,id2,label", preds).as_bytes())?;
    let dups = predictions
        .iter()
        .flat_map(|(r, ps)| ps.iter().filter(|p| p.2 == 1).map(move |(a, b, _)| format!("{r},{a},{b}")));
    write_file(dir, "duplicates.csv", pairs_csv("relation,id1,id2", dups).as_bytes())
}

/// `merge_trace.txt` and one `resolved_<Rel>.csv` per relation.
pub fn write_merge(dir: &Path, merged: &MergeResult) -> Result<(), PipelineError> {
    create_dir(dir)?;
    let trace: String = merged.trace.iter().map(|s| format!("{s}\n")).collect();
    write_file(dir, "merge_trace.txt", trace.as_bytes())?;
    for (name, _) in merged.resolved.relations() {
        let mut buf = Vec::new();
        write_relation_csv(&merged.resolved, name, &mut buf).map_err(data(Stage::Reporting))?;
        write_file(dir, &format!("resolved_{name}.csv"), &buf)?;
    }
    Ok(())
}

pub fn write_metrics(dir: &Path, rows: &[MetricsReport]) -> Result<(), PipelineError> {
    create_dir(dir)?;
    let mut buf = Vec::new();
    write_metrics_csv(rows, &mut buf).map_err(data(Stage::Reporting))?;
    write_file(dir, "metrics.csv", &buf)
}

/// Duplicate pairs from `relation,id1,id2` rows (as written to
/// `duplicates.csv`) or from `id1,id2[,label]` rows.
pub fn read_duplicates(path: &Path) -> Result<DuplicatePairSet, PipelineError> {
    let text = fs::read_to_string(path).map_err(io(Stage::Merging, path))?;
    let with_relation = text.lines().next().is_some_and(|h| h.starts_with("relation"));
    if !with_relation {
        let rows = read_labelled_pairs(path)?;
        return Ok(rows.into_iter().filter(|r| r.2 == 1).map(|r| (r.0, r.1)).collect());
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = DuplicatePairSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(data(Stage::Merging))?;
        let tid = |k: usize| {
            rec.get(k).and_then(|s| s.trim().parse::<Tid>().ok()).ok_or_else(|| PipelineError::Data {
                stage: Stage::Merging,
                message: format!("{}: row {}: expected relation,id1,id2", path.display(), i + 2),
            })
        };
        out.insert(tid(1)?, tid(2)?);
    }
    Ok(out)
}

/// Static and semantic checks of a configuration's rules.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub mode: BlockingMode,
    pub rules: usize,
    pub interaction_free: bool,
    pub sfai: bool,
    /// One line per SFAI witness.
    pub witnesses: Vec<String>,
    pub merge_interaction_free: bool,
    /// `(domain tag, laws hold)` for each matching function in use.
    pub mf_laws: Vec<(String, bool)>,
}

impl CheckReport {
    /// A unique blocking result is certified and every matching function
    /// obeys its laws.
    pub fn passed(&self) -> bool {
        (self.interaction_free || self.sfai) && self.merge_interaction_free && self.mf_laws.iter().all(|(_, ok)| *ok)
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "mode\t{}\nrules\t{}\ninteraction_free\t{}\nsfai\t{}\nmerge_interaction_free\t{}\n",
            self.mode, self.rules, self.interaction_free, self.sfai, self.merge_interaction_free
        );
        for w in &self.witnesses {
            s.push_str(&format!("witness\t{w}\n"));
        }
        for (tag, ok) in &self.mf_laws {
            s.push_str(&format!("mf_laws\t{tag}\t{ok}\n"));
        }
        s.push_str(&format!("result\t{}\n", if self.passed() { "pass" } else { "fail" }));
        s
    }
}

/// Interaction-freeness and SFAI of the configured mode's blocking rules
/// on the loaded data, interaction-freeness of the merge rules, and the
/// matching-function laws on a small sample of each active domain.
pub fn check(cfg: &PipelineConfig) -> Result<CheckReport, PipelineError> {
    cfg.validate().map_err(PipelineError::Config)?;
    let mode = cfg.mode().map_err(PipelineError::Config)?;
    let inst = ingest(cfg)?;
    let rules = load_rules(cfg, &inst)?;
    let sims = similarity_facts(cfg, &inst)?;
    let mds = mode_rules(mode, cfg, &inst, &rules)?;
    let catalog = catalog_of(&inst);
    let verdict = is_sfai(&mds, &inst, &sims).map_err(|e| PipelineError::Config(e.to_string()))?;

    let features = cfg.feature_specs().map_err(PipelineError::Config)?;
    let mut merge_rules: Vec<MatchDependency> = Vec::new();
    for rel in features.keys() {
        if let Some(s) = inst.schema(rel) {
            merge_rules.extend(merge_mds(s).map_err(|e| PipelineError::Config(e.to_string()))?);
        }
    }
    let rels: Vec<&str> = features.keys().map(String::as_str).collect();
    let base = cfg.merge_functions().map_err(PipelineError::Config)?;
    let mut registry = union_registry(&inst, &rels, &base);
    for def in block_registry(&inst).iter() {
        registry.register(def.clone());
    }
    let domain = active_domain(&inst);
    let mut mf_laws = Vec::new();
    for def in registry.iter() {
        let sample: BTreeSet<_> = domain.get(&def.domain_tag).into_iter().flatten().take(MF_SAMPLE).cloned().collect();
        let ok = check_mf_laws(def, &sample).map_err(|e| PipelineError::Analysis {
            stage: Stage::Merging,
            message: e.to_string(),
        })?;
        mf_laws.push((def.domain_tag.clone(), ok));
    }
    Ok(CheckReport {
        mode,
        rules: mds.len(),
        interaction_free: is_interaction_free(&mds, &catalog),
        sfai: verdict.is_sfai,
        witnesses: verdict.witnesses.iter().map(ToString::to_string).collect(),
        merge_interaction_free: is_interaction_free(&merge_rules, &catalog),
        mf_laws,
    })
}

/// Datalog text for the configured mode's blocking rules, or for the merge
/// rules of every relation with features.
pub fn datalog(cfg: &PipelineConfig, program: ProgramMode) -> Result<String, PipelineError> {
    cfg.validate().map_err(PipelineError::Config)?;
    let inst = ingest(cfg)?;
    let mds = match program {
        ProgramMode::Blocking => {
            let rules = load_rules(cfg, &inst)?;
            mode_rules(cfg.mode().map_err(PipelineError::Config)?, cfg, &inst, &rules)?
        }
        ProgramMode::Merging => {
            let mut out = Vec::new();
            for rel in cfg.feature_specs().map_err(PipelineError::Config)?.keys() {
                if let Some(s) = inst.schema(rel) {
                    out.extend(merge_mds(s).map_err(|e| PipelineError::Config(e.to_string()))?);
                }
            }
            out
        }
    };
    emit_datalog(&mds, &catalog_of(&inst), program).map_err(|e| PipelineError::Config(e.to_string()))
}

/// Blocking under `mode`, the configured one by default, with its candidate pairs.
pub fn block(cfg: &PipelineConfig, mode: Option<BlockingMode>) -> Result<(BlockingRun, BTreeMap<String, CandidatePairSet>), PipelineError> {
    cfg.validate().map_err(PipelineError::Config)?;
    let mode = match mode {
        Some(m) => m,
        None => cfg.mode().map_err(PipelineError::Config)?,
    };
    let inst = ingest(cfg)?;
    let rules = load_rules(cfg, &inst)?;
    let sims = similarity_facts(cfg, &inst)?;
    let run = run_blocking(mode, cfg, &inst, &sims, &rules)?;
    let candidates = all_candidates(&run.assignment);
    Ok((run, candidates))
}

/// The instance with its duplicate pairs merged.
pub fn merge_file(cfg: &PipelineConfig, duplicates: &Path) -> Result<(Instance, MergeResult), PipelineError> {
    let inst = ingest(cfg)?;
    let m = read_duplicates(duplicates)?;
    let mfs = cfg.merge_functions().map_err(PipelineError::Config)?;
    let merged = merge(&inst, &m, &mfs).map_err(merge_error)?;
    Ok((inst, merged))
}

/// Output of blocking followed by classification of the candidate pairs.
#[derive(Debug, Clone)]
pub struct Classified {
    pub blocking: BlockingRun,
    pub candidates: BTreeMap<String, CandidatePairSet>,
    pub training: TrainedModels,
    pub predictions: BTreeMap<String, Vec<(Tid, Tid, u8)>>,
}

pub fn classify_pairs(cfg: &PipelineConfig, mode: Option<BlockingMode>, strict: bool) -> Result<Classified, PipelineError> {
    let (blocking, candidates) = block(cfg, mode)?;
    let inst = ingest(cfg)?;
    let scorers = scorers(cfg, &inst)?;
    let training = train_models(cfg, &inst, &scorers, strict)?;
    let predictions = classify_candidates(&inst, &scorers, &training.models, &candidates)?;
    Ok(Classified {
        blocking,
        candidates,
        training,
        predictions,
    })
}
