//! Pipeline configuration file.
//!
//! ```toml
//! seed = 42                      # shared by the split, the trainer and synthesis
//! null_policy = "zero"           # the only supported policy
//! truth = "truth.csv"            # optional id1,id2 ground truth for metrics
//!
//! [schemas.Paper]
//! attributes = ["PID:rid", "Title:long-text", "Year:numeric", "Bl:block"]
//! file = "paper.csv"
//!
//! [similarity]
//! facts = "title_sim.csv"        # optional precomputed tag,left,right facts
//! [similarity.rules]
//! Title = { function = "jaro-winkler", threshold = 0.85 }
//!
//! [[features]]
//! relation = "Paper"
//! attribute = "Title"
//! function = "jaro-winkler"
//! weight = 1.0                   # default 1.0
//!
//! [blocking]
//! mode = "MDCB"                  # SB, MDSB or MDCB (default MDCB)
//! rules = "blocking.md"          # required by MDSB / MDCB
//! keys = { Paper = ["Title", "Year"] }   # required by SB
//!
//! [svm]
//! c = 10.0
//! max_epochs = 2000
//! tol = 1e-6
//! training = "labels.csv"        # id1,id2,label
//! models = { Paper = "paper.model" }     # optional pre-trained models
//!
//! [merge]
//! functions = { Year = "max" }   # per domain tag; default union
//! ```
//!
//! Relative paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::blocking::BlockingMode;
use crate::classify::{FeatureSpec, SvmParams};
use crate::mdlang::{MatchingFunctionDef, MfRegistry};
use crate::relcore::{AttributeSpec, RelationSchema};
use crate::simlib::{SimFunction, SimRule, SimilarityConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaSection {
    pub attributes: Vec<String>,
    pub file: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimRuleSection {
    pub function: String,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilaritySection {
    pub facts: Option<PathBuf>,
    #[serde(default)]
    pub rules: BTreeMap<String, SimRuleSection>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSection {
    pub relation: String,
    pub attribute: String,
    pub function: String,
    #[serde(default = "unit")]
    pub weight: f64,
}

fn default_mode() -> String {
    "MDCB".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockingSection {
    #[serde(default = "default_mode")]
    pub mode: String,
    pub rules: Option<PathBuf>,
    #[serde(default)]
    pub keys: BTreeMap<String, Vec<String>>,
}

impl Default for BlockingSection {
    fn default() -> Self {
        BlockingSection {
            mode: default_mode(),
            rules: None,
            keys: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmSection {
    pub c: Option<f64>,
    pub max_epochs: Option<usize>,
    pub tol: Option<f64>,
    pub training: Option<PathBuf>,
    #[serde(default)]
    pub models: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeSection {
    #[serde(default)]
    pub functions: BTreeMap<String, String>,
}

fn default_seed() -> u64 {
    42
}

fn default_null_policy() -> String {
    "zero".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_null_policy")]
    pub null_policy: String,
    pub truth: Option<PathBuf>,
    pub schemas: BTreeMap<String, SchemaSection>,
    #[serde(default)]
    pub similarity: SimilaritySection,
    #[serde(default)]
    pub features: Vec<FeatureSection>,
    #[serde(default)]
    pub blocking: BlockingSection,
    #[serde(default)]
    pub svm: SvmSection,
    #[serde(default)]
    pub merge: MergeSection,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, String> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn mode(&self) -> Result<BlockingMode, String> {
        BlockingMode::parse(&self.blocking.mode).ok_or_else(|| format!("unknown blocking mode {:?}", self.blocking.mode))
    }

    /// Relation schemas in name order.
    pub fn relation_schemas(&self) -> Result<Vec<RelationSchema>, String> {
        self.schemas
            .iter()
            .map(|(name, s)| {
                let attrs = s
                    .attributes
                    .iter()
                    .map(|a| AttributeSpec::parse(a).ok_or_else(|| format!("{name}: bad attribute spec {a:?}")))
                    .collect::<Result<Vec<_>, _>>()?;
                RelationSchema::new(name.clone(), attrs).map_err(|e| e.to_string())
            })
            .collect()
    }

    pub fn similarity_config(&self) -> Result<SimilarityConfig, String> {
        let mut cfg = SimilarityConfig::new();
        for (tag, r) in &self.similarity.rules {
            let f = SimFunction::parse(&r.function).ok_or_else(|| format!("similarity {tag}: unknown function {:?}", r.function))?;
            let rule = match r.threshold {
                Some(t) => SimRule::with_threshold(f, t),
                None => SimRule::new(f),
            };
            cfg = cfg.with(tag, rule);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Feature specs per relation, in declaration order.
    pub fn feature_specs(&self) -> Result<BTreeMap<String, FeatureSpec>, String> {
        let mut out: BTreeMap<String, FeatureSpec> = BTreeMap::new();
        for f in &self.features {
            let func = SimFunction::parse(&f.function)
                .ok_or_else(|| format!("feature {}.{}: unknown function {:?}", f.relation, f.attribute, f.function))?;
            let spec = out.remove(&f.relation).unwrap_or_else(|| FeatureSpec::new(&f.relation));
            out.insert(f.relation.clone(), spec.with(&f.attribute, func, f.weight));
        }
        Ok(out)
    }

    pub fn svm_params(&self) -> SvmParams {
        let d = SvmParams::default();
        SvmParams {
            c: self.svm.c.unwrap_or(d.c),
            max_epochs: self.svm.max_epochs.unwrap_or(d.max_epochs),
            tol: self.svm.tol.unwrap_or(d.tol),
            seed: self.seed,
        }
    }

    /// Configured merge functions; unlisted tags fall back to union.
    pub fn merge_functions(&self) -> Result<MfRegistry, String> {
        let mut reg = MfRegistry::new();
        for (tag, kind) in &self.merge.functions {
            let def = match kind.as_str() {
                "union" => MatchingFunctionDef::union(tag, None),
                "max" => MatchingFunctionDef::max_numeric(tag),
                other => return Err(format!("merge function for {tag}: unknown kind {other:?}")),
            };
            reg.register(def);
        }
        Ok(reg)
    }

    /// Static checks that need no data: file existence, per-mode
    /// requirements and well-formed sections.
    pub fn validate(&self) -> Result<(), String> {
        if self.null_policy != "zero" {
            return Err(format!("null_policy {:?} is not supported (use \"zero\")", self.null_policy));
        }
        let schemas = self.relation_schemas()?;
        let must_exist = |what: &str, p: &Path| {
            let full = self.resolve(p);
            if full.is_file() {
                Ok(())
            } else {
                Err(format!("{what}: file {} not found", full.display()))
            }
        };
        for (name, s) in &self.schemas {
            must_exist(&format!("schema {name}"), &s.file)?;
        }
        if let Some(p) = &self.similarity.facts {
            must_exist("similarity facts", p)?;
        }
        if let Some(p) = &self.truth {
            must_exist("truth", p)?;
        }
        self.similarity_config()?;
        let features = self.feature_specs()?;
        for (rel, spec) in &features {
            let schema = schemas
                .iter()
                .find(|s| s.name() == rel)
                .ok_or_else(|| format!("features: unknown relation {rel}"))?;
            spec.positions(schema).map_err(|e| e.to_string())?;
        }
        match self.mode()? {
            BlockingMode::Sb => {
                if self.blocking.keys.is_empty() {
                    return Err("blocking mode SB needs [blocking] keys".into());
                }
            }
            m => match &self.blocking.rules {
                Some(p) => must_exist(&format!("blocking rules ({m})"), p)?,
                None => return Err(format!("blocking mode {m} needs [blocking] rules")),
            },
        }
        for rel in self.blocking.keys.keys() {
            if !self.schemas.contains_key(rel) {
                return Err(format!("blocking keys: unknown relation {rel}"));
            }
        }
        if let Some(p) = &self.svm.training {
            must_exist("svm training", p)?;
        }
        for (rel, p) in &self.svm.models {
            must_exist(&format!("svm model for {rel}"), p)?;
        }
        for rel in features.keys() {
            if self.svm.training.is_none() && !self.svm.models.contains_key(rel) {
                return Err(format!("relation {rel} has features but neither [svm] training nor a model"));
            }
        }
        self.merge_functions()?;
        Ok(())
    }
}
