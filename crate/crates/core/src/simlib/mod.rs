//! String similarity kernels, corpus statistics and materialization of
//! thresholded similarity facts over an instance's active domain.

mod kernels;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use kernels::{
    jaro_winkler, levenshtein_distance, levenshtein_sim, tfidf_cosine, tfidf_text, tokenize,
    CorpusStats,
};

use crate::relcore::{AttrKind, Instance, SimilarityFactStore, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimFunction {
    JaroWinkler,
    TfidfCosine,
    Levenshtein,
    Equality,
}

impl SimFunction {
    pub fn parse(s: &str) -> Option<SimFunction> {
        [
            SimFunction::JaroWinkler,
            SimFunction::TfidfCosine,
            SimFunction::Levenshtein,
            SimFunction::Equality,
        ]
        .into_iter()
        .find(|f| f.name() == s)
    }

    pub fn name(self) -> &'static str {
        match self {
            SimFunction::JaroWinkler => "jaro-winkler",
            SimFunction::TfidfCosine => "tfidf-cosine",
            SimFunction::Levenshtein => "levenshtein",
            SimFunction::Equality => "equality",
        }
    }

    pub fn default_threshold(self) -> f64 {
        match self {
            SimFunction::JaroWinkler => 0.8,
            SimFunction::TfidfCosine => 0.6,
            SimFunction::Levenshtein => 0.75,
            SimFunction::Equality => 1.0,
        }
    }

    /// Score of two texts; TF-IDF without stats falls back to an ad-hoc
    /// corpus of the two texts.
    pub fn score(self, a: &str, b: &str, stats: Option<&CorpusStats>) -> f64 {
        match self {
            SimFunction::JaroWinkler => jaro_winkler(a, b),
            SimFunction::Levenshtein => levenshtein_sim(a, b),
            SimFunction::Equality => f64::from(u8::from(a == b)),
            SimFunction::TfidfCosine => match stats {
                Some(s) => tfidf_text(a, b, s),
                None => tfidf_text(a, b, &CorpusStats::from_texts([a, b])),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRule {
    pub function: SimFunction,
    pub threshold: f64,
}

impl SimRule {
    pub fn new(function: SimFunction) -> Self {
        SimRule {
            function,
            threshold: function.default_threshold(),
        }
    }

    pub fn with_threshold(function: SimFunction, threshold: f64) -> Self {
        SimRule { function, threshold }
    }
}

/// Per-domain similarity function and blocking threshold.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityConfig {
    pub rules: BTreeMap<String, SimRule>,
}

impl SimilarityConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, tag: &str, rule: SimRule) -> Self {
        self.rules.insert(tag.to_string(), rule);
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        for (tag, r) in &self.rules {
            if !(0.0..=1.0).contains(&r.threshold) {
                return Err(format!("threshold for {tag} must lie in [0,1], got {}", r.threshold));
            }
        }
        Ok(())
    }
}

/// Documents (one per non-null cell) of every attribute carrying `tag`.
pub fn corpus_for_tag(inst: &Instance, tag: &str) -> CorpusStats {
    let mut docs = Vec::new();
    for (_, rel) in inst.relations() {
        for pos in 1..rel.schema.arity() {
            if rel.schema.attr(pos).kind == AttrKind::ReferenceId || rel.schema.domain_tag(pos) != tag {
                continue;
            }
            for t in rel.iter() {
                if let Some(text) = t.get(pos).text() {
                    docs.push(tokenize(&text));
                }
            }
        }
    }
    CorpusStats::build(docs.iter().map(Vec::as_slice))
}

pub fn materialize_sim_facts(inst: &Instance, cfg: &SimilarityConfig) -> SimilarityFactStore {
    let adom = crate::relcore::active_domain(inst);
    let mut store = SimilarityFactStore::new();
    for (tag, rule) in &cfg.rules {
        let Some(values) = adom.get(tag) else { continue };
        let values: Vec<&Value> = values.iter().collect();
        for v in &values {
            store.touch(tag, (*v).clone());
        }
        if rule.function == SimFunction::Equality {
            continue;
        }
        let stats = (rule.function == SimFunction::TfidfCosine).then(|| corpus_for_tag(inst, tag));
        let texts: Vec<String> = values.iter().map(|v| v.text().unwrap_or_default()).collect();
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                let s = rule.function.score(&texts[i], &texts[j], stats.as_ref());
                if s >= rule.threshold {
                    store.insert(tag, values[i].clone(), values[j].clone());
                }
            }
        }
    }
    store
}

/// Non-reflexive unordered fact count per tag.
pub fn fact_counts(store: &SimilarityFactStore) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for (tag, _, _) in store.distinct_pairs() {
        *out.entry(tag).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relcore::RelationSchema;

    fn titles() -> Instance {
        let mut i = Instance::with_schemas([RelationSchema::simple("Paper", &["Title"], true).unwrap()]).unwrap();
        i.insert_row("Paper", 123, &["Illness entities in West Africa"]).unwrap();
        i.insert_row("Paper", 205, &["Illness entities in Africa"]).unwrap();
        i.insert_row("Paper", 769, &["DLR Simulation Environment m3"]).unwrap();
        i
    }

    #[test]
    fn threshold_above_one_keeps_only_reflexive_facts() {
        let cfg = SimilarityConfig::new().with("Title", SimRule::with_threshold(SimFunction::JaroWinkler, 1.01));
        let store = materialize_sim_facts(&titles(), &cfg);
        assert!(store.distinct_pairs().is_empty());
        assert_eq!(store.len(), 3);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn similar_titles_become_facts() {
        let i = titles();
        let cfg = SimilarityConfig::new().with("Title", SimRule::new(SimFunction::JaroWinkler));
        let store = materialize_sim_facts(&i, &cfg);
        assert!(store.similar(
            "Title",
            &Value::atomic("Illness entities in West Africa"),
            &Value::atomic("Illness entities in Africa")
        ));
        let n = 3;
        assert!(store.distinct_pairs().len() <= n * (n - 1) / 2);
    }

    #[test]
    fn equality_rule_yields_identity_only() {
        let cfg = SimilarityConfig::new().with("Title", SimRule::new(SimFunction::Equality));
        let store = materialize_sim_facts(&titles(), &cfg);
        assert!(store.distinct_pairs().is_empty());
    }
}
