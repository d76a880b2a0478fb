//! The three string kernels on a few pairs, and thresholded similarity
//! facts materialized over a small relation.

use mder::relcore::{Instance, RelationSchema};
use mder::simlib::{fact_counts, jaro_winkler, levenshtein_sim, materialize_sim_facts, tfidf_text, CorpusStats, SimFunction, SimRule, SimilarityConfig};

fn main() -> anyhow::Result<()> {
    for (a, b) in [("Zeinab", "Zienab"), ("2007", "2017"), ("Matthias Roeckl", "M. Roeckl")] {
        println!("{a:>16} | {b:<16} jw {:.4} lev {:.4}", jaro_winkler(a, b), levenshtein_sim(a, b));
    }
    let titles = ["Illness entities in West Africa", "Illness entities in Africa", "DLR Simulation Environment"];
    let stats = CorpusStats::from_texts(titles);
    println!("tfidf {:.4}", tfidf_text(titles[0], titles[1], &stats));

    let mut inst = Instance::with_schemas([RelationSchema::simple("Paper", &["Title"], false)?])?;
    for (i, t) in titles.iter().enumerate() {
        inst.insert_row("Paper", i as u64 + 1, &[t])?;
    }
    let cfg = SimilarityConfig::new().with("Title", SimRule::with_threshold(SimFunction::JaroWinkler, 0.85));
    let store = materialize_sim_facts(&inst, &cfg);
    println!("facts per tag: {:?}", fact_counts(&store));
    Ok(())
}
