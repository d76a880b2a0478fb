//! Generates the synthetic bibliography, then compares standard blocking
//! with single-relation and collective MD blocking.

use mder::pipeline::synth::{generate, write_corpus, SynthParams};
use mder::pipeline::{compare_modes, write_metrics_csv, PipelineConfig};

fn main() -> anyhow::Result<()> {
    let corpus = generate(&SynthParams::default());
    let dir = tempfile::tempdir()?;
    write_corpus(&corpus, dir.path())?;
    println!("{} records", corpus.record_count());
    let cfg = PipelineConfig::load(&dir.path().join("config.toml")).map_err(anyhow::Error::msg)?;
    let rows = compare_modes(&cfg, false)?;
    write_metrics_csv(&rows, std::io::stdout().lock())?;
    Ok(())
}
