use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use mder::blocking::BlockingMode;
use mder::mdlang::ProgramMode;
use mder::pipeline::synth::{generate, write_corpus, SynthParams};
use mder::pipeline::{self as pl, PipelineConfig, PipelineError};
use mder::relcore::write_sim_facts;
use mder::simlib::fact_counts;

#[derive(Parser)]
#[command(name = "mder", version, about = "Entity resolution with matching dependencies")]
struct Cli {
    /// Treat SVM non-convergence as a failure (exit 4) instead of a warning.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sb,
    Mdsb,
    Mdcb,
}

impl From<Mode> for BlockingMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sb => BlockingMode::Sb,
            Mode::Mdsb => BlockingMode::Mdsb,
            Mode::Mdcb => BlockingMode::Mdcb,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Program {
    Blocking,
    Merging,
}

#[derive(Subcommand)]
enum Command {
    /// Load every relation and print its size.
    Ingest {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Materialize similarity facts as tag,left,right CSV.
    Simfacts {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run blocking and write blocks, trace and candidate pairs.
    Block {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Train (or load) the per-relation classifiers.
    Train {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Block, then classify every candidate pair.
    Classify {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Merge the given duplicate pairs into a resolved instance.
    Merge {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        duplicates: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// The whole workflow, writing every artifact.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Metrics for SB, MDSB and MDCB side by side.
    Compare {
        #[arg(short, long)]
        config: PathBuf,
        /// Metrics CSV; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Interaction-freeness, SFAI and matching-function laws; exit 4 on failure.
    Check {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Print the rules as a Datalog program.
    EmitDatalog {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "blocking")]
        program: Program,
    },
    /// Write a seeded synthetic corpus with ground truth and a config.
    GenSynth {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 300)]
        papers: usize,
        #[arg(long, default_value_t = 200)]
        authors: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn load(path: &Path) -> Result<PipelineConfig, PipelineError> {
    PipelineConfig::load(path).map_err(PipelineError::Config)
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    let strict = cli.strict;
    match cli.command {
        Command::Ingest { config } => {
            let cfg = load(&config)?;
            cfg.validate().map_err(PipelineError::Config)?;
            let inst = pl::ingest(&cfg)?;
            for (name, rel) in inst.relations() {
                println!("{name}\t{}", rel.len());
            }
        }
        Command::Simfacts { config, out } => {
            let cfg = load(&config)?;
            let inst = pl::ingest(&cfg)?;
            let store = pl::similarity_facts(&cfg, &inst)?;
            let file = std::fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_sim_facts(&store, file)?;
            for (tag, n) in fact_counts(&store) {
                println!("{tag}\t{n}");
            }
        }
        Command::Block { config, out, mode } => {
            let (run, candidates) = pl::block(&load(&config)?, mode.map(Into::into))?;
            pl::write_blocking(&out, &run, &candidates)?;
        }
        Command::Train { config, out } => {
            let cfg = load(&config)?;
            cfg.validate().map_err(PipelineError::Config)?;
            let inst = pl::ingest(&cfg)?;
            let scorers = pl::scorers(&cfg, &inst)?;
            let trained = pl::train_models(&cfg, &inst, &scorers, strict)?;
            warn(&trained.warnings);
            pl::write_training(&out, &trained)?;
        }
        Command::Classify { config, out, mode } => {
            let c = pl::classify_pairs(&load(&config)?, mode.map(Into::into), strict)?;
            warn(&c.training.warnings);
            pl::write_blocking(&out, &c.blocking, &c.candidates)?;
            pl::write_training(&out, &c.training)?;
            pl::write_predictions(&out, &c.predictions)?;
        }
        Command::Merge { config, duplicates, out } => {
            let (_, merged) = pl::merge_file(&load(&config)?, &duplicates)?;
            pl::write_merge(&out, &merged)?;
        }
        Command::Run { config, out } => {
            let result = pl::run_pipeline(&load(&config)?, &out, strict)?;
            warn(&result.warnings);
        }
        Command::Compare { config, out } => {
            let rows = pl::compare_modes(&load(&config)?, strict)?;
            match out {
                Some(p) => {
                    let file = std::fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                    pl::write_metrics_csv(&rows, file)?;
                }
                None => pl::write_metrics_csv(&rows, std::io::stdout().lock())?,
            }
        }
        Command::Check { config } => {
            let report = pl::check(&load(&config)?)?;
            print!("{}", report.render());
            if !report.passed() {
                return Ok(ExitCode::from(4));
            }
        }
        Command::EmitDatalog { config, program } => {
            let program = match program {
                Program::Blocking => ProgramMode::Blocking,
                Program::Merging => ProgramMode::Merging,
            };
            print!("{}", pl::datalog(&load(&config)?, program)?);
        }
        Command::GenSynth {
            out,
            papers,
            authors,
            seed,
        } => {
            let corpus = generate(&SynthParams {
                papers,
                authors,
                seed,
                ..SynthParams::default()
            });
            write_corpus(&corpus, &out).with_context(|| format!("writing corpus to {}", out.display()))?;
            println!("records\t{}", corpus.record_count());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<PipelineError>().map_or(3, PipelineError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
