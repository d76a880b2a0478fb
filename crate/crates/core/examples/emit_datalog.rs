//! Parses blocking rules and prints them as blocking and merging programs.

use mder::fixtures::{mini_mas, mini_mas_schemas};
use mder::mdlang::{catalog_of, emit_datalog, ProgramMode};
use mder::merge::merge_mds;

fn main() -> anyhow::Result<()> {
    let fx = mini_mas();
    let catalog = catalog_of(&fx.instance);
    println!("{}", emit_datalog(&fx.mds, &catalog, ProgramMode::Blocking)?);
    let paper = &mini_mas_schemas()[1];
    println!("{}", emit_datalog(&merge_mds(paper)?, &catalog, ProgramMode::Merging)?);
    Ok(())
}
