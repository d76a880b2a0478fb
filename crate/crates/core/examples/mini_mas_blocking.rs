//! Collective blocking of the MAS excerpt: paper blocks follow similar
//! titles, author blocks follow the papers they wrote.

use mder::blocking::{apply_blocking, blocks_of, candidate_pairs, write_blocks_report};
use mder::fixtures::mini_mas;

fn main() -> anyhow::Result<()> {
    let fx = mini_mas();
    let out = apply_blocking(&fx.instance, &fx.mds, &fx.sims)?;
    print!("{}", out.chase.trace_text());
    for rel in ["Paper", "Author"] {
        let blocks: Vec<Vec<_>> = blocks_of(&out.assignment, rel).into_iter().map(|b| b.into_iter().collect()).collect();
        println!("{rel} blocks: {blocks:?}");
        println!("{rel} candidate pairs: {:?}", candidate_pairs(&out.assignment, rel).pairs);
    }
    write_blocks_report(&out.assignment, std::io::stdout().lock())?;
    Ok(())
}
