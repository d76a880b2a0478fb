//! Interaction-freeness and SFAI verdicts: the Author/Paper rules, then the
//! classical R(A, B, C) rules before and after the first chase step.

use mder::fixtures::{worked_classical, worked_relational, worked_sequence_one_states};
use mder::mdlang::{catalog_of, interaction_cases, is_interaction_free, is_sfai};

fn main() -> anyhow::Result<()> {
    let fx = worked_relational();
    let catalog = catalog_of(&fx.instance);
    println!("relational rules interaction free: {}", is_interaction_free(&fx.mds, &catalog));
    for (i, j, attr) in interaction_cases(&fx.mds, &catalog) {
        println!("  {} feeds {} through {attr}", fx.mds[i].name, fx.mds[j].name);
    }
    println!("relational rules SFAI: {}", is_sfai(&fx.mds, &fx.instance, &fx.sims)?.is_sfai);

    let fx = worked_classical();
    println!("classical rules SFAI on the initial instance: {}", is_sfai(&fx.mds, &fx.instance, &fx.sims)?.is_sfai);
    let after_one = &worked_sequence_one_states()[1];
    let verdict = is_sfai(&fx.mds, after_one, &fx.sims)?;
    println!("classical rules SFAI after one step: {}", verdict.is_sfai);
    for w in &verdict.witnesses {
        println!("  witness: {w}");
    }
    Ok(())
}
