//! Chases the three-tuple `R(A, B, C)` instance under several schedules and
//! prints each trace; every schedule ends in the same clean instance.

use mder::chase::{chase_all_orders, chase_with, render_instance, DeclarationOrder, OracleLimits, ReverseOrder, SeededRandom, Scheduler, DEFAULT_STEP_BUDGET};
use mder::fixtures::worked_classical;

fn main() -> anyhow::Result<()> {
    let fx = worked_classical();
    println!("initial instance:\n{}", render_instance(&fx.instance));
    let schedules: Vec<(&str, Box<dyn Scheduler>)> = vec![
        ("declaration order", Box::new(DeclarationOrder)),
        ("reverse order", Box::new(ReverseOrder)),
        ("seeded random", Box::new(SeededRandom::new(7))),
    ];
    for (name, mut s) in schedules {
        let r = chase_with(&fx.instance, &fx.mds, &fx.sims, &fx.mfs, DEFAULT_STEP_BUDGET, s.as_mut())?;
        println!("== {name}: {} steps", r.steps_taken);
        print!("{}", r.trace_text());
        println!("{}", render_instance(&r.final_instance));
    }
    let stable = chase_all_orders(&fx.instance, &fx.mds, &fx.sims, &fx.mfs, OracleLimits::default())?;
    println!("stable instances over all orders: {}", stable.len());
    Ok(())
}
