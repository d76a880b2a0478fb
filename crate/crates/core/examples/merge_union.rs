//! Union-case merging: two partial address objects, then a transitive
//! duplicate chain resolved to a single record.

use mder::fixtures::{address_objects, render_address};
use mder::merge::{merge, union_mf, DuplicatePairSet};
use mder::mdlang::MfRegistry;
use mder::relcore::{Instance, RelationSchema};

fn main() -> anyhow::Result<()> {
    let (a, b) = address_objects();
    let merged = union_mf(&a, &b, "Address");
    println!("{} + {} = {}", a.render(), b.render(), merged.render());
    println!("rendered: {}", render_address(&merged).unwrap_or_default());

    let mut inst = Instance::with_schemas([RelationSchema::simple("Person", &["Name", "Phone"], false)?])?;
    inst.insert_row("Person", 1, &["J. Smith", "555-1234"])?;
    inst.insert_row("Person", 2, &["John Smith", "555-1234"])?;
    inst.insert_row("Person", 3, &["Smith, John", "555-9876"])?;
    let m: DuplicatePairSet = [(1, 2), (2, 3)].into_iter().collect();
    let out = merge(&inst, &m, &MfRegistry::new())?;
    for step in &out.trace {
        println!("{step}");
    }
    println!("survivors: {:?}", out.kept_rids);
    mder::merge::write_resolved_csv(&out, "Person", std::io::stdout().lock())?;
    Ok(())
}
