//! Flattens the example dataset into repository metadata blocks.

use engmeta::flatten::{flatten, serialize_blocks_json};
use engmeta::sample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = sample::gromacs_dataset();
    let (blocks, report) = flatten(&d);
    for block in &blocks {
        let names: Vec<_> = block.fields.iter().map(|f| f.type_name.as_str()).collect();
        eprintln!("{}: {}", block.name.as_str(), names.join(", "));
    }
    eprintln!("{} leaves mapped, {} dropped of {}", report.mapped.len(), report.dropped.len(), d.leaf_count());
    for x in &report.dropped {
        eprintln!("  {} ({})", x.path, x.reason);
    }
    println!("{}", serialize_blocks_json(&blocks, &report)?);
    Ok(())
}
