//! Merges a curated description with values harvested from log files.
//!
//! Scalars present on both sides conflict and are resolved by the policy.
//! List items are appended unless an equal item (or, for keyed records such
//! as variables and files, an item with the same key) is already there.

use engmeta::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut from_logs = EngMetaDataset::default();
    for (path, value) in [
        ("project", "Dilute Solutions II"),
        ("keyword", "potential of mean force"),
        ("system.controlledVariables[0].name", "temperature"),
        ("system.controlledVariables[0].value", "298"),
        ("system.controlledVariables[0].unit", "K"),
    ] {
        set_path_in_place(&mut from_logs, &MetadataPath::parse(path)?, Scalar::from(value))?;
    }
    let curated = sample::gromacs_dataset();

    for policy in [MergePolicy::FirstWins, MergePolicy::OverlayWins] {
        let (merged, conflicts) = merge(&curated, &from_logs, policy);
        println!("{policy:?}: project {:?}, {} keywords", merged.project, merged.keywords.len());
        for c in &conflicts {
            println!("  {}: {} vs {}, kept {}", c.path, c.base.canonical(), c.overlay.canonical(), c.chosen.canonical());
        }
    }

    let (once, _) = merge(&curated, &from_logs, MergePolicy::FirstWins);
    let (twice, _) = merge(&once, &from_logs, MergePolicy::FirstWins);
    assert_eq!(once, twice);
    Ok(())
}
