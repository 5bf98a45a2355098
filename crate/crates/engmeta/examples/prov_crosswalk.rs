//! Processing steps as a PROV-N document, plus a walk over the file chain.

use engmeta::prov::{serialize_prov_n, to_prov, EntityKind, RelationKind};
use engmeta::sample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = to_prov(&sample::gromacs_dataset());
    print!("{}", serialize_prov_n(&doc)?);

    for e in doc.entities.iter().filter(|e| e.kind == EntityKind::File) {
        let made: Vec<_> = doc.relations_of(RelationKind::WasGeneratedBy, &e.id).map(|r| r.object.as_str()).collect();
        let read: Vec<_> = doc.relations_of(RelationKind::Used, &e.id).map(|r| r.subject.as_str()).collect();
        if !made.is_empty() && !read.is_empty() {
            eprintln!("{}: {made:?} -> {read:?}", e.label);
        }
    }
    Ok(())
}
