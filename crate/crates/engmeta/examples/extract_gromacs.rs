//! Extracts metadata from a small Gromacs-style run directory.
//!
//! With no arguments it uses the test corpus shipped with the crate:
//! `cargo run --example extract_gromacs [RULES ROOT]`

use std::path::PathBuf;

use engmeta::extract::{extract, ExtractionConfig, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut args = std::env::args_os().skip(1);
    let rules = args.next().map(PathBuf::from).unwrap_or_else(|| fixtures.join("gromacs.rules"));
    let root = args.next().map(PathBuf::from).unwrap_or_else(|| fixtures.join("corpus"));

    let config: ExtractionConfig = std::fs::read_to_string(&rules)?.parse()?;
    let (d, report) = extract(&root, &config, Mode::Parallel)?;
    print!("{}", engmeta::canon::to_xml_unchecked(&d));

    eprintln!("{} files, {} hits", report.files_scanned, report.total_hits());
    for c in &report.conflicts {
        eprintln!("conflict at {}: kept {}, ignored {}", c.path, c.chosen.canonical(), c.overlay.canonical());
    }
    for f in &report.coercion_failures {
        eprintln!("{}:{}: {} could not be coerced", f.file, f.line, f.rule_id);
    }
    Ok(())
}
