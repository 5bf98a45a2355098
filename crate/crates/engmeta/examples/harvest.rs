//! Lists a directory with sizes and checksums.
//!
//! `cargo run --example harvest -- [DIR] [md5|sha256]`

use engmeta::harvest::{harvest, Algorithm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let root = args.next().unwrap_or_else(|| ".".into());
    let algorithm: Algorithm = args.next().as_deref().unwrap_or("sha256").parse()?;

    let result = harvest(root.as_ref(), algorithm)?;
    for e in &result.entries {
        let digest = e.file.checksum.as_ref().map_or("-", |c| c.digest.as_str());
        let size = e.file.size_bytes.unwrap_or(0);
        println!("{digest}  {size:>10}  {}", e.file.filename);
    }
    for (file, message) in result.errors() {
        eprintln!("skipped {file}: {message}");
    }
    Ok(())
}
