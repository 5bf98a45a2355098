//! Canonical XML and JSON forms of the example dataset, and their round trip.

use engmeta::canon::{from_json, from_xml, to_json, to_xml};
use engmeta::sample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = sample::gromacs_dataset();
    let xml = to_xml(&d)?;
    let json = to_json(&d)?;
    print!("{xml}");

    let from_x = from_xml(&xml)?;
    let from_j = from_json(&json)?;
    assert_eq!(from_x.dataset, d);
    assert_eq!(from_j.dataset, d);
    assert_eq!(to_xml(&from_j.dataset)?, xml);
    eprintln!("round trip ok: {} bytes XML, {} bytes JSON", xml.len(), json.len());
    Ok(())
}
