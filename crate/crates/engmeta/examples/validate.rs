//! Runs both validation profiles on a dataset with a few deliberate mistakes.

use engmeta::*;

fn main() {
    let mut d = sample::gromacs_dataset();
    d.processing_steps[1].step_type = "cleanup".into();
    d.dates[0].value = "04.11.2019".into();
    d.files.push(FileInfo {
        filename: "traj_window01.xtc".into(),
        checksum: Some(Checksum { algorithm: "MD5".into(), digest: "not-a-digest".into() }),
        ..Default::default()
    });
    d.persons.clear();

    for profile in [Profile::Structural, Profile::Citable] {
        let report = validate(&d, profile);
        println!("{profile}: {} error(s)", report.error_count());
        print!("{report}");
    }
}
