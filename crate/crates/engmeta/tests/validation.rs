mod common;

use std::collections::BTreeMap;
use std::fs;

use common::fixtures;
use engmeta::*;

fn load(name: &str) -> EngMetaDataset {
    let text = fs::read_to_string(fixtures().join("invalid").join(name)).unwrap();
    canon::from_xml(&text).unwrap().dataset
}

fn error_paths(d: &EngMetaDataset, profile: Profile) -> Vec<String> {
    validate(d, profile).errors().map(|f| f.path.to_string()).collect()
}

#[test]
fn each_fixture_fails_at_its_path() {
    let text = fs::read_to_string(fixtures().join("invalid/expected.toml")).unwrap();
    let expected: BTreeMap<String, (String, String)> = toml::from_str(&text).unwrap();
    assert_eq!(expected.len(), 4);
    for (file, (profile, path)) in expected {
        let d = load(&file);
        let profile: Profile = profile.parse().unwrap();
        assert_eq!(error_paths(&d, profile), vec![path], "{file}");
    }
}

#[test]
fn citable_fixture_is_structurally_fine() {
    assert!(validate(&load("citable.xml"), Profile::Structural).is_valid());
}

#[test]
fn invalid_documents_are_not_serialized() {
    let d = load("step_type.xml");
    assert!(matches!(canon::to_xml(&d), Err(canon::CanonError::Invalid(_))));
    assert!(canon::to_xml_unchecked(&d).contains("<stepType>simulation</stepType>"));
}

fn with_checksum(algorithm: &str, digest: &str) -> EngMetaDataset {
    EngMetaDataset {
        files: vec![FileInfo {
            filename: "a.dat".into(),
            checksum: Some(Checksum { algorithm: algorithm.into(), digest: digest.into() }),
            ..Default::default()
        }],
        ..Default::default()
    }
}

#[test]
fn checksum_rules() {
    let md5 = "d41d8cd98f00b204e9800998ecf8427e";
    let sha = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";
    assert!(error_paths(&with_checksum("MD5", md5), Profile::Structural).is_empty());
    assert!(error_paths(&with_checksum("SHA-256", sha), Profile::Structural).is_empty());
    assert_eq!(error_paths(&with_checksum("MD5", sha), Profile::Structural), vec!["file[0].checksum.digest"]);
    assert_eq!(
        error_paths(&with_checksum("MD5", &md5.to_uppercase()), Profile::Structural),
        vec!["file[0].checksum.digest"]
    );
    assert_eq!(error_paths(&with_checksum("SHA-1", md5), Profile::Structural), vec!["file[0].checksum.algorithm"]);
}

#[test]
fn all_four_step_types_pass() {
    for kind in STEP_TYPES {
        let d = EngMetaDataset { processing_steps: vec![ProcessingStep::new(kind)], ..Default::default() };
        assert!(validate(&d, Profile::Structural).is_valid(), "{kind}");
    }
    let d = EngMetaDataset { processing_steps: vec![ProcessingStep::new("Analysis")], ..Default::default() };
    assert_eq!(error_paths(&d, Profile::Structural), vec!["processingStep[0].stepType"]);
}

#[test]
fn iso_dates() {
    for ok in ["2019-11-06", "2019-11-06T17:30:00", "2019-11-06T17:30:00Z", "2019-11-06T17:30:00+01:00", "2019-11-06T17:30"] {
        assert!(is_iso8601(ok), "{ok}");
    }
    for bad in ["06.11.2019", "2019-13-01", "2019-11-06 17:30:00", "yesterday", ""] {
        assert!(!is_iso8601(bad), "{bad}");
    }
}

#[test]
fn empty_dataset_is_not_citable() {
    let report = validate(&EngMetaDataset::default(), Profile::Citable);
    let paths: Vec<String> = report.findings.iter().map(|f| f.path.to_string()).collect();
    assert_eq!(paths, vec!["title", "person", "description", "date"]);
    assert!(validate(&sample::gromacs_dataset(), Profile::Citable).is_valid());
}
