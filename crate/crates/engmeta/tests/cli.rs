mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::fixtures;
use engmeta::harvest::{harvest, Algorithm};
use engmeta::*;

fn engmeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_engmeta")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn extract_corpus(extra: &[&str]) -> Output {
    let config = fixtures().join("gromacs.rules");
    let root = fixtures().join("corpus");
    let mut args = vec!["extract", "--config", path(&config), "--root", path(&root)];
    args.extend_from_slice(extra);
    engmeta(&args)
}

#[test]
fn extract_writes_the_golden_document() {
    let golden = fs::read_to_string(fixtures().join("corpus.golden.xml")).unwrap();
    let serial = extract_corpus(&[]);
    assert_eq!(serial.status.code(), Some(0), "{}", String::from_utf8_lossy(&serial.stderr));
    assert_eq!(stdout(&serial), golden);
    let parallel = Command::new(env!("CARGO_BIN_EXE_engmeta"))
        .env("ENGMETA_WORKERS", "3")
        .args(["extract", "--mode", "parallel", "--config"])
        .arg(fixtures().join("gromacs.rules"))
        .arg("--root")
        .arg(fixtures().join("corpus"))
        .output()
        .unwrap();
    assert_eq!(stdout(&parallel), golden);
    assert!(String::from_utf8_lossy(&serial.stderr).contains("conflict: processingStep[0].software[0].softwareVersion"));
}

#[test]
fn extract_output_feeds_the_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let xml = dir.path().join("run.xml");
    let report = dir.path().join("report.json");
    let out = extract_corpus(&["--out", path(&xml), "--report", path(&report)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["filesScanned"], 6);
    assert_eq!(r["hitsPerRule"].as_object().unwrap().len(), 25);

    assert_eq!(engmeta(&["validate", "--in", path(&xml)]).status.code(), Some(0));
    let prov = engmeta(&["to-prov", "--in", path(&xml)]);
    assert_eq!(prov.status.code(), Some(0));
    let text = stdout(&prov);
    assert!(text.starts_with("document\n"));
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("activity(")).count(), 3);
    let dv = engmeta(&["to-dataverse", "--in", path(&xml)]);
    assert_eq!(dv.status.code(), Some(0));
    let blocks: serde_json::Value = serde_json::from_slice(&dv.stdout).unwrap();
    assert!(blocks["process"]["fields"].as_array().unwrap().iter().any(|f| f["typeName"] == "software"));

    let json = dir.path().join("run.json");
    extract_corpus(&["--format", "json", "--out", path(&json)]);
    let again = engmeta(&["to-prov", "--in", path(&json)]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn validate_reports_findings() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.xml");
    fs::write(&empty, canon::to_xml(&EngMetaDataset::default()).unwrap()).unwrap();
    let out = engmeta(&["validate", "--in", path(&empty), "--profile", "citable"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out).lines().count(), 4);

    let bad = dir.path().join("bad.xml");
    fs::write(&bad, "<engMeta xmlns=\"urn:x-engmeta:1.0\"><processingStep><stepType>simulation</stepType></processingStep></engMeta>").unwrap();
    let out = engmeta(&["validate", "--in", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("processingStep[0].stepType"));
    assert_eq!(engmeta(&["to-prov", "--in", path(&bad)]).status.code(), Some(1));

    let broken = dir.path().join("broken.xml");
    fs::write(&broken, "<engMeta><title>").unwrap();
    assert_eq!(engmeta(&["validate", "--in", path(&broken)]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let out = engmeta(&["harvest", "--root", ".", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage:"));
    assert_eq!(engmeta(&[]).status.code(), Some(2));
    assert_eq!(engmeta(&["validate", "--in", "/no/such/file"]).status.code(), Some(3));
    assert_eq!(engmeta(&["harvest", "--root", "/no/such/dir"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("bad.rules");
    fs::write(&rules, "[rule a]\ntarget = title.text\n").unwrap();
    let out = engmeta(&["extract", "--config", path(&rules), "--root", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn harvest_lists_and_merges() {
    let dir = tempfile::tempdir().unwrap();
    let out = engmeta(&["harvest", "--root", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), canon::to_xml(&EngMetaDataset::default()).unwrap());

    let root = fixtures().join("corpus");
    let first = engmeta(&["harvest", "--root", path(&root), "--algorithm", "md5"]);
    let second = engmeta(&["harvest", "--root", path(&root), "--algorithm", "md5"]);
    assert_eq!(first.stdout, second.stdout);
    let listed = canon::from_xml(&stdout(&first)).unwrap().dataset;
    let names: Vec<&str> = listed.files.iter().map(|f| f.filename.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert_eq!(names.len(), 6);

    let doc = dir.path().join("doc.xml");
    let mut base = sample::gromacs_dataset();
    base.files.push(FileInfo { filename: "md.log".into(), file_type: Some("text".into()), ..Default::default() });
    fs::write(&doc, canon::to_xml(&base).unwrap()).unwrap();
    let merged = engmeta(&["harvest", "--root", path(&root), "--merge-into", path(&doc)]);
    assert_eq!(merged.status.code(), Some(0));
    let expected = merge(&base, &harvest(&root, Algorithm::Sha256).unwrap().to_dataset(), MergePolicy::FirstWins).0;
    assert_eq!(stdout(&merged), canon::to_xml(&expected).unwrap());
    let md_log = expected.files.iter().find(|f| f.filename == "md.log").unwrap();
    assert_eq!(md_log.file_type.as_deref(), Some("text"));
    assert!(md_log.checksum.is_some());
    assert!(String::from_utf8_lossy(&merged.stderr).contains("conflict: file[0].fileType"));
}
