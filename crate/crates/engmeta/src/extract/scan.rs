use std::borrow::Cow;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use walkdir::WalkDir;

use super::config::{ExtractionConfig, ExtractionRule, ValueType};
use super::{ExtractError, Mode};
use crate::model::{is_iso8601, Scalar, ScalarKind};

/// One matching line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RawHit {
    /// Index of the rule in its config.
    #[serde(skip)]
    pub rule: usize,
    pub rule_id: String,
    /// Path relative to the scanned root, `/`-separated.
    pub source_file: String,
    pub line_number: usize,
    pub raw_value: String,
}

/// Value of `line` for `rule`, if the line is `<key> <delimiter> <value>`.
///
/// The key must start the line (after leading whitespace) and be followed,
/// optionally after whitespace, by the delimiter. The value is everything
/// after that first delimiter, trimmed.
pub fn parse_line<'a>(line: &'a str, rule: &ExtractionRule) -> Option<&'a str> {
    match_line(line, &rule.key, &rule.delimiter)
}

pub(crate) fn match_line<'a>(line: &'a str, key: &str, delimiter: &str) -> Option<&'a str> {
    let rest = line.trim_start().strip_prefix(key)?;
    let rest = rest.trim_start().strip_prefix(delimiter)?;
    Some(rest.trim())
}

/// Converts a raw value to the rule's type. Booleans accept true/false,
/// yes/no and 1/0 in any case; dates must be ISO-8601.
pub fn coerce(raw: &str, value_type: ValueType) -> Result<Scalar, String> {
    if raw.is_empty() {
        return Err("empty value".into());
    }
    match value_type {
        ValueType::String => Ok(Scalar::Text(raw.to_string())),
        ValueType::Integer => Scalar::parse_as(ScalarKind::Integer, raw),
        ValueType::Decimal => Scalar::parse_as(ScalarKind::Decimal, raw),
        ValueType::Boolean => match raw.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Ok(Scalar::Boolean(true)),
            "false" | "no" | "0" => Ok(Scalar::Boolean(false)),
            _ => Err(format!("`{raw}` is not a boolean")),
        },
        ValueType::Date if is_iso8601(raw) => Ok(Scalar::Text(raw.to_string())),
        ValueType::Date => Err(format!("`{raw}` is not an ISO-8601 date")),
    }
}

/// Raw output of scanning a directory tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scan {
    /// Ordered by file path, line and rule.
    pub hits: Vec<RawHit>,
    pub files_scanned: usize,
    pub bytes_scanned: u64,
    pub warnings: Vec<String>,
}

/// Relative paths of the regular files under `root` matched by any rule,
/// sorted. Symbolic links are not followed.
pub fn candidate_files(root: &Path, config: &ExtractionConfig) -> Result<Vec<(String, PathBuf)>, ExtractError> {
    if !root.is_dir() {
        return Err(ExtractError::Root(root.to_path_buf()));
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(root).follow_links(false).min_depth(1) {
        let Ok(entry) = entry else { continue };
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = relative(root, entry.path());
        if !config.rules_for(&rel).is_empty() {
            files.push((rel, entry.into_path()));
        }
    }
    files.sort();
    Ok(files)
}

pub(crate) fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

struct FileScan {
    hits: Vec<RawHit>,
    bytes: u64,
    warning: Option<String>,
}

fn scan_file(rel: &str, path: &Path, config: &ExtractionConfig) -> FileScan {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) => return FileScan { hits: Vec::new(), bytes: 0, warning: Some(format!("{rel}: skipped, {e}")) },
    };
    let rules = config.rules_for(rel);
    let text: Cow<'_, str> = String::from_utf8_lossy(&bytes);
    let hits = scan_text(rel, &text, &rules, config);
    FileScan { hits, bytes: bytes.len() as u64, warning: None }
}

/// Applies `rules` (indices into `config`) to every line of `text`.
pub(crate) fn scan_text(rel: &str, text: &str, rules: &[usize], config: &ExtractionConfig) -> Vec<RawHit> {
    let all = config.rules();
    let mut hits = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        for &r in rules {
            let rule = &all[r];
            if let Some(value) = match_line(trimmed, &rule.key, &rule.delimiter) {
                hits.push(RawHit {
                    rule: r,
                    rule_id: rule.id.clone(),
                    source_file: rel.to_string(),
                    line_number: i + 1,
                    raw_value: value.to_string(),
                });
            }
        }
    }
    hits
}

/// Number of worker threads for parallel mode: `ENGMETA_WORKERS` when set
/// to a positive integer, otherwise the available parallelism.
pub fn workers() -> usize {
    std::env::var("ENGMETA_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Scans every candidate file under `root`. Files are independent work
/// units; parallel mode reduces them in path order, so both modes produce
/// identical scans.
pub fn scan(root: &Path, config: &ExtractionConfig, mode: Mode) -> Result<Scan, ExtractError> {
    let files = candidate_files(root, config)?;
    let per_file: Vec<FileScan> = match mode {
        Mode::Serial => files.iter().map(|(rel, path)| scan_file(rel, path, config)).collect(),
        Mode::Parallel => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers())
                .build()
                .map_err(|e| ExtractError::Pool(e.to_string()))?;
            pool.install(|| files.par_iter().map(|(rel, path)| scan_file(rel, path, config)).collect())
        }
    };
    let mut out = Scan::default();
    for file in per_file {
        match file.warning {
            Some(w) => out.warnings.push(w),
            None => out.files_scanned += 1,
        }
        out.bytes_scanned += file.bytes;
        out.hits.extend(file.hits);
    }
    Ok(out)
}
