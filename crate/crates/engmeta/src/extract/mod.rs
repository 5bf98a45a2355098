//! Config-driven harvesting of metadata from simulation input, output and
//! log files.
//!
//! Each rule names a search key, a delimiter and a file glob, and the
//! EngMeta field that receives the value:
//!
//! ```
//! use engmeta::extract::{parse_config, parse_line};
//!
//! let config = parse_config("\
//! [rule steps]
//! target = system.temporalResolution.numberOfTimesteps
//! source = *.mdp
//! key = nsteps
//! type = integer
//! ").unwrap();
//! assert_eq!(parse_line("nsteps = 5000000", &config.rules()[0]), Some("5000000"));
//! assert_eq!(parse_line("nstepsize = 2", &config.rules()[0]), None);
//! ```

mod assemble;
mod config;
mod scan;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::{Conflict, EngMetaDataset};

pub use assemble::{assemble, Assembly, CoercionFailure};
pub use config::{parse_config, ConfigError, ExtractionConfig, ExtractionRule, Occurrence, ValueType};
pub use scan::{candidate_files, coerce, parse_line, scan, workers, RawHit, Scan};

/// Serial scanning reads files one after another; parallel scanning spreads
/// files over a worker pool. Both produce the same result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Serial,
    Parallel,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serial" => Ok(Mode::Serial),
            "parallel" => Ok(Mode::Parallel),
            _ => Err(format!("unknown mode `{s}` (serial, parallel)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Serial => "serial",
            Mode::Parallel => "parallel",
        })
    }
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("{0}: not a readable directory")]
    Root(PathBuf),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Summary of an extraction run.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractionReport {
    pub mode: Mode,
    pub rules_matched: Vec<String>,
    pub rules_unmatched: Vec<String>,
    /// Raw hits per rule id, in declaration order.
    #[serde(serialize_with = "ordered_counts")]
    pub hits_per_rule: Vec<(String, usize)>,
    pub conflicts: Vec<Conflict>,
    pub coercion_failures: Vec<CoercionFailure>,
    pub warnings: Vec<String>,
    pub files_scanned: usize,
    pub bytes_scanned: u64,
    #[serde(rename = "elapsedSeconds", serialize_with = "seconds")]
    pub elapsed: Duration,
}

impl ExtractionReport {
    pub fn total_hits(&self) -> usize {
        self.hits_per_rule.iter().map(|(_, n)| n).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize") + "\n"
    }
}

fn ordered_counts<S: Serializer>(counts: &[(String, usize)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(counts.iter().map(|(k, v)| (k, v)))
}

fn seconds<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// Scans `root` with every rule of `config` and assembles the hits.
pub fn extract(root: &Path, config: &ExtractionConfig, mode: Mode) -> Result<(EngMetaDataset, ExtractionReport), ExtractError> {
    let start = Instant::now();
    let scanned = scan(root, config, mode)?;
    let assembly = assemble(&scanned.hits, config);

    let mut hits_per_rule: Vec<(String, usize)> = config.rules().iter().map(|r| (r.id.clone(), 0)).collect();
    for hit in &scanned.hits {
        hits_per_rule[hit.rule].1 += 1;
    }
    let (matched, unmatched): (Vec<_>, Vec<_>) = hits_per_rule.iter().partition(|(_, n)| *n > 0);
    let mut warnings = scanned.warnings;
    warnings.extend(assembly.warnings);
    let report = ExtractionReport {
        mode,
        rules_matched: matched.into_iter().map(|(id, _)| id.clone()).collect(),
        rules_unmatched: unmatched.into_iter().map(|(id, _)| id.clone()).collect(),
        hits_per_rule,
        conflicts: assembly.conflicts,
        coercion_failures: assembly.coercion_failures,
        warnings,
        files_scanned: scanned.files_scanned,
        bytes_scanned: scanned.bytes_scanned,
        elapsed: start.elapsed(),
    };
    Ok((assembly.dataset, report))
}
