//! The `engmeta` command line.
//!
//! | exit code | meaning                          |
//! |-----------|----------------------------------|
//! | 0         | success                          |
//! | 1         | validation errors found          |
//! | 2         | usage error                      |
//! | 3         | I/O error                        |
//!
//! Payloads go to standard output or `--out`; everything else goes to
//! standard error. Documents given with `--in` may be XML or JSON and are
//! told apart by their first character; `-` reads standard input.

pub mod harvest;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::canon::{self, CanonError};
use crate::extract::{self, ExtractionConfig, Mode};
use crate::model::{merge, validate, EngMetaDataset, MergePolicy, Profile};
use crate::{flatten, prov};
use harvest::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "engmeta", version, about = "Metadata toolkit for computational engineering datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Harvest metadata from simulation files with a rule config
    Extract(ExtractArgs),
    /// Check a document against a validation profile
    Validate(ValidateArgs),
    /// Write the processing steps as a PROV-N document
    ToProv(ToProvArgs),
    /// Flatten a document into repository metadata blocks (JSON)
    ToDataverse(ToDataverseArgs),
    /// List files with size, checksum and type
    Harvest(HarvestArgs),
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Xml,
    Json,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    #[arg(long, value_name = "DIR")]
    root: PathBuf,
    #[arg(long, default_value = "serial", value_name = "serial|parallel")]
    mode: Mode,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the extraction report (JSON) here
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, default_value = "structural", value_name = "structural|citable")]
    profile: Profile,
}

#[derive(Debug, Args)]
struct ToProvArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Namespace bound to the `ex` prefix
    #[arg(long, default_value = prov::DEFAULT_BASE_URI, value_name = "URI")]
    base_uri: String,
}

#[derive(Debug, Args)]
struct ToDataverseArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HarvestArgs {
    #[arg(long, value_name = "DIR")]
    root: PathBuf,
    #[arg(long, default_value = "sha256", value_name = "md5|sha256")]
    algorithm: Algorithm,
    /// Merge the file list into this document (existing values win)
    #[arg(long, value_name = "FILE")]
    merge_into: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

enum Failure {
    Invalid(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

type Outcome = Result<i32, Failure>;

struct Console<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Console<'_> {
    fn note(&mut self, message: impl AsRef<str>) {
        let _ = writeln!(self.err, "{}", message.as_ref());
    }

    fn emit(&mut self, payload: &str, to: Option<&Path>) -> Result<(), Failure> {
        match to {
            Some(path) => fs::write(path, payload).map_err(|e| io_failure(path, e)),
            None => self.out.write_all(payload.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}"))),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).map_err(|e| io_failure(path, e))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| io_failure(path, e))
    }
}

/// Parses XML or JSON, whichever `text` starts with.
pub fn parse_document(text: &str) -> Result<canon::Parsed, CanonError> {
    if text.trim_start().starts_with('{') {
        canon::from_json(text)
    } else {
        canon::from_xml(text)
    }
}

fn load(path: &Path, console: &mut Console) -> Result<EngMetaDataset, Failure> {
    let text = read_input(path)?;
    let parsed = parse_document(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    for w in &parsed.warnings {
        console.note(format!("warning: {}: {w}", path.display()));
    }
    Ok(parsed.dataset)
}

fn require_structural(d: &EngMetaDataset, path: &Path) -> Result<(), Failure> {
    let report = validate(d, Profile::Structural);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("{}: structural validation failed\n{}", path.display(), report.to_string().trim_end())))
    }
}

fn render(d: &EngMetaDataset, format: Format) -> String {
    match format {
        Format::Xml => canon::to_xml_unchecked(d),
        Format::Json => canon::to_json_unchecked(d),
    }
}

fn run_extract(a: ExtractArgs, c: &mut Console) -> Outcome {
    let text = fs::read_to_string(&a.config).map_err(|e| io_failure(&a.config, e))?;
    let config: ExtractionConfig =
        text.parse().map_err(|e| Failure::Usage(format!("{}: {e}", a.config.display())))?;
    let (dataset, report) = extract::extract(&a.root, &config, a.mode).map_err(|e| Failure::Io(e.to_string()))?;
    for w in &report.warnings {
        c.note(format!("warning: {w}"));
    }
    for f in &report.coercion_failures {
        c.note(format!("warning: {}:{}: rule {}: cannot use `{}`: {}", f.file, f.line, f.rule_id, f.raw_value, f.reason));
    }
    for k in &report.conflicts {
        c.note(format!("conflict: {}: kept {}, ignored {}", k.path, k.chosen.canonical(), k.overlay.canonical()));
    }
    c.note(format!(
        "{} files, {} bytes, {} hits, {} rules unmatched ({} mode, {:.3}s)",
        report.files_scanned,
        report.bytes_scanned,
        report.total_hits(),
        report.rules_unmatched.len(),
        report.mode,
        report.elapsed.as_secs_f64()
    ));
    if let Some(path) = &a.report {
        fs::write(path, report.to_json()).map_err(|e| io_failure(path, e))?;
    }
    c.emit(&render(&dataset, a.format), a.out.as_deref())?;
    let findings = validate(&dataset, Profile::Structural);
    if findings.is_valid() {
        Ok(0)
    } else {
        c.note(format!("extracted document fails structural validation:\n{}", findings.to_string().trim_end()));
        Ok(1)
    }
}

fn run_validate(a: ValidateArgs, c: &mut Console) -> Outcome {
    let d = load(&a.input, c)?;
    let report = validate(&d, a.profile);
    c.emit(&report.to_string(), None)?;
    let errors = report.error_count();
    c.note(format!("{errors} errors, {} warnings ({} profile)", report.findings.len() - errors, a.profile));
    Ok(if errors == 0 { 0 } else { 1 })
}

fn run_to_prov(a: ToProvArgs, c: &mut Console) -> Outcome {
    let d = load(&a.input, c)?;
    require_structural(&d, &a.input)?;
    let doc = prov::to_prov_with_base(&d, &a.base_uri);
    let text = prov::serialize_prov_n(&doc).map_err(|e| Failure::Invalid(e.to_string()))?;
    c.note(format!(
        "{} activities, {} agents, {} entities, {} relations",
        doc.activities.len(),
        doc.agents.len(),
        doc.entities.len(),
        doc.relations.len()
    ));
    c.emit(&(text + "\n"), a.out.as_deref())?;
    Ok(0)
}

fn run_to_dataverse(a: ToDataverseArgs, c: &mut Console) -> Outcome {
    let d = load(&a.input, c)?;
    require_structural(&d, &a.input)?;
    let (blocks, report) = flatten::flatten(&d);
    let json = flatten::serialize_blocks_json(&blocks, &report).map_err(|e| Failure::Invalid(e.to_string()))?;
    c.note(format!("{} leaves mapped, {} dropped", report.mapped.len(), report.dropped.len()));
    c.emit(&json, a.out.as_deref())?;
    Ok(0)
}

fn run_harvest(a: HarvestArgs, c: &mut Console) -> Outcome {
    let result = harvest::harvest(&a.root, a.algorithm).map_err(|e| Failure::Io(e.to_string()))?;
    for (name, message) in result.errors() {
        c.note(format!("warning: {name}: {message}"));
    }
    let harvested = result.to_dataset();
    let dataset = match &a.merge_into {
        Some(path) => {
            let base = load(path, c)?;
            let (merged, conflicts) = merge(&base, &harvested, MergePolicy::FirstWins);
            for k in &conflicts {
                c.note(format!("conflict: {}: kept {}, ignored {}", k.path, k.chosen.canonical(), k.overlay.canonical()));
            }
            merged
        }
        None => harvested,
    };
    c.note(format!("{} files ({})", result.entries.len(), result.algorithm));
    c.emit(&render(&dataset, a.format), a.out.as_deref())?;
    Ok(0)
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                2
            } else {
                let _ = write!(out, "{rendered}");
                0
            };
        }
    };
    let mut console = Console { out, err };
    let outcome = match cli.command {
        Command::Extract(a) => run_extract(a, &mut console),
        Command::Validate(a) => run_validate(a, &mut console),
        Command::ToProv(a) => run_to_prov(a, &mut console),
        Command::ToDataverse(a) => run_to_dataverse(a, &mut console),
        Command::Harvest(a) => run_harvest(a, &mut console),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            console.note(format!("error: {}", f.message()));
            f.code()
        }
    }
}

pub fn main() -> i32 {
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let code = run(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("engmeta").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (code, out, err) = call(&["validate", "--in", "x.xml", "--frobnicate"]);
        assert_eq!(code, 2);
        assert!(out.is_empty());
        assert!(err.contains("Usage:"), "{err}");
    }

    #[test]
    fn help_goes_to_stdout() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("to-dataverse"));
    }

    #[test]
    fn bad_profile_is_a_usage_error() {
        assert_eq!(call(&["validate", "--in", "x.xml", "--profile", "strict"]).0, 2);
    }

    #[test]
    fn missing_input_is_an_io_error() {
        let (code, _, err) = call(&["to-prov", "--in", "/no/such/file.xml"]);
        assert_eq!(code, 3);
        assert!(err.contains("/no/such/file.xml"));
    }

    #[test]
    fn validate_empty_citable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.xml");
        fs::write(&path, canon::to_xml(&EngMetaDataset::default()).unwrap()).unwrap();
        let (code, out, _) = call(&["validate", "--in", path.to_str().unwrap(), "--profile", "citable"]);
        assert_eq!(code, 1);
        assert_eq!(out.lines().count(), 4);
        let (code, out, _) = call(&["validate", "--in", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.is_empty());
    }

    #[test]
    fn sniffs_json_input() {
        assert!(parse_document("  {}").unwrap().dataset.is_empty());
        assert!(parse_document(&canon::to_xml(&EngMetaDataset::default()).unwrap()).is_ok());
    }
}
