use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use rust_decimal::Decimal;
use serde::Serialize;

use super::codes::{checksum_length, CodeLists, STEP_TYPES};
use super::node::Value;
use super::path::MetadataPath;
use super::scalar::Scalar;
use super::types::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Type invariants only; partial documents pass.
    #[default]
    Structural,
    /// Structural plus the minimum needed to cite the dataset.
    Citable,
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structural" => Ok(Profile::Structural),
            "citable" => Ok(Profile::Citable),
            _ => Err(format!("unknown validation profile `{s}`")),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Structural => "structural",
            Profile::Citable => "citable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub path: MetadataPath,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let path = if self.path.is_root() { "engMeta".to_string() } else { self.path.to_string() };
        write!(f, "{sev}\t{path}\t{}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub profile: Profile,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn is_valid(&self) -> bool {
        self.error_count() == 0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        Ok(())
    }
}

/// Validates against the bundled code lists.
pub fn validate(dataset: &EngMetaDataset, profile: Profile) -> ValidationReport {
    validate_with(dataset, profile, CodeLists::bundled())
}

/// Collects every violation; never stops at the first one.
pub fn validate_with(dataset: &EngMetaDataset, profile: Profile, codes: &CodeLists) -> ValidationReport {
    let mut v = Checker { codes, findings: Vec::new() };
    v.dataset(dataset);
    if profile == Profile::Citable {
        v.citable(dataset);
    }
    ValidationReport { profile, findings: v.findings }
}

/// True for `YYYY-MM-DD`, RFC 3339 date-times and offset-less date-times.
pub fn is_iso8601(value: &str) -> bool {
    NaiveDate::parse_from_str(value, "%Y-%m-%d").is_ok() || is_iso8601_date_time(value)
}

pub fn is_iso8601_date_time(value: &str) -> bool {
    DateTime::parse_from_rfc3339(value).is_ok()
        || NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
        || NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M").is_ok()
}

/// Comparable instant of an ISO-8601 value; dates map to midnight.
pub(crate) fn parse_instant(value: &str) -> Option<NaiveDateTime> {
    if let Ok(d) = NaiveDate::parse_from_str(value, "%Y-%m-%d") {
        return d.and_hms_opt(0, 0, 0);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(value) {
        return Some(dt.naive_utc());
    }
    NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M:%S%.f")
        .or_else(|_| NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M"))
        .ok()
}

struct Checker<'a> {
    codes: &'a CodeLists,
    findings: Vec<Finding>,
}

fn at(base: &MetadataPath, name: &str) -> MetadataPath {
    base.child(name, None)
}

fn at_i(base: &MetadataPath, name: &str, i: usize) -> MetadataPath {
    base.child(name, Some(i))
}

impl Checker<'_> {
    fn error(&mut self, path: MetadataPath, message: impl Into<String>) {
        self.findings.push(Finding { severity: Severity::Error, path, message: message.into() });
    }

    fn warning(&mut self, path: MetadataPath, message: impl Into<String>) {
        self.findings.push(Finding { severity: Severity::Warning, path, message: message.into() });
    }

    fn text_ok(&mut self, path: MetadataPath, value: &str) {
        if value.trim().is_empty() {
            self.error(path, "empty text");
        } else if value.chars().any(|c| c.is_control() && !matches!(c, '\t' | '\n' | '\r')) {
            self.error(path, "contains control characters");
        }
    }

    fn required(&mut self, path: MetadataPath, value: &str) {
        if value.is_empty() {
            self.error(path, "required value is missing");
        } else {
            self.text_ok(path, value);
        }
    }

    fn optional(&mut self, path: MetadataPath, value: &Option<String>) {
        if let Some(v) = value {
            self.text_ok(path, v);
        }
    }

    fn code(&mut self, path: MetadataPath, value: &str, list: &[String], list_name: &str) {
        if !value.is_empty() && !list.iter().any(|c| c == value) {
            self.error(path, format!("`{value}` is not a known {list_name} code"));
        }
    }

    fn optional_code(&mut self, path: MetadataPath, value: &Option<String>, list: &[String], list_name: &str) {
        if let Some(v) = value {
            self.text_ok(path.clone(), v);
            self.code(path, v, list, list_name);
        }
    }

    fn date(&mut self, path: MetadataPath, value: &str) {
        if !value.is_empty() && !is_iso8601(value) {
            self.error(path, format!("`{value}` is not an ISO-8601 date or date-time"));
        }
    }

    fn uri(&mut self, path: MetadataPath, value: &Option<String>) {
        if let Some(v) = value {
            self.text_ok(path.clone(), v);
            if url::Url::parse(v).is_err() {
                self.error(path, format!("`{v}` is not a valid URI"));
            }
        }
    }

    fn min_count(&mut self, path: MetadataPath, value: Option<i64>, min: i64) {
        if let Some(n) = value {
            if n < min {
                let what = if min == 0 { "non-negative" } else { "positive" };
                self.error(path, format!("{n} must be {what}"));
            }
        }
    }

    fn not_empty<T: Value>(&mut self, path: &MetadataPath, value: &T) -> bool {
        if value.is_absent() {
            self.error(path.clone(), "element has no content");
            false
        } else {
            true
        }
    }

    fn dataset(&mut self, d: &EngMetaDataset) {
        let root = MetadataPath::root();
        let codes = self.codes;
        for (i, t) in d.titles.iter().enumerate() {
            let p = at_i(&root, "title", i);
            self.required(at(&p, "text"), &t.text);
            self.optional_code(at(&p, "titleType"), &t.title_type, &codes.title_type, "title type");
        }
        for (i, t) in d.descriptions.iter().enumerate() {
            let p = at_i(&root, "description", i);
            self.required(at(&p, "text"), &t.text);
            self.optional_code(at(&p, "descriptionType"), &t.description_type, &codes.description_type, "description type");
        }
        for (i, t) in d.dates.iter().enumerate() {
            let p = at_i(&root, "date", i);
            self.required(at(&p, "value"), &t.value);
            self.date(at(&p, "value"), &t.value);
            self.optional_code(at(&p, "dateType"), &t.date_type, &codes.date_type, "date type");
        }
        for (i, k) in d.keywords.iter().enumerate() {
            self.required(at_i(&root, "keyword", i), k);
        }
        for (i, s) in d.subjects.iter().enumerate() {
            self.required(at_i(&root, "subject", i), s);
        }
        for (i, p) in d.persons.iter().enumerate() {
            self.person(&at_i(&root, "person", i), p);
        }
        for (i, f) in d.funding_references.iter().enumerate() {
            let p = at_i(&root, "fundingReference", i);
            self.required(at(&p, "funderName"), &f.funder_name);
            self.optional(at(&p, "awardNumber"), &f.award_number);
            self.optional_code(
                at(&p, "funderIdentifierType"),
                &f.funder_identifier_type,
                &codes.funder_identifier_type,
                "funder identifier type",
            );
        }
        self.optional(at(&root, "project"), &d.project);
        for (i, c) in d.context.iter().enumerate() {
            let p = at_i(&root, "context", i);
            self.required(at(&p, "identifier"), &c.identifier);
            self.required(at(&p, "relatedIdentifierType"), &c.related_identifier_type);
            self.code(
                at(&p, "relatedIdentifierType"),
                &c.related_identifier_type,
                &codes.related_identifier_type,
                "related identifier type",
            );
            self.required(at(&p, "relationType"), &c.relation_type);
            self.code(at(&p, "relationType"), &c.relation_type, &codes.relation_type, "relation type");
        }
        if let Some(r) = &d.resource_type {
            let p = at(&root, "resourceType");
            self.required(at(&p, "text"), &r.text);
            self.optional_code(
                at(&p, "resourceTypeGeneral"),
                &r.resource_type_general,
                &codes.resource_type_general,
                "resource type",
            );
        }
        if let Some(r) = &d.rights_statement {
            self.rights(&at(&root, "rightsStatement"), r);
        }
        if let Some(w) = &d.worked {
            let p = at(&root, "worked");
            if w.success.is_none() {
                self.error(at(&p, "success"), "required value is missing");
            }
            self.optional(at(&p, "note"), &w.note);
        }
        if let Some(pid) = &d.pid {
            self.identifier(&at(&root, "pid"), pid);
        }
        for (i, f) in d.files.iter().enumerate() {
            self.file(&at_i(&root, "file", i), f);
        }
        self.optional(at(&root, "storage"), &d.storage);
        self.optional(at(&root, "format"), &d.format);
        if let Some(s) = &d.system {
            let p = at(&root, "system");
            if self.not_empty(&p, s) {
                self.system(&p, s);
            }
        }
        for (i, s) in d.processing_steps.iter().enumerate() {
            self.step(&at_i(&root, "processingStep", i), s);
        }
        let mut previous: Option<NaiveDateTime> = None;
        for (i, s) in d.processing_steps.iter().enumerate() {
            let Some(date) = s.date.as_deref().and_then(parse_instant) else {
                continue;
            };
            if previous.is_some_and(|p| date < p) {
                self.warning(at(&at_i(&root, "processingStep", i), "date"), "step date precedes the previous step");
            }
            previous = Some(date);
        }
    }

    fn identifier(&mut self, p: &MetadataPath, id: &PersistentIdentifier) {
        self.required(at(p, "scheme"), &id.scheme);
        self.required(at(p, "value"), &id.value);
    }

    fn person(&mut self, p: &MetadataPath, person: &PersonOrOrganization) {
        self.required(at(p, "name"), &person.name);
        if let Some(id) = &person.identifier {
            self.identifier(&at(p, "identifier"), id);
        }
        self.optional(at(p, "affiliation"), &person.affiliation);
        self.optional_code(at(p, "role"), &person.role, &self.codes.role, "role");
    }

    fn rights(&mut self, p: &MetadataPath, r: &RightsStatement) {
        if self.not_empty(p, r) {
            self.optional(at(p, "license"), &r.license);
            self.uri(at(p, "licenseUri"), &r.license_uri);
            self.optional(at(p, "accessConditions"), &r.access_conditions);
        }
    }

    fn file(&mut self, p: &MetadataPath, f: &FileInfo) {
        self.required(at(p, "filename"), &f.filename);
        self.uri(at(p, "link"), &f.link);
        if let Some(pid) = &f.pid {
            self.identifier(&at(p, "pid"), pid);
        }
        if let Some(c) = &f.checksum {
            let cp = at(p, "checksum");
            self.required(at(&cp, "algorithm"), &c.algorithm);
            self.required(at(&cp, "digest"), &c.digest);
            if !c.algorithm.is_empty() {
                match checksum_length(&c.algorithm) {
                    None => self.error(at(&cp, "algorithm"), format!("`{}` is not MD5 or SHA-256", c.algorithm)),
                    Some(len) if !c.digest.is_empty() => {
                        if c.digest.len() != len {
                            self.error(
                                at(&cp, "digest"),
                                format!("{} digest must have {len} hex characters, found {}", c.algorithm, c.digest.len()),
                            );
                        }
                        if !c.digest.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
                            self.error(at(&cp, "digest"), "digest must be lowercase hexadecimal");
                        }
                    }
                    Some(_) => {}
                }
            }
        }
        self.min_count(at(p, "sizeBytes"), f.size_bytes, 0);
        self.optional(at(p, "fileType"), &f.file_type);
    }

    fn file_ref(&mut self, p: &MetadataPath, f: &FileRef) {
        self.optional(at(p, "filename"), &f.filename);
        self.uri(at(p, "link"), &f.link);
        if let Some(pid) = &f.pid {
            self.identifier(&at(p, "pid"), pid);
        }
        if f.filename.is_none() && f.link.is_none() && f.pid.is_none() {
            self.error(p.clone(), "file reference needs a filename, link or pid");
        }
    }

    fn variables(&mut self, p: &MetadataPath, name: &str, vars: &[Variable], unique: bool) {
        let mut seen = HashSet::new();
        for (i, v) in vars.iter().enumerate() {
            let vp = at_i(p, name, i);
            self.variable(&vp, v);
            if unique && !v.name.is_empty() && !seen.insert(v.name.as_str()) {
                self.error(at(&vp, "name"), format!("duplicate variable name `{}`", v.name));
            }
        }
    }

    fn variable(&mut self, p: &MetadataPath, v: &Variable) {
        self.required(at(p, "name"), &v.name);
        match &v.value {
            None => self.error(at(p, "value"), "required value is missing"),
            Some(Scalar::Text(t)) if t.is_empty() => self.error(at(p, "value"), "required value is missing"),
            Some(Scalar::Text(t)) => self.text_ok(at(p, "value"), t),
            Some(_) => {}
        }
        self.optional(at(p, "unit"), &v.unit);
        self.optional(at(p, "symbol"), &v.symbol);
        if let Some(u) = v.uncertainty {
            if !v.value.as_ref().is_some_and(Scalar::is_numeric) {
                self.error(at(p, "uncertainty"), "uncertainty requires a numeric value");
            }
            if u < Decimal::ZERO {
                self.error(at(p, "uncertainty"), "uncertainty must not be negative");
            }
        }
    }

    fn method(&mut self, p: &MetadataPath, m: &Method) {
        self.required(at(p, "name"), &m.name);
        self.variables(p, "parameter", &m.parameters, false);
    }

    fn system(&mut self, p: &MetadataPath, s: &ObservedSystem) {
        self.optional(at(p, "description"), &s.description);
        for (i, c) in s.components.iter().enumerate() {
            let cp = at_i(p, "components", i);
            self.required(at(&cp, "name"), &c.name);
            self.optional(at(&cp, "identifier"), &c.identifier);
            if let Some(ff) = &c.force_field {
                let fp = at(&cp, "forceField");
                self.required(at(&fp, "name"), &ff.name);
                self.variables(&fp, "parameter", &ff.parameters, false);
            }
        }
        for (i, b) in s.boundary_conditions.iter().enumerate() {
            self.required(at_i(p, "boundaryConditions", i), b);
        }
        self.variables(p, "controlledVariables", &s.controlled_variables, true);
        self.variables(p, "measuredVariables", &s.measured_variables, true);
        self.variables(p, "parameters", &s.parameters, true);
        if let Some(r) = &s.spatial_resolution {
            let rp = at(p, "spatialResolution");
            if self.not_empty(&rp, r) {
                self.min_count(at(&rp, "numberOfCells"), r.number_of_cells, 0);
                self.optional(at(&rp, "scaleUnit"), &r.scale_unit);
            }
        }
        if let Some(r) = &s.temporal_resolution {
            let rp = at(p, "temporalResolution");
            if self.not_empty(&rp, r) {
                self.min_count(at(&rp, "numberOfTimesteps"), r.number_of_timesteps, 0);
                if let Some(iv) = r.interval {
                    if iv <= Decimal::ZERO {
                        self.error(at(&rp, "interval"), "interval must be positive");
                    }
                }
                self.optional(at(&rp, "intervalUnit"), &r.interval_unit);
            }
        }
    }

    fn step(&mut self, p: &MetadataPath, s: &ProcessingStep) {
        let tp = at(p, "stepType");
        if s.step_type.is_empty() {
            self.error(tp, "required value is missing");
        } else if !STEP_TYPES.contains(&s.step_type.as_str()) {
            self.error(
                tp,
                format!("`{}` is not one of: {}", s.step_type, STEP_TYPES.join(", ")),
            );
        }
        if let Some(d) = &s.date {
            self.text_ok(at(p, "date"), d);
            self.date(at(p, "date"), d);
        }
        if let Some(a) = &s.actor {
            self.person(&at(p, "actor"), a);
        }
        for (i, f) in s.inputs.iter().enumerate() {
            self.file_ref(&at_i(p, "input", i), f);
        }
        for (i, f) in s.outputs.iter().enumerate() {
            self.file_ref(&at_i(p, "output", i), f);
        }
        if let Some(m) = &s.method {
            self.method(&at(p, "method"), m);
        }
        if let Some(m) = &s.error_method {
            self.method(&at(p, "errorMethod"), m);
        }
        for (i, sw) in s.software.iter().enumerate() {
            let sp = at_i(p, "software", i);
            self.required(at(&sp, "name"), &sw.name);
            self.optional(at(&sp, "softwareVersion"), &sw.software_version);
            for (j, c) in sw.contributors.iter().enumerate() {
                self.person(&at_i(&sp, "contributor", j), c);
            }
            self.optional(at(&sp, "programmingLanguage"), &sw.programming_language);
            self.optional(at(&sp, "operatingSystem"), &sw.operating_system);
            self.uri(at(&sp, "url"), &sw.url);
            self.uri(at(&sp, "softwareSourceCode"), &sw.software_source_code);
            self.uri(at(&sp, "softwareApplication"), &sw.software_application);
            self.uri(at(&sp, "codeRepository"), &sw.code_repository);
            self.optional(at(&sp, "citation"), &sw.citation);
            self.optional(at(&sp, "referencePublication"), &sw.reference_publication);
            if let Some(l) = &sw.license {
                self.rights(&at(&sp, "license"), l);
            }
        }
        for (i, ins) in s.instruments.iter().enumerate() {
            let ip = at_i(p, "instrument", i);
            self.required(at(&ip, "name"), &ins.name);
            self.optional(at(&ip, "description"), &ins.description);
            self.optional(at(&ip, "identifier"), &ins.identifier);
        }
        if let Some(e) = &s.environment {
            let ep = at(p, "environment");
            if self.not_empty(&ep, e) {
                self.optional(at(&ep, "name"), &e.name);
                self.min_count(at(&ep, "nodes"), e.nodes, 1);
                self.min_count(at(&ep, "coresPerNode"), e.cores_per_node, 1);
                self.min_count(at(&ep, "totalCores"), e.total_cores, 1);
                if let Some(c) = &e.compiler {
                    let cp = at(&ep, "compiler");
                    self.required(at(&cp, "name"), &c.name);
                    self.optional(at(&cp, "flags"), &c.flags);
                }
            }
        }
        self.optional(at(p, "executionCommand"), &s.execution_command);
    }

    fn citable(&mut self, d: &EngMetaDataset) {
        let root = MetadataPath::root();
        if d.titles.is_empty() {
            self.error(at(&root, "title"), "a citable dataset needs at least one title");
        }
        if !d.persons.iter().any(|p| p.role.as_deref() == Some("author")) {
            self.error(at(&root, "person"), "a citable dataset needs at least one person with role author");
        }
        if d.descriptions.is_empty() {
            self.error(at(&root, "description"), "a citable dataset needs at least one description");
        }
        if d.dates.is_empty() {
            self.error(at(&root, "date"), "a citable dataset needs at least one date");
        }
    }
}
