use std::fmt;
use std::str::FromStr;

use globset::{Glob, GlobBuilder, GlobMatcher};
use thiserror::Error;

use crate::model::{describe_path, FieldInfo, LeafKind, MetadataPath, Segment};

/// Type a raw value is coerced to before it is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueType {
    #[default]
    String,
    Integer,
    Decimal,
    Boolean,
    Date,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::String => "string",
            ValueType::Integer => "integer",
            ValueType::Decimal => "decimal",
            ValueType::Boolean => "boolean",
            ValueType::Date => "date",
        }
    }

    fn fits(self, leaf: LeafKind) -> bool {
        matches!(
            (self, leaf),
            (_, LeafKind::Any)
                | (ValueType::String | ValueType::Date, LeafKind::Text)
                | (ValueType::Integer, LeafKind::Integer)
                | (ValueType::Decimal, LeafKind::Decimal)
                | (ValueType::Boolean, LeafKind::Boolean)
        )
    }
}

impl FromStr for ValueType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "string" => ValueType::String,
            "integer" => ValueType::Integer,
            "decimal" => ValueType::Decimal,
            "boolean" => ValueType::Boolean,
            "date" => ValueType::Date,
            _ => return Err(format!("unknown type `{s}` (string, integer, decimal, boolean, date)")),
        })
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which hits of an ungrouped rule are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Occurrence {
    #[default]
    First,
    Last,
    All,
}

impl FromStr for Occurrence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "first" => Occurrence::First,
            "last" => Occurrence::Last,
            "all" => Occurrence::All,
            _ => return Err(format!("unknown occurrence `{s}` (first, last, all)")),
        })
    }
}

/// One `<key> <delimiter> <value>` pattern and where its value goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionRule {
    pub id: String,
    pub target: MetadataPath,
    /// Glob over paths relative to the scanned root.
    pub source: String,
    pub key: String,
    pub delimiter: String,
    pub value_type: ValueType,
    /// Written to the sibling `unit` field of a variable target.
    pub unit: Option<String>,
    pub group: Option<String>,
    pub occurrence: Occurrence,
    /// Line of the `[rule ...]` header; 0 for rules built in code.
    pub line: usize,
}

impl ExtractionRule {
    pub fn new(id: impl Into<String>, target: &str, source: impl Into<String>, key: impl Into<String>) -> Self {
        ExtractionRule {
            id: id.into(),
            target: MetadataPath::parse(target).unwrap_or_else(|_| MetadataPath::root()),
            source: source.into(),
            key: key.into(),
            delimiter: "=".into(),
            value_type: ValueType::String,
            unit: None,
            group: None,
            occurrence: Occurrence::First,
            line: 0,
        }
    }

    pub fn with_type(mut self, value_type: ValueType) -> Self {
        self.value_type = value_type;
        self
    }

    pub fn with_delimiter(mut self, delimiter: impl Into<String>) -> Self {
        self.delimiter = delimiter.into();
        self
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = Some(unit.into());
        self
    }

    pub fn in_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }

    pub fn with_occurrence(mut self, occurrence: Occurrence) -> Self {
        self.occurrence = occurrence;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown field `{name}`")]
    UnknownField { line: usize, name: String },
    #[error("line {line}: rule `{rule}` lacks mandatory field `{field}`")]
    MissingField { line: usize, rule: String, field: &'static str },
    #[error("line {line}: rule id `{id}` already declared on line {first}")]
    DuplicateId { id: String, first: usize, line: usize },
    #[error("line {line}: rule `{rule}`: {message}")]
    Invalid { line: usize, rule: String, message: String },
}

/// Where the members of a group write, relative to a shared list element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct GroupPlan {
    pub name: String,
    /// Path of the list each joined instance is appended to.
    pub root: MetadataPath,
    /// Rule indices in declaration order.
    pub members: Vec<usize>,
}

/// An ordered, validated rule list.
#[derive(Debug, Clone)]
pub struct ExtractionConfig {
    rules: Vec<ExtractionRule>,
    matchers: Vec<GlobMatcher>,
    groups: Vec<GroupPlan>,
}

impl PartialEq for ExtractionConfig {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl ExtractionConfig {
    /// Validates `rules` and compiles their source globs.
    pub fn new(rules: Vec<ExtractionRule>) -> Result<Self, ConfigError> {
        let mut matchers = Vec::with_capacity(rules.len());
        for (i, rule) in rules.iter().enumerate() {
            if let Some(first) = rules[..i].iter().find(|r| r.id == rule.id) {
                return Err(ConfigError::DuplicateId { id: rule.id.clone(), first: first.line, line: rule.line });
            }
            check_rule(rule)?;
            matchers.push(compile_glob(rule)?);
        }
        let groups = plan_groups(&rules)?;
        Ok(ExtractionConfig { rules, matchers, groups })
    }

    pub fn rules(&self) -> &[ExtractionRule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Indices of the rules whose source glob matches `relative_path`.
    pub fn rules_for(&self, relative_path: &str) -> Vec<usize> {
        self.matchers
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_match(relative_path))
            .map(|(i, _)| i)
            .collect()
    }

    pub(crate) fn groups(&self) -> &[GroupPlan] {
        &self.groups
    }
}

impl FromStr for ExtractionConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_config(s)
    }
}

const FIELDS: [&str; 8] = ["target", "source", "key", "delimiter", "type", "unit", "group", "occurrence"];

struct Draft {
    id: String,
    line: usize,
    fields: Vec<(&'static str, String, usize)>,
}

/// Parses the INI-style rule file:
///
/// ```text
/// # comment
/// [rule steps]
/// target = system.temporalResolution.numberOfTimesteps
/// source = *.mdp
/// key = nsteps
/// type = integer
/// ```
pub fn parse_config(text: &str) -> Result<ExtractionConfig, ConfigError> {
    let mut drafts: Vec<Draft> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let inner = header
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line: line_no, message: "unterminated section header".into() })?;
            let id = inner
                .trim()
                .strip_prefix("rule")
                .filter(|rest| rest.starts_with(char::is_whitespace))
                .map(str::trim)
                .filter(|id| !id.is_empty())
                .ok_or_else(|| ConfigError::Syntax {
                    line: line_no,
                    message: format!("expected `[rule <id>]`, found `{line}`"),
                })?;
            if let Some(first) = drafts.iter().find(|d| d.id == id) {
                return Err(ConfigError::DuplicateId { id: id.to_string(), first: first.line, line: line_no });
            }
            drafts.push(Draft { id: id.to_string(), line: line_no, fields: Vec::new() });
            continue;
        }
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: line_no, message: format!("expected `name = value`, found `{line}`") })?;
        let name = name.trim();
        let field = FIELDS
            .iter()
            .find(|f| **f == name)
            .ok_or_else(|| ConfigError::UnknownField { line: line_no, name: name.to_string() })?;
        let draft = drafts
            .last_mut()
            .ok_or_else(|| ConfigError::Syntax { line: line_no, message: "field outside a `[rule <id>]` section".into() })?;
        if draft.fields.iter().any(|(f, _, _)| f == field) {
            return Err(ConfigError::Invalid {
                line: line_no,
                rule: draft.id.clone(),
                message: format!("field `{field}` given twice"),
            });
        }
        draft.fields.push((field, value.trim().to_string(), line_no));
    }

    let rules = drafts.into_iter().map(build_rule).collect::<Result<Vec<_>, _>>()?;
    ExtractionConfig::new(rules)
}

fn build_rule(draft: Draft) -> Result<ExtractionRule, ConfigError> {
    let get = |name: &str| draft.fields.iter().find(|(f, _, _)| *f == name).map(|(_, v, l)| (v.as_str(), *l));
    let required = |name: &'static str| {
        get(name).ok_or_else(|| ConfigError::MissingField { line: draft.line, rule: draft.id.clone(), field: name })
    };
    let invalid = |line: usize, message: String| ConfigError::Invalid { line, rule: draft.id.clone(), message };

    let (target_text, target_line) = required("target")?;
    let target = MetadataPath::parse(target_text).map_err(|e| invalid(target_line, format!("target: {e}")))?;
    let mut rule = ExtractionRule {
        id: draft.id.clone(),
        target,
        source: required("source")?.0.to_string(),
        key: required("key")?.0.to_string(),
        delimiter: "=".into(),
        value_type: ValueType::String,
        unit: None,
        group: None,
        occurrence: Occurrence::First,
        line: draft.line,
    };
    if let Some((d, _)) = get("delimiter") {
        rule.delimiter = d.to_string();
    }
    if let Some((t, line)) = get("type") {
        rule.value_type = t.parse().map_err(|e| invalid(line, e))?;
    }
    if let Some((o, line)) = get("occurrence") {
        rule.occurrence = o.parse().map_err(|e| invalid(line, e))?;
    }
    rule.unit = get("unit").map(|(u, _)| u.to_string());
    rule.group = get("group").map(|(g, _)| g.to_string());
    Ok(rule)
}

fn compile_glob(rule: &ExtractionRule) -> Result<GlobMatcher, ConfigError> {
    GlobBuilder::new(&rule.source)
        .literal_separator(false)
        .build()
        .map(|g: Glob| g.compile_matcher())
        .map_err(|e| ConfigError::Invalid { line: rule.line, rule: rule.id.clone(), message: format!("source: {e}") })
}

fn check_rule(rule: &ExtractionRule) -> Result<(), ConfigError> {
    let invalid = |message: String| ConfigError::Invalid { line: rule.line, rule: rule.id.clone(), message };
    if rule.id.trim().is_empty() || rule.id.contains(char::is_whitespace) {
        return Err(invalid("rule ids must be non-empty and contain no whitespace".into()));
    }
    for (name, value) in [("target", rule.target.to_string()), ("source", rule.source.clone()), ("key", rule.key.clone())] {
        if value.trim().is_empty() || (name == "target" && rule.target.is_root()) {
            return Err(ConfigError::MissingField {
                line: rule.line,
                rule: rule.id.clone(),
                field: FIELDS.iter().find(|f| **f == name).copied().unwrap_or("target"),
            });
        }
    }
    if rule.delimiter.is_empty() {
        return Err(invalid("delimiter must not be empty".into()));
    }
    if rule.key.contains(&rule.delimiter) {
        return Err(invalid(format!("key `{}` contains the delimiter `{}`", rule.key, rule.delimiter)));
    }
    let info = field_info(rule)?;
    let leaf = info.last().and_then(|f| f.leaf).ok_or_else(|| {
        invalid(format!("target `{}` is a structured element; rules must target a scalar field", rule.target))
    })?;
    if !rule.value_type.fits(leaf) {
        return Err(invalid(format!("type {} cannot be stored in `{}`, which holds {leaf} values", rule.value_type, rule.target)));
    }
    if rule.unit.is_some() {
        let parent = info.len().checked_sub(2).and_then(|i| info[i].record);
        if parent != Some("variable") || rule.target.last().is_some_and(|s| s.name == "unit") {
            return Err(invalid(format!("`unit` needs a variable field as target, not `{}`", rule.target)));
        }
    }
    if rule.occurrence == Occurrence::All {
        if rule.group.is_some() {
            return Err(invalid("grouped rules always collect every hit; drop `occurrence`".into()));
        }
        if append_point(&rule.target).is_none() {
            return Err(invalid(format!("occurrence = all needs a repeatable element without index in `{}`", rule.target)));
        }
    } else if rule.group.is_some() && rule.occurrence != Occurrence::First {
        return Err(invalid("grouped rules always collect every hit; drop `occurrence`".into()));
    }
    Ok(())
}

fn field_info(rule: &ExtractionRule) -> Result<Vec<FieldInfo>, ConfigError> {
    describe_path(&rule.target).ok_or_else(|| ConfigError::Invalid {
        line: rule.line,
        rule: rule.id.clone(),
        message: format!("target `{}` does not exist in the model", rule.target),
    })
}

/// Position of the deepest repeatable segment without an explicit index.
pub(crate) fn append_point(target: &MetadataPath) -> Option<usize> {
    let info = describe_path(target)?;
    let segments = target.segments();
    (0..segments.len()).rev().find(|&i| info[i].list && segments[i].index.is_none())
}

fn plan_groups(rules: &[ExtractionRule]) -> Result<Vec<GroupPlan>, ConfigError> {
    let mut plans: Vec<GroupPlan> = Vec::new();
    for (i, rule) in rules.iter().enumerate() {
        let Some(name) = &rule.group else { continue };
        match plans.iter_mut().find(|p| &p.name == name) {
            Some(plan) => plan.members.push(i),
            None => plans.push(GroupPlan { name: name.clone(), root: MetadataPath::root(), members: vec![i] }),
        }
    }
    for plan in &mut plans {
        let first = &rules[plan.members[0]];
        let targets: Vec<&[Segment]> = plan.members.iter().map(|&i| rules[i].target.segments()).collect();
        let common = targets
            .iter()
            .map(|t| t.len() - 1)
            .min()
            .map(|max| (0..max).take_while(|&k| targets.iter().all(|t| t[k] == targets[0][k])).count())
            .unwrap_or(0);
        let info = describe_path(&first.target).unwrap_or_default();
        let root = (0..common).rev().find(|&k| info[k].list && targets[0][k].index.is_none()).ok_or_else(|| {
            ConfigError::Invalid {
                line: first.line,
                rule: first.id.clone(),
                message: format!("members of group `{}` share no repeatable element without index", plan.name),
            }
        })?;
        let mut path = MetadataPath::root();
        for seg in &targets[0][..=root] {
            path = path.child(&seg.name, seg.index);
        }
        plan.root = path;
    }
    Ok(plans)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = "\
# temperature coupling
[rule steps]
target = system.temporalResolution.numberOfTimesteps
source = *.mdp
key = nsteps
type = integer
";

    #[test]
    fn one_rule_with_defaults() {
        let c = parse_config(ONE).unwrap();
        assert_eq!(c.rules().len(), 1);
        let r = &c.rules()[0];
        assert_eq!(r.id, "steps");
        assert_eq!(r.delimiter, "=");
        assert_eq!(r.occurrence, Occurrence::First);
        assert_eq!(r.value_type, ValueType::Integer);
        assert_eq!(r.line, 2);
    }

    #[test]
    fn empty_file_is_valid() {
        assert!(parse_config("").unwrap().is_empty());
        assert!(parse_config("# nothing\n\n").unwrap().is_empty());
    }

    #[test]
    fn values_are_taken_after_the_first_equals() {
        let c = parse_config("[rule r]\ntarget = project\nsource = *\nkey = a=b\ndelimiter = :\n").unwrap();
        assert_eq!(c.rules()[0].key, "a=b");
        assert_eq!(c.rules()[0].delimiter, ":");
    }

    #[test]
    fn duplicate_ids_name_both_lines() {
        let text = format!("{ONE}\n[rule steps]\ntarget = project\nsource = *\nkey = p\n");
        assert_eq!(
            parse_config(&text).unwrap_err(),
            ConfigError::DuplicateId { id: "steps".into(), first: 2, line: 8 }
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_config("[rule a]\ntarget = project\nsorce = *\n").unwrap_err();
        assert_eq!(e, ConfigError::UnknownField { line: 3, name: "sorce".into() });
        let e = parse_config("\n[rule a]\ntarget = project\nkey = k\n").unwrap_err();
        assert_eq!(e, ConfigError::MissingField { line: 2, rule: "a".into(), field: "source" });
        assert!(matches!(parse_config("key = k\n"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(parse_config("[rule]\n"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn targets_are_checked_against_the_model() {
        let bad = [
            "[rule a]\ntarget = system.nothing\nsource = *\nkey = k\n",
            "[rule a]\ntarget = system\nsource = *\nkey = k\n",
            "[rule a]\ntarget = project\nsource = *\nkey = k\ntype = integer\n",
            "[rule a]\ntarget = project\nsource = *\nkey = k\nunit = K\n",
            "[rule a]\ntarget = project\nsource = *\nkey = k\noccurrence = all\n",
            "[rule a]\ntarget = project\nsource = *\nkey = k\ngroup = g\n",
        ];
        for text in bad {
            assert!(matches!(parse_config(text), Err(ConfigError::Invalid { line: 1 | 2, .. })), "{text}");
        }
    }

    #[test]
    fn groups_share_a_list_root() {
        let text = "\
[rule n]
target = system.controlledVariables.name
source = *.mdp
key = name
group = cv
[rule v]
target = system.controlledVariables.value
source = *.mdp
key = value
type = decimal
unit = K
group = cv
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.groups().len(), 1);
        assert_eq!(c.groups()[0].root.to_string(), "system.controlledVariables");
        assert_eq!(c.groups()[0].members, vec![0, 1]);
    }

    #[test]
    fn globs_match_relative_paths() {
        let c = parse_config(ONE).unwrap();
        assert_eq!(c.rules_for("md.mdp"), vec![0]);
        assert_eq!(c.rules_for("run1/md.mdp"), vec![0]);
        assert!(c.rules_for("md.log").is_empty());
    }
}
