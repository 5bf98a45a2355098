use std::collections::HashMap;

use serde::Serialize;

use super::config::{append_point, ExtractionConfig, Occurrence};
use super::scan::{coerce, RawHit};
use crate::model::node::Value;
use crate::model::{describe_path, set_path_in_place, Conflict, EngMetaDataset, MergePolicy, MetadataPath, Scalar, Segment};

/// A hit whose raw value did not convert to the rule's type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoercionFailure {
    pub rule_id: String,
    pub file: String,
    pub line: usize,
    pub raw_value: String,
    pub reason: String,
}

/// The dataset built from a set of hits, with everything noteworthy that
/// happened on the way.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assembly {
    pub dataset: EngMetaDataset,
    pub conflicts: Vec<Conflict>,
    pub coercion_failures: Vec<CoercionFailure>,
    pub warnings: Vec<String>,
}

/// Document position used to order writes: file, line, rule.
type Order = (String, usize, usize);

struct Assignment {
    order: Order,
    path: MetadataPath,
    value: Scalar,
}

struct Append {
    order: Order,
    list: MetadataPath,
    writes: Vec<(Vec<Segment>, Scalar)>,
}

/// Builds a dataset from `hits`.
///
/// Single-valued rules take the first or last hit of each file; across
/// files the lexicographically first file wins and differing values are
/// reported as conflicts. `occurrence = all` rules append every hit to the
/// nearest repeatable element. Rules sharing a group are joined per file:
/// the i-th hit of each member forms the i-th appended instance.
pub fn assemble(hits: &[RawHit], config: &ExtractionConfig) -> Assembly {
    let rules = config.rules();
    let mut out = Assembly::default();

    let mut order: Vec<usize> = (0..hits.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&hits[a], &hits[b]);
        (&x.source_file, x.line_number, x.rule).cmp(&(&y.source_file, y.line_number, y.rule))
    });
    let mut values: Vec<Option<Scalar>> = vec![None; hits.len()];
    for &i in &order {
        let hit = &hits[i];
        match coerce(&hit.raw_value, rules[hit.rule].value_type) {
            Ok(v) => values[i] = Some(v),
            Err(reason) => out.coercion_failures.push(CoercionFailure {
                rule_id: hit.rule_id.clone(),
                file: hit.source_file.clone(),
                line: hit.line_number,
                raw_value: hit.raw_value.clone(),
                reason,
            }),
        }
    }
    // Usable hits per rule and file, in line order.
    let mut by_rule_file: HashMap<(usize, &str), Vec<usize>> = HashMap::new();
    let mut files: Vec<&str> = Vec::new();
    for &i in &order {
        let hit = &hits[i];
        if files.last() != Some(&hit.source_file.as_str()) {
            files.push(&hit.source_file);
        }
        by_rule_file.entry((hit.rule, &hit.source_file)).or_default().push(i);
    }

    let mut assignments = Vec::new();
    let mut appends = Vec::new();
    for (r, rule) in rules.iter().enumerate() {
        if rule.group.is_some() {
            continue;
        }
        for file in &files {
            let Some(found) = by_rule_file.get(&(r, *file)) else { continue };
            let usable: Vec<usize> = found.iter().copied().filter(|&i| values[i].is_some()).collect();
            let picked: Vec<usize> = match rule.occurrence {
                Occurrence::First => usable.first().copied().into_iter().collect(),
                Occurrence::Last => usable.last().copied().into_iter().collect(),
                Occurrence::All => usable,
            };
            for i in picked {
                let hit = &hits[i];
                let value = values[i].clone().expect("picked hits are usable");
                let order = (hit.source_file.clone(), hit.line_number, r);
                if rule.occurrence == Occurrence::All {
                    let at = append_point(&rule.target).expect("checked when the config was built");
                    let (list, rel) = split_at(&rule.target, at);
                    let mut writes = vec![(rel.clone(), value)];
                    if let Some(unit) = &rule.unit {
                        writes.push((sibling(&rel, "unit"), Scalar::text(unit.as_str())));
                    }
                    appends.push(Append { order, list, writes });
                } else {
                    let path = normalize(&rule.target);
                    if let Some(unit) = &rule.unit {
                        let unit_path = path.parent().unwrap_or_else(MetadataPath::root).child("unit", None);
                        assignments.push(Assignment { order: order.clone(), path: unit_path, value: Scalar::text(unit.as_str()) });
                    }
                    assignments.push(Assignment { order, path, value });
                }
            }
        }
    }

    for group in config.groups() {
        let root_len = group.root.segments().len();
        for file in &files {
            let applicable: Vec<usize> =
                config.rules_for(file).into_iter().filter(|r| group.members.contains(r)).collect();
            let found: Vec<(usize, &[usize])> = applicable
                .iter()
                .map(|&r| (r, by_rule_file.get(&(r, *file)).map_or(&[][..], |v| v.as_slice())))
                .collect();
            if found.iter().all(|(_, f)| f.is_empty()) {
                continue;
            }
            let n = found.iter().map(|(_, f)| f.len()).min().unwrap_or(0);
            if found.iter().any(|(_, f)| f.len() != n) {
                let counts: Vec<String> = found.iter().map(|(r, f)| format!("{} {}", rules[*r].id, f.len())).collect();
                out.warnings.push(format!(
                    "{file}: group `{}` has unequal hit counts ({}); surplus hits dropped",
                    group.name,
                    counts.join(", ")
                ));
            }
            for k in 0..n {
                let mut writes = Vec::new();
                let mut first: Option<Order> = None;
                for (r, f) in &found {
                    let i = f[k];
                    let hit = &hits[i];
                    let o = (hit.source_file.clone(), hit.line_number, *r);
                    if first.as_ref().is_none_or(|f| o < *f) {
                        first = Some(o);
                    }
                    let Some(value) = values[i].clone() else { continue };
                    let rel = rules[*r].target.segments()[root_len..].to_vec();
                    if let Some(unit) = &rules[*r].unit {
                        writes.push((sibling(&rel, "unit"), Scalar::text(unit.as_str())));
                    }
                    writes.push((rel, value));
                }
                if let (false, Some(order)) = (writes.is_empty(), first) {
                    appends.push(Append { order, list: group.root.clone(), writes });
                }
            }
        }
    }

    resolve_assignments(assignments, &mut out);
    appends.sort_by(|a, b| a.order.cmp(&b.order));
    for append in appends {
        apply_append(append, &mut out);
    }
    out
}

/// Fills omitted list indices with 0 so equal targets compare equal.
fn normalize(target: &MetadataPath) -> MetadataPath {
    let info = describe_path(target).unwrap_or_default();
    let mut path = MetadataPath::root();
    for (seg, f) in target.segments().iter().zip(info.iter()) {
        let index = if f.list { Some(seg.index.unwrap_or(0)) } else { seg.index };
        path = path.child(&seg.name, index);
    }
    path
}

fn split_at(target: &MetadataPath, at: usize) -> (MetadataPath, Vec<Segment>) {
    let segments = target.segments();
    let mut list = MetadataPath::root();
    for seg in &segments[..=at] {
        list = list.child(&seg.name, seg.index);
    }
    (list, segments[at + 1..].to_vec())
}

fn sibling(rel: &[Segment], name: &str) -> Vec<Segment> {
    let mut out = rel[..rel.len().saturating_sub(1)].to_vec();
    out.push(Segment { name: name.to_string(), index: None });
    out
}

fn sort_key(path: &MetadataPath) -> Vec<(usize, String)> {
    path.segments().iter().map(|s| (s.index.unwrap_or(0), s.name.clone())).collect()
}

fn resolve_assignments(mut assignments: Vec<Assignment>, out: &mut Assembly) {
    assignments.sort_by(|a, b| a.order.cmp(&b.order));
    let mut winners: Vec<(MetadataPath, Scalar)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for a in assignments {
        match seen.get(&a.path.to_string()) {
            None => {
                seen.insert(a.path.to_string(), winners.len());
                winners.push((a.path, a.value));
            }
            Some(&w) if winners[w].1 != a.value => {
                let chosen = winners[w].1.clone();
                let conflict = Conflict { path: a.path, base: chosen.clone(), overlay: a.value, chosen };
                if !out.conflicts.contains(&conflict) {
                    out.conflicts.push(conflict);
                }
            }
            Some(_) => {}
        }
    }
    // Parents before children and lower list indices first, so appends
    // never skip an index.
    winners.sort_by_key(|(p, _)| sort_key(p));
    for (path, value) in winners {
        if let Err(e) = set_path_in_place(&mut out.dataset, &path, value) {
            out.warnings.push(format!("value not written: {e}"));
        }
    }
}

fn apply_append(append: Append, out: &mut Assembly) {
    let Append { order, list, writes } = append;
    let borrowed: Vec<(&[Segment], Scalar)> = writes.iter().map(|(p, v)| (p.as_slice(), v.clone())).collect();
    let conflicts = &mut out.conflicts;
    let result = out.dataset.with_list(list.segments(), &MetadataPath::root(), &mut |items, at| {
        items.append_merged(&borrowed, at, MergePolicy::FirstWins, conflicts)
    });
    if let Err(e) = result {
        out.warnings.push(format!("{}:{}: value not written: {e}", order.0, order.1));
    }
}

/// Current scalars at `path`.
#[cfg(test)]
fn values_at(dataset: &EngMetaDataset, path: &str) -> Vec<Scalar> {
    MetadataPath::parse(path).map(|p| crate::model::get_scalars(dataset, &p)).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::config::parse_config;

    fn hit(config: &ExtractionConfig, rule: &str, file: &str, line: usize, raw: &str) -> RawHit {
        let r = config.rules().iter().position(|x| x.id == rule).unwrap();
        RawHit { rule: r, rule_id: rule.into(), source_file: file.into(), line_number: line, raw_value: raw.into() }
    }

    const CONFIG: &str = "\
[rule steps]
target = system.temporalResolution.numberOfTimesteps
source = *
key = nsteps
type = integer

[rule kw]
target = keyword
source = *
key = keyword
occurrence = all

[rule last-dt]
target = system.temporalResolution.interval
source = *
key = dt
type = decimal
occurrence = last

[rule cv-name]
target = system.controlledVariables.name
source = *
key = cv
group = cv

[rule cv-value]
target = system.controlledVariables.value
source = *
key = cv-value
type = decimal
unit = K
group = cv
";

    #[test]
    fn single_hit_is_written() {
        let c = parse_config(CONFIG).unwrap();
        let a = assemble(&[hit(&c, "steps", "md.mdp", 3, "5000000")], &c);
        assert_eq!(values_at(&a.dataset, "system.temporalResolution.numberOfTimesteps"), vec![Scalar::Integer(5_000_000)]);
        assert!(a.conflicts.is_empty());
    }

    #[test]
    fn grouped_hits_join_into_one_variable() {
        let c = parse_config(CONFIG).unwrap();
        let hits = [hit(&c, "cv-name", "md.mdp", 1, "temperature"), hit(&c, "cv-value", "md.mdp", 2, "300")];
        let a = assemble(&hits, &c);
        let s = a.dataset.system.unwrap();
        assert_eq!(s.controlled_variables.len(), 1);
        let v = &s.controlled_variables[0];
        assert_eq!(v.name, "temperature");
        assert_eq!(v.value, Some(Scalar::Decimal(300.into())));
        assert_eq!(v.unit.as_deref(), Some("K"));
    }

    #[test]
    fn first_file_wins_across_files() {
        let c = parse_config(CONFIG).unwrap();
        let hits = [
            hit(&c, "steps", "b.log", 1, "20"),
            hit(&c, "steps", "a.mdp", 9, "10"),
            hit(&c, "steps", "a.mdp", 10, "11"),
        ];
        let a = assemble(&hits, &c);
        assert_eq!(values_at(&a.dataset, "system.temporalResolution.numberOfTimesteps"), vec![Scalar::Integer(10)]);
        assert_eq!(a.conflicts.len(), 1);
        assert_eq!(a.conflicts[0].overlay, Scalar::Integer(20));
    }

    #[test]
    fn last_takes_the_final_hit_of_a_file() {
        let c = parse_config(CONFIG).unwrap();
        let hits = [hit(&c, "last-dt", "a", 1, "0.001"), hit(&c, "last-dt", "a", 5, "0.002")];
        let a = assemble(&hits, &c);
        assert_eq!(values_at(&a.dataset, "system.temporalResolution.interval")[0].canonical(), "0.002");
    }

    #[test]
    fn all_appends_and_dedups() {
        let c = parse_config(CONFIG).unwrap();
        let hits = [
            hit(&c, "kw", "a", 1, "water"),
            hit(&c, "kw", "a", 2, "md"),
            hit(&c, "kw", "copy/a", 1, "water"),
        ];
        let a = assemble(&hits, &c);
        assert_eq!(a.dataset.keywords, vec!["water".to_string(), "md".to_string()]);
    }

    #[test]
    fn failures_and_mismatches_are_reported() {
        let c = parse_config(CONFIG).unwrap();
        let hits = [
            hit(&c, "steps", "a", 1, "many"),
            hit(&c, "steps", "a", 2, "7"),
            hit(&c, "cv-name", "a", 3, "temperature"),
            hit(&c, "cv-name", "a", 4, "pressure"),
            hit(&c, "cv-value", "a", 5, "300"),
        ];
        let a = assemble(&hits, &c);
        assert_eq!(a.coercion_failures.len(), 1);
        assert_eq!(values_at(&a.dataset, "system.temporalResolution.numberOfTimesteps"), vec![Scalar::Integer(7)]);
        assert_eq!(a.warnings.len(), 1);
        assert_eq!(a.dataset.system.unwrap().controlled_variables.len(), 1);
    }

    #[test]
    fn empty_input_gives_empty_dataset() {
        let c = parse_config(CONFIG).unwrap();
        assert!(assemble(&[], &c).dataset.is_empty());
    }

    #[test]
    fn hit_order_does_not_matter() {
        let c = parse_config(CONFIG).unwrap();
        let mut hits = vec![
            hit(&c, "steps", "b", 1, "20"),
            hit(&c, "kw", "a", 2, "md"),
            hit(&c, "kw", "b", 1, "water"),
            hit(&c, "cv-name", "a", 3, "temperature"),
            hit(&c, "cv-value", "a", 4, "300"),
            hit(&c, "steps", "a", 9, "10"),
        ];
        let forward = assemble(&hits, &c);
        hits.reverse();
        assert_eq!(assemble(&hits, &c), forward);
    }
}
