//! Processing steps as a W3C PROV graph, serialized in PROV-N.
//!
//! Each step becomes an activity `act_<i>`. Files, methods, software,
//! instruments, environments and commands become entities that the
//! activity used; outputs are entities generated by it; the actor is an
//! associated agent. Identical artifacts across steps share one entity, so
//! an output of one step that is an input of the next links the two.

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use chrono::{DateTime, NaiveDateTime};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canon;
use crate::model::node::Value;
use crate::model::{EngMetaDataset, FileRef, PersonOrOrganization};

/// Namespace bound to the `ex:` prefix unless another base is given.
pub const DEFAULT_BASE_URI: &str = "http://example.org/engmeta/";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum EntityKind {
    File,
    Method,
    ErrorMethod,
    Instrument,
    Software,
    Environment,
    ExecutionCommand,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::File => "file",
            EntityKind::Method => "method",
            EntityKind::ErrorMethod => "errorMethod",
            EntityKind::Instrument => "instrument",
            EntityKind::Software => "software",
            EntityKind::Environment => "environment",
            EntityKind::ExecutionCommand => "executionCommand",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Activity {
    pub id: String,
    pub step_type: String,
    pub date: Option<String>,
    /// The date again as `xsd:dateTime`, when it carries a time.
    pub end_time: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Agent {
    pub id: String,
    pub name: String,
    pub identifier: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entity {
    pub id: String,
    pub kind: EntityKind,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum RelationKind {
    Used,
    WasGeneratedBy,
    WasAssociatedWith,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Used => "used",
            RelationKind::WasGeneratedBy => "wasGeneratedBy",
            RelationKind::WasAssociatedWith => "wasAssociatedWith",
        }
    }
}

/// `used(activity, entity)`, `wasGeneratedBy(entity, activity)` or
/// `wasAssociatedWith(activity, agent)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Relation {
    pub kind: RelationKind,
    pub subject: String,
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProvDocument {
    pub base_uri: String,
    pub activities: Vec<Activity>,
    pub agents: Vec<Agent>,
    pub entities: Vec<Entity>,
    pub relations: Vec<Relation>,
}

impl Default for ProvDocument {
    fn default() -> Self {
        ProvDocument {
            base_uri: DEFAULT_BASE_URI.to_string(),
            activities: Vec::new(),
            agents: Vec::new(),
            entities: Vec::new(),
            relations: Vec::new(),
        }
    }
}

impl ProvDocument {
    pub fn is_empty(&self) -> bool {
        self.activities.is_empty() && self.agents.is_empty() && self.entities.is_empty() && self.relations.is_empty()
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    /// Relations of `kind` touching `id` at either end.
    pub fn relations_of(&self, kind: RelationKind, id: &str) -> impl Iterator<Item = &Relation> {
        let id = id.to_string();
        self.relations.iter().filter(move |r| r.kind == kind && (r.subject == id || r.object == id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProvError {
    #[error("relation {relation} references undeclared `{id}`")]
    Dangling { relation: String, id: String },
}

/// Short stable digest of an artifact's canonical key.
fn stable_hash(kind: &str, key: &str) -> String {
    let digest = Sha256::new().chain_update(kind).chain_update([0u8]).chain_update(key).finalize();
    hex::encode(&digest[..6])
}

/// Canonical text of a structured artifact: its compact canonical JSON.
fn canonical_key<T: Value>(value: &T) -> String {
    value.tree().map(|t| canon::tree_json_compact(&t)).unwrap_or_default()
}

struct Builder {
    doc: ProvDocument,
    entities: BTreeMap<String, usize>,
    agents: BTreeMap<String, usize>,
}

impl Builder {
    fn entity(&mut self, kind: EntityKind, key: &str, label: String) -> String {
        let id = format!("{}_{}", kind.as_str(), stable_hash(kind.as_str(), key));
        if !self.entities.contains_key(&id) {
            self.entities.insert(id.clone(), self.doc.entities.len());
            self.doc.entities.push(Entity { id: id.clone(), kind, label });
        }
        id
    }

    fn agent(&mut self, actor: &PersonOrOrganization) -> String {
        let identifier = actor.identifier.as_ref().map(|i| format!("{}:{}", i.scheme, i.value));
        let key = format!("{}\u{0}{}", actor.name, identifier.as_deref().unwrap_or(""));
        let id = format!("agent_{}", stable_hash("agent", &key));
        if !self.agents.contains_key(&id) {
            self.agents.insert(id.clone(), self.doc.agents.len());
            self.doc.agents.push(Agent { id: id.clone(), name: actor.name.clone(), identifier });
        }
        id
    }

    fn relate(&mut self, kind: RelationKind, subject: &str, object: &str) {
        let r = Relation { kind, subject: subject.to_string(), object: object.to_string() };
        if !self.doc.relations.contains(&r) {
            self.doc.relations.push(r);
        }
    }

    fn file(&mut self, f: &FileRef) -> Option<String> {
        let locator = f.locator()?;
        let label = f.filename.clone().unwrap_or_else(|| locator.clone());
        Some(self.entity(EntityKind::File, &locator, label))
    }
}

fn end_time(date: &str) -> Option<String> {
    if DateTime::parse_from_rfc3339(date).is_ok() {
        return Some(date.to_string());
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%dT%H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(date, f).ok())
        .map(|t| t.format("%Y-%m-%dT%H:%M:%S%.f").to_string())
}

/// Crosswalk with the default `ex:` namespace.
pub fn to_prov(dataset: &EngMetaDataset) -> ProvDocument {
    to_prov_with_base(dataset, DEFAULT_BASE_URI)
}

pub fn to_prov_with_base(dataset: &EngMetaDataset, base_uri: &str) -> ProvDocument {
    let mut b = Builder {
        doc: ProvDocument { base_uri: base_uri.to_string(), ..Default::default() },
        entities: BTreeMap::new(),
        agents: BTreeMap::new(),
    };
    for (i, step) in dataset.processing_steps.iter().enumerate() {
        let act = format!("act_{i}");
        b.doc.activities.push(Activity {
            id: act.clone(),
            step_type: step.step_type.clone(),
            date: step.date.clone(),
            end_time: step.date.as_deref().and_then(end_time),
        });
        if let Some(actor) = step.actor.as_ref().filter(|a| !a.name.is_empty()) {
            let agent = b.agent(actor);
            b.relate(RelationKind::WasAssociatedWith, &act, &agent);
        }
        for input in &step.inputs {
            if let Some(e) = b.file(input) {
                b.relate(RelationKind::Used, &act, &e);
            }
        }
        let mut used = Vec::new();
        if let Some(m) = &step.method {
            used.push((EntityKind::Method, canonical_key(m), m.name.clone()));
        }
        if let Some(m) = &step.error_method {
            used.push((EntityKind::ErrorMethod, canonical_key(m), m.name.clone()));
        }
        for s in &step.software {
            let label = match &s.software_version {
                Some(v) => format!("{} {v}", s.name),
                None => s.name.clone(),
            };
            used.push((EntityKind::Software, canonical_key(s), label));
        }
        for ins in &step.instruments {
            used.push((EntityKind::Instrument, canonical_key(ins), ins.name.clone()));
        }
        if let Some(env) = &step.environment {
            let label = env.name.clone().unwrap_or_else(|| "environment".to_string());
            used.push((EntityKind::Environment, canonical_key(env), label));
        }
        if let Some(cmd) = &step.execution_command {
            used.push((EntityKind::ExecutionCommand, cmd.clone(), cmd.clone()));
        }
        for (kind, key, label) in used {
            if key.is_empty() {
                continue;
            }
            let e = b.entity(kind, &key, label);
            b.relate(RelationKind::Used, &act, &e);
        }
        for output in &step.outputs {
            if let Some(e) = b.file(output) {
                b.relate(RelationKind::WasGeneratedBy, &e, &act);
            }
        }
    }
    b.doc
}

/// Reads a canonical XML document and converts it.
pub fn xml_to_prov(xml: &str) -> Result<ProvDocument, canon::CanonError> {
    Ok(to_prov(&canon::from_xml(xml)?.dataset))
}

fn activity_order(id: &str) -> (usize, &str) {
    let n = id.strip_prefix("act_").and_then(|n| n.parse().ok()).unwrap_or(usize::MAX);
    (n, id)
}

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn attrs(pairs: &[(&str, Option<&str>)]) -> String {
    let parts: Vec<String> =
        pairs.iter().filter_map(|(k, v)| v.map(|v| format!("{k}={}", quote(v)))).collect();
    format!("[{}]", parts.join(", "))
}

/// PROV-N text. Statements appear as activities, agents, entities and
/// relations, each sorted by id; an empty document is
/// `document\nendDocument`.
pub fn serialize_prov_n(doc: &ProvDocument) -> Result<String, ProvError> {
    let activity_ids: Vec<&str> = doc.activities.iter().map(|a| a.id.as_str()).collect();
    let agent_ids: Vec<&str> = doc.agents.iter().map(|a| a.id.as_str()).collect();
    let entity_ids: Vec<&str> = doc.entities.iter().map(|e| e.id.as_str()).collect();
    for r in &doc.relations {
        let (subject_ok, object_ok) = match r.kind {
            RelationKind::Used => (activity_ids.contains(&r.subject.as_str()), entity_ids.contains(&r.object.as_str())),
            RelationKind::WasGeneratedBy => {
                (entity_ids.contains(&r.subject.as_str()), activity_ids.contains(&r.object.as_str()))
            }
            RelationKind::WasAssociatedWith => {
                (activity_ids.contains(&r.subject.as_str()), agent_ids.contains(&r.object.as_str()))
            }
        };
        if !subject_ok || !object_ok {
            let id = if subject_ok { &r.object } else { &r.subject };
            return Err(ProvError::Dangling {
                relation: format!("{}({}, {})", r.kind.as_str(), r.subject, r.object),
                id: id.clone(),
            });
        }
    }
    if doc.is_empty() {
        return Ok("document\nendDocument".to_string());
    }

    let mut out = String::from("document\n");
    let _ = writeln!(out, "  prefix ex <{}>", doc.base_uri);

    let mut activities: Vec<&Activity> = doc.activities.iter().collect();
    activities.sort_by(|a, b| activity_order(&a.id).cmp(&activity_order(&b.id)));
    for a in activities {
        let attributes = attrs(&[("ex:stepType", Some(&a.step_type)), ("ex:date", a.date.as_deref())]);
        match &a.end_time {
            Some(t) => {
                let _ = writeln!(out, "  activity(ex:{}, -, {t}, {attributes})", a.id);
            }
            None => {
                let _ = writeln!(out, "  activity(ex:{}, {attributes})", a.id);
            }
        }
    }
    let mut agents: Vec<&Agent> = doc.agents.iter().collect();
    agents.sort_by(|a, b| a.id.cmp(&b.id));
    for a in agents {
        let attributes = attrs(&[("prov:label", Some(&a.name)), ("ex:identifier", a.identifier.as_deref())]);
        let _ = writeln!(out, "  agent(ex:{}, {attributes})", a.id);
    }
    let mut entities: Vec<&Entity> = doc.entities.iter().collect();
    entities.sort_by(|a, b| a.id.cmp(&b.id));
    for e in entities {
        let attributes = attrs(&[("ex:kind", Some(e.kind.as_str())), ("prov:label", Some(&e.label))]);
        let _ = writeln!(out, "  entity(ex:{}, {attributes})", e.id);
    }
    let mut relations: Vec<&Relation> = doc.relations.iter().collect();
    relations.sort();
    for r in relations {
        let _ = writeln!(out, "  {}(ex:{}, ex:{}, -)", r.kind.as_str(), r.subject, r.object);
    }
    out.push_str("endDocument");
    Ok(out)
}
