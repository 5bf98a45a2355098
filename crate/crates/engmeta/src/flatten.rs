//! Flattening into repository metadata blocks.
//!
//! Repositories that index flat key-value fields cannot hold the nested
//! EngMeta tree directly. [`flatten`] spreads a dataset over three blocks:
//! `citation` (descriptive metadata and the success marker), `engMeta`
//! (the observed system) and `process` (the union of software, methods,
//! instruments and environments over all steps, deduplicated). Records
//! become compound fields of primitive sub-fields; repeatable parts nested
//! inside a record become fields of their own. The step structure (dates,
//! actors, input and output files) has no place in flat blocks and is
//! listed as dropped, since the PROV document carries it.
//!
//! Every populated leaf of the input is accounted for in the
//! [`FlattenReport`], either as mapped to a field or as dropped.

use serde::Serialize;
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::model::node::{Entry, Tree, TreeField};
use crate::model::{EngMetaDataset, MetadataPath};

/// Reason recorded for step-structural leaves.
pub const PROV_SIDECAR: &str = "preserved via PROV sidecar";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockName {
    #[serde(rename = "citation")]
    Citation,
    #[serde(rename = "process")]
    Process,
    #[serde(rename = "engMeta")]
    EngMeta,
}

impl BlockName {
    pub const ALL: [BlockName; 3] = [BlockName::Citation, BlockName::Process, BlockName::EngMeta];

    pub fn as_str(self) -> &'static str {
        match self {
            BlockName::Citation => "citation",
            BlockName::Process => "process",
            BlockName::EngMeta => "engMeta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeClass {
    Primitive,
    Compound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldValue {
    Text(String),
    List(Vec<String>),
    /// One entry per instance; each instance is a list of sub-fields.
    Compound(Vec<Vec<BlockField>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockField {
    pub type_name: String,
    pub multiple: bool,
    pub type_class: TypeClass,
    pub value: FieldValue,
}

impl BlockField {
    pub fn primitive(type_name: impl Into<String>, value: impl Into<String>) -> Self {
        BlockField {
            type_name: type_name.into(),
            multiple: false,
            type_class: TypeClass::Primitive,
            value: FieldValue::Text(value.into()),
        }
    }

    /// Instances of a compound field, or one single-element list per value
    /// of a primitive field.
    pub fn instances(&self) -> Vec<Vec<BlockField>> {
        match &self.value {
            FieldValue::Compound(items) => items.clone(),
            FieldValue::Text(t) => vec![vec![BlockField::primitive(self.type_name.clone(), t.clone())]],
            FieldValue::List(v) => v.iter().map(|t| vec![BlockField::primitive(self.type_name.clone(), t.clone())]).collect(),
        }
    }

    /// Text values of a primitive field.
    pub fn texts(&self) -> Vec<&str> {
        match &self.value {
            FieldValue::Text(t) => vec![t.as_str()],
            FieldValue::List(v) => v.iter().map(String::as_str).collect(),
            FieldValue::Compound(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetadataBlock {
    pub name: BlockName,
    pub fields: Vec<BlockField>,
}

impl MetadataBlock {
    pub fn field(&self, type_name: &str) -> Option<&BlockField> {
        self.fields.iter().find(|f| f.type_name == type_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MappedPath {
    pub path: MetadataPath,
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedPath {
    pub path: MetadataPath,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FlattenReport {
    pub mapped: Vec<MappedPath>,
    pub dropped: Vec<DroppedPath>,
}

impl FlattenReport {
    pub fn is_empty(&self) -> bool {
        self.mapped.is_empty() && self.dropped.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("field `{field}` nests compound field `{inner}`; compounds may hold primitive fields only")]
    NestedCompound { field: String, inner: String },
    #[error("field `{field}`: {message}")]
    Shape { field: String, message: String },
}

enum Instance {
    Text(String),
    Compound(Vec<(String, String)>),
}

impl Instance {
    fn same(&self, other: &Instance) -> bool {
        match (self, other) {
            (Instance::Text(a), Instance::Text(b)) => a == b,
            (Instance::Compound(a), Instance::Compound(b)) => a == b,
            _ => false,
        }
    }
}

struct Acc {
    type_name: String,
    multiple: bool,
    class: TypeClass,
    instances: Vec<Instance>,
}

struct Flattener {
    blocks: [(BlockName, Vec<Acc>); 3],
    report: FlattenReport,
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// `title` + `titleType` → `titleType`; `fileChecksum` + `digest` →
/// `fileChecksumDigest`; `softwareLicense` + `license` → `softwareLicense`.
fn sub_name(prefix: &str, child: &str) -> String {
    if child.starts_with(prefix) {
        child.to_string()
    } else if prefix.to_lowercase().ends_with(&child.to_lowercase()) {
        prefix.to_string()
    } else {
        format!("{prefix}{}", capitalize(child))
    }
}

impl Flattener {
    fn slot(&mut self, block: BlockName, type_name: &str, multiple: bool, class: TypeClass) -> &mut Acc {
        let accs = &mut self.blocks.iter_mut().find(|(b, _)| *b == block).expect("three blocks").1;
        let i = match accs.iter().position(|a| a.type_name == type_name) {
            Some(i) => i,
            None => {
                accs.push(Acc { type_name: type_name.to_string(), multiple, class, instances: Vec::new() });
                accs.len() - 1
            }
        };
        let acc = &mut accs[i];
        acc.multiple |= multiple;
        acc
    }

    fn push(&mut self, block: BlockName, type_name: &str, multiple: bool, instance: Instance) {
        let class = match instance {
            Instance::Text(_) => TypeClass::Primitive,
            Instance::Compound(_) => TypeClass::Compound,
        };
        let dedup = block == BlockName::Process;
        let acc = self.slot(block, type_name, multiple, class);
        if !(dedup && acc.instances.iter().any(|i| i.same(&instance))) {
            acc.instances.push(instance);
        }
    }

    /// Maps one value to the field `type_name`. `link` is prepended to
    /// compound instances to keep the association with a parent record.
    fn emit(
        &mut self,
        block: BlockName,
        type_name: &str,
        multiple: bool,
        tree: &Tree,
        at: &MetadataPath,
        link: Option<&(String, String)>,
    ) {
        match tree {
            Tree::Leaf(leaf) => {
                self.report.mapped.push(MappedPath { path: at.clone(), type_name: type_name.to_string() });
                self.push(block, type_name, multiple, Instance::Text(leaf.value.canonical()));
            }
            Tree::Record(fields) => {
                // Register the parent first so it precedes its nested fields.
                self.slot(block, type_name, multiple, TypeClass::Compound);
                let mut subs: Vec<(String, String)> = link.into_iter().cloned().collect();
                let mut nested = Vec::new();
                self.collect(fields, type_name, at, &mut subs, &mut nested);
                let name_field = format!("{type_name}Name");
                let own_link = subs.iter().find(|(k, _)| *k == name_field).cloned();
                self.push(block, type_name, multiple, Instance::Compound(subs));
                for (name, items, base) in nested {
                    for (i, item) in items.iter().enumerate() {
                        let path = base.child_indexed(i);
                        self.emit(block, &name, true, item, &path, own_link.as_ref());
                    }
                }
            }
        }
    }

    fn collect<'t>(
        &mut self,
        fields: &'t [TreeField],
        prefix: &str,
        at: &MetadataPath,
        subs: &mut Vec<(String, String)>,
        nested: &mut Vec<(String, &'t [Tree], MetadataPath)>,
    ) {
        for field in fields {
            let name = sub_name(prefix, field.name);
            match &field.entry {
                Entry::One(Tree::Leaf(leaf)) => {
                    let path = at.child(field.name, None);
                    self.report.mapped.push(MappedPath { path, type_name: name.clone() });
                    subs.push((name, leaf.value.canonical()));
                }
                Entry::One(Tree::Record(inner)) => self.collect(inner, &name, &at.child(field.name, None), subs, nested),
                Entry::Many(items) => nested.push((name, items, at.child(field.name, Some(0)))),
            }
        }
    }

    fn drop_all(&mut self, tree: &Tree, at: &MetadataPath) {
        let dropped = &mut self.report.dropped;
        tree.for_each_leaf(at, &mut |path, _| {
            dropped.push(DroppedPath { path: path.clone(), reason: PROV_SIDECAR.to_string() });
        });
    }

    fn top(&mut self, block: BlockName, type_name: &str, field: &TreeField, at: &MetadataPath) {
        match &field.entry {
            Entry::One(t) => self.emit(block, type_name, false, t, &at.child(field.name, None), None),
            Entry::Many(items) => {
                for (i, t) in items.iter().enumerate() {
                    self.emit(block, type_name, true, t, &at.child(field.name, Some(i)), None);
                }
            }
        }
    }

    fn finish(self) -> (Vec<MetadataBlock>, FlattenReport) {
        let blocks = self
            .blocks
            .into_iter()
            .map(|(name, accs)| MetadataBlock {
                name,
                fields: accs
                    .into_iter()
                    .filter(|a| !a.instances.is_empty())
                    .map(|a| to_field(a))
                    .collect(),
            })
            .collect();
        (blocks, self.report)
    }
}

fn to_field(acc: Acc) -> BlockField {
    let value = match acc.class {
        TypeClass::Primitive => {
            let mut texts: Vec<String> = acc
                .instances
                .into_iter()
                .filter_map(|i| match i {
                    Instance::Text(t) => Some(t),
                    Instance::Compound(_) => None,
                })
                .collect();
            if acc.multiple {
                FieldValue::List(texts)
            } else {
                FieldValue::Text(texts.swap_remove(0))
            }
        }
        TypeClass::Compound => FieldValue::Compound(
            acc.instances
                .into_iter()
                .filter_map(|i| match i {
                    Instance::Compound(subs) => {
                        Some(subs.into_iter().map(|(k, v)| BlockField::primitive(k, v)).collect())
                    }
                    Instance::Text(_) => None,
                })
                .collect(),
        ),
    };
    BlockField { type_name: acc.type_name, multiple: acc.multiple, type_class: acc.class, value }
}

trait ChildIndexed {
    fn child_indexed(&self, i: usize) -> MetadataPath;
}

impl ChildIndexed for MetadataPath {
    fn child_indexed(&self, i: usize) -> MetadataPath {
        let mut p = self.parent().unwrap_or_else(MetadataPath::root);
        let last = self.last().expect("list paths are not the root");
        p = p.child(&last.name, Some(i));
        p
    }
}

fn citation_name(element: &str) -> Option<&'static str> {
    Some(match element {
        "title" => "title",
        "description" => "description",
        "date" => "date",
        "keyword" => "keyword",
        "subject" => "subject",
        "person" => "person",
        "fundingReference" => "fundingReference",
        "project" => "project",
        "context" => "context",
        "resourceType" => "resourceType",
        "rightsStatement" => "rightsStatement",
        "pid" => "pid",
        "file" => "file",
        "storage" => "storage",
        "format" => "format",
        _ => return None,
    })
}

fn system_name(element: &str) -> Option<&'static str> {
    Some(match element {
        "description" => "systemDescription",
        "components" => "component",
        "boundaryConditions" => "boundaryCondition",
        "controlledVariables" => "controlledVariable",
        "measuredVariables" => "measuredVariable",
        "parameters" => "systemParameter",
        "spatialResolution" => "spatialResolution",
        "temporalResolution" => "temporalResolution",
        _ => return None,
    })
}

fn process_name(element: &str) -> Option<&'static str> {
    Some(match element {
        "stepType" => "stepType",
        "method" => "method",
        "errorMethod" => "errorMethod",
        "software" => "software",
        "instrument" => "instrument",
        "environment" => "environment",
        "executionCommand" => "executionCommand",
        _ => return None,
    })
}

/// Spreads `dataset` over the citation, process and engMeta blocks.
pub fn flatten(dataset: &EngMetaDataset) -> (Vec<MetadataBlock>, FlattenReport) {
    let mut f = Flattener {
        blocks: [(BlockName::Citation, Vec::new()), (BlockName::Process, Vec::new()), (BlockName::EngMeta, Vec::new())],
        report: FlattenReport::default(),
    };
    let root = MetadataPath::root();
    let Some(Tree::Record(fields)) = dataset.tree() else {
        return f.finish();
    };
    for field in &fields {
        match field.name {
            "worked" => {
                let at = root.child("worked", None);
                if let Entry::One(Tree::Record(inner)) = &field.entry {
                    for part in inner {
                        let name = if part.name == "success" { "success" } else { "successNote" };
                        f.top(BlockName::Citation, name, part, &at);
                    }
                }
            }
            "system" => {
                let at = root.child("system", None);
                if let Entry::One(Tree::Record(inner)) = &field.entry {
                    for part in inner {
                        let name = system_name(part.name).expect("every system field has a block field");
                        f.top(BlockName::EngMeta, name, part, &at);
                    }
                }
            }
            "processingStep" => {
                for (i, step) in field.entry.items().iter().enumerate() {
                    let at = root.child("processingStep", Some(i));
                    let Tree::Record(parts) = step else { continue };
                    for part in parts {
                        match process_name(part.name) {
                            Some(name) => {
                                for (j, t) in part.entry.items().iter().enumerate() {
                                    let index = matches!(part.entry, Entry::Many(_)).then_some(j);
                                    f.emit(BlockName::Process, name, true, t, &at.child(part.name, index), None);
                                }
                            }
                            None => {
                                for (j, t) in part.entry.items().iter().enumerate() {
                                    let index = matches!(part.entry, Entry::Many(_)).then_some(j);
                                    f.drop_all(t, &at.child(part.name, index));
                                }
                            }
                        }
                    }
                }
            }
            other => {
                let name = citation_name(other).expect("every top-level field has a block field");
                f.top(BlockName::Citation, name, field, &root);
            }
        }
    }
    f.finish()
}

fn field_json(field: &BlockField, parent: Option<&str>) -> Result<Json, FlattenError> {
    let shape = |message: &str| FlattenError::Shape { field: field.type_name.clone(), message: message.to_string() };
    let value = match (&field.type_class, &field.value) {
        (TypeClass::Compound, _) | (_, FieldValue::Compound(_)) if parent.is_some() => {
            return Err(FlattenError::NestedCompound {
                field: parent.unwrap_or_default().to_string(),
                inner: field.type_name.clone(),
            })
        }
        (TypeClass::Primitive, FieldValue::Text(t)) if !field.multiple => json!(t),
        (TypeClass::Primitive, FieldValue::List(v)) if field.multiple => json!(v),
        (TypeClass::Compound, FieldValue::Compound(items)) => {
            let mut rendered = Vec::with_capacity(items.len());
            for item in items {
                let mut obj = Map::new();
                for sub in item {
                    obj.insert(sub.type_name.clone(), field_json(sub, Some(&field.type_name))?);
                }
                rendered.push(Json::Object(obj));
            }
            match (field.multiple, rendered.len()) {
                (true, _) => Json::Array(rendered),
                (false, 1) => rendered.pop().expect("one instance"),
                (false, _) => return Err(shape("a single-valued compound needs exactly one instance")),
            }
        }
        _ => return Err(shape("typeClass, multiple and value disagree")),
    };
    Ok(json!({
        "typeName": field.type_name,
        "multiple": field.multiple,
        "typeClass": field.type_class,
        "value": value,
    }))
}

/// Ingest JSON: one object per block with its `fields`, plus the report
/// under `_flattenReport`.
pub fn serialize_blocks_json(blocks: &[MetadataBlock], report: &FlattenReport) -> Result<String, FlattenError> {
    let mut top = Map::new();
    for name in BlockName::ALL {
        let mut fields = Vec::new();
        for block in blocks.iter().filter(|b| b.name == name) {
            for field in &block.fields {
                fields.push(field_json(field, None)?);
            }
        }
        top.insert(name.as_str().to_string(), json!({ "fields": fields }));
    }
    top.insert("_flattenReport".into(), serde_json::to_value(report).expect("reports serialize"));
    Ok(serde_json::to_string_pretty(&Json::Object(top)).expect("JSON values serialize") + "\n")
}

/// Convenience: flatten and serialize in one go.
pub fn to_dataverse_json(dataset: &EngMetaDataset) -> Result<String, FlattenError> {
    let (blocks, report) = flatten(dataset);
    serialize_blocks_json(&blocks, &report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn block(blocks: &[MetadataBlock], name: BlockName) -> &MetadataBlock {
        blocks.iter().find(|b| b.name == name).unwrap()
    }

    #[test]
    fn empty_dataset_gives_three_empty_blocks() {
        let (blocks, report) = flatten(&EngMetaDataset::default());
        assert_eq!(blocks.len(), 3);
        assert!(blocks.iter().all(|b| b.fields.is_empty()));
        assert!(report.is_empty());
        let json: Json = serde_json::from_str(&serialize_blocks_json(&blocks, &report).unwrap()).unwrap();
        for name in ["citation", "process", "engMeta"] {
            assert_eq!(json[name]["fields"], json!([]));
        }
    }

    #[test]
    fn success_marker_lands_in_citation() {
        let mut d = EngMetaDataset::default();
        d.worked = Some(SuccessMarker::failed("diverged at step 10"));
        let (blocks, _) = flatten(&d);
        let c = block(&blocks, BlockName::Citation);
        assert_eq!(c.field("success").unwrap().texts(), vec!["false"]);
        assert_eq!(c.field("successNote").unwrap().texts(), vec!["diverged at step 10"]);
    }

    #[test]
    fn process_entries_are_deduplicated() {
        let mut d = EngMetaDataset::default();
        for kind in ["data generation", "analysis"] {
            let mut s = ProcessingStep::new(kind);
            s.software.push(Software::new("Gromacs", "2019.3"));
            s.inputs.push(FileRef::named("in.dat"));
            d.processing_steps.push(s);
        }
        let (blocks, report) = flatten(&d);
        let p = block(&blocks, BlockName::Process);
        let software = p.field("software").unwrap();
        assert_eq!(software.instances().len(), 1);
        assert_eq!(
            software.instances()[0],
            vec![BlockField::primitive("softwareName", "Gromacs"), BlockField::primitive("softwareVersion", "2019.3")]
        );
        assert_eq!(p.field("stepType").unwrap().texts(), vec!["data generation", "analysis"]);
        assert_eq!(report.dropped.len(), 2);
        assert!(report.dropped.iter().all(|x| x.reason == PROV_SIDECAR));
        assert_eq!(report.mapped.len() + report.dropped.len(), d.leaf_count());
    }

    #[test]
    fn variables_become_compounds() {
        let mut d = EngMetaDataset::default();
        let mut s = ObservedSystem::default();
        s.parameters.push(Variable::new("Reynolds Number", 5000));
        d.system = Some(s);
        let (blocks, report) = flatten(&d);
        let e = block(&blocks, BlockName::EngMeta);
        let p = e.field("systemParameter").unwrap();
        assert_eq!(p.type_class, TypeClass::Compound);
        assert_eq!(
            p.instances()[0],
            vec![
                BlockField::primitive("systemParameterName", "Reynolds Number"),
                BlockField::primitive("systemParameterValue", "5000")
            ]
        );
        assert_eq!(report.mapped.len(), 2);
        let json: Json = serde_json::from_str(&serialize_blocks_json(&blocks, &report).unwrap()).unwrap();
        let field = &json["engMeta"]["fields"][0];
        assert_eq!(field["typeClass"], "compound");
        assert_eq!(field["value"][0]["systemParameterValue"]["value"], "5000");
    }

    #[test]
    fn nested_lists_become_linked_fields() {
        let mut d = EngMetaDataset::default();
        let mut s = ProcessingStep::new("data generation");
        s.method = Some(Method::new("umbrella sampling").with_parameter(Variable::new("windows", 24)));
        d.processing_steps.push(s);
        let (blocks, report) = flatten(&d);
        let p = block(&blocks, BlockName::Process);
        let names: Vec<&str> = p.fields.iter().map(|f| f.type_name.as_str()).collect();
        assert_eq!(names, vec!["stepType", "method", "methodParameter"]);
        assert_eq!(
            p.field("methodParameter").unwrap().instances()[0],
            vec![
                BlockField::primitive("methodName", "umbrella sampling"),
                BlockField::primitive("methodParameterName", "windows"),
                BlockField::primitive("methodParameterValue", "24"),
            ]
        );
        let paths: Vec<String> = report.mapped.iter().map(|m| m.path.to_string()).collect();
        assert!(paths.contains(&"processingStep[0].method.parameter[0].value".to_string()), "{paths:?}");
    }

    #[test]
    fn nested_compounds_are_rejected() {
        let inner = BlockField {
            type_name: "inner".into(),
            multiple: false,
            type_class: TypeClass::Compound,
            value: FieldValue::Compound(vec![vec![BlockField::primitive("x", "1")]]),
        };
        let outer = BlockField {
            type_name: "outer".into(),
            multiple: false,
            type_class: TypeClass::Compound,
            value: FieldValue::Compound(vec![vec![inner]]),
        };
        let blocks = vec![MetadataBlock { name: BlockName::EngMeta, fields: vec![outer] }];
        let err = serialize_blocks_json(&blocks, &FlattenReport::default()).unwrap_err();
        assert_eq!(err, FlattenError::NestedCompound { field: "outer".into(), inner: "inner".into() });
    }

    #[test]
    fn sub_names() {
        assert_eq!(sub_name("title", "titleType"), "titleType");
        assert_eq!(sub_name("title", "text"), "titleText");
        assert_eq!(sub_name("softwareLicense", "license"), "softwareLicense");
    }
}
