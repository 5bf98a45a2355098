use serde_json::{Map, Value as Json};

use super::{check, decode, CanonError, Parsed, ROOT};
use crate::model::node::{Entry, RawNode, Tree};
use crate::model::{EngMetaDataset, Scalar};

/// Canonical JSON of a structurally valid dataset.
pub fn to_json(dataset: &EngMetaDataset) -> Result<String, CanonError> {
    check(dataset)?;
    Ok(to_json_unchecked(dataset))
}

/// Canonical JSON without the validation gate.
pub fn to_json_unchecked(dataset: &EngMetaDataset) -> String {
    let value = dataset.tree().map_or_else(|| Json::Object(Map::new()), |t| tree_json(&t));
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values always serialize");
    text.push('\n');
    text
}

/// Single-line canonical JSON of a value tree.
pub(crate) fn tree_json_compact(tree: &Tree) -> String {
    tree_json(tree).to_string()
}

/// Leaves are strings, except integers and booleans which use native JSON
/// types. Tagged values become `{"type": ..., "value": ...}`.
fn tree_json(tree: &Tree) -> Json {
    match tree {
        Tree::Leaf(leaf) if leaf.tagged => {
            let mut obj = Map::new();
            obj.insert("type".into(), Json::String(leaf.value.kind().to_string()));
            obj.insert("value".into(), scalar_json(&leaf.value));
            Json::Object(obj)
        }
        Tree::Leaf(leaf) => scalar_json(&leaf.value),
        Tree::Record(fields) => {
            let mut obj = Map::new();
            for field in fields {
                let value = match &field.entry {
                    Entry::One(t) => tree_json(t),
                    Entry::Many(items) => Json::Array(items.iter().map(tree_json).collect()),
                };
                obj.insert(field.name.to_string(), value);
            }
            Json::Object(obj)
        }
    }
}

fn scalar_json(value: &Scalar) -> Json {
    match value {
        Scalar::Integer(i) => Json::from(*i),
        Scalar::Boolean(b) => Json::Bool(*b),
        other => Json::String(other.canonical()),
    }
}

/// Parses the JSON form. Unknown keys are skipped and reported as warnings.
pub fn from_json(text: &str) -> Result<Parsed, CanonError> {
    let value: Json = serde_json::from_str(text).map_err(|e| CanonError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if !value.is_object() {
        return Err(CanonError::Root { found: kind_name(&value).to_string() });
    }
    let mut root = RawNode { name: ROOT.to_string(), ..Default::default() };
    fill(&mut root, &value);
    decode(&root)
}

fn kind_name(value: &Json) -> &'static str {
    match value {
        Json::Null => "null",
        Json::Bool(_) => "boolean",
        Json::Number(_) => "number",
        Json::String(_) => "string",
        Json::Array(_) => "array",
        Json::Object(_) => "object",
    }
}

/// Objects become child elements, arrays repeat the element and scalars
/// become text. `null` leaves the element without content.
fn fill(node: &mut RawNode, value: &Json) {
    match value {
        Json::Object(obj) => {
            for (key, v) in obj {
                match v {
                    Json::Array(items) => {
                        for item in items {
                            node.children.push(child(key, item));
                        }
                    }
                    v => node.children.push(child(key, v)),
                }
            }
        }
        Json::String(s) => node.text = Some(s.clone()),
        Json::Number(n) => node.text = Some(n.to_string()),
        Json::Bool(b) => node.text = Some(b.to_string()),
        Json::Null | Json::Array(_) => {}
    }
}

fn child(name: &str, value: &Json) -> RawNode {
    let mut node = RawNode { name: name.to_string(), ..Default::default() };
    fill(&mut node, value);
    node
}
