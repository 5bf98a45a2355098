//! Generic machinery shared by every record type: a schema description,
//! an ordered value tree used by the serializers and path lookup, a loose
//! input tree used by the decoders, and typed path assignment and merging.

use std::fmt;

use rust_decimal::Decimal;
use serde::Serialize;
use thiserror::Error;

use super::path::{MetadataPath, Segment};
use super::scalar::{parse_decimal, parse_integer, Scalar, ScalarKind};

/// How a field is rendered in XML. JSON always uses plain object keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Element,
    Attribute,
    Content,
}

/// Expected type of a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafKind {
    Text,
    Integer,
    Decimal,
    Boolean,
    /// A tagged scalar of any kind (variable values).
    Any,
}

impl LeafKind {
    pub fn accepts(self, kind: ScalarKind) -> bool {
        matches!(
            (self, kind),
            (LeafKind::Any, _)
                | (LeafKind::Text, ScalarKind::Text)
                | (LeafKind::Integer, ScalarKind::Integer)
                | (LeafKind::Decimal, ScalarKind::Decimal)
                | (LeafKind::Boolean, ScalarKind::Boolean)
        )
    }
}

impl fmt::Display for LeafKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LeafKind::Text => "text",
            LeafKind::Integer => "integer",
            LeafKind::Decimal => "decimal",
            LeafKind::Boolean => "boolean",
            LeafKind::Any => "scalar",
        })
    }
}

#[derive(Clone, Copy)]
pub enum Kind {
    Leaf(LeafKind),
    Record {
        name: &'static str,
        fields: fn() -> &'static [FieldSchema],
    },
}

impl Kind {
    pub fn field(&self, name: &str) -> Option<&'static FieldSchema> {
        match self {
            Kind::Record { fields, .. } => fields().iter().find(|f| f.name == name),
            Kind::Leaf(_) => None,
        }
    }

    pub fn record_name(&self) -> Option<&'static str> {
        match self {
            Kind::Record { name, .. } => Some(name),
            Kind::Leaf(_) => None,
        }
    }
}

pub struct FieldSchema {
    pub name: &'static str,
    pub style: Style,
    pub list: bool,
    pub kind: fn() -> Kind,
}

/// Ordered, fully typed view of a value; absent fields are omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Leaf(Leaf),
    Record(Vec<TreeField>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    pub value: Scalar,
    /// Carries its kind explicitly when serialized (variable values).
    pub tagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeField {
    pub name: &'static str,
    pub style: Style,
    pub entry: Entry,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    One(Tree),
    Many(Vec<Tree>),
}

impl Entry {
    pub fn items(&self) -> &[Tree] {
        match self {
            Entry::One(t) => std::slice::from_ref(t),
            Entry::Many(v) => v,
        }
    }
}

impl Tree {
    /// Calls `visit` for every leaf with its fully indexed path.
    pub fn for_each_leaf(&self, at: &MetadataPath, visit: &mut dyn FnMut(&MetadataPath, &Leaf)) {
        match self {
            Tree::Leaf(leaf) => visit(at, leaf),
            Tree::Record(fields) => {
                for field in fields {
                    match &field.entry {
                        Entry::One(t) => t.for_each_leaf(&at.child(field.name, None), visit),
                        Entry::Many(items) => {
                            for (i, t) in items.iter().enumerate() {
                                t.for_each_leaf(&at.child(field.name, Some(i)), visit);
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        let mut n = 0;
        self.for_each_leaf(&MetadataPath::root(), &mut |_, _| n += 1);
        n
    }

    pub fn field(&self, name: &str) -> Option<&Entry> {
        match self {
            Tree::Record(fields) => fields.iter().find(|f| f.name == name).map(|f| &f.entry),
            Tree::Leaf(_) => None,
        }
    }

    pub fn as_leaf(&self) -> Option<&Scalar> {
        match self {
            Tree::Leaf(l) => Some(&l.value),
            Tree::Record(_) => None,
        }
    }

    pub(crate) fn collect<'a>(&'a self, segments: &[Segment], out: &mut Vec<&'a Tree>) {
        let Some((seg, rest)) = segments.split_first() else {
            out.push(self);
            return;
        };
        let Some(entry) = self.field(&seg.name) else {
            return;
        };
        let items = entry.items();
        match seg.index {
            Some(i) => {
                if let Some(t) = items.get(i) {
                    t.collect(rest, out);
                }
            }
            None => {
                for t in items {
                    t.collect(rest, out);
                }
            }
        }
    }
}

/// Loosely typed input produced by the XML and JSON readers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawNode {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub text: Option<String>,
    pub children: Vec<RawNode>,
    /// Line and column (1-based) of the start tag, when known.
    pub position: Option<(usize, usize)>,
}

impl RawNode {
    pub(crate) fn text_node(name: &str, text: String, position: Option<(usize, usize)>) -> Self {
        RawNode { name: name.to_string(), text: Some(text), position, ..Default::default() }
    }

    fn has_text(&self) -> bool {
        self.text.as_deref().is_some_and(|t| !t.trim().is_empty())
    }
}

/// A non-fatal decoding observation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: MetadataPath,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<(usize, usize)>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((line, col)) = self.position {
            write!(f, "{line}:{col}: ")?;
        }
        if self.path.is_root() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct DecodeError(pub Diagnostic);

#[derive(Debug, Default)]
pub struct DecodeCx {
    pub warnings: Vec<Diagnostic>,
}

impl DecodeCx {
    fn warn(&mut self, path: MetadataPath, message: String, position: Option<(usize, usize)>) {
        self.warnings.push(Diagnostic { path, message, position });
    }
}

fn field_error(path: &MetadataPath, node: &RawNode, message: impl Into<String>) -> DecodeError {
    DecodeError(Diagnostic { path: path.clone(), message: message.into(), position: node.position })
}

/// Why a typed assignment through a path failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("`{path}` does not exist in the model")]
    UnknownElement { path: MetadataPath },
    #[error("`{path}` addresses a structured element, not a scalar field")]
    NotScalar { path: MetadataPath },
    #[error("`{path}` is a scalar and has no child elements")]
    BelowScalar { path: MetadataPath },
    #[error("`{path}`: index {index} skips past the end of a list of length {len}")]
    IndexGap { path: MetadataPath, index: usize, len: usize },
    #[error("`{path}` is not repeatable; only index 0 is allowed")]
    NotRepeatable { path: MetadataPath },
    #[error("`{path}` expects a {expected} value, got {got}")]
    IncompatibleType { path: MetadataPath, expected: LeafKind, got: ScalarKind },
    #[error("`{path}`: empty text is not a valid value")]
    EmptyValue { path: MetadataPath },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MergePolicy {
    #[default]
    FirstWins,
    OverlayWins,
}

impl std::str::FromStr for MergePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-wins" => Ok(MergePolicy::FirstWins),
            "overlay-wins" => Ok(MergePolicy::OverlayWins),
            _ => Err(format!("unknown merge policy `{s}`")),
        }
    }
}

/// Two different values met at the same scalar path during a merge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub path: MetadataPath,
    pub base: Scalar,
    pub overlay: Scalar,
    pub chosen: Scalar,
}

/// A single value: a leaf scalar or a record.
pub trait Value: Clone + PartialEq + Default {
    fn kind() -> Kind;
    fn tree(&self) -> Option<Tree>;
    fn decode(node: &RawNode, cx: &mut DecodeCx, at: &MetadataPath) -> Result<Self, DecodeError>;
    fn set(&mut self, rest: &[Segment], value: Scalar, at: &MetadataPath) -> Result<(), PathError>;
    fn merge_from(&mut self, other: &Self, at: &MetadataPath, policy: MergePolicy, conflicts: &mut Vec<Conflict>);

    fn is_absent(&self) -> bool {
        self.tree().is_none()
    }

    /// Identity under which list elements are merged instead of appended.
    fn merge_key(&self) -> Option<&str> {
        None
    }

    /// Runs `f` on the list addressed by `rest`, creating parents on demand.
    fn with_list(&mut self, rest: &[Segment], at: &MetadataPath, f: ListFn<'_>) -> Result<(), PathError> {
        let _ = f;
        if rest.is_empty() {
            Err(PathError::NotScalar { path: at.clone() })
        } else {
            Err(PathError::BelowScalar { path: at.clone() })
        }
    }
}

pub type ListFn<'a> = &'a mut dyn FnMut(&mut dyn ListOps, &MetadataPath) -> Result<(), PathError>;

/// Type-erased operations on a list field.
pub trait ListOps {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds a new element from `writes` (paths relative to the element)
    /// and merges it in as a one-element overlay.
    fn append_merged(
        &mut self,
        writes: &[(&[Segment], Scalar)],
        at: &MetadataPath,
        policy: MergePolicy,
        conflicts: &mut Vec<Conflict>,
    ) -> Result<(), PathError>;
}

impl<T: Value> ListOps for Vec<T> {
    fn len(&self) -> usize {
        Vec::len(self)
    }

    fn append_merged(
        &mut self,
        writes: &[(&[Segment], Scalar)],
        at: &MetadataPath,
        policy: MergePolicy,
        conflicts: &mut Vec<Conflict>,
    ) -> Result<(), PathError> {
        let mut item = T::default();
        let mut item_path = at.clone();
        if let Some(last) = item_path.segments_mut().last_mut() {
            last.index = Some(self.len());
        }
        for (rel, value) in writes {
            item.set(rel, value.clone(), &item_path)?;
        }
        if !item.is_absent() {
            Slot::merge_from(self, &vec![item], at, policy, conflicts);
        }
        Ok(())
    }
}

/// A field container: required value, optional value, or list.
pub trait Slot: Sized {
    const LIST: bool;
    fn kind() -> Kind;
    fn entry(&self) -> Option<Entry>;
    fn decode(nodes: &[&RawNode], cx: &mut DecodeCx, at: &MetadataPath) -> Result<Self, DecodeError>;
    fn set(&mut self, index: Option<usize>, rest: &[Segment], value: Scalar, at: &MetadataPath) -> Result<(), PathError>;
    fn merge_from(&mut self, other: &Self, at: &MetadataPath, policy: MergePolicy, conflicts: &mut Vec<Conflict>);
    fn with_list(&mut self, index: Option<usize>, rest: &[Segment], at: &MetadataPath, f: ListFn<'_>) -> Result<(), PathError>;
}

fn leaf_text<'a>(node: &'a RawNode, at: &MetadataPath) -> Result<&'a str, DecodeError> {
    if !node.children.is_empty() {
        return Err(field_error(at, node, "expected a scalar value, found child elements"));
    }
    match node.text.as_deref() {
        Some(t) if !t.trim().is_empty() => Ok(t),
        _ => Err(field_error(at, node, "empty value")),
    }
}

fn merge_leaf<T: Value>(
    this: &mut T,
    other: &T,
    to_scalar: impl Fn(&T) -> Scalar,
    at: &MetadataPath,
    policy: MergePolicy,
    conflicts: &mut Vec<Conflict>,
) {
    if other.is_absent() {
        return;
    }
    if this.is_absent() {
        *this = other.clone();
    } else if this != other {
        let chosen = match policy {
            MergePolicy::FirstWins => to_scalar(this),
            MergePolicy::OverlayWins => to_scalar(other),
        };
        conflicts.push(Conflict { path: at.clone(), base: to_scalar(this), overlay: to_scalar(other), chosen });
        if policy == MergePolicy::OverlayWins {
            *this = other.clone();
        }
    }
}

fn expect_leaf(rest: &[Segment], at: &MetadataPath) -> Result<(), PathError> {
    if rest.is_empty() {
        Ok(())
    } else {
        Err(PathError::BelowScalar { path: at.clone() })
    }
}

impl Value for String {
    fn kind() -> Kind {
        Kind::Leaf(LeafKind::Text)
    }

    fn tree(&self) -> Option<Tree> {
        (!self.is_empty()).then(|| Tree::Leaf(Leaf { value: Scalar::Text(self.clone()), tagged: false }))
    }

    fn decode(node: &RawNode, _cx: &mut DecodeCx, at: &MetadataPath) -> Result<Self, DecodeError> {
        leaf_text(node, at).map(str::to_string)
    }

    fn set(&mut self, rest: &[Segment], value: Scalar, at: &MetadataPath) -> Result<(), PathError> {
        expect_leaf(rest, at)?;
        match value {
            Scalar::Text(s) if s.trim().is_empty() => Err(PathError::EmptyValue { path: at.clone() }),
            Scalar::Text(s) => {
                *self = s;
                Ok(())
            }
            other => Err(PathError::IncompatibleType { path: at.clone(), expected: LeafKind::Text, got: other.kind() }),
        }
    }

    fn merge_from(&mut self, other: &Self, at: &MetadataPath, policy: MergePolicy, conflicts: &mut Vec<Conflict>) {
        merge_leaf(self, other, |s| Scalar::Text(s.clone()), at, policy, conflicts);
    }
}

macro_rules! typed_leaf {
    ($ty:ty, $kind:ident, $variant:ident, $parse:expr) => {
        impl Value for $ty {
            fn kind() -> Kind {
                Kind::Leaf(LeafKind::$kind)
            }

            fn tree(&self) -> Option<Tree> {
                Some(Tree::Leaf(Leaf { value: Scalar::$variant(self.clone()), tagged: false }))
            }

            fn decode(node: &RawNode, _cx: &mut DecodeCx, at: &MetadataPath) -> Result<Self, DecodeError> {
                let text = leaf_text(node, at)?;
                let parse: fn(&str) -> Result<$ty, String> = $parse;
                parse(text.trim()).map_err(|e| field_error(at, node, e))
            }

            fn set(&mut self, rest: &[Segment], value: Scalar, at: &MetadataPath) -> Result<(), PathError> {
                expect_leaf(rest, at)?;
                match value {
                    Scalar::$variant(v) => {
                        *self = v;
                        Ok(())
                    }
                    other => Err(PathError::IncompatibleType {
                        path: at.clone(),
                        expected: LeafKind::$kind,
                        got: other.kind(),
                    }),
                }
            }

            fn merge_from(&mut self, other: &Self, at: &MetadataPath, policy: MergePolicy, conflicts: &mut Vec<Conflict>) {
                merge_leaf(self, other, |v| Scalar::$variant(v.clone()), at, policy, conflicts);
            }
        }
    };
}

typed_leaf!(i64, Integer, Integer, parse_integer);
typed_leaf!(Decimal, Decimal, Decimal, parse_decimal);
typed_leaf!(bool, Boolean, Boolean, |t| match Scalar::parse_as(ScalarKind::Boolean, t)? {
    Scalar::Boolean(b) => Ok(b),
    _ => unreachable!(),
});

impl Default for Scalar {
    fn default() -> Self {
        Scalar::Text(String::new())
    }
}

/// Tagged scalar: `<value type="decimal">300</value>` in XML,
/// `{"type": "decimal", "value": "300"}` in JSON.
impl Value for Scalar {
    fn kind() -> Kind {
        Kind::Leaf(LeafKind::Any)
    }

    fn tree(&self) -> Option<Tree> {
        match self {
            Scalar::Text(s) if s.is_empty() => None,
            v => Some(Tree::Leaf(Leaf { value: v.clone(), tagged: true })),
        }
    }

    fn decode(node: &RawNode, cx: &mut DecodeCx, at: &MetadataPath) -> Result<Self, DecodeError> {
        let mut tag = node.attrs.iter().find(|(k, _)| k == "type").map(|(_, v)| v.clone());
        let mut text = if node.has_text() { node.text.clone() } else { None };
        for child in &node.children {
            match (child.name.as_str(), &child.text) {
                ("type", Some(t)) if tag.is_none() => tag = Some(t.clone()),
                ("value", Some(t)) if !node.has_text() => text = Some(t.clone()),
                _ => cx.warn(
                    at.child(&child.name, None),
                    format!("unknown element `{}` skipped", child.name),
                    child.position,
                ),
            }
        }
        for (k, _) in &node.attrs {
            if k != "type" && !k.starts_with("xmlns") {
                cx.warn(at.clone(), format!("unknown attribute `{k}` skipped"), node.position);
            }
        }
        let kind = match tag.as_deref() {
            None => ScalarKind::Text,
            Some(t) => ScalarKind::from_tag(t)
                .ok_or_else(|| field_error(at, node, format!("unknown value type `{t}`")))?,
        };
        let text = match text {
            Some(t) if !t.trim().is_empty() => t,
            _ => return Err(field_error(at, node, "empty value")),
        };
        let raw = if kind == ScalarKind::Text { text.as_str() } else { text.trim() };
        Scalar::parse_as(kind, raw).map_err(|e| field_error(at, node, e))
    }

    fn set(&mut self, rest: &[Segment], value: Scalar, at: &MetadataPath) -> Result<(), PathError> {
        expect_leaf(rest, at)?;
        if matches!(&value, Scalar::Text(s) if s.trim().is_empty()) {
            return Err(PathError::EmptyValue { path: at.clone() });
        }
        *self = value;
        Ok(())
    }

    fn merge_from(&mut self, other: &Self, at: &MetadataPath, policy: MergePolicy, conflicts: &mut Vec<Conflict>) {
        merge_leaf(self, other, Scalar::clone, at, policy, conflicts);
    }
}

impl Slot for String {
    const LIST: bool = false;

    fn kind() -> Kind {
        <String as Value>::kind()
    }

    fn entry(&self) -> Option<Entry> {
        Value::tree(self).map(Entry::One)
    }

    fn decode(nodes: &[&RawNode], cx: &mut DecodeCx, at: &MetadataPath) -> Result<Self, DecodeError> {
        match nodes {
            [] => Ok(String::new()),
            [one] => <String as Value>::decode(one, cx, at),
            [_, second, ..] => Err(field_error(at, second, "element is not repeatable")),
        }
    }

    fn set(&mut self, index: Option<usize>, rest: &[Segment], value: Scalar, at: &MetadataPath) -> Result<(), PathError> {
        if index.unwrap_or(0) != 0 {
            return Err(PathError::NotRepeatable { path: at.clone() });
        }
        Value::set(self, rest, value, at)
    }

    fn merge_from(&mut self, other: &Self, at: &MetadataPath, policy: MergePolicy, conflicts: &mut Vec<Conflict>) {
        Value::merge_from(self, other, at, policy, conflicts);
    }

    fn with_list(&mut self, _index: Option<usize>, rest: &[Segment], at: &MetadataPath, f: ListFn<'_>) -> Result<(), PathError> {
        Value::with_list(self, rest, at, f)
    }
}

impl<T: Value> Slot for Option<T> {
    const LIST: bool = false;

    fn kind() -> Kind {
        T::kind()
    }

    fn entry(&self) -> Option<Entry> {
        self.as_ref().and_then(Value::tree).map(Entry::One)
    }

    fn decode(nodes: &[&RawNode], cx: &mut DecodeCx, at: &MetadataPath) -> Result<Self, DecodeError> {
        match nodes {
            [] => Ok(None),
            [one] => T::decode(one, cx, at).map(Some),
            [_, second, ..] => Err(field_error(at, second, "element is not repeatable")),
        }
    }

    fn set(&mut self, index: Option<usize>, rest: &[Segment], value: Scalar, at: &MetadataPath) -> Result<(), PathError> {
        if index.unwrap_or(0) != 0 {
            return Err(PathError::NotRepeatable { path: at.clone() });
        }
        let mut next = self.clone().unwrap_or_default();
        next.set(rest, value, at)?;
        *self = Some(next);
        Ok(())
    }

    fn merge_from(&mut self, other: &Self, at: &MetadataPath, policy: MergePolicy, conflicts: &mut Vec<Conflict>) {
        match (self.as_mut(), other) {
            (_, None) => {}
            (None, Some(o)) => *self = Some(o.clone()),
            (Some(s), Some(o)) => s.merge_from(o, at, policy, conflicts),
        }
    }

    fn with_list(&mut self, index: Option<usize>, rest: &[Segment], at: &MetadataPath, f: ListFn<'_>) -> Result<(), PathError> {
        if index.unwrap_or(0) != 0 {
            return Err(PathError::NotRepeatable { path: at.clone() });
        }
        let mut next = self.clone().unwrap_or_default();
        next.with_list(rest, at, f)?;
        if !next.is_absent() {
            *self = Some(next);
        }
        Ok(())
    }
}

impl<T: Value> Slot for Vec<T> {
    const LIST: bool = true;

    fn kind() -> Kind {
        T::kind()
    }

    fn entry(&self) -> Option<Entry> {
        let items: Vec<Tree> = self.iter().filter_map(Value::tree).collect();
        (!items.is_empty()).then_some(Entry::Many(items))
    }

    fn decode(nodes: &[&RawNode], cx: &mut DecodeCx, at: &MetadataPath) -> Result<Self, DecodeError> {
        let mut out = Vec::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            let mut item_path = at.clone();
            if let Some(last) = item_path.segments_mut().last_mut() {
                last.index = Some(i);
            }
            out.push(T::decode(node, cx, &item_path)?);
        }
        Ok(out)
    }

    fn set(&mut self, index: Option<usize>, rest: &[Segment], value: Scalar, at: &MetadataPath) -> Result<(), PathError> {
        let i = index.unwrap_or(0);
        let mut item_path = at.clone();
        if let Some(last) = item_path.segments_mut().last_mut() {
            last.index = Some(i);
        }
        if i > self.len() {
            return Err(PathError::IndexGap { path: item_path, index: i, len: self.len() });
        }
        let mut item = self.get(i).cloned().unwrap_or_default();
        item.set(rest, value, &item_path)?;
        if i == self.len() {
            self.push(item);
        } else {
            self[i] = item;
        }
        Ok(())
    }

    /// Appends the overlay elements that do not already occur in `self`.
    /// Elements with a merge key equal to a base element's key are merged
    /// into that element instead.
    fn merge_from(&mut self, other: &Self, at: &MetadataPath, policy: MergePolicy, conflicts: &mut Vec<Conflict>) {
        let base_len = self.len();
        for item in other {
            if self[..base_len].contains(item) {
                continue;
            }
            let keyed = item
                .merge_key()
                .and_then(|key| self[..base_len].iter().position(|b| b.merge_key() == Some(key)));
            match keyed {
                Some(i) => {
                    let mut item_path = at.clone();
                    if let Some(last) = item_path.segments_mut().last_mut() {
                        last.index = Some(i);
                    }
                    self[i].merge_from(item, &item_path, policy, conflicts);
                }
                None => self.push(item.clone()),
            }
        }
    }

    fn with_list(&mut self, index: Option<usize>, rest: &[Segment], at: &MetadataPath, f: ListFn<'_>) -> Result<(), PathError> {
        if rest.is_empty() {
            return f(self, at);
        }
        let i = index.unwrap_or(0);
        let mut item_path = at.clone();
        if let Some(last) = item_path.segments_mut().last_mut() {
            last.index = Some(i);
        }
        if i > self.len() {
            return Err(PathError::IndexGap { path: item_path, index: i, len: self.len() });
        }
        let mut item = self.get(i).cloned().unwrap_or_default();
        item.with_list(rest, &item_path, f)?;
        if i == self.len() {
            if !item.is_absent() {
                self.push(item);
            }
        } else {
            self[i] = item;
        }
        Ok(())
    }
}

/// Decodes the fields of a record from a raw node. `fields` lists every
/// schema field; returns, per field, the raw nodes that belong to it.
pub(crate) fn split_fields<'a>(
    node: &'a RawNode,
    fields: &[FieldSchema],
    synthetic: &'a mut Vec<RawNode>,
    cx: &mut DecodeCx,
    at: &MetadataPath,
) -> Vec<Vec<&'a RawNode>> {
    // Attributes and text content become synthetic leaf nodes first.
    for field in fields {
        match field.style {
            Style::Attribute => {
                for (k, v) in &node.attrs {
                    if k == field.name {
                        synthetic.push(RawNode::text_node(k, v.clone(), node.position));
                    }
                }
            }
            Style::Content => {
                let has_child = node.children.iter().any(|c| c.name == field.name);
                if !has_child {
                    if let Some(t) = &node.text {
                        if node.children.is_empty() {
                            synthetic.push(RawNode::text_node(field.name, t.clone(), node.position));
                            }
                    }
                }
            }
            Style::Element => {}
        }
    }
    let synthetic: &'a Vec<RawNode> = synthetic;

    let has_content = fields.iter().any(|f| f.style == Style::Content);
    for (k, _) in &node.attrs {
        let known = fields.iter().any(|f| f.style == Style::Attribute && f.name == k);
        if !known && !k.starts_with("xmlns") {
            cx.warn(at.clone(), format!("unknown attribute `{k}` skipped"), node.position);
        }
    }
    if !has_content && node.has_text() {
        cx.warn(at.clone(), "unexpected text content skipped".into(), node.position);
    }
    for child in &node.children {
        if !fields.iter().any(|f| f.name == child.name) {
            cx.warn(
                at.child(&child.name, None),
                format!("unknown element `{}` skipped", child.name),
                child.position,
            );
        }
    }

    fields
        .iter()
        .map(|f| {
            let mut nodes: Vec<&RawNode> = node.children.iter().filter(|c| c.name == f.name).collect();
            nodes.extend(synthetic.iter().filter(|s| s.name == f.name));
            nodes
        })
        .collect()
}

/// Declares a record type and derives its [`Value`] implementation.
///
/// Each field is written `Style name: Type = "elementName"`. An optional
/// leading `@key field;` makes list elements merge by that field.
macro_rules! record {
    (
        $(#[$meta:meta])*
        pub struct $name:ident as $tag:literal {
            $( @key $key:ident; )?
            $( $(#[$fmeta:meta])* $style:ident $field:ident : $ty:ty = $xml:literal ),* $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Eq)]
        pub struct $name {
            $( $(#[$fmeta])* pub $field: $ty, )*
        }

        impl $name {
            const FIELDS: &'static [$crate::model::node::FieldSchema] = &[
                $( $crate::model::node::FieldSchema {
                    name: $xml,
                    style: $crate::model::node::Style::$style,
                    list: <$ty as $crate::model::node::Slot>::LIST,
                    kind: <$ty as $crate::model::node::Slot>::kind,
                }, )*
            ];

            fn field_schemas() -> &'static [$crate::model::node::FieldSchema] {
                Self::FIELDS
            }
        }

        impl $crate::model::node::Value for $name {
            fn kind() -> $crate::model::node::Kind {
                $crate::model::node::Kind::Record { name: $tag, fields: Self::field_schemas }
            }

            fn tree(&self) -> Option<$crate::model::node::Tree> {
                use $crate::model::node::{Slot, Style, TreeField};
                let mut fields = Vec::new();
                $(
                    if let Some(entry) = Slot::entry(&self.$field) {
                        fields.push(TreeField { name: $xml, style: Style::$style, entry });
                    }
                )*
                (!fields.is_empty()).then_some($crate::model::node::Tree::Record(fields))
            }

            #[allow(unused_assignments)]
            fn decode(
                node: &$crate::model::node::RawNode,
                cx: &mut $crate::model::node::DecodeCx,
                at: &$crate::model::MetadataPath,
            ) -> Result<Self, $crate::model::node::DecodeError> {
                use $crate::model::node::Slot;
                let mut synthetic = Vec::new();
                let parts = $crate::model::node::split_fields(node, Self::FIELDS, &mut synthetic, cx, at);
                let mut parts = parts.into_iter();
                Ok($name {
                    $( $field: {
                        let nodes = parts.next().unwrap_or_default();
                        let index = if <$ty as Slot>::LIST { Some(0) } else { None };
                        <$ty as Slot>::decode(&nodes, cx, &at.child($xml, index))?
                    }, )*
                })
            }

            fn set(
                &mut self,
                rest: &[$crate::model::Segment],
                value: $crate::model::Scalar,
                at: &$crate::model::MetadataPath,
            ) -> Result<(), $crate::model::node::PathError> {
                use $crate::model::node::{PathError, Slot};
                let Some((seg, tail)) = rest.split_first() else {
                    return Err(PathError::NotScalar { path: at.clone() });
                };
                match seg.name.as_str() {
                    $( $xml => Slot::set(&mut self.$field, seg.index, tail, value, &at.child($xml, seg.index)), )*
                    _ => Err(PathError::UnknownElement { path: at.child(&seg.name, seg.index) }),
                }
            }

            fn merge_from(
                &mut self,
                other: &Self,
                at: &$crate::model::MetadataPath,
                policy: $crate::model::MergePolicy,
                conflicts: &mut Vec<$crate::model::Conflict>,
            ) {
                use $crate::model::node::Slot;
                $( Slot::merge_from(&mut self.$field, &other.$field, &at.child($xml, None), policy, conflicts); )*
            }

            fn with_list(
                &mut self,
                rest: &[$crate::model::Segment],
                at: &$crate::model::MetadataPath,
                f: $crate::model::node::ListFn<'_>,
            ) -> Result<(), $crate::model::node::PathError> {
                use $crate::model::node::{PathError, Slot};
                let Some((seg, tail)) = rest.split_first() else {
                    return Err(PathError::NotScalar { path: at.clone() });
                };
                match seg.name.as_str() {
                    $( $xml => Slot::with_list(&mut self.$field, seg.index, tail, &at.child($xml, seg.index), f), )*
                    _ => Err(PathError::UnknownElement { path: at.child(&seg.name, seg.index) }),
                }
            }

            #[allow(unreachable_code)]
            fn merge_key(&self) -> Option<&str> {
                $( return (!self.$key.is_empty()).then_some(self.$key.as_str()); )?
                None
            }
        }
    };
}

pub(crate) use record;
