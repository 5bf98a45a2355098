use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};

use super::{check, decode, line_col, CanonError, Parsed, NAMESPACE, ROOT};
use crate::model::node::{Entry, RawNode, Style, Tree, TreeField};
use crate::model::EngMetaDataset;

const DECLARATION: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

/// Canonical XML of a structurally valid dataset.
pub fn to_xml(dataset: &EngMetaDataset) -> Result<String, CanonError> {
    check(dataset)?;
    Ok(to_xml_unchecked(dataset))
}

/// Canonical XML without the validation gate, for diagnostics and partial
/// documents such as raw extraction results.
pub fn to_xml_unchecked(dataset: &EngMetaDataset) -> String {
    let mut out = String::from(DECLARATION);
    let root_attr = format!(" xmlns=\"{NAMESPACE}\"");
    match dataset.tree() {
        Some(Tree::Record(fields)) => write_record(&mut out, ROOT, &root_attr, &fields, 0),
        _ => {
            out.push_str(&format!("<{ROOT}{root_attr}/>\n"));
        }
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_element(out: &mut String, name: &str, tree: &Tree, depth: usize) {
    match tree {
        Tree::Leaf(leaf) => {
            indent(out, depth);
            out.push('<');
            out.push_str(name);
            if leaf.tagged {
                out.push_str(&format!(" type=\"{}\"", leaf.value.kind()));
            }
            out.push('>');
            escape_text(out, &leaf.value.canonical());
            out.push_str(&format!("</{name}>\n"));
        }
        Tree::Record(fields) => write_record(out, name, "", fields, depth),
    }
}

fn write_record(out: &mut String, name: &str, extra_attrs: &str, fields: &[TreeField], depth: usize) {
    indent(out, depth);
    out.push('<');
    out.push_str(name);
    out.push_str(extra_attrs);
    let mut content = None;
    let mut children = Vec::new();
    for field in fields {
        match (field.style, &field.entry) {
            (Style::Attribute, Entry::One(Tree::Leaf(leaf))) => {
                out.push_str(&format!(" {}=\"", field.name));
                escape_attr(out, &leaf.value.canonical());
                out.push('"');
            }
            (Style::Content, Entry::One(Tree::Leaf(leaf))) => content = Some(leaf.value.canonical()),
            _ => children.push(field),
        }
    }
    if children.is_empty() {
        match content {
            Some(text) => {
                out.push('>');
                escape_text(out, &text);
                out.push_str(&format!("</{name}>\n"));
            }
            None => out.push_str("/>\n"),
        }
        return;
    }
    out.push_str(">\n");
    for field in children {
        for item in field.entry.items() {
            write_element(out, field.name, item, depth + 1);
        }
    }
    indent(out, depth);
    out.push_str(&format!("</{name}>\n"));
}

fn escape_text(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

fn escape_attr(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

/// Parses an EngMeta XML document. Unknown elements and attributes are
/// skipped and reported as warnings.
pub fn from_xml(text: &str) -> Result<Parsed, CanonError> {
    let root = parse_tree(text)?;
    if root.name != ROOT {
        return Err(CanonError::Root { found: root.name });
    }
    decode(&root)
}

fn syntax(text: &str, offset: u64, message: impl Into<String>) -> CanonError {
    let (line, column) = line_col(text, offset as usize);
    CanonError::Syntax { line, column, message: message.into() }
}

fn open(text: &str, e: &BytesStart<'_>, offset: u64) -> Result<RawNode, CanonError> {
    let mut attrs = Vec::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| syntax(text, offset, err.to_string()))?;
        let value = attr.normalized_value(XmlVersion::Implicit1_0).map_err(|err| syntax(text, offset, err.to_string()))?;
        attrs.push((attr.key.local_name().as_ref().to_string(), value.into_owned()));
    }
    Ok(RawNode {
        name: e.local_name().as_ref().to_string(),
        attrs,
        position: Some(line_col(text, offset as usize)),
        ..Default::default()
    })
}

fn parse_tree(text: &str) -> Result<RawNode, CanonError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(false);
    let mut stack: Vec<RawNode> = Vec::new();
    let mut root: Option<RawNode> = None;

    let mut attach = |stack: &mut Vec<RawNode>, node: RawNode, offset: u64| -> Result<(), CanonError> {
        match stack.last_mut() {
            Some(parent) => parent.children.push(node),
            None if root.is_none() => root = Some(node),
            None => return Err(syntax(text, offset, "more than one root element")),
        }
        Ok(())
    };
    let push_text = |stack: &mut Vec<RawNode>, chunk: &str, offset: u64| -> Result<(), CanonError> {
        match stack.last_mut() {
            Some(node) => {
                node.text.get_or_insert_with(String::new).push_str(chunk);
                Ok(())
            }
            None if chunk.trim().is_empty() => Ok(()),
            None => Err(syntax(text, offset, "text outside the root element")),
        }
    };

    loop {
        let offset = reader.buffer_position();
        let event = reader.read_event().map_err(|e| syntax(text, reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(e) => stack.push(open(text, &e, offset)?),
            Event::Empty(e) => {
                let node = open(text, &e, offset)?;
                attach(&mut stack, node, offset)?;
            }
            Event::End(_) => {
                let node = stack.pop().ok_or_else(|| syntax(text, offset, "unexpected end tag"))?;
                attach(&mut stack, node, offset)?;
            }
            Event::Text(t) => push_text(&mut stack, &t.xml10_content(), offset)?,
            Event::CData(c) => {
                push_text(&mut stack, &c.xml10_content(), offset)?
            }
            Event::GeneralRef(r) => {
                let resolved = match r.resolve_char_ref() {
                    Ok(Some(c)) => c.to_string(),
                    Ok(None) => {
                        let name = r.xml10_content();
                        resolve_predefined_entity(&name)
                            .ok_or_else(|| syntax(text, offset, format!("unknown entity `&{name};`")))?
                            .to_string()
                    }
                    Err(e) => return Err(syntax(text, offset, e.to_string())),
                };
                push_text(&mut stack, &resolved, offset)?
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if let Some(open) = stack.last() {
        return Err(syntax(text, text.len() as u64, format!("element `{}` is not closed", open.name)));
    }
    root.ok_or_else(|| syntax(text, text.len() as u64, "no root element"))
}
