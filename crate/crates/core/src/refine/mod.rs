//! Turns the raw box tree into a metadata tree.
//!
//! Standard leaves are decoded into named fields, `ilst` items and bare
//! QuickTime `©` keys become key-value fields, embedded XML is flattened and
//! bulk payloads (`mdat`, sample tables) are dropped per the exclusion list.

mod ilst;
mod leaves;
mod xml;

use std::collections::HashMap;
use std::fmt;

use crate::bmff::{BoxNode, FourCC, ParseReport};
use crate::codec::escape;

pub use ilst::{parse_ilst, IlstPlacement};
pub use xml::{flatten_xml, looks_like_xml, XmlNotWellFormed};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Integer(i128),
    Decimal(f64),
    Text(String),
    Bytes,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldValue {
    pub value: Value,
    /// Bytes the value was decoded from.
    pub raw: Vec<u8>,
}

impl FieldValue {
    pub fn integer(v: impl Into<i128>, raw: &[u8]) -> Self {
        FieldValue {
            value: Value::Integer(v.into()),
            raw: raw.to_vec(),
        }
    }

    /// Non-finite inputs are kept as raw bytes.
    pub fn decimal(v: f64, raw: &[u8]) -> Self {
        if v.is_finite() {
            FieldValue {
                value: Value::Decimal(v),
                raw: raw.to_vec(),
            }
        } else {
            Self::bytes(raw)
        }
    }

    pub fn text(s: impl Into<String>, raw: &[u8]) -> Self {
        FieldValue {
            value: Value::Text(s.into()),
            raw: raw.to_vec(),
        }
    }

    pub fn bytes(raw: &[u8]) -> Self {
        FieldValue {
            value: Value::Bytes,
            raw: raw.to_vec(),
        }
    }

    /// UTF-8 text when possible, raw bytes otherwise.
    pub fn text_or_bytes(raw: &[u8]) -> Self {
        match std::str::from_utf8(raw) {
            Ok(s) => Self::text(s, raw),
            Err(_) => Self::bytes(raw),
        }
    }

    /// Bytes used in the string form of the value.
    pub fn render(&self) -> Vec<u8> {
        match &self.value {
            Value::Integer(v) => v.to_string().into_bytes(),
            Value::Decimal(v) => format!("{v:?}").into_bytes(),
            Value::Text(s) => s.as_bytes().to_vec(),
            Value::Bytes => self.raw.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub key: Vec<u8>,
    pub value: FieldValue,
}

impl Field {
    pub fn new(key: impl AsRef<[u8]>, value: FieldValue) -> Self {
        Field {
            key: key.as_ref().to_vec(),
            value,
        }
    }
}

/// Appends fields, replacing the value of keys already present.
pub(crate) fn merge_fields(into: &mut Vec<Field>, new: impl IntoIterator<Item = Field>) {
    let mut index: HashMap<Vec<u8>, usize> = into
        .iter()
        .enumerate()
        .map(|(i, f)| (f.key.clone(), i))
        .collect();
    for f in new {
        match index.get(&f.key) {
            Some(&i) => into[i] = f,
            None => {
                index.insert(f.key.clone(), into.len());
                into.push(f);
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetadataNode {
    /// Raw box name; empty for the synthetic root.
    pub name: Vec<u8>,
    /// Raw names of the ancestors, outermost first.
    pub path: Vec<Vec<u8>>,
    pub fields: Vec<Field>,
    pub children: Vec<MetadataNode>,
}

impl MetadataNode {
    pub fn field(&self, key: &[u8]) -> Option<&FieldValue> {
        self.fields.iter().find(|f| f.key == key).map(|f| &f.value)
    }

    pub fn child(&self, name: &[u8]) -> Option<&MetadataNode> {
        self.children.iter().find(|c| c.name == name)
    }

    /// Finds a descendant by raw names, e.g. `[b"moov", b"mvhd"]`.
    pub fn find(&self, names: &[&[u8]]) -> Option<&MetadataNode> {
        names.iter().try_fold(self, |node, name| node.child(name))
    }
}

/// Path pattern over escaped components. Matches a path whose trailing
/// components equal the pattern; `*` matches any one component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathPattern(Vec<String>);

impl PathPattern {
    pub fn parse(text: &str) -> Self {
        PathPattern(
            text.trim_matches('/')
                .split('/')
                .filter(|c| !c.is_empty())
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn matches(&self, path: &[String]) -> bool {
        if self.0.len() > path.len() {
            return false;
        }
        let tail = &path[path.len() - self.0.len()..];
        self.0
            .iter()
            .zip(tail)
            .all(|(p, c)| p == "*" || p == c)
    }
}

impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("/"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldPattern {
    /// Restricts the key to nodes matching this pattern; any node when `None`.
    pub node: Option<PathPattern>,
    /// Escaped key.
    pub key: String,
}

/// Nodes and fields dropped during refinement.
///
/// Text form, one pattern per line: `mdat` drops every `mdat` node and its
/// subtree, `stts/@entries` drops the `entries` field of `stts` nodes and
/// `@raw` drops `raw` fields everywhere. `#` starts a comment. Patterns use
/// escaped names and unnumbered `trak`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExclusionList {
    pub node_paths: Vec<PathPattern>,
    pub field_keys: Vec<FieldPattern>,
}

impl ExclusionList {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Self {
        let mut list = Self::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('@') {
                Some((node, key)) => {
                    let node = PathPattern::parse(node);
                    list.field_keys.push(FieldPattern {
                        node: (!node.0.is_empty()).then_some(node),
                        key: key.to_string(),
                    });
                }
                None => {
                    let node = PathPattern::parse(line);
                    if !node.0.is_empty() {
                        list.node_paths.push(node);
                    }
                }
            }
        }
        list
    }

    pub fn excludes_node(&self, path: &[String]) -> bool {
        self.node_paths.iter().any(|p| p.matches(path))
    }

    pub fn excludes_field(&self, path: &[String], key: &str) -> bool {
        self.field_keys.iter().any(|p| {
            p.key == key && p.node.as_ref().is_none_or(|n| n.matches(path))
        })
    }
}

/// Drops media data, per-sample tables and padding payloads.
pub fn default_exclusions() -> ExclusionList {
    ExclusionList::parse(
        "mdat
         stts/@entries
         ctts/@entries
         stss/@entries
         stsc/@entries
         stsz/@entries
         stco/@entries
         co64/@entries
         free/@raw
         skip/@raw",
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefineWarning {
    pub path: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Refined {
    pub root: MetadataNode,
    pub warnings: Vec<RefineWarning>,
}

pub fn refine(report: &ParseReport<'_>, exclusions: &ExclusionList) -> Refined {
    let mut ctx = Context {
        exclusions,
        warnings: Vec::new(),
    };
    let children = report
        .tree
        .iter()
        .filter_map(|b| ctx.refine_node(b))
        .collect();
    Refined {
        root: MetadataNode {
            children,
            ..Default::default()
        },
        warnings: ctx.warnings,
    }
}

/// Decodes a `uuid` box: the 16-byte user type as hex, then flattened XML
/// or the remaining raw bytes.
pub fn refine_uuid(node: &BoxNode<'_>) -> MetadataNode {
    let mut warnings = Vec::new();
    let fields = uuid_fields(node, &mut warnings);
    MetadataNode {
        name: node.name().0.to_vec(),
        path: node.path.iter().map(|n| n.0.to_vec()).collect(),
        fields,
        children: Vec::new(),
    }
}

fn uuid_fields(node: &BoxNode<'_>, warnings: &mut Vec<RefineWarning>) -> Vec<Field> {
    let payload = node.payload.unwrap_or_default();
    if payload.len() < 16 {
        warnings.push(RefineWarning {
            path: path_text(&node.full_path()),
            message: format!("uuid payload of {} bytes is shorter than 16", payload.len()),
        });
        return if payload.is_empty() {
            Vec::new()
        } else {
            vec![Field::new("raw", FieldValue::bytes(payload))]
        };
    }
    let (user_type, rest) = payload.split_at(16);
    let hex: String = user_type.iter().map(|b| format!("{b:02x}")).collect();
    let mut fields = vec![Field::new("uuid", FieldValue::text(hex, user_type))];
    merge_fields(&mut fields, payload_fields(rest, &node.full_path(), warnings));
    fields
}

/// Fields for an opaque payload: flattened XML when it parses, else raw bytes.
fn payload_fields(
    payload: &[u8],
    path: &[FourCC],
    warnings: &mut Vec<RefineWarning>,
) -> Vec<Field> {
    if payload.is_empty() {
        return Vec::new();
    }
    if looks_like_xml(payload) {
        match flatten_xml(payload) {
            Ok(fields) => return fields,
            Err(e) => warnings.push(RefineWarning {
                path: path_text(path),
                message: e.to_string(),
            }),
        }
    }
    vec![Field::new("raw", FieldValue::bytes(payload))]
}

fn path_text(path: &[FourCC]) -> String {
    path.iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join("/")
}

struct Context<'e> {
    exclusions: &'e ExclusionList,
    warnings: Vec<RefineWarning>,
}

impl Context<'_> {
    fn refine_node(&mut self, node: &BoxNode<'_>) -> Option<MetadataNode> {
        let full = node.full_path();
        let escaped: Vec<String> = full.iter().map(|n| escape(&n.0)).collect();
        if self.exclusions.excludes_node(&escaped) {
            return None;
        }

        let name = node.name();
        let mut fields = Vec::new();
        let mut children = Vec::new();

        if let Some(payload) = node.payload {
            if name == b"uuid" {
                fields = uuid_fields(node, &mut self.warnings);
            } else {
                match leaves::decode(name, payload) {
                    Some(Ok(decoded)) => fields = decoded,
                    Some(Err(e)) => {
                        self.warn(&full, format!("cannot decode {name}: {e}"));
                        fields = vec![Field::new("raw", FieldValue::bytes(payload))];
                    }
                    None => fields = payload_fields(payload, &full, &mut self.warnings),
                }
            }
        } else if name == b"ilst" {
            let placement = IlstPlacement::for_path(&node.path);
            let (items, warnings) = parse_ilst(node, placement);
            fields = items;
            self.warnings.extend(warnings);
        } else {
            if name == b"udta" {
                let (items, warnings) = parse_ilst(node, IlstPlacement::DirectInUdta);
                fields = items;
                self.warnings.extend(warnings);
            }
            for child in &node.children {
                if name == b"udta" && ilst::is_bare_udta_key(child) {
                    continue;
                }
                if let Some(refined) = self.refine_node(child) {
                    children.push(refined);
                }
            }
            if name == b"meta" {
                resolve_item_keys(&mut children);
            }
        }

        let mut kept = Vec::with_capacity(fields.len());
        merge_fields(
            &mut kept,
            fields
                .into_iter()
                .filter(|f| !self.exclusions.excludes_field(&escaped, &escape(&f.key))),
        );

        Some(MetadataNode {
            name: name.0.to_vec(),
            path: node.path.iter().map(|n| n.0.to_vec()).collect(),
            fields: kept,
            children,
        })
    }

    fn warn(&mut self, path: &[FourCC], message: String) {
        self.warnings.push(RefineWarning {
            path: path_text(path),
            message,
        });
    }
}

/// Renames index-keyed `ilst` items (`00 00 00 01`, ...) after the names
/// listed in a sibling `keys` box.
fn resolve_item_keys(children: &mut [MetadataNode]) {
    let Some(keys) = children.iter().find(|c| c.name == b"keys") else {
        return;
    };
    let names: HashMap<u32, Vec<u8>> = keys
        .fields
        .iter()
        .filter_map(|f| {
            let idx = std::str::from_utf8(&f.key).ok()?.parse::<u32>().ok()?;
            Some((idx, f.value.render()))
        })
        .collect();
    for child in children.iter_mut().filter(|c| c.name == b"ilst") {
        let renamed: Vec<Field> = child
            .fields
            .drain(..)
            .map(|f| match <[u8; 4]>::try_from(f.key.as_slice()) {
                Ok(idx) => match names.get(&u32::from_be_bytes(idx)) {
                    Some(name) => Field::new(name, f.value),
                    None => f,
                },
                Err(_) => f,
            })
            .collect();
        merge_fields(&mut child.fields, renamed);
    }
}

impl fmt::Display for MetadataNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in crate::codec::serialize(self) {
            writeln!(f, "{}", s.text)?;
        }
        Ok(())
    }
}
