//! Canonical string form of a metadata tree.
//!
//! A node becomes `moov/mvhd`, a field becomes `moov/mvhd/@duration=1546737`.
//! Names, keys and values are escaped byte-wise so that the three grammar
//! characters `/`, `@` and `=` only ever appear as separators.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::refine::MetadataNode;

/// Escapes raw bytes into printable ASCII.
///
/// Printable ASCII passes through except `\`, which doubles, and the
/// separators `/ @ =`, which become `\xNN` like every non-printable byte.
pub fn escape(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'\\' => out.push_str("\\\\"),
            b'/' | b'@' | b'=' => {
                let _ = write!(out, "\\x{b:02X}");
            }
            0x20..=0x7E => out.push(b as char),
            _ => {
                let _ = write!(out, "\\x{b:02X}");
            }
        }
    }
    out
}

/// Inverse of [`escape`]. Only the canonical forms `\\` and `\xNN` with
/// uppercase hex digits are accepted.
pub fn unescape(text: &str) -> Result<Vec<u8>> {
    let bad = || Error::MalformedEscape(text.to_string());
    let bytes = text.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if !(0x20..=0x7E).contains(&b) {
            return Err(bad());
        }
        if b != b'\\' {
            out.push(b);
            i += 1;
            continue;
        }
        match bytes.get(i + 1) {
            Some(b'\\') => {
                out.push(b'\\');
                i += 2;
            }
            Some(b'x') => {
                let hi = bytes.get(i + 2).and_then(|&c| upper_hex(c)).ok_or_else(bad)?;
                let lo = bytes.get(i + 3).and_then(|&c| upper_hex(c)).ok_or_else(bad)?;
                out.push(hi << 4 | lo);
                i += 4;
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

fn upper_hex(c: u8) -> Option<u8> {
    match c {
        b'0'..=b'9' => Some(c - b'0'),
        b'A'..=b'F' => Some(c - b'A' + 10),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    /// Category (1): a node is present.
    NodePresence,
    /// Category (2): a field with its value.
    KeyValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MetadataString {
    pub text: String,
    pub category: Category,
    /// Escaped path components.
    pub path: Vec<String>,
    /// Escaped key, for key-value strings.
    pub key: Option<String>,
    /// Escaped value, for key-value strings.
    pub value_text: Option<String>,
}

impl MetadataString {
    fn node(path: Vec<String>) -> Self {
        MetadataString {
            text: path.join("/"),
            category: Category::NodePresence,
            path,
            key: None,
            value_text: None,
        }
    }

    fn field(path: Vec<String>, key: String, value: String) -> Self {
        let text = format!("{}/@{}={}", path.join("/"), key, value);
        MetadataString {
            text,
            category: Category::KeyValue,
            path,
            key: Some(key),
            value_text: Some(value),
        }
    }

    /// `path/@key` with the value stripped; `None` for node-presence strings.
    pub fn key_path(&self) -> Option<String> {
        self.key
            .as_ref()
            .map(|k| format!("{}/@{}", self.path.join("/"), k))
    }

    pub fn value_bytes(&self) -> Option<Vec<u8>> {
        self.value_text.as_deref().and_then(|v| unescape(v).ok())
    }
}

/// Serializes a refined tree into its string collection, in depth-first
/// order. `trak` components are numbered per parent in file order.
pub fn serialize(root: &MetadataNode) -> Vec<MetadataString> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    if root.name.is_empty() {
        visit_children(root, &mut prefix, &mut out);
    } else {
        visit(root, escape(&root.name), &mut prefix, &mut out);
    }
    out
}

fn visit_children(node: &MetadataNode, prefix: &mut Vec<String>, out: &mut Vec<MetadataString>) {
    let mut trak_no = 0;
    for child in &node.children {
        let component = if child.name == b"trak" {
            trak_no += 1;
            format!("trak{trak_no}")
        } else {
            escape(&child.name)
        };
        visit(child, component, prefix, out);
    }
}

fn visit(
    node: &MetadataNode,
    component: String,
    prefix: &mut Vec<String>,
    out: &mut Vec<MetadataString>,
) {
    prefix.push(component);
    out.push(MetadataString::node(prefix.clone()));
    for field in &node.fields {
        out.push(MetadataString::field(
            prefix.clone(),
            escape(&field.key),
            escape(&field.value.render()),
        ));
    }
    visit_children(node, prefix, out);
    prefix.pop();
}

/// Parses one canonical string back into its parts.
pub fn parse_string(text: &str) -> Result<MetadataString> {
    let malformed = |reason| Error::MalformedMetadataString {
        text: text.to_string(),
        reason,
    };
    if text.is_empty() {
        return Err(malformed("empty string"));
    }
    if !text.bytes().all(|b| (0x20..=0x7E).contains(&b)) {
        return Err(malformed("non-printable character"));
    }

    let (path_text, field) = match text.find('@') {
        None => (text, None),
        Some(at) => {
            if at == 0 || text.as_bytes()[at - 1] != b'/' {
                return Err(malformed("'@' must follow a '/'"));
            }
            let rest = &text[at + 1..];
            let eq = rest.find('=').ok_or_else(|| malformed("missing '='"))?;
            let (key, value) = (&rest[..eq], &rest[eq + 1..]);
            if key.is_empty() {
                return Err(malformed("empty key"));
            }
            if value.contains(['=', '/']) {
                return Err(malformed("unescaped separator in value"));
            }
            (&text[..at - 1], Some((key, value)))
        }
    };

    let path: Vec<String> = path_text.split('/').map(str::to_string).collect();
    if path.iter().any(String::is_empty) {
        return Err(malformed("empty path component"));
    }
    let check = |part: &str| unescape(part).map(|_| ()).map_err(|_| malformed("bad escape"));
    for part in &path {
        check(part)?;
    }

    Ok(match field {
        None => MetadataString::node(path),
        Some((key, value)) => {
            check(key)?;
            check(value)?;
            MetadataString::field(path, key.to_string(), value.to_string())
        }
    })
}
