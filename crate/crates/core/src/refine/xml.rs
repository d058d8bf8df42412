//! Flattening of embedded XML (XMP packets) into key-value pairs.

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{merge_fields, Field, FieldValue};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("XML not well-formed: {0}")]
pub struct XmlNotWellFormed(pub String);

const BOM: &[u8] = b"\xEF\xBB\xBF";

/// True when the first non-whitespace byte is `<`.
pub fn looks_like_xml(payload: &[u8]) -> bool {
    let p = payload.strip_prefix(BOM).unwrap_or(payload);
    p.iter()
        .find(|b| !b.is_ascii_whitespace())
        .is_some_and(|&b| b == b'<')
}

/// Flattens an XML document into `(local name, text)` pairs.
///
/// Elements contribute their trimmed text content, attributes their value;
/// namespace prefixes and declarations are dropped. A repeated key keeps
/// the value seen last.
pub fn flatten_xml(payload: &[u8]) -> Result<Vec<Field>, XmlNotWellFormed> {
    let bad = |m: String| XmlNotWellFormed(m);
    let p = payload.strip_prefix(BOM).unwrap_or(payload);
    let end = p
        .iter()
        .rposition(|&b| b != 0 && !b.is_ascii_whitespace())
        .map_or(0, |i| i + 1);
    let text = std::str::from_utf8(&p[..end]).map_err(|e| bad(e.to_string()))?;
    if !looks_like_xml(text.as_bytes()) {
        return Err(bad("no markup".into()));
    }

    let mut reader = Reader::from_str(text);
    let mut stack: Vec<(Vec<u8>, String)> = Vec::new();
    let mut pairs = Vec::new();
    let mut saw_element = false;
    loop {
        match reader.read_event().map_err(|e| bad(e.to_string()))? {
            Event::Start(e) => {
                saw_element = true;
                attributes(&e, &mut pairs).map_err(bad)?;
                stack.push((e.local_name().as_ref().to_vec(), String::new()));
            }
            Event::Empty(e) => {
                saw_element = true;
                attributes(&e, &mut pairs).map_err(bad)?;
            }
            Event::Text(t) => {
                if let Some((_, buf)) = stack.last_mut() {
                    buf.push_str(&t.unescape().map_err(|e| bad(e.to_string()))?);
                }
            }
            Event::CData(c) => {
                if let Some((_, buf)) = stack.last_mut() {
                    buf.push_str(&String::from_utf8_lossy(&c.into_inner()));
                }
            }
            Event::End(_) => {
                let (name, buf) = stack.pop().ok_or_else(|| bad("unbalanced end tag".into()))?;
                let value = buf.trim();
                if !value.is_empty() {
                    pairs.push(Field::new(name, FieldValue::text(value, value.as_bytes())));
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(bad(format!("{} unclosed element(s)", stack.len())));
    }
    if !saw_element {
        return Err(bad("no elements".into()));
    }

    let mut fields = Vec::new();
    merge_fields(&mut fields, pairs);
    Ok(fields)
}

fn attributes(e: &BytesStart<'_>, out: &mut Vec<Field>) -> Result<(), String> {
    for attr in e.attributes() {
        let attr = attr.map_err(|e| e.to_string())?;
        let key = attr.key;
        if key.as_ref() == b"xmlns" || key.prefix().is_some_and(|p| p.as_ref() == b"xmlns") {
            continue;
        }
        let value = attr.unescape_value().map_err(|e| e.to_string())?;
        out.push(Field::new(
            key.local_name().as_ref(),
            FieldValue::text(value.as_ref(), value.as_bytes()),
        ));
    }
    Ok(())
}
