//! `ilst` item lists and bare QuickTime user data keys.

use crate::bmff::{BoxNode, FourCC};

use super::{merge_fields, path_text, Field, FieldValue, RefineWarning};

/// Where the item list was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IlstPlacement {
    /// `udta/meta/ilst` or `trak/meta/ilst`: items wrap `data` atoms.
    Standard,
    /// Items placed straight into `udta`, each value behind a 2-byte length
    /// and a 2-byte language code.
    DirectInUdta,
    /// `moov/meta/ilst`: item names may be 1-based indices into `keys`.
    InMeta,
}

impl IlstPlacement {
    /// Placement of an `ilst` box given its ancestors.
    pub fn for_path(parent_path: &[FourCC]) -> Self {
        match parent_path {
            [.., grand, meta] if *meta == b"meta" && (*grand == b"udta" || *grand == b"trak") => {
                IlstPlacement::Standard
            }
            [.., meta] if *meta == b"meta" => IlstPlacement::InMeta,
            _ => IlstPlacement::Standard,
        }
    }
}

const KNOWN_KEYS: &[&[u8; 4]] = &[
    b"----", b"aART", b"akID", b"apID", b"atID", b"catg", b"cmID", b"cnID", b"covr", b"cpil",
    b"cprt", b"desc", b"disk", b"egid", b"geID", b"gnre", b"hdvd", b"keyw", b"ldes", b"pcst",
    b"pgap", b"plID", b"purd", b"purl", b"rtng", b"sfID", b"soaa", b"soal", b"soar", b"soco",
    b"sonm", b"sosn", b"stik", b"tmpo", b"trkn", b"tven", b"tves", b"tvnn", b"tvsh", b"tvsn",
];

pub(crate) fn is_bare_udta_key(node: &BoxNode<'_>) -> bool {
    node.is_leaf() && node.name().0[0] == 0xA9
}

fn is_item_key(name: FourCC) -> bool {
    name.0[0] == 0xA9 || KNOWN_KEYS.iter().any(|k| name == *k)
}

/// Extracts key-value items from an `ilst` box, or from the bare `©` keys
/// of a `udta` box when `placement` is [`IlstPlacement::DirectInUdta`].
///
/// Malformed entries are skipped and reported.
pub fn parse_ilst(
    node: &BoxNode<'_>,
    placement: IlstPlacement,
) -> (Vec<Field>, Vec<RefineWarning>) {
    let mut fields = Vec::new();
    let mut warnings = Vec::new();
    for child in &node.children {
        let name = child.name();
        let accepted = match placement {
            IlstPlacement::DirectInUdta => is_bare_udta_key(child),
            IlstPlacement::Standard => is_item_key(name),
            IlstPlacement::InMeta => true,
        };
        if !accepted {
            continue;
        }
        let payload = child.payload.unwrap_or_default();
        let decoded = if placement == IlstPlacement::DirectInUdta && !has_data_atom(payload) {
            bare_udta_value(name, payload)
        } else {
            data_atoms(name, payload)
        };
        match decoded {
            Ok(items) => merge_fields(&mut fields, items),
            Err(reason) => warnings.push(RefineWarning {
                path: path_text(&child.full_path()),
                message: format!("malformed ilst entry: {reason}"),
            }),
        }
    }
    (fields, warnings)
}

fn has_data_atom(payload: &[u8]) -> bool {
    payload.len() >= 16 && &payload[4..8] == b"data"
}

fn bare_udta_value(name: FourCC, payload: &[u8]) -> Result<Vec<Field>, &'static str> {
    if payload.len() < 4 {
        return Err("shorter than its length/language preamble");
    }
    Ok(vec![Field::new(name.0, FieldValue::bytes(payload))])
}

/// Decodes the `data` atoms (and `mean`/`name` for freeform `----` items)
/// inside one item.
fn data_atoms(name: FourCC, payload: &[u8]) -> Result<Vec<Field>, &'static str> {
    let mut key = name.0.to_vec();
    let mut values = Vec::new();
    let mut pos = 0;
    while pos + 8 <= payload.len() {
        let size = u32::from_be_bytes(payload[pos..pos + 4].try_into().unwrap()) as usize;
        let atom = &payload[pos + 4..pos + 8];
        if size < 8 || pos + size > payload.len() {
            return Err("sub-atom size out of range");
        }
        let body = &payload[pos + 8..pos + size];
        match atom {
            b"data" => {
                if body.len() < 8 {
                    return Err("data atom shorter than its type/locale preamble");
                }
                let type_code = u32::from_be_bytes(body[0..4].try_into().unwrap()) & 0x00FF_FFFF;
                values.push(typed_value(type_code, &body[8..]));
            }
            b"name" if name == b"----" && body.len() >= 4 => {
                key = format!("----:{}", String::from_utf8_lossy(&body[4..])).into_bytes();
            }
            _ => {}
        }
        pos += size;
    }
    if values.is_empty() {
        return Err("no data atom");
    }
    Ok(values.into_iter().map(|v| Field::new(&key, v)).collect())
}

/// Well-known `data` type codes.
fn typed_value(type_code: u32, bytes: &[u8]) -> FieldValue {
    match (type_code, bytes.len()) {
        (1, _) => FieldValue::text_or_bytes(bytes),
        (21, 1 | 2 | 4 | 8) => {
            let mut buf = [if bytes[0] & 0x80 != 0 { 0xFF } else { 0 }; 8];
            buf[8 - bytes.len()..].copy_from_slice(bytes);
            FieldValue::integer(i64::from_be_bytes(buf), bytes)
        }
        (22, 1 | 2 | 4 | 8) => {
            let mut buf = [0u8; 8];
            buf[8 - bytes.len()..].copy_from_slice(bytes);
            FieldValue::integer(u64::from_be_bytes(buf), bytes)
        }
        (23, 4) => FieldValue::decimal(
            f32::from_be_bytes(bytes.try_into().unwrap()) as f64,
            bytes,
        ),
        (24, 8) => FieldValue::decimal(f64::from_be_bytes(bytes.try_into().unwrap()), bytes),
        _ => FieldValue::bytes(bytes),
    }
}
