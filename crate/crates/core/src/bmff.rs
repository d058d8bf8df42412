//! ISO base media file format box tree parsing.
//!
//! Every box starts with a 32-bit big-endian size followed by a four byte
//! name. A size of 1 means a 64-bit size follows the name, a size of 0 means
//! the box runs to the end of its enclosing scope. The parser works on a
//! borrowed buffer and never allocates based on declared sizes.

use std::fmt::{self, Write as _};
use std::ops::Range;

use crate::codec::escape;
use crate::error::{Error, Result};

/// Nesting deeper than this is treated as a leaf.
pub const MAX_DEPTH: usize = 64;

/// Names accepted as the first box of a file.
pub const TOP_LEVEL_NAMES: &[&[u8; 4]] = &[
    b"ftyp", b"styp", b"moov", b"mdat", b"free", b"skip", b"wide", b"pnot", b"uuid", b"moof",
    b"sidx", b"meta", b"pdin", b"junk",
];

/// Boxes whose payload is a sequence of child boxes.
pub const CONTAINER_NAMES: &[&[u8; 4]] = &[
    b"moov", b"trak", b"mdia", b"minf", b"stbl", b"dinf", b"edts", b"udta", b"mvex", b"moof",
    b"traf", b"ilst", b"dref",
];

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FourCC(pub [u8; 4]);

impl FourCC {
    pub const fn new(bytes: &[u8; 4]) -> Self {
        FourCC(*bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 4] {
        &self.0
    }

    /// Plausible box names are printable ASCII, plus 0xA9 for QuickTime user data keys.
    pub fn is_plausible(&self) -> bool {
        self.0.iter().all(|&b| (0x20..=0x7E).contains(&b) || b == 0xA9)
    }
}

impl PartialEq<&[u8; 4]> for FourCC {
    fn eq(&self, other: &&[u8; 4]) -> bool {
        &self.0 == *other
    }
}

impl fmt::Display for FourCC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&escape(&self.0))
    }
}

impl fmt::Debug for FourCC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FourCC({self})")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeEncoding {
    /// 32-bit size field.
    Compact,
    /// Size field 1 followed by a 64-bit size.
    Extended,
    /// Size field 0: box extends to the end of its enclosing scope.
    ToEnd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxHeader {
    /// Whole box size in bytes including the header. For [`SizeEncoding::ToEnd`]
    /// this is already resolved against the enclosing scope.
    pub size: u64,
    pub name: FourCC,
    pub header_len: usize,
    pub encoding: SizeEncoding,
}

/// Reads the box header at `offset`. `bytes` is the enclosing scope: a size
/// field of 0 resolves to `bytes.len() - offset`.
pub fn parse_header(bytes: &[u8], offset: usize) -> Result<BoxHeader> {
    let available = bytes.len().saturating_sub(offset);
    if available < 8 {
        return Err(Error::TruncatedHeader {
            offset,
            needed: 8,
            available,
        });
    }
    let at = &bytes[offset..];
    let size32 = u32::from_be_bytes([at[0], at[1], at[2], at[3]]);
    let name = FourCC([at[4], at[5], at[6], at[7]]);
    let (size, header_len, encoding) = match size32 {
        0 => (available as u64, 8, SizeEncoding::ToEnd),
        1 => {
            if available < 16 {
                return Err(Error::TruncatedHeader {
                    offset,
                    needed: 16,
                    available,
                });
            }
            let mut b = [0u8; 8];
            b.copy_from_slice(&at[8..16]);
            (u64::from_be_bytes(b), 16, SizeEncoding::Extended)
        }
        n => (u64::from(n), 8, SizeEncoding::Compact),
    };
    if size < header_len as u64 {
        return Err(Error::InvalidBoxSize { offset, size });
    }
    Ok(BoxHeader {
        size,
        name,
        header_len,
        encoding,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxKind {
    Container,
    Leaf,
    /// `meta` carrying a 4-byte version/flags field before its children.
    MetaVariant,
}

/// Decides how a box is traversed from its name and the names of its ancestors.
pub fn is_container(name: FourCC, parent_path: &[FourCC]) -> BoxKind {
    if name == b"meta" {
        return match parent_path.last() {
            Some(p) if *p == b"udta" || *p == b"trak" => BoxKind::MetaVariant,
            _ => BoxKind::Container,
        };
    }
    if CONTAINER_NAMES.iter().any(|c| name == *c) {
        BoxKind::Container
    } else {
        BoxKind::Leaf
    }
}

#[derive(Clone, Debug)]
pub struct BoxNode<'a> {
    pub offset: usize,
    pub header: BoxHeader,
    /// Bytes actually covered by this box; smaller than `header.size` when clamped.
    pub len: usize,
    /// Names of the ancestors, outermost first.
    pub path: Vec<FourCC>,
    pub kind: BoxKind,
    /// Bytes between the header and the first child that are not boxes.
    pub preamble: usize,
    /// Trailing bytes inside a container that could not be parsed as boxes.
    pub padding: usize,
    pub children: Vec<BoxNode<'a>>,
    pub payload: Option<&'a [u8]>,
}

impl<'a> BoxNode<'a> {
    pub fn name(&self) -> FourCC {
        self.header.name
    }

    pub fn is_leaf(&self) -> bool {
        self.payload.is_some()
    }

    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    pub fn span(&self) -> Range<usize> {
        self.offset..self.end()
    }

    /// Path of this node including its own name.
    pub fn full_path(&self) -> Vec<FourCC> {
        let mut p = self.path.clone();
        p.push(self.name());
        p
    }

    pub fn child(&self, name: &[u8; 4]) -> Option<&BoxNode<'a>> {
        self.children.iter().find(|c| c.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WarningKind {
    TruncatedBox,
    UnparsedBytes,
    DepthLimit,
    MetaLayoutFallback,
    TrailingGarbage,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseWarning {
    pub offset: usize,
    pub kind: WarningKind,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct ParseReport<'a> {
    pub tree: Vec<BoxNode<'a>>,
    pub warnings: Vec<ParseWarning>,
    /// Top-level byte ranges not covered by any box.
    pub unclaimed: Vec<Range<usize>>,
    pub input_len: usize,
}

impl ParseReport<'_> {
    /// Depth-first iterator over every node.
    pub fn walk(&self) -> impl Iterator<Item = &BoxNode<'_>> {
        let mut stack: Vec<&BoxNode<'_>> = self.tree.iter().rev().collect();
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }
}

pub fn parse_tree(bytes: &[u8]) -> Result<ParseReport<'_>> {
    if bytes.is_empty() {
        return Err(Error::NotIsoBmff("empty input".into()));
    }
    let first = parse_header(bytes, 0)?;
    if !TOP_LEVEL_NAMES.iter().any(|n| first.name == *n) {
        return Err(Error::NotIsoBmff(format!(
            "unexpected first box {:?}",
            first.name.to_string()
        )));
    }

    let mut parser = Parser {
        bytes,
        warnings: Vec::new(),
    };
    let (tree, unparsed) = parser.parse_scope(0, bytes.len(), &[], 0);
    let mut unclaimed = Vec::new();
    if unparsed > 0 {
        unclaimed.push(bytes.len() - unparsed..bytes.len());
    }
    Ok(ParseReport {
        tree,
        warnings: parser.warnings,
        unclaimed,
        input_len: bytes.len(),
    })
}

struct Parser<'a> {
    bytes: &'a [u8],
    warnings: Vec<ParseWarning>,
}

impl<'a> Parser<'a> {
    fn warn(&mut self, offset: usize, kind: WarningKind, message: String) {
        self.warnings.push(ParseWarning {
            offset,
            kind,
            message,
        });
    }

    /// Parses boxes in `start..end`. Returns the nodes and the number of
    /// trailing bytes that could not be parsed.
    fn parse_scope(
        &mut self,
        start: usize,
        end: usize,
        path: &[FourCC],
        depth: usize,
    ) -> (Vec<BoxNode<'a>>, usize) {
        let scope = &self.bytes[..end];
        let mut nodes = Vec::new();
        let mut pos = start;
        while pos < end {
            let header = match parse_header(scope, pos) {
                Ok(h) => h,
                Err(e) => {
                    self.warn(pos, WarningKind::UnparsedBytes, e.to_string());
                    return (nodes, end - pos);
                }
            };
            if depth == 0 && !nodes.is_empty() && !header.name.is_plausible() {
                self.warn(
                    pos,
                    WarningKind::TrailingGarbage,
                    format!("{} trailing bytes after the last box", end - pos),
                );
                return (nodes, end - pos);
            }
            let remaining = (end - pos) as u64;
            let len = if header.size > remaining {
                self.warn(
                    pos,
                    WarningKind::TruncatedBox,
                    format!(
                        "box {} declares {} bytes but only {} remain",
                        header.name, header.size, remaining
                    ),
                );
                remaining as usize
            } else {
                header.size as usize
            };
            nodes.push(self.parse_box(pos, header, len, path, depth));
            pos += len;
        }
        (nodes, 0)
    }

    fn parse_box(
        &mut self,
        offset: usize,
        header: BoxHeader,
        len: usize,
        path: &[FourCC],
        depth: usize,
    ) -> BoxNode<'a> {
        let mut kind = is_container(header.name, path);
        if kind != BoxKind::Leaf && depth >= MAX_DEPTH {
            self.warn(
                offset,
                WarningKind::DepthLimit,
                format!("nesting deeper than {MAX_DEPTH}; {} kept as leaf", header.name),
            );
            kind = BoxKind::Leaf;
        }
        let body_start = offset + header.header_len;
        let end = offset + len;
        let mut node = BoxNode {
            offset,
            header,
            len,
            path: path.to_vec(),
            kind,
            preamble: 0,
            padding: 0,
            children: Vec::new(),
            payload: None,
        };
        if kind == BoxKind::Leaf {
            node.payload = Some(&self.bytes[body_start..end]);
            return node;
        }

        let body_len = end - body_start;
        let preamble = match kind {
            BoxKind::MetaVariant => self.choose_meta_preamble(offset, body_start, end, 4, 0),
            _ if header.name == b"meta" => {
                self.choose_meta_preamble(offset, body_start, end, 0, 4)
            }
            // dref carries version/flags and an entry count before its entries
            _ if header.name == b"dref" => 8,
            _ => 0,
        }
        .min(body_len);

        let child_path = node.full_path();
        let (children, padding) =
            self.parse_scope(body_start + preamble, end, &child_path, depth + 1);
        node.preamble = preamble;
        node.padding = padding;
        node.children = children;
        node
    }

    fn choose_meta_preamble(
        &mut self,
        offset: usize,
        body_start: usize,
        end: usize,
        preferred: usize,
        alternate: usize,
    ) -> usize {
        if self.first_child_valid(body_start + preferred, end) {
            return preferred;
        }
        if self.first_child_valid(body_start + alternate, end) {
            self.warn(
                offset,
                WarningKind::MetaLayoutFallback,
                format!("meta children found after {alternate} preamble bytes, not {preferred}"),
            );
            return alternate;
        }
        preferred
    }

    fn first_child_valid(&self, start: usize, end: usize) -> bool {
        if start > end {
            return false;
        }
        if start == end {
            return true;
        }
        match parse_header(&self.bytes[..end], start) {
            Ok(h) => h.size <= (end - start) as u64 && h.name.is_plausible(),
            Err(_) => false,
        }
    }
}

/// Indented listing of the box tree with offsets and sizes.
pub fn dump_tree(report: &ParseReport<'_>) -> String {
    fn visit(out: &mut String, node: &BoxNode<'_>, depth: usize) {
        let _ = write!(
            out,
            "{:indent$}{} offset={} size={}",
            "",
            node.name(),
            node.offset,
            node.len,
            indent = depth * 2
        );
        if node.len as u64 != node.header.size {
            let _ = write!(out, " declared={}", node.header.size);
        }
        match node.header.encoding {
            SizeEncoding::Compact => {}
            SizeEncoding::Extended => out.push_str(" (64-bit size)"),
            SizeEncoding::ToEnd => out.push_str(" (to end)"),
        }
        if node.kind == BoxKind::MetaVariant || node.preamble > 0 {
            let _ = write!(out, " preamble={}", node.preamble);
        }
        out.push('\n');
        for child in &node.children {
            visit(out, child, depth + 1);
        }
    }

    let mut out = String::new();
    for root in &report.tree {
        visit(&mut out, root, 0);
    }
    for range in &report.unclaimed {
        let _ = writeln!(out, "<unclaimed> offset={} size={}", range.start, range.len());
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning @{}: {}", w.offset, w.message);
    }
    out
}
