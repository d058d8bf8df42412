//! Random box trees and the structure comparison used by round-trip checks.

#![allow(dead_code)]

use rand::{Rng, RngExt};
use vidmeta::bmff::{BoxNode, SizeEncoding};

use super::writer::{container, full_meta, leaf, Body, BoxSpec, SizeMode};

const CONTAINERS: &[&[u8; 4]] = &[
    b"moov", b"trak", b"mdia", b"minf", b"stbl", b"dinf", b"edts", b"udta", b"mvex", b"moof",
    b"traf", b"ilst",
];
const LEAVES: &[&[u8; 4]] = &[
    b"free", b"mvhd", b"tkhd", b"abcd", b"zzzz", b"\xA9nam", b"\xA9mod", b"smhd", b"xyz1",
];

/// Comparable shape of a box: name, size encoding and either payload or children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Leaf([u8; 4], SizeMode, Vec<u8>),
    Node([u8; 4], SizeMode, Vec<Shape>),
}

pub fn spec_shape(b: &BoxSpec) -> Shape {
    match &b.body {
        Body::Leaf(p) => Shape::Leaf(b.name, b.size, p.clone()),
        Body::Container { children, .. } => {
            Shape::Node(b.name, b.size, children.iter().map(spec_shape).collect())
        }
    }
}

pub fn parsed_shape(n: &BoxNode<'_>) -> Shape {
    let mode = match n.header.encoding {
        SizeEncoding::Compact => SizeMode::Compact,
        SizeEncoding::Extended => SizeMode::Extended,
        SizeEncoding::ToEnd => SizeMode::ToEnd,
    };
    match n.payload {
        Some(p) => Shape::Leaf(n.name().0, mode, p.to_vec()),
        None => Shape::Node(n.name().0, mode, n.children.iter().map(parsed_shape).collect()),
    }
}

fn random_box<R: Rng>(rng: &mut R, parent: Option<&[u8; 4]>, depth: usize, max_depth: usize) -> BoxSpec {
    if depth < max_depth && rng.random_bool(0.45) {
        let n = rng.random_range(0..4);
        if parent == Some(b"udta") && rng.random_bool(0.4) {
            return full_meta(random_scope(rng, Some(b"meta"), depth + 1, max_depth, n));
        }
        let name = CONTAINERS[rng.random_range(0..CONTAINERS.len())];
        return container(name, random_scope(rng, Some(name), depth + 1, max_depth, n));
    }
    let name = LEAVES[rng.random_range(0..LEAVES.len())];
    let len = rng.random_range(0..24);
    leaf(name, (0..len).map(|_| rng.random::<u8>()).collect::<Vec<u8>>())
}

fn random_scope<R: Rng>(
    rng: &mut R,
    parent: Option<&[u8; 4]>,
    depth: usize,
    max_depth: usize,
    n: usize,
) -> Vec<BoxSpec> {
    let mut boxes: Vec<BoxSpec> = (0..n)
        .map(|_| {
            let b = random_box(rng, parent, depth, max_depth);
            if rng.random_bool(0.2) {
                b.sized(SizeMode::Extended)
            } else {
                b
            }
        })
        .collect();
    if let Some(last) = boxes.last_mut() {
        if rng.random_bool(0.25) {
            last.size = SizeMode::ToEnd;
        }
    }
    boxes
}

/// A file: `ftyp` first, then up to four random top-level boxes, nesting
/// at most `max_depth` levels below the top.
pub fn random_file<R: Rng>(rng: &mut R, max_depth: usize) -> Vec<BoxSpec> {
    let mut boxes = vec![leaf(b"ftyp", b"isom\0\0\0\0isom".to_vec())];
    let n = rng.random_range(0..5);
    boxes.extend(random_scope(rng, None, 1, max_depth, n));
    if boxes.len() == 1 && rng.random_bool(0.5) {
        boxes[0].size = SizeMode::ToEnd;
    }
    boxes
}
