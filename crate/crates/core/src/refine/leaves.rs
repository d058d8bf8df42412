//! Decoders for standard leaf boxes, following the ISO base media layouts.

use std::fmt;

use crate::bmff::FourCC;

use super::{Field, FieldValue};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct DecodeError {
    pub needed: usize,
    pub available: usize,
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "payload too short: needed {} bytes, {} available",
            self.needed, self.available
        )
    }
}

type Decoded = Result<Vec<Field>, DecodeError>;

/// Decodes a known leaf box. `None` for names without a decoder.
pub(crate) fn decode(name: FourCC, payload: &[u8]) -> Option<Decoded> {
    let decoder: fn(&mut Reader<'_>) -> Result<(), DecodeError> = match &name.0 {
        b"ftyp" | b"styp" => ftyp,
        b"mvhd" => mvhd,
        b"tkhd" => tkhd,
        b"mdhd" => mdhd,
        b"hdlr" => hdlr,
        b"vmhd" => vmhd,
        b"smhd" => smhd,
        b"stsd" => stsd,
        b"stts" | b"ctts" | b"stss" | b"stsc" | b"stco" | b"co64" => sample_table,
        b"stsz" => stsz,
        b"elst" => elst,
        b"keys" => keys,
        b"url " | b"urn " | b"alis" => data_entry,
        _ => return None,
    };
    let mut r = Reader::new(payload);
    Some(decoder(&mut r).map(|()| r.fields))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    fields: Vec<Field>,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader {
            bytes,
            pos: 0,
            fields: Vec::new(),
        }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.remaining() < n {
            return Err(DecodeError {
                needed: self.pos + n,
                available: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn rest(&mut self) -> &'a [u8] {
        let out = &self.bytes[self.pos..];
        self.pos = self.bytes.len();
        out
    }

    fn skip(&mut self, n: usize) -> Result<(), DecodeError> {
        self.take(n).map(|_| ())
    }

    fn push(&mut self, key: &str, value: FieldValue) {
        self.fields.push(Field::new(key, value));
    }

    /// Big-endian unsigned integer of `n` bytes (n <= 8).
    fn uint(&mut self, key: &str, n: usize) -> Result<u64, DecodeError> {
        let raw = self.take(n)?;
        let v = raw.iter().fold(0u64, |acc, &b| acc << 8 | b as u64);
        self.push(key, FieldValue::integer(v, raw));
        Ok(v)
    }

    fn sint(&mut self, key: &str, n: usize) -> Result<(), DecodeError> {
        let raw = self.take(n)?;
        let mut buf = [if raw[0] & 0x80 != 0 { 0xFF } else { 0 }; 8];
        buf[8 - n..].copy_from_slice(raw);
        self.push(key, FieldValue::integer(i64::from_be_bytes(buf), raw));
        Ok(())
    }

    /// Fixed-point number with `frac` fractional bits.
    fn fixed(&mut self, key: &str, n: usize, frac: u32, signed: bool) -> Result<(), DecodeError> {
        let raw = self.take(n)?;
        let unsigned = raw.iter().fold(0u64, |acc, &b| acc << 8 | b as u64);
        let v = if signed {
            let shift = 64 - 8 * n as u32;
            ((unsigned << shift) as i64 >> shift) as f64
        } else {
            unsigned as f64
        };
        self.push(key, FieldValue::decimal(v / (1u64 << frac) as f64, raw));
        Ok(())
    }

    fn fourcc(&mut self, key: &str) -> Result<(), DecodeError> {
        let raw = self.take(4)?;
        self.push(key, FieldValue::text_or_bytes(raw));
        Ok(())
    }

    /// `version` and `flags` of a full box. Returns the version.
    fn full_box(&mut self) -> Result<u8, DecodeError> {
        let version = self.uint("version", 1)? as u8;
        self.uint("flags", 3)?;
        Ok(version)
    }

    /// Field sized by the version: 8 bytes for version 1, else 4.
    fn versioned(&mut self, key: &str, version: u8) -> Result<(), DecodeError> {
        self.uint(key, if version == 1 { 8 } else { 4 }).map(|_| ())
    }

    fn matrix(&mut self) -> Result<(), DecodeError> {
        let raw = self.take(36)?;
        let text = raw
            .chunks(4)
            .map(|c| i32::from_be_bytes(c.try_into().unwrap()).to_string())
            .collect::<Vec<_>>()
            .join(" ");
        self.push("matrix", FieldValue::text(text, raw));
        Ok(())
    }
}

fn ftyp(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    r.fourcc("major_brand")?;
    r.uint("minor_version", 4)?;
    let rest = r.rest();
    let whole = rest.len() - rest.len() % 4;
    r.push("compatible_brands", FieldValue::text_or_bytes(&rest[..whole]));
    Ok(())
}

fn mvhd(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    let v = r.full_box()?;
    r.versioned("creation_time", v)?;
    r.versioned("modification_time", v)?;
    r.uint("timescale", 4)?;
    r.versioned("duration", v)?;
    r.fixed("rate", 4, 16, true)?;
    r.fixed("volume", 2, 8, true)?;
    r.skip(10)?;
    r.matrix()?;
    r.skip(24)?;
    r.uint("next_track_ID", 4)?;
    Ok(())
}

fn tkhd(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    let v = r.full_box()?;
    r.versioned("creation_time", v)?;
    r.versioned("modification_time", v)?;
    r.uint("track_ID", 4)?;
    r.skip(4)?;
    r.versioned("duration", v)?;
    r.skip(8)?;
    r.sint("layer", 2)?;
    r.sint("alternate_group", 2)?;
    r.fixed("volume", 2, 8, true)?;
    r.skip(2)?;
    r.matrix()?;
    r.fixed("width", 4, 16, false)?;
    r.fixed("height", 4, 16, false)?;
    Ok(())
}

fn mdhd(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    let v = r.full_box()?;
    r.versioned("creation_time", v)?;
    r.versioned("modification_time", v)?;
    r.uint("timescale", 4)?;
    r.versioned("duration", v)?;
    let raw = r.take(2)?;
    let packed = u16::from_be_bytes([raw[0], raw[1]]);
    // Three 5-bit letters offset from 0x60; anything else stays numeric.
    let letters: Vec<u8> = [10, 5, 0]
        .iter()
        .map(|s| ((packed >> s) & 0x1F) as u8 + 0x60)
        .collect();
    if packed != 0 && letters.iter().all(u8::is_ascii_lowercase) {
        r.push("language", FieldValue::text(String::from_utf8(letters).unwrap(), raw));
    } else {
        r.push("language", FieldValue::integer(packed, raw));
    }
    Ok(())
}

fn hdlr(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    r.full_box()?;
    r.fourcc("pre_defined")?;
    r.fourcc("handler_type")?;
    r.skip(12)?;
    let rest = r.rest();
    // ISO writes a NUL-terminated string, QuickTime a Pascal string.
    let name = match rest.first() {
        Some(&n) if n as usize == rest.len() - 1 && n != 0 => &rest[1..],
        _ => rest.split(|&b| b == 0).next().unwrap_or_default(),
    };
    r.push("name", FieldValue::text_or_bytes(name));
    Ok(())
}

fn vmhd(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    r.full_box()?;
    r.uint("graphicsmode", 2)?;
    let raw = r.take(6)?;
    let text = raw
        .chunks(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]).to_string())
        .collect::<Vec<_>>()
        .join(" ");
    r.push("opcolor", FieldValue::text(text, raw));
    Ok(())
}

fn smhd(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    r.full_box()?;
    r.fixed("balance", 2, 8, true)?;
    Ok(())
}

/// Header of the first sample entry, plus `btrt` when present.
fn stsd(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    r.full_box()?;
    let count = r.uint("entry_count", 4)?;
    if count == 0 || r.remaining() == 0 {
        return Ok(());
    }
    let size = u32::from_be_bytes(r.take(4)?.try_into().unwrap()) as usize;
    let entry_end = (r.pos - 4 + size.max(8)).min(r.bytes.len());
    let format = r.take(4)?;
    r.push("format", FieldValue::text_or_bytes(format));
    r.skip(6)?;
    r.uint("data_reference_index", 2)?;

    let visual = matches!(
        format,
        b"avc1" | b"avc3" | b"hvc1" | b"hev1" | b"mp4v" | b"jpeg" | b"mjpa" | b"mjpb" | b"apcn"
            | b"apch" | b"apcs" | b"apco" | b"ap4h" | b"vp09" | b"av01" | b"s263" | b"dvh1"
            | b"dvhe"
    );
    let audio = matches!(
        format,
        b"mp4a" | b"ac-3" | b"ec-3" | b"alac" | b"samr" | b"sawb" | b"twos" | b"sowt" | b"lpcm"
            | b"Opus" | b"fLaC" | b"ipcm"
    );
    if visual {
        r.skip(2)?;
        r.skip(2)?;
        r.fourcc("vendor")?;
        r.uint("temporal_quality", 4)?;
        r.uint("spatial_quality", 4)?;
        r.uint("width", 2)?;
        r.uint("height", 2)?;
        r.fixed("horizresolution", 4, 16, false)?;
        r.fixed("vertresolution", 4, 16, false)?;
        r.skip(4)?;
        r.uint("frame_count", 2)?;
        let name = r.take(32)?;
        let len = (name[0] as usize).min(31);
        r.push("compressorname", FieldValue::text_or_bytes(&name[1..1 + len]));
        r.uint("depth", 2)?;
        r.skip(2)?;
    } else if audio {
        r.uint("sound_version", 2)?;
        r.skip(2)?;
        r.fourcc("vendor")?;
        r.uint("channelcount", 2)?;
        r.uint("samplesize", 2)?;
        r.skip(4)?;
        r.fixed("samplerate", 4, 16, false)?;
    } else {
        return Ok(());
    }
    extension_boxes(r, entry_end);
    Ok(())
}

/// Scans the boxes trailing a sample entry for bitrate information.
fn extension_boxes(r: &mut Reader<'_>, end: usize) {
    while r.pos + 8 <= end {
        let size = u32::from_be_bytes(r.bytes[r.pos..r.pos + 4].try_into().unwrap()) as usize;
        if size < 8 || r.pos + size > end {
            return;
        }
        let name = &r.bytes[r.pos + 4..r.pos + 8];
        let body_start = r.pos + 8;
        if name == b"btrt" && size >= 20 {
            let mut sub = Reader::new(&r.bytes[body_start..body_start + 12]);
            let ok = sub.uint("bufferSizeDB", 4).is_ok()
                && sub.uint("maxBitrate", 4).is_ok()
                && sub.uint("avgBitrate", 4).is_ok();
            if ok {
                r.fields.append(&mut sub.fields);
            }
        }
        r.pos += size;
    }
}

fn sample_table(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    r.full_box()?;
    r.uint("entry_count", 4)?;
    let rest = r.rest();
    r.push("entries", FieldValue::bytes(rest));
    Ok(())
}

fn stsz(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    r.full_box()?;
    r.uint("sample_size", 4)?;
    r.uint("sample_count", 4)?;
    let rest = r.rest();
    r.push("entries", FieldValue::bytes(rest));
    Ok(())
}

fn elst(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    let v = r.full_box()?;
    let count = r.uint("entry_count", 4)?;
    let width = if v == 1 { 8 } else { 4 };
    let start = r.pos;
    let mut entries = Vec::new();
    for _ in 0..count.min((r.remaining() / (2 * width + 4)) as u64) {
        let duration = r.take(width)?;
        let time = r.take(width)?;
        let rate = r.take(4)?;
        let duration = duration.iter().fold(0u64, |a, &b| a << 8 | b as u64);
        let time = if width == 8 {
            i64::from_be_bytes(time.try_into().unwrap())
        } else {
            i32::from_be_bytes(time.try_into().unwrap()) as i64
        };
        let rate = i32::from_be_bytes(rate.try_into().unwrap()) as f64 / 65536.0;
        entries.push(format!("{duration},{time},{rate:?}"));
    }
    let raw = &r.bytes[start..r.pos];
    r.push("entries", FieldValue::text(entries.join(" "), raw));
    Ok(())
}

/// Key names of a `keys` box, stored under their 1-based index.
fn keys(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    r.full_box()?;
    let count = r.uint("entry_count", 4)?;
    for index in 1..=count {
        if r.remaining() < 8 {
            break;
        }
        let size = u32::from_be_bytes(r.take(4)?.try_into().unwrap()) as usize;
        if size < 8 || size - 4 > r.remaining() {
            break;
        }
        r.skip(4)?;
        let name = r.take(size - 8)?;
        r.push(&index.to_string(), FieldValue::text_or_bytes(name));
    }
    Ok(())
}

fn data_entry(r: &mut Reader<'_>) -> Result<(), DecodeError> {
    r.full_box()?;
    let rest = r.rest();
    if !rest.is_empty() {
        let text = rest.split(|&b| b == 0).next().unwrap_or_default();
        r.push("location", FieldValue::text_or_bytes(text));
    }
    Ok(())
}
