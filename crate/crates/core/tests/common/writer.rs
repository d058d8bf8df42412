//! Byte-level writer for synthetic ISO-BMFF fixtures.

#![allow(dead_code)]

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeMode {
    Compact,
    /// `size = 1` with a 64-bit size after the name.
    Extended,
    /// `size = 0`: the box runs to the end of its scope. Only valid for the
    /// last box of a scope.
    ToEnd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Body {
    Leaf(Vec<u8>),
    Container {
        preamble: Vec<u8>,
        children: Vec<BoxSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxSpec {
    pub name: [u8; 4],
    pub size: SizeMode,
    pub body: Body,
}

pub fn leaf(name: &[u8; 4], payload: impl Into<Vec<u8>>) -> BoxSpec {
    BoxSpec {
        name: *name,
        size: SizeMode::Compact,
        body: Body::Leaf(payload.into()),
    }
}

pub fn container(name: &[u8; 4], children: Vec<BoxSpec>) -> BoxSpec {
    BoxSpec {
        name: *name,
        size: SizeMode::Compact,
        body: Body::Container {
            preamble: Vec::new(),
            children,
        },
    }
}

/// `meta` with the 4-byte version/flags field before its children.
pub fn full_meta(children: Vec<BoxSpec>) -> BoxSpec {
    BoxSpec {
        name: *b"meta",
        size: SizeMode::Compact,
        body: Body::Container {
            preamble: vec![0; 4],
            children,
        },
    }
}

impl BoxSpec {
    pub fn sized(mut self, size: SizeMode) -> Self {
        self.size = size;
        self
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        let mut body = Vec::new();
        match &self.body {
            Body::Leaf(p) => body.extend_from_slice(p),
            Body::Container { preamble, children } => {
                body.extend_from_slice(preamble);
                for c in children {
                    c.encode_into(&mut body);
                }
            }
        }
        match self.size {
            SizeMode::Compact => {
                out.extend(((body.len() + 8) as u32).to_be_bytes());
                out.extend(self.name);
            }
            SizeMode::Extended => {
                out.extend(1u32.to_be_bytes());
                out.extend(self.name);
                out.extend(((body.len() + 16) as u64).to_be_bytes());
            }
            SizeMode::ToEnd => {
                out.extend(0u32.to_be_bytes());
                out.extend(self.name);
            }
        }
        out.extend(body);
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }
}

pub fn encode_all(boxes: &[BoxSpec]) -> Vec<u8> {
    let mut out = Vec::new();
    for b in boxes {
        b.encode_into(&mut out);
    }
    out
}

// Standard box payloads.

pub fn ftyp(major: &[u8; 4], minor: u32, compatible: &[&[u8; 4]]) -> BoxSpec {
    let mut p = major.to_vec();
    p.extend(minor.to_be_bytes());
    for c in compatible {
        p.extend(*c);
    }
    leaf(b"ftyp", p)
}

const IDENTITY: [i32; 9] = [0x10000, 0, 0, 0, 0x10000, 0, 0, 0, 0x4000_0000];

pub fn mvhd(timescale: u32, duration: u32, next_track: u32) -> BoxSpec {
    let mut p = vec![0; 4];
    p.extend(3_600_000_000u32.to_be_bytes());
    p.extend(3_600_000_000u32.to_be_bytes());
    p.extend(timescale.to_be_bytes());
    p.extend(duration.to_be_bytes());
    p.extend(0x0001_0000u32.to_be_bytes());
    p.extend(0x0100u16.to_be_bytes());
    p.extend([0; 10]);
    for m in IDENTITY {
        p.extend(m.to_be_bytes());
    }
    p.extend([0; 24]);
    p.extend(next_track.to_be_bytes());
    leaf(b"mvhd", p)
}

pub fn tkhd(track_id: u32, duration: u32, width: u32, height: u32, volume: u16) -> BoxSpec {
    let mut p = vec![0, 0, 0, 3];
    p.extend(3_600_000_000u32.to_be_bytes());
    p.extend(3_600_000_000u32.to_be_bytes());
    p.extend(track_id.to_be_bytes());
    p.extend([0; 4]);
    p.extend(duration.to_be_bytes());
    p.extend([0; 8]);
    p.extend(0u16.to_be_bytes());
    p.extend(0u16.to_be_bytes());
    p.extend(volume.to_be_bytes());
    p.extend([0; 2]);
    for m in IDENTITY {
        p.extend(m.to_be_bytes());
    }
    p.extend((width << 16).to_be_bytes());
    p.extend((height << 16).to_be_bytes());
    leaf(b"tkhd", p)
}

pub fn mdhd(timescale: u32, duration: u32, language: &[u8; 3]) -> BoxSpec {
    let mut p = vec![0; 4];
    p.extend([0; 8]);
    p.extend(timescale.to_be_bytes());
    p.extend(duration.to_be_bytes());
    let packed = language
        .iter()
        .fold(0u16, |acc, &c| (acc << 5) | (c - 0x60) as u16);
    p.extend(packed.to_be_bytes());
    p.extend([0; 2]);
    leaf(b"mdhd", p)
}

pub fn hdlr(handler: &[u8; 4], name: &str) -> BoxSpec {
    let mut p = vec![0; 8];
    p.extend(handler);
    p.extend([0; 12]);
    p.extend(name.as_bytes());
    p.push(0);
    leaf(b"hdlr", p)
}

pub fn visual_stsd(format: &[u8; 4], vendor: &[u8; 4], width: u16, height: u16, compressor: &str) -> BoxSpec {
    let mut e = format.to_vec();
    e.extend([0; 6]);
    e.extend(1u16.to_be_bytes());
    e.extend([0; 4]);
    e.extend(vendor);
    e.extend([0; 8]);
    e.extend(width.to_be_bytes());
    e.extend(height.to_be_bytes());
    e.extend((72u32 << 16).to_be_bytes());
    e.extend((72u32 << 16).to_be_bytes());
    e.extend([0; 4]);
    e.extend(1u16.to_be_bytes());
    let mut name = [0u8; 32];
    let n = compressor.len().min(31);
    name[0] = n as u8;
    name[1..1 + n].copy_from_slice(&compressor.as_bytes()[..n]);
    e.extend(name);
    e.extend(24u16.to_be_bytes());
    e.extend((-1i16).to_be_bytes());
    let mut p = vec![0; 4];
    p.extend(1u32.to_be_bytes());
    p.extend(((e.len() + 4) as u32).to_be_bytes());
    p.extend(e);
    leaf(b"stsd", p)
}

pub fn audio_stsd(format: &[u8; 4], channels: u16, rate: u32) -> BoxSpec {
    let mut e = format.to_vec();
    e.extend([0; 6]);
    e.extend(1u16.to_be_bytes());
    e.extend([0; 8]);
    e.extend(channels.to_be_bytes());
    e.extend(16u16.to_be_bytes());
    e.extend([0; 4]);
    e.extend((rate << 16).to_be_bytes());
    let mut p = vec![0; 4];
    p.extend(1u32.to_be_bytes());
    p.extend(((e.len() + 4) as u32).to_be_bytes());
    p.extend(e);
    leaf(b"stsd", p)
}

/// Full box with an entry count followed by opaque entries.
pub fn table(name: &[u8; 4], entries: u32, entry_bytes: usize) -> BoxSpec {
    let mut p = vec![0; 4];
    p.extend(entries.to_be_bytes());
    p.extend((0..entries as usize * entry_bytes).map(|i| (i * 7) as u8));
    leaf(name, p)
}

/// QuickTime user data value: 16-bit length, 16-bit language, text.
pub fn bare_udta(key: &[u8; 4], language: u16, text: &str) -> BoxSpec {
    let mut p = (text.len() as u16).to_be_bytes().to_vec();
    p.extend(language.to_be_bytes());
    p.extend(text.as_bytes());
    leaf(key, p)
}

/// `ilst` item holding one UTF-8 `data` atom.
pub fn text_item(key: &[u8; 4], text: &str) -> BoxSpec {
    let mut data = 1u32.to_be_bytes().to_vec();
    data.extend([0; 4]);
    data.extend(text.as_bytes());
    leaf(key, leaf(b"data", data).encode())
}

/// `keys` box listing `mdta` key names.
pub fn keys(names: &[&str]) -> BoxSpec {
    let mut p = vec![0; 4];
    p.extend((names.len() as u32).to_be_bytes());
    for n in names {
        p.extend(((n.len() + 8) as u32).to_be_bytes());
        p.extend(b"mdta");
        p.extend(n.as_bytes());
    }
    leaf(b"keys", p)
}

/// `ilst` item addressed by its 1-based index into `keys`.
pub fn indexed_item(index: u32, text: &str) -> BoxSpec {
    let mut data = 1u32.to_be_bytes().to_vec();
    data.extend([0; 4]);
    data.extend(text.as_bytes());
    leaf(&index.to_be_bytes(), leaf(b"data", data).encode())
}

/// The XMP `uuid` box user type.
pub const XMP_UUID: [u8; 16] = [
    0xBE, 0x7A, 0xCF, 0xCB, 0x97, 0xA9, 0x42, 0xE8, 0x9C, 0x71, 0x99, 0x94, 0x91, 0xE3, 0xAF, 0xAC,
];

pub fn xmp_packet(creator_tool: &str, extra: &[(&str, &str)]) -> String {
    let mut body = String::new();
    for (k, v) in extra {
        body.push_str(&format!("    <xmpDM:{k}>{v}</xmpDM:{k}>\n"));
    }
    format!(
        "<?xpacket begin=\"\u{feff}\" id=\"W5M0MpCehiHzreSzNTczkc9d\"?>\n\
<x:xmpmeta xmlns:x=\"adobe:ns:meta/\" x:xmptk=\"Adobe XMP Core 5.6-c148\">\n\
 <rdf:RDF xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\">\n\
  <rdf:Description rdf:about=\"\" xmlns:xmp=\"http://ns.adobe.com/xap/1.0/\"\n\
    xmlns:xmpDM=\"http://ns.adobe.com/xmp/1.0/DynamicMedia/\"\n\
    xmp:CreatorTool=\"{creator_tool}\">\n{body}  </rdf:Description>\n\
 </rdf:RDF>\n</x:xmpmeta>\n<?xpacket end=\"w\"?>"
    )
}

pub fn xmp_uuid(packet: &str) -> BoxSpec {
    let mut p = XMP_UUID.to_vec();
    p.extend(packet.as_bytes());
    leaf(b"uuid", p)
}

/// Video track with the usual media hierarchy.
pub fn video_trak(
    track_id: u32,
    duration: u32,
    (width, height): (u16, u16),
    handler_name: &str,
    (format, vendor, compressor): (&[u8; 4], &[u8; 4], &str),
    extra: Vec<BoxSpec>,
) -> BoxSpec {
    let stbl = container(
        b"stbl",
        vec![
            visual_stsd(format, vendor, width, height, compressor),
            table(b"stts", 1, 8),
            table(b"stss", 2, 4),
            table(b"stsc", 1, 12),
            leaf(b"stsz", {
                let mut p = vec![0; 4];
                p.extend(0u32.to_be_bytes());
                p.extend(3u32.to_be_bytes());
                p.extend([0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 3, 0]);
                p
            }),
            table(b"stco", 1, 4),
        ],
    );
    let minf = container(
        b"minf",
        vec![
            leaf(b"vmhd", vec![0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0]),
            container(b"dinf", vec![leaf(b"dref", {
                let mut p = vec![0; 4];
                p.extend(1u32.to_be_bytes());
                p.extend(leaf(b"url ", vec![0, 0, 0, 1]).encode());
                p
            })]),
            stbl,
        ],
    );
    let mdia = container(
        b"mdia",
        vec![mdhd(30000, duration, b"und"), hdlr(b"vide", handler_name), minf],
    );
    let mut children = vec![tkhd(track_id, duration, width as u32, height as u32, 0), mdia];
    children.extend(extra);
    container(b"trak", children)
}

pub fn audio_trak(track_id: u32, duration: u32, handler_name: &str, format: &[u8; 4]) -> BoxSpec {
    let stbl = container(
        b"stbl",
        vec![audio_stsd(format, 2, 48000), table(b"stts", 1, 8), table(b"stsc", 1, 12), table(b"stco", 1, 4)],
    );
    let minf = container(b"minf", vec![leaf(b"smhd", vec![0; 8]), stbl]);
    let mdia = container(
        b"mdia",
        vec![mdhd(48000, duration, b"eng"), hdlr(b"soun", handler_name), minf],
    );
    container(b"trak", vec![tkhd(track_id, duration, 0, 0, 0x0100), mdia])
}
