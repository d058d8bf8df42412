//! Deterministic generator of the bundled 30-file corpus.
//!
//! Three brands with two device models each and five files per model:
//! two native captures, one ffmpeg re-mux, one Premiere export and one
//! YouTube download (edited before upload for the second model).

#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::writer::*;

pub struct SyntheticFile {
    pub path: String,
    pub brand: &'static str,
    pub model_id: &'static str,
    pub tool: &'static str,
    pub social: &'static str,
    pub edited: bool,
    pub bytes: Vec<u8>,
}

struct Device {
    brand: &'static str,
    model_id: &'static str,
    model_name: &'static str,
    size: (u16, u16),
}

const DEVICES: &[Device] = &[
    Device { brand: "Apple", model_id: "A01", model_name: "iPhone 8", size: (1920, 1080) },
    Device { brand: "Apple", model_id: "A02", model_name: "iPhone X", size: (3840, 2160) },
    Device { brand: "Huawei", model_id: "H01", model_name: "P20", size: (1920, 1080) },
    Device { brand: "Huawei", model_id: "H02", model_name: "Mate 10", size: (1280, 720) },
    Device { brand: "Samsung", model_id: "S01", model_name: "SM-G930F", size: (1920, 1080) },
    Device { brand: "Samsung", model_id: "S02", model_name: "SM-G960F", size: (3840, 2160) },
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Variant {
    Native,
    Ffmpeg,
    Premiere,
    YouTube { edited: bool },
}

fn sample_entry(brand: &str) -> (&'static [u8; 4], &'static [u8; 4], &'static str) {
    match brand {
        "Apple" => (b"avc1", b"appl", "H.264"),
        "Huawei" => (b"hvc1", b"\0\0\0\0", "HEVC Coding"),
        _ => (b"avc1", b"\0\0\0\0", "AVC Coding"),
    }
}

fn mdat(rng: &mut ChaCha8Rng) -> BoxSpec {
    let n = rng.random_range(32..96);
    leaf(b"mdat", (0..n).map(|_| rng.random::<u8>()).collect::<Vec<u8>>())
}

fn native(d: &Device, rng: &mut ChaCha8Rng) -> Vec<BoxSpec> {
    let duration = rng.random_range(3_000..60_000);
    let entry = sample_entry(d.brand);
    match d.brand {
        "Apple" => {
            let meta = container(
                b"meta",
                vec![
                    hdlr(b"mdta", ""),
                    keys(&[
                        "com.apple.quicktime.make",
                        "com.apple.quicktime.model",
                        "com.apple.quicktime.software",
                    ]),
                    container(
                        b"ilst",
                        vec![
                            indexed_item(1, "Apple"),
                            indexed_item(2, d.model_name),
                            indexed_item(3, "12.1.4"),
                        ],
                    ),
                ],
            );
            vec![
                ftyp(b"qt  ", 0, &[b"qt  "]),
                leaf(b"wide", Vec::new()),
                mdat(rng),
                container(
                    b"moov",
                    vec![
                        mvhd(600, duration, 3),
                        video_trak(1, duration, d.size, "Core Media Video", entry, vec![]),
                        audio_trak(2, duration, "Core Media Audio", b"mp4a"),
                        meta,
                    ],
                ),
            ]
        }
        "Huawei" => vec![
            ftyp(b"isom", 0, &[b"isom", b"mp42"]),
            leaf(b"free", Vec::new()),
            mdat(rng),
            container(
                b"moov",
                vec![
                    mvhd(1000, duration, 3),
                    video_trak(1, duration, d.size, "VideoHandler", entry, vec![]),
                    audio_trak(2, duration, "SoundHandler", b"mp4a"),
                    container(
                        b"udta",
                        vec![
                            bare_udta(b"\xA9xyz", 0x15C7, "+45.4642+009.1900/"),
                            bare_udta(b"\xA9mod", 0x15C7, d.model_name),
                        ],
                    ),
                ],
            ),
        ],
        _ => vec![
            ftyp(b"mp42", 0, &[b"isom", b"mp42"]),
            container(
                b"moov",
                vec![
                    mvhd(1000, duration, 3),
                    video_trak(1, duration, d.size, "VideoHandle", entry, vec![]),
                    audio_trak(2, duration, "SoundHandle", b"mp4a"),
                    container(
                        b"udta",
                        vec![
                            leaf(b"smrd", b"TRUEBLUE".to_vec()),
                            leaf(b"smta", vec![0, 0, 0, 0, 0, 0, 0, 0x0C, b's', b'a', b'u', b't']),
                        ],
                    ),
                ],
            ),
            mdat(rng),
        ],
    }
}

fn edited(d: &Device, variant: Variant, rng: &mut ChaCha8Rng) -> Vec<BoxSpec> {
    let duration = rng.random_range(3_000..60_000);
    let entry = sample_entry(d.brand);
    match variant {
        Variant::Ffmpeg => vec![
            ftyp(b"isom", 512, &[b"isom", b"iso2", b"avc1", b"mp41"]),
            leaf(b"free", Vec::new()),
            mdat(rng),
            container(
                b"moov",
                vec![
                    mvhd(1000, duration, 3),
                    video_trak(1, duration, d.size, "VideoHandler", entry, vec![]),
                    audio_trak(2, duration, "SoundHandler", b"mp4a"),
                    container(
                        b"udta",
                        vec![full_meta(vec![
                            hdlr(b"mdir", ""),
                            container(b"ilst", vec![text_item(b"\xA9too", "Lavf58.29.100")]),
                        ])],
                    ),
                ],
            ),
        ],
        Variant::Premiere => {
            let packet = xmp_packet(
                "Adobe Premiere Pro CC 2019 (Windows)",
                &[("videoFrameRate", "29.970030"), ("startTimeScale", "30000")],
            );
            vec![
                ftyp(b"mp42", 0, &[b"mp42", b"mp41"]),
                xmp_uuid(&packet),
                container(
                    b"moov",
                    vec![
                        mvhd(30000, duration, 3),
                        video_trak(1, duration, d.size, "Video Media Handler", entry, vec![]),
                        audio_trak(2, duration, "Sound Media Handler", b"mp4a"),
                        container(b"udta", vec![leaf(b"XMP_", packet.into_bytes())]),
                    ],
                ),
                mdat(rng),
            ]
        }
        Variant::YouTube { edited } => {
            let compatible: &[&[u8; 4]] = if edited {
                &[b"isom", b"iso2", b"mp41"]
            } else {
                &[b"isom", b"mp42"]
            };
            let mut trak_extra = Vec::new();
            if edited {
                let mut elst = vec![0; 4];
                elst.extend(1u32.to_be_bytes());
                elst.extend(duration.to_be_bytes());
                elst.extend(0u32.to_be_bytes());
                elst.extend(0x0001_0000u32.to_be_bytes());
                trak_extra.push(container(b"edts", vec![leaf(b"elst", elst)]));
            }
            vec![
                ftyp(b"mp42", 0, compatible),
                container(
                    b"moov",
                    vec![
                        mvhd(1000, duration, 3),
                        video_trak(
                            1,
                            duration,
                            d.size,
                            "ISO Media file produced by Google Inc.",
                            entry,
                            trak_extra,
                        ),
                        audio_trak(2, duration, "ISO Media file produced by Google Inc.", b"mp4a"),
                    ],
                ),
                mdat(rng),
            ]
        }
        Variant::Native => unreachable!(),
    }
}

pub fn synthetic_corpus() -> Vec<SyntheticFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut files = Vec::new();
    for (di, d) in DEVICES.iter().enumerate() {
        let variants = [
            Variant::Native,
            Variant::Native,
            Variant::Ffmpeg,
            Variant::Premiere,
            Variant::YouTube { edited: di % 2 == 1 },
        ];
        for (i, v) in variants.into_iter().enumerate() {
            let boxes = match v {
                Variant::Native => native(d, &mut rng),
                _ => edited(d, v, &mut rng),
            };
            let (tool, social, is_edited) = match v {
                Variant::Native => ("", "", false),
                Variant::Ffmpeg => ("ffmpeg", "", true),
                Variant::Premiere => ("Premiere", "", true),
                Variant::YouTube { edited } => ("", "YouTube", edited),
            };
            let ext = if d.brand == "Apple" && v == Variant::Native { "mov" } else { "mp4" };
            files.push(SyntheticFile {
                path: format!("{}_{}_{}.{}", d.brand.to_lowercase(), d.model_id, i, ext),
                brand: d.brand,
                model_id: d.model_id,
                tool,
                social,
                edited: is_edited,
                bytes: encode_all(&boxes),
            });
        }
    }
    files
}

pub fn manifest_csv(files: &[SyntheticFile]) -> String {
    let mut s = String::from("path,brand,model_id,tool,social,edited\n");
    for f in files {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f.path, f.brand, f.model_id, f.tool, f.social, f.edited as u8
        ));
    }
    s
}
