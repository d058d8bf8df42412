mod common;

use proptest::prelude::*;

use common::writer::*;
use vidmeta::bmff::parse_tree;
use vidmeta::harness::extract;
use vidmeta::refine::{default_exclusions, flatten_xml, refine, ExclusionList};

fn strings_with(boxes: &[BoxSpec], exclusions: &ExclusionList) -> Vec<String> {
    extract(&encode_all(boxes), exclusions)
        .unwrap()
        .strings
        .into_iter()
        .map(|s| s.text)
        .collect()
}

fn strings(boxes: &[BoxSpec]) -> Vec<String> {
    strings_with(boxes, &default_exclusions())
}

fn has(all: &[String], wanted: &str) -> bool {
    all.iter().any(|s| s == wanted)
}

fn assert_has(all: &[String], wanted: &[&str]) {
    for w in wanted {
        assert!(has(all, w), "{w:?} missing from {all:#?}");
    }
}

#[test]
fn standard_boxes_decode() {
    let s = strings(&[
        ftyp(b"mp42", 1, &[b"isom", b"mp42"]),
        container(
            b"moov",
            vec![
                mvhd(600, 1_546_737, 3),
                video_trak(1, 9000, (1920, 1080), "Core Media Video", (b"avc1", b"appl", "H.264"), vec![]),
                audio_trak(2, 9000, "Core Media Audio", b"mp4a"),
            ],
        ),
    ]);
    assert_has(
        &s,
        &[
            "ftyp/@major_brand=mp42",
            "ftyp/@minor_version=1",
            "ftyp/@compatible_brands=isommp42",
            "moov/mvhd/@timescale=600",
            "moov/mvhd/@duration=1546737",
            "moov/mvhd/@next_track_ID=3",
            "moov/trak1/tkhd/@track_ID=1",
            "moov/trak1/tkhd/@width=1920.0",
            "moov/trak1/tkhd/@height=1080.0",
            "moov/trak1/mdia/mdhd/@language=und",
            "moov/trak1/mdia/hdlr/@handler_type=vide",
            "moov/trak1/mdia/hdlr/@name=Core Media Video",
            "moov/trak1/mdia/minf/stbl/stsd/@format=avc1",
            "moov/trak1/mdia/minf/stbl/stsd/@vendor=appl",
            "moov/trak1/mdia/minf/stbl/stsd/@width=1920",
            "moov/trak1/mdia/minf/stbl/stsd/@compressorname=H.264",
            "moov/trak1/mdia/minf/dinf/dref/url ",
            "moov/trak2/tkhd/@volume=1.0",
            "moov/trak2/mdia/mdhd/@language=eng",
            "moov/trak2/mdia/minf/stbl/stsd/@format=mp4a",
            "moov/trak2/mdia/minf/stbl/stsd/@channelcount=2",
            "moov/trak2/mdia/minf/stbl/stsd/@samplerate=48000.0",
        ],
    );
}

#[test]
fn sample_tables_are_excluded_by_default() {
    let boxes = [
        ftyp(b"isom", 0, &[]),
        container(
            b"moov",
            vec![video_trak(1, 10, (64, 64), "v", (b"avc1", b"    ", ""), vec![])],
        ),
        leaf(b"mdat", vec![1; 64]),
    ];
    let filtered = strings(&boxes);
    assert!(has(&filtered, "moov/trak1/mdia/minf/stbl/stts/@entry_count=1"));
    assert!(!filtered.iter().any(|s| s.contains("/@entries=")));
    assert!(!filtered.iter().any(|s| s.starts_with("mdat")));

    let all = strings_with(&boxes, &ExclusionList::none());
    assert!(all.iter().any(|s| s.starts_with("moov/trak1/mdia/minf/stbl/stts/@entries=")));
    assert!(has(&all, "mdat"));
}

#[test]
fn exclusion_patterns() {
    let list = ExclusionList::parse("# comment\nudta\n@rate\ntkhd/@width\n");
    let s = strings_with(
        &[
            ftyp(b"isom", 0, &[]),
            container(
                b"moov",
                vec![
                    mvhd(600, 1, 2),
                    tkhd(1, 1, 10, 20, 0),
                    container(b"udta", vec![bare_udta(b"\xA9mod", 0, "x")]),
                ],
            ),
        ],
        &list,
    );
    assert!(!s.iter().any(|t| t.contains("udta")));
    assert!(!s.iter().any(|t| t.contains("@rate=")));
    assert!(!s.iter().any(|t| t.contains("tkhd/@width=")));
    assert!(has(&s, "moov/tkhd/@height=20.0"));
}

#[test]
fn ilst_in_udta_meta() {
    let s = strings(&[
        ftyp(b"isom", 0, &[]),
        container(
            b"moov",
            vec![container(
                b"udta",
                vec![full_meta(vec![
                    hdlr(b"mdir", ""),
                    container(b"ilst", vec![text_item(b"\xA9too", "Lavf58.29.100"), text_item(b"desc", "clip")]),
                ])],
            )],
        ),
    ]);
    assert_has(
        &s,
        &[
            "moov/udta/meta/hdlr/@handler_type=mdir",
            r"moov/udta/meta/ilst/@\xA9too=Lavf58.29.100",
            "moov/udta/meta/ilst/@desc=clip",
        ],
    );
}

#[test]
fn keys_resolve_item_indices() {
    let s = strings(&[
        ftyp(b"qt  ", 0, &[]),
        container(
            b"moov",
            vec![container(
                b"meta",
                vec![
                    hdlr(b"mdta", ""),
                    keys(&["com.apple.quicktime.make", "com.apple.quicktime.model"]),
                    container(b"ilst", vec![indexed_item(1, "Apple"), indexed_item(2, "iPhone 8")]),
                ],
            )],
        ),
    ]);
    assert_has(
        &s,
        &[
            "moov/meta/keys/@1=com.apple.quicktime.make",
            "moov/meta/ilst/@com.apple.quicktime.make=Apple",
            "moov/meta/ilst/@com.apple.quicktime.model=iPhone 8",
        ],
    );
}

#[test]
fn bare_udta_keys_become_fields() {
    let s = strings(&[
        ftyp(b"qt  ", 0, &[]),
        container(
            b"moov",
            vec![container(
                b"udta",
                vec![bare_udta(b"\xA9mak", 0x55C4, "Apple"), bare_udta(b"\xA9mod", 0x2681, "iPhone 5c")],
            )],
        ),
    ]);
    assert_has(
        &s,
        &[
            r"moov/udta/@\xA9mak=\x00\x05U\xC4Apple",
            r"moov/udta/@\xA9mod=\x00\x09&\x81iPhone 5c",
        ],
    );
    assert!(!s.iter().any(|t| t.starts_with(r"moov/udta/\xA9")));
}

#[test]
fn xmp_in_uuid_is_flattened() {
    let packet = xmp_packet("Adobe Premiere Pro 2020", &[("videoFrameRate", "25.000000")]);
    let s = strings(&[ftyp(b"mp42", 0, &[]), xmp_uuid(&packet)]);
    assert_has(
        &s,
        &[
            "uuid/@uuid=be7acfcb97a942e89c71999491e3afac",
            "uuid/@CreatorTool=Adobe Premiere Pro 2020",
            "uuid/@videoFrameRate=25.000000",
        ],
    );
}

#[test]
fn broken_xml_falls_back_to_raw() {
    let mut p = XMP_UUID.to_vec();
    p.extend(b"<x:xmpmeta><rdf:RDF>");
    let bytes = encode_all(&[ftyp(b"mp42", 0, &[]), leaf(b"uuid", p)]);
    let report = parse_tree(&bytes).unwrap();
    let refined = refine(&report, &default_exclusions());
    assert!(!refined.warnings.is_empty());
    let uuid = refined.root.child(b"uuid").unwrap();
    assert!(uuid.field(b"raw").is_some());
}

#[test]
fn unknown_leaf_keeps_raw_bytes() {
    let s = strings(&[
        ftyp(b"isom", 0, &[]),
        container(b"moov", vec![container(b"udta", vec![leaf(b"SDLN", b"PLAY".to_vec())])]),
    ]);
    assert!(has(&s, "moov/udta/SDLN/@raw=PLAY"), "{s:#?}");
}

#[test]
fn malformed_known_leaf_warns() {
    let bytes = encode_all(&[ftyp(b"isom", 0, &[]), container(b"moov", vec![leaf(b"mvhd", vec![0; 7])])]);
    let report = parse_tree(&bytes).unwrap();
    let refined = refine(&report, &ExclusionList::none());
    assert!(!refined.warnings.is_empty());
    assert!(refined.root.find(&[b"moov", b"mvhd"]).unwrap().field(b"raw").is_some());
}

#[test]
fn xml_flattening_last_wins() {
    let fields = flatten_xml(b"<a x=\"1\"><b>2</b><c><b>3</b></c></a>").unwrap();
    let get = |k: &[u8]| fields.iter().find(|f| f.key == k).map(|f| f.value.render());
    assert_eq!(get(b"x"), Some(b"1".to_vec()));
    assert_eq!(get(b"b"), Some(b"3".to_vec()));
}

proptest! {
    #[test]
    fn refine_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        let mut file = ftyp(b"isom", 0, &[]).encode();
        file.extend(&bytes);
        if let Ok(report) = parse_tree(&file) {
            let _ = refine(&report, &default_exclusions());
        }
    }

    #[test]
    fn leaf_payloads_never_panic(
        name in prop::sample::select(vec![
            *b"mvhd", *b"tkhd", *b"mdhd", *b"hdlr", *b"stsd", *b"stts", *b"stsz", *b"elst",
            *b"keys", *b"ftyp", *b"vmhd", *b"smhd", *b"co64", *b"url ", *b"uuid",
        ]),
        payload in proptest::collection::vec(any::<u8>(), 0..128),
    ) {
        let file = encode_all(&[ftyp(b"isom", 0, &[]), container(b"moov", vec![leaf(&name, payload)])]);
        let _ = extract(&file, &ExclusionList::none()).unwrap();
    }

    #[test]
    fn xml_flattening_never_panics(text in ".{0,200}") {
        let _ = flatten_xml(text.as_bytes());
    }
}

#[test]
fn ftyp_fields() {
    let s = strings(&[ftyp(b"isom", 512, &[b"isom", b"iso2"])]);
    assert_has(
        &s,
        &["ftyp/@major_brand=isom", "ftyp/@minor_version=512", "ftyp/@compatible_brands=isomiso2"],
    );
}

#[test]
fn empty_containers() {
    let s = strings(&[
        ftyp(b"isom", 0, &[]),
        container(b"moov", vec![container(b"udta", vec![]), container(b"ilst", vec![])]),
    ]);
    assert!(!s.iter().any(|t| t.starts_with("moov/udta/")));
    assert!(!s.iter().any(|t| t.starts_with("moov/ilst/")));
    assert_has(&s, &["moov/udta", "moov/ilst"]);
}

#[test]
fn uuid_without_body() {
    let s = strings(&[ftyp(b"isom", 0, &[]), leaf(b"uuid", XMP_UUID.to_vec())]);
    let under: Vec<&String> = s.iter().filter(|t| t.starts_with("uuid/@")).collect();
    assert_eq!(under, ["uuid/@uuid=be7acfcb97a942e89c71999491e3afac"]);

    let mut p = XMP_UUID.to_vec();
    p.extend([0x00, 0xFF, 0x10, 0x80]);
    let s = strings(&[ftyp(b"isom", 0, &[]), leaf(b"uuid", p)]);
    let under: Vec<&String> = s.iter().filter(|t| t.starts_with("uuid/@")).collect();
    assert_eq!(under, ["uuid/@uuid=be7acfcb97a942e89c71999491e3afac", r"uuid/@raw=\x00\xFF\x10\x80"]);
}

#[test]
fn exif_date_is_flattened() {
    let fields = flatten_xml(b"<x><exif:DateTimeOriginal>2019:05:22</exif:DateTimeOriginal></x>").unwrap();
    assert_eq!(fields.len(), 1);
    assert_eq!(fields[0].key, b"DateTimeOriginal");
    assert_eq!(fields[0].value.render(), b"2019:05:22");
    let fields = flatten_xml(b"<a><b>1</b><b>2</b></a>").unwrap();
    assert_eq!(fields.len(), 1);
    assert_eq!(fields[0].value.render(), b"2");
}
