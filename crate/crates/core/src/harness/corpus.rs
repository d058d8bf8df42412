use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bmff::{parse_tree, ParseWarning};
use crate::codec::{parse_string, serialize, MetadataString};
use crate::error::{Error, Result};
use crate::refine::{refine, ExclusionList, RefineWarning};

/// One row of the dataset manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub path: String,
    pub brand: String,
    pub model_id: String,
    #[serde(default)]
    pub tool: String,
    #[serde(default)]
    pub social: String,
    #[serde(deserialize_with = "flag")]
    pub edited: bool,
}

fn flag<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let text = String::deserialize(d)?;
    match text.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "edited" => Ok(true),
        "0" | "false" | "no" | "pristine" | "" => Ok(false),
        other => Err(serde::de::Error::custom(format!("not a boolean: {other:?}"))),
    }
}

impl ManifestRow {
    /// Label columns as they appear in corpus records.
    pub fn labels(&self) -> BTreeMap<String, String> {
        [
            ("brand", self.brand.as_str()),
            ("model_id", &self.model_id),
            ("tool", &self.tool),
            ("social", &self.social),
            ("edited", if self.edited { "edited" } else { "pristine" }),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
    }
}

/// Reads a manifest CSV with columns `path,brand,model_id,tool,social,edited`.
pub fn read_manifest<R: std::io::Read>(input: R) -> Result<Vec<ManifestRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut rows = Vec::new();
    for (i, row) in reader.deserialize().enumerate() {
        let row: ManifestRow = row.map_err(|e| Error::Manifest(format!("row {}: {e}", i + 1)))?;
        if row.path.is_empty() {
            return Err(Error::Manifest(format!("row {}: empty path", i + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_manifest_file(path: &Path) -> Result<Vec<ManifestRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_manifest(file)
}

/// Strings of one file plus everything noticed on the way.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub strings: Vec<MetadataString>,
    pub parse_warnings: Vec<ParseWarning>,
    pub refine_warnings: Vec<RefineWarning>,
}

/// Parses, refines and serializes one file's bytes.
pub fn extract(bytes: &[u8], exclusions: &ExclusionList) -> Result<Extraction> {
    let report = parse_tree(bytes)?;
    let refined = refine(&report, exclusions);
    Ok(Extraction {
        strings: serialize(&refined.root),
        parse_warnings: report.warnings,
        refine_warnings: refined.warnings,
    })
}

/// One line of the corpus file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub file: String,
    /// Value of the label column chosen at ingestion.
    pub label: String,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    pub strings: Vec<String>,
}

impl CorpusRecord {
    /// Label by column name; `label` itself is the ingestion label.
    pub fn get(&self, column: &str) -> Option<&str> {
        if column == "label" {
            return Some(&self.label);
        }
        self.labels.get(column).map(String::as_str)
    }

    pub fn parsed_strings(&self) -> Result<Vec<MetadataString>> {
        self.strings.iter().map(|s| parse_string(s)).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub ingested: usize,
    /// `(manifest path, reason)` for every skipped file.
    pub skipped: Vec<(String, String)>,
}

/// Extracts every manifest file, in parallel, keeping manifest order.
/// Unreadable or non-BMFF files are skipped and reported.
pub fn ingest(
    rows: &[ManifestRow],
    root: &Path,
    exclusions: &ExclusionList,
    label_column: &str,
) -> Result<(Vec<CorpusRecord>, IngestReport)> {
    let results: Vec<std::result::Result<CorpusRecord, String>> = rows
        .par_iter()
        .map(|row| {
            let path: PathBuf = root.join(&row.path);
            let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
            let extraction = extract(&bytes, exclusions).map_err(|e| e.to_string())?;
            let labels = row.labels();
            let label = labels
                .get(label_column)
                .cloned()
                .ok_or_else(|| format!("unknown label column {label_column:?}"))?;
            Ok(CorpusRecord {
                file: row.path.clone(),
                label,
                labels,
                strings: extraction.strings.into_iter().map(|s| s.text).collect(),
            })
        })
        .collect();

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    for (row, result) in rows.iter().zip(results) {
        match result {
            Ok(r) => records.push(r),
            Err(reason) => {
                log::warn!("skipping {}: {reason}", row.path);
                report.skipped.push((row.path.clone(), reason));
            }
        }
    }
    report.ingested = records.len();
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok((records, report))
}

pub fn write_corpus<W: Write>(mut out: W, records: &[CorpusRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io("<corpus>", e))?;
    }
    Ok(())
}

pub fn read_corpus<R: BufRead>(input: R) -> Result<Vec<CorpusRecord>> {
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(records)
}

pub fn read_corpus_file(path: &Path) -> Result<Vec<CorpusRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parsing() {
        let text = "path,brand,model_id,tool,social,edited\n\
                    a.mp4,Apple,D01,,,0\n\
                    b.mp4,Samsung,D02,ffmpeg,YouTube,edited\n";
        let rows = read_manifest(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(!rows[0].edited && rows[1].edited);
        assert_eq!(rows[1].labels()["edited"], "edited");
        assert!(read_manifest("path,brand,model_id,tool,social,edited\nx,a,b,,,maybe\n".as_bytes()).is_err());
    }

    #[test]
    fn corpus_round_trip() {
        let r = CorpusRecord {
            file: "a.mp4".into(),
            label: "Apple".into(),
            labels: [("brand".to_string(), "Apple".to_string())].into(),
            strings: vec!["moov".into(), "moov/mvhd/@duration=1".into()],
        };
        let mut buf = Vec::new();
        write_corpus(&mut buf, std::slice::from_ref(&r)).unwrap();
        assert_eq!(read_corpus(buf.as_slice()).unwrap(), [r]);
        assert!(matches!(read_corpus(&b"\n"[..]), Err(Error::EmptyCorpus)));
    }
}
