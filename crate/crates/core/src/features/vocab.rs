use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::codec::{Category, MetadataString};
use crate::error::{Error, Result};

/// Keys whose values are injected as numbers instead of being counted.
///
/// A pattern is either `@key`, matching that key under any node, or
/// `path/@key`, matching when the string's path ends with `path`. Patterns
/// use the escaped form of names and keys.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuousKeyList {
    pub keys: Vec<String>,
}

impl Default for ContinuousKeyList {
    fn default() -> Self {
        Self::new([
            "@duration",
            "@timescale",
            "@width",
            "@height",
            "@avgBitrate",
            "@maxBitrate",
            "@creation_time",
            "@modification_time",
            "@entry_count",
        ])
    }
}

impl ContinuousKeyList {
    pub fn new<S: Into<String>>(keys: impl IntoIterator<Item = S>) -> Self {
        ContinuousKeyList {
            keys: keys.into_iter().map(Into::into).collect(),
        }
    }

    pub fn none() -> Self {
        ContinuousKeyList { keys: Vec::new() }
    }

    pub fn matches(&self, s: &MetadataString) -> bool {
        let Some(key) = s.key.as_deref() else {
            return false;
        };
        self.keys.iter().any(|pattern| {
            let pattern = pattern.strip_prefix('/').unwrap_or(pattern);
            let (path, pat_key) = match pattern.rsplit_once("/@") {
                Some((p, k)) => (Some(p), k),
                None => (None, pattern.strip_prefix('@').unwrap_or(pattern)),
            };
            if pat_key != key {
                return false;
            }
            match path {
                None => true,
                Some(p) => {
                    let parts: Vec<&str> = p.split('/').collect();
                    s.path.len() >= parts.len()
                        && s.path[s.path.len() - parts.len()..]
                            .iter()
                            .zip(&parts)
                            .all(|(a, b)| a == b)
                }
            }
        })
    }
}

/// Where a string lands in the vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Occurrence count of a node-presence or discrete key-value string.
    Count(usize),
    /// Numeric value of a continuous key.
    Value(usize),
}

/// The ordered feature sets observed in a training corpus.
///
/// Positions are 0-based: node-presence strings first, then discrete
/// key-value strings, then continuous keys, each block sorted.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "VocabularyDoc", into = "VocabularyDoc")]
pub struct Vocabulary {
    pub cat1: Vec<String>,
    pub cat2d: Vec<String>,
    pub cat2c_keys: Vec<String>,
    pub continuous: ContinuousKeyList,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyDoc {
    cat1: Vec<String>,
    cat2d: Vec<String>,
    cat2c_keys: Vec<String>,
    continuous: ContinuousKeyList,
}

impl From<VocabularyDoc> for Vocabulary {
    fn from(d: VocabularyDoc) -> Self {
        Vocabulary::from_parts(d.cat1, d.cat2d, d.cat2c_keys, d.continuous)
    }
}

impl From<Vocabulary> for VocabularyDoc {
    fn from(v: Vocabulary) -> Self {
        VocabularyDoc {
            cat1: v.cat1,
            cat2d: v.cat2d,
            cat2c_keys: v.cat2c_keys,
            continuous: v.continuous,
        }
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.cat1 == other.cat1
            && self.cat2d == other.cat2d
            && self.cat2c_keys == other.cat2c_keys
            && self.continuous == other.continuous
    }
}

/// A continuous value that did not parse as a finite number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonNumericValue {
    pub key: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl Vocabulary {
    /// Builds the vocabulary from training string collections.
    pub fn build<'a, I>(corpus: I, continuous: &ContinuousKeyList) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [MetadataString]>,
    {
        let mut cat1 = BTreeSet::new();
        let mut cat2d = BTreeSet::new();
        let mut cat2c = BTreeSet::new();
        let mut files = 0usize;
        for strings in corpus {
            files += 1;
            for s in strings {
                match s.category {
                    Category::NodePresence => {
                        cat1.insert(s.text.as_str());
                    }
                    Category::KeyValue if continuous.matches(s) => {
                        cat2c.insert(s.key_path().expect("key-value string has a key"));
                    }
                    Category::KeyValue => {
                        cat2d.insert(s.text.as_str());
                    }
                }
            }
        }
        if files == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self::from_parts(
            cat1.into_iter().map(str::to_string).collect(),
            cat2d.into_iter().map(str::to_string).collect(),
            cat2c.into_iter().collect(),
            continuous.clone(),
        ))
    }

    pub fn from_parts(
        cat1: Vec<String>,
        cat2d: Vec<String>,
        cat2c_keys: Vec<String>,
        continuous: ContinuousKeyList,
    ) -> Self {
        let index = cat1
            .iter()
            .chain(&cat2d)
            .chain(&cat2c_keys)
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Vocabulary {
            cat1,
            cat2d,
            cat2c_keys,
            continuous,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.cat1.len() + self.cat2d.len() + self.cat2c_keys.len()
    }

    /// Entry text at each position, in order.
    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.cat1
            .iter()
            .chain(&self.cat2d)
            .chain(&self.cat2c_keys)
            .map(String::as_str)
    }

    /// Position ranges of the three blocks.
    pub fn ranges(&self) -> [std::ops::Range<usize>; 3] {
        let a = self.cat1.len();
        let b = a + self.cat2d.len();
        [0..a, a..b, b..self.dim()]
    }

    /// Slot of a string, or `None` if it is not in the vocabulary.
    pub fn slot(&self, s: &MetadataString) -> Option<Slot> {
        match s.category {
            Category::KeyValue if self.continuous.matches(s) => {
                let i = *self.index.get(&s.key_path()?)?;
                (i >= self.ranges()[2].start).then_some(Slot::Value(i))
            }
            _ => {
                let i = *self.index.get(&s.text)?;
                (i < self.ranges()[2].start).then_some(Slot::Count(i))
            }
        }
    }

    /// Maps a string collection to its feature vector. Strings outside the
    /// vocabulary are ignored; a continuous key keeps its last numeric value.
    pub fn vectorize(&self, strings: &[MetadataString]) -> (FeatureVector, Vec<NonNumericValue>) {
        let mut values = vec![0.0; self.dim()];
        let mut warnings = Vec::new();
        for s in strings {
            match self.slot(s) {
                Some(Slot::Count(i)) => values[i] += 1.0,
                Some(Slot::Value(i)) => match numeric_value(s) {
                    Some(v) => values[i] = v,
                    None => warnings.push(NonNumericValue {
                        key: s.key_path().unwrap_or_default(),
                        value: s.value_text.clone().unwrap_or_default(),
                    }),
                },
                None => {}
            }
        }
        (FeatureVector { values }, warnings)
    }

    /// Writes vectors as CSV: a `file` column, then one column per entry.
    pub fn write_csv<W: Write>(&self, out: W, rows: &[(String, FeatureVector)]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(std::iter::once("file").chain(self.entries()))?;
        for (file, v) in rows {
            if v.values.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    actual: v.values.len(),
                });
            }
            let mut record = vec![file.clone()];
            record.extend(v.values.iter().map(|x| format!("{x:?}")));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

fn numeric_value(s: &MetadataString) -> Option<f64> {
    let bytes = s.value_bytes()?;
    let v: f64 = std::str::from_utf8(&bytes).ok()?.parse().ok()?;
    v.is_finite().then_some(v)
}
