//! Embedding corpora: record type, JSONL and compact binary readers and
//! writers, FairFace label merging, the LAION subset filter and seeded
//! train/validation splits.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demographic::{normalize_name, Category, CountTable, DemographicLabel, Gender, Race};
use crate::embedding::{EmbeddingError, EmbeddingVector};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("record {id:?}: dimension {got} does not match corpus dimension {expected}")]
    Dimension { id: String, expected: usize, got: usize },
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("line {line}: record {id:?} has no caption/face size metadata required by the LAION filter")]
    MissingLaionMetadata { line: usize, id: String },
    #[error("split fraction {0} must be strictly between 0 and 1")]
    BadFraction(f64),
    #[error("binary corpus: {0}")]
    Binary(String),
    #[error("manifest mismatch for {category}: expected {expected}, found {found}")]
    ManifestMismatch {
        category: String,
        expected: u64,
        found: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordSource {
    Fairface,
    Laion,
    Generated,
    Synthetic,
}

/// One face: identifier, embedding and optional ground-truth labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub id: String,
    pub embedding: EmbeddingVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub race: Option<Race>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<RecordSource>,
    /// Which extractor produced the embedding, free text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl EmbeddingRecord {
    pub fn unlabeled(id: impl Into<String>, embedding: EmbeddingVector) -> Self {
        EmbeddingRecord {
            id: id.into(),
            embedding,
            race: None,
            gender: None,
            source: None,
            provenance: None,
        }
    }

    pub fn labeled(id: impl Into<String>, embedding: EmbeddingVector, label: DemographicLabel) -> Self {
        EmbeddingRecord {
            race: Some(label.race),
            gender: Some(label.gender),
            ..Self::unlabeled(id, embedding)
        }
    }

    pub fn true_label(&self) -> Option<DemographicLabel> {
        Some(DemographicLabel::new(self.race?, self.gender?))
    }
}

/// The seven FairFace race classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FairFaceRace {
    Black,
    EastAsian,
    Indian,
    Latinx,
    MiddleEastern,
    SoutheastAsian,
    White,
}

impl FairFaceRace {
    pub const ALL: [FairFaceRace; 7] = [
        FairFaceRace::Black,
        FairFaceRace::EastAsian,
        FairFaceRace::Indian,
        FairFaceRace::Latinx,
        FairFaceRace::MiddleEastern,
        FairFaceRace::SoutheastAsian,
        FairFaceRace::White,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        match normalize_name(s).as_str() {
            "eastasian" => Some(FairFaceRace::EastAsian),
            "southeastasian" => Some(FairFaceRace::SoutheastAsian),
            _ => Race::parse(s).and_then(|r| match r {
                Race::Asian => None,
                Race::Black => Some(FairFaceRace::Black),
                Race::Indian => Some(FairFaceRace::Indian),
                Race::Latinx => Some(FairFaceRace::Latinx),
                Race::MiddleEastern => Some(FairFaceRace::MiddleEastern),
                Race::White => Some(FairFaceRace::White),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawFairFaceLabel {
    pub race7: FairFaceRace,
    pub gender: Gender,
}

/// Collapses East and Southeast Asian into Asian; everything else is kept.
pub fn merge_fairface(label: RawFairFaceLabel) -> DemographicLabel {
    let race = match label.race7 {
        FairFaceRace::EastAsian | FairFaceRace::SoutheastAsian => Race::Asian,
        FairFaceRace::Black => Race::Black,
        FairFaceRace::Indian => Race::Indian,
        FairFaceRace::Latinx => Race::Latinx,
        FairFaceRace::MiddleEastern => Race::MiddleEastern,
        FairFaceRace::White => Race::White,
    };
    DemographicLabel::new(race, label.gender)
}

fn merge_race(race7: FairFaceRace) -> Race {
    merge_fairface(RawFairFaceLabel {
        race7,
        gender: Gender::Female,
    })
    .race
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaionMetadata {
    pub id: String,
    pub caption: String,
    pub face_width_px: u32,
    pub face_height_px: u32,
}

pub const LAION_KEYWORDS: [&str; 5] = ["face", "person", "child", "woman", "man"];
pub const LAION_MIN_FACE_PX: u32 = 100;

/// Keyword match is on whole caption tokens split at non-letters, so
/// "personal" does not count as "person".
pub fn laion_keep(meta: &LaionMetadata) -> bool {
    let has_keyword = meta
        .caption
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .any(|t| {
            let t = t.to_lowercase();
            LAION_KEYWORDS.contains(&t.as_str())
        });
    has_keyword && meta.face_width_px >= LAION_MIN_FACE_PX && meta.face_height_px >= LAION_MIN_FACE_PX
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Bin,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "bin" => Ok(CorpusFormat::Bin),
            other => Err(format!("unknown corpus format {other:?} (expected jsonl or bin)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestOptions {
    /// Accept seven-class FairFace race names and merge them.
    pub merge_fairface: bool,
    /// Drop records failing [`laion_keep`]; JSONL records must then carry
    /// `caption`, `face_width_px` and `face_height_px`.
    pub laion_filter: bool,
}

#[derive(Debug, Default)]
pub struct IngestOutcome {
    pub records: Vec<EmbeddingRecord>,
    pub filtered_out: usize,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    embedding: Vec<f64>,
    #[serde(default)]
    race: Option<String>,
    #[serde(default)]
    gender: Option<String>,
    #[serde(default)]
    source: Option<RecordSource>,
    #[serde(default)]
    provenance: Option<String>,
    #[serde(default)]
    caption: Option<String>,
    #[serde(default)]
    face_width_px: Option<u32>,
    #[serde(default)]
    face_height_px: Option<u32>,
}

fn parse_race(s: &str, merge: bool) -> Result<Race, String> {
    if merge {
        if let Some(r7) = FairFaceRace::parse(s) {
            return Ok(merge_race(r7));
        }
    }
    Race::parse(s).ok_or_else(|| {
        if FairFaceRace::parse(s).is_some() {
            format!("race {s:?} is a seven-class FairFace label; enable FairFace merging")
        } else {
            format!("unknown race {s:?}")
        }
    })
}

/// Tracks id uniqueness and dimension consistency while a corpus is built.
#[derive(Default)]
struct CorpusValidator {
    ids: HashSet<String>,
    dim: Option<usize>,
}

impl CorpusValidator {
    fn check(&mut self, rec: &EmbeddingRecord) -> Result<(), IngestError> {
        match self.dim {
            None => self.dim = Some(rec.embedding.dim()),
            Some(d) if d != rec.embedding.dim() => {
                return Err(IngestError::Dimension {
                    id: rec.id.clone(),
                    expected: d,
                    got: rec.embedding.dim(),
                })
            }
            _ => {}
        }
        if !self.ids.insert(rec.id.clone()) {
            return Err(IngestError::DuplicateId(rec.id.clone()));
        }
        Ok(())
    }
}

fn malformed(line: usize, e: impl std::fmt::Display) -> IngestError {
    IngestError::Malformed {
        line,
        message: e.to_string(),
    }
}

pub fn read_jsonl<R: BufRead>(reader: R, opts: IngestOptions) -> Result<IngestOutcome, IngestError> {
    let mut out = IngestOutcome::default();
    let mut validator = CorpusValidator::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| malformed(line_no, e))?;
        let embedding = EmbeddingVector::new(raw.embedding)
            .map_err(|e: EmbeddingError| malformed(line_no, format!("record {:?}: {e}", raw.id)))?;
        let race = raw
            .race
            .as_deref()
            .map(|s| parse_race(s, opts.merge_fairface))
            .transpose()
            .map_err(|e| malformed(line_no, e))?;
        let gender = raw
            .gender
            .as_deref()
            .map(|s| Gender::parse(s).ok_or_else(|| format!("unknown gender {s:?}")))
            .transpose()
            .map_err(|e| malformed(line_no, e))?;
        let rec = EmbeddingRecord {
            id: raw.id,
            embedding,
            race,
            gender,
            source: raw.source,
            provenance: raw.provenance,
        };
        validator.check(&rec)?;
        if opts.laion_filter {
            let meta = match (raw.caption, raw.face_width_px, raw.face_height_px) {
                (Some(caption), Some(w), Some(h)) => LaionMetadata {
                    id: rec.id.clone(),
                    caption,
                    face_width_px: w,
                    face_height_px: h,
                },
                _ => {
                    return Err(IngestError::MissingLaionMetadata {
                        line: line_no,
                        id: rec.id,
                    })
                }
            };
            if !laion_keep(&meta) {
                out.filtered_out += 1;
                continue;
            }
        }
        out.records.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl<W: Write>(mut w: W, records: &[EmbeddingRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

const NO_CODE: u8 = 255;

/// Compact little-endian corpus: `u32 dim, u64 count`, then per record
/// `u16 id_len, id bytes, f32 x dim, u8 race code, u8 gender code` (255 when
/// absent). Source and provenance are not stored.
pub fn write_bin<W: Write>(mut w: W, records: &[EmbeddingRecord]) -> Result<(), IngestError> {
    let dim = records.first().map_or(0, |r| r.embedding.dim());
    w.write_all(&(dim as u32).to_le_bytes())?;
    w.write_all(&(records.len() as u64).to_le_bytes())?;
    for r in records {
        if r.embedding.dim() != dim {
            return Err(IngestError::Dimension {
                id: r.id.clone(),
                expected: dim,
                got: r.embedding.dim(),
            });
        }
        let id = r.id.as_bytes();
        let len = u16::try_from(id.len()).map_err(|_| IngestError::Binary(format!("id {:?} too long", r.id)))?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(id)?;
        for &x in r.embedding.as_slice() {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
        w.write_all(&[r.race.map_or(NO_CODE, |c| c.index() as u8)])?;
        w.write_all(&[r.gender.map_or(NO_CODE, |c| c.index() as u8)])?;
    }
    w.flush()?;
    Ok(())
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<(), IngestError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            IngestError::Binary(format!("truncated while reading {what}"))
        } else {
            IngestError::Io(e)
        }
    })
}

pub fn read_bin<R: Read>(mut r: R) -> Result<Vec<EmbeddingRecord>, IngestError> {
    let mut head = [0u8; 12];
    match r.read(&mut head[..1])? {
        0 => return Ok(Vec::new()),
        _ => read_exact_or(&mut r, &mut head[1..], "header")?,
    }
    let dim = u32::from_le_bytes(head[..4].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(head[4..].try_into().unwrap());
    let mut validator = CorpusValidator::default();
    let mut out = Vec::with_capacity(count.min(1 << 20) as usize);
    let mut vec_buf = vec![0u8; dim * 4];
    for k in 0..count {
        let mut len = [0u8; 2];
        read_exact_or(&mut r, &mut len, "id length")?;
        let mut id = vec![0u8; u16::from_le_bytes(len) as usize];
        read_exact_or(&mut r, &mut id, "id")?;
        let id = String::from_utf8(id).map_err(|_| IngestError::Binary(format!("record {k}: id is not utf-8")))?;
        read_exact_or(&mut r, &mut vec_buf, "embedding")?;
        let values = vec_buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        let embedding = EmbeddingVector::new(values).map_err(|e| IngestError::Binary(format!("record {id:?}: {e}")))?;
        let mut codes = [0u8; 2];
        read_exact_or(&mut r, &mut codes, "label codes")?;
        let decode = |code: u8, n: usize| -> Result<Option<usize>, IngestError> {
            match code {
                NO_CODE => Ok(None),
                c if (c as usize) < n => Ok(Some(c as usize)),
                c => Err(IngestError::Binary(format!("record {id:?}: invalid label code {c}"))),
            }
        };
        let race = decode(codes[0], Race::ALL.len())?.and_then(Race::from_index);
        let gender = decode(codes[1], Gender::ALL.len())?.and_then(Gender::from_index);
        let rec = EmbeddingRecord {
            race,
            gender,
            ..EmbeddingRecord::unlabeled(id, embedding)
        };
        validator.check(&rec)?;
        out.push(rec);
    }
    Ok(out)
}

/// Reads and validates a corpus file.
pub fn ingest(path: &Path, format: CorpusFormat, opts: IngestOptions) -> Result<IngestOutcome, IngestError> {
    let file = File::open(path)?;
    let outcome = match format {
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(file), opts)?,
        CorpusFormat::Bin => {
            let records = read_bin(BufReader::new(file))?;
            if opts.laion_filter {
                return Err(IngestError::MissingLaionMetadata {
                    line: 0,
                    id: records.first().map(|r| r.id.clone()).unwrap_or_default(),
                });
            }
            IngestOutcome {
                records,
                filtered_out: 0,
            }
        }
    };
    if outcome.records.is_empty() {
        tracing::warn!(path = %path.display(), "corpus is empty");
    }
    Ok(outcome)
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<EmbeddingRecord>, IngestError> {
    Ok(ingest(path, format, IngestOptions::default())?.records)
}

pub fn save_corpus(path: &Path, format: CorpusFormat, records: &[EmbeddingRecord]) -> Result<(), IngestError> {
    let w = BufWriter::new(File::create(path)?);
    match format {
        CorpusFormat::Jsonl => write_jsonl(w, records)?,
        CorpusFormat::Bin => write_bin(w, records)?,
    }
    Ok(())
}

/// Seeded partition into (train, validation), stratified by whatever labels
/// the records carry. Each part keeps corpus order.
pub fn split(
    corpus: &[EmbeddingRecord],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<EmbeddingRecord>, Vec<EmbeddingRecord>), IngestError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(IngestError::BadFraction(fraction));
    }
    let mut strata: BTreeMap<(Option<Race>, Option<Gender>), Vec<usize>> = BTreeMap::new();
    for (i, r) in corpus.iter().enumerate() {
        strata.entry((r.race, r.gender)).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; corpus.len()];
    for idx in strata.values_mut() {
        idx.shuffle(&mut rng);
        let k = (fraction * idx.len() as f64).round() as usize;
        for &i in &idx[..k] {
            in_train[i] = true;
        }
    }
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (r, t) in corpus.iter().zip(in_train) {
        if t {
            train.push(r.clone());
        } else {
            val.push(r.clone());
        }
    }
    Ok((train, val))
}

/// Expected per-class counts of a labeled corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountManifest {
    pub race: [u64; 6],
    pub gender: [u64; 2],
}

/// FairFace validation split after the Asian merge, in canonical race order
/// (Asian, Black, Indian, Latinx, MiddleEastern, White).
pub const FAIRFACE_VALIDATION: CountManifest = CountManifest {
    race: [2965, 1556, 1516, 1623, 1209, 2085],
    gender: [5162, 5792],
};

pub fn check_manifest(records: &[EmbeddingRecord], manifest: &CountManifest) -> Result<(), IngestError> {
    let races = CountTable::<Race>::from_labels(records.iter().filter_map(|r| r.race.as_ref()));
    let genders = CountTable::<Gender>::from_labels(records.iter().filter_map(|r| r.gender.as_ref()));
    for (r, &expected) in Race::ALL.iter().zip(&manifest.race) {
        if races.get(*r) != expected {
            return Err(IngestError::ManifestMismatch {
                category: r.name().to_string(),
                expected,
                found: races.get(*r),
            });
        }
    }
    for (g, &expected) in Gender::ALL.iter().zip(&manifest.gender) {
        if genders.get(*g) != expected {
            return Err(IngestError::ManifestMismatch {
                category: g.name().to_string(),
                expected,
                found: genders.get(*g),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn rec(id: &str, x: &[f64], race: Option<Race>, gender: Option<Gender>) -> EmbeddingRecord {
        EmbeddingRecord {
            race,
            gender,
            ..EmbeddingRecord::unlabeled(id, EmbeddingVector::new(x.to_vec()).unwrap())
        }
    }

    #[test]
    fn fairface_merge() {
        let m = |r, g| merge_fairface(RawFairFaceLabel { race7: r, gender: g });
        assert_eq!(
            m(FairFaceRace::SoutheastAsian, Gender::Female),
            DemographicLabel::new(Race::Asian, Gender::Female)
        );
        assert_eq!(
            m(FairFaceRace::EastAsian, Gender::Male),
            DemographicLabel::new(Race::Asian, Gender::Male)
        );
        assert_eq!(
            m(FairFaceRace::White, Gender::Male),
            DemographicLabel::new(Race::White, Gender::Male)
        );
        let image: HashSet<Race> = FairFaceRace::ALL.iter().map(|&r| merge_race(r)).collect();
        assert_eq!(image.len(), 6);
    }

    #[test]
    fn fairface_names_parse() {
        assert_eq!(FairFaceRace::parse("Southeast Asian"), Some(FairFaceRace::SoutheastAsian));
        assert_eq!(FairFaceRace::parse("Latino_Hispanic"), Some(FairFaceRace::Latinx));
        assert_eq!(FairFaceRace::parse("Asian"), None);
    }

    fn meta(caption: &str, w: u32, h: u32) -> LaionMetadata {
        LaionMetadata {
            id: "x".into(),
            caption: caption.into(),
            face_width_px: w,
            face_height_px: h,
        }
    }

    #[test]
    fn laion_filter_examples() {
        assert!(laion_keep(&meta("A woman at the beach", 256, 256)));
        assert!(!laion_keep(&meta("Sunset over mountains", 512, 512)));
        assert!(!laion_keep(&meta("portrait of a person", 99, 100)));
        assert!(!laion_keep(&meta("my personal favourite", 300, 300)));
        assert!(laion_keep(&meta("FACE-off: Man vs. machine", 100, 100)));
    }

    #[test]
    fn jsonl_reads_two_records() {
        let text = r#"{"id":"a","embedding":[1,0,0,0],"race":"White","gender":"Male","source":"fairface"}
{"id":"b","embedding":[0,1,0,0]}
"#;
        let out = read_jsonl(Cursor::new(text), IngestOptions::default()).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(
            out.records[0].true_label(),
            Some(DemographicLabel::new(Race::White, Gender::Male))
        );
        assert_eq!(out.records[1].true_label(), None);
    }

    #[test]
    fn jsonl_dimension_error_names_id() {
        let text = "{\"id\":\"a\",\"embedding\":[1,0,0,0]}\n{\"id\":\"odd\",\"embedding\":[1,0,0,0,1]}\n";
        match read_jsonl(Cursor::new(text), IngestOptions::default()) {
            Err(IngestError::Dimension { id, expected: 4, got: 5 }) => assert_eq!(id, "odd"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jsonl_errors() {
        let dup = "{\"id\":\"a\",\"embedding\":[1]}\n{\"id\":\"a\",\"embedding\":[2]}\n";
        assert!(matches!(
            read_jsonl(Cursor::new(dup), IngestOptions::default()),
            Err(IngestError::DuplicateId(_))
        ));
        let bad = "{\"id\":\"a\",\"embedding\":[1]}\nnot json\n";
        assert!(matches!(
            read_jsonl(Cursor::new(bad), IngestOptions::default()),
            Err(IngestError::Malformed { line: 2, .. })
        ));
        let zero = "{\"id\":\"a\",\"embedding\":[0,0]}\n";
        assert!(matches!(
            read_jsonl(Cursor::new(zero), IngestOptions::default()),
            Err(IngestError::Malformed { line: 1, .. })
        ));
        assert!(read_jsonl(Cursor::new(""), IngestOptions::default())
            .unwrap()
            .records
            .is_empty());
    }

    #[test]
    fn jsonl_fairface_merge_and_laion_filter() {
        let text = r#"{"id":"a","embedding":[1,2],"race":"East Asian","gender":"Female","caption":"a child","face_width_px":120,"face_height_px":150}
{"id":"b","embedding":[2,1],"race":"White","gender":"Male","caption":"a boat","face_width_px":500,"face_height_px":500}
"#;
        assert!(read_jsonl(Cursor::new(text), IngestOptions::default()).is_err());
        let out = read_jsonl(
            Cursor::new(text),
            IngestOptions {
                merge_fairface: true,
                laion_filter: true,
            },
        )
        .unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.filtered_out, 1);
        assert_eq!(out.records[0].race, Some(Race::Asian));

        let no_meta = "{\"id\":\"a\",\"embedding\":[1]}\n";
        assert!(matches!(
            read_jsonl(
                Cursor::new(no_meta),
                IngestOptions {
                    laion_filter: true,
                    ..Default::default()
                }
            ),
            Err(IngestError::MissingLaionMetadata { line: 1, .. })
        ));
    }

    #[test]
    fn bin_round_trip_and_truncation() {
        let records = vec![
            rec("a", &[0.5, -1.25, 2.0], Some(Race::Indian), Some(Gender::Female)),
            rec("bb", &[1.0, 0.0, 0.0], None, Some(Gender::Male)),
        ];
        let mut buf = Vec::new();
        write_bin(&mut buf, &records).unwrap();
        assert_eq!(buf.len(), 12 + (2 + 1 + 12 + 2) + (2 + 2 + 12 + 2));
        assert_eq!(read_bin(Cursor::new(&buf)).unwrap(), records);
        assert!(matches!(
            read_bin(Cursor::new(&buf[..buf.len() - 1])),
            Err(IngestError::Binary(_))
        ));
        assert!(read_bin(Cursor::new(Vec::<u8>::new())).unwrap().is_empty());
    }

    fn numbered(n: usize, label: impl Fn(usize) -> (Option<Race>, Option<Gender>)) -> Vec<EmbeddingRecord> {
        (0..n)
            .map(|i| {
                let (r, g) = label(i);
                rec(&format!("r{i}"), &[1.0, i as f64], r, g)
            })
            .collect()
    }

    #[test]
    fn split_examples() {
        let corpus = numbered(100, |_| (None, None));
        let (t, v) = split(&corpus, 0.9, 7).unwrap();
        assert_eq!((t.len(), v.len()), (90, 10));
        let (t2, _) = split(&corpus, 0.9, 7).unwrap();
        assert_eq!(t, t2);

        let corpus = numbered(100, |i| (None, Some(if i < 60 { Gender::Male } else { Gender::Female })));
        let (t, v) = split(&corpus, 0.5, 1).unwrap();
        for half in [&t, &v] {
            assert_eq!(half.iter().filter(|r| r.gender == Some(Gender::Male)).count(), 30);
            assert_eq!(half.iter().filter(|r| r.gender == Some(Gender::Female)).count(), 20);
        }
        assert!(matches!(split(&corpus, 1.0, 0), Err(IngestError::BadFraction(_))));
        assert!(matches!(split(&corpus, 0.0, 0), Err(IngestError::BadFraction(_))));
    }

    #[test]
    fn manifest_check() {
        let corpus = numbered(3, |i| (Some(Race::ALL[i]), Some(Gender::Female)));
        let ok = CountManifest {
            race: [1, 1, 1, 0, 0, 0],
            gender: [3, 0],
        };
        check_manifest(&corpus, &ok).unwrap();
        assert!(matches!(
            check_manifest(&corpus, &FAIRFACE_VALIDATION),
            Err(IngestError::ManifestMismatch { .. })
        ));
        assert_eq!(FAIRFACE_VALIDATION.race.iter().sum::<u64>(), 10954);
        assert_eq!(FAIRFACE_VALIDATION.gender.iter().sum::<u64>(), 10954);
    }

    proptest! {
        #[test]
        fn split_is_stratified_partition(n in 1usize..200, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let corpus = numbered(n, |i| (Some(Race::ALL[i % 6]), Some(Gender::ALL[(i / 6) % 2])));
            let (t, v) = split(&corpus, frac, seed).unwrap();
            prop_assert_eq!(t.len() + v.len(), n);
            let mut ids: Vec<&str> = t.iter().chain(&v).map(|r| r.id.as_str()).collect();
            ids.sort();
            ids.dedup();
            prop_assert_eq!(ids.len(), n);
            for l in DemographicLabel::ALL {
                let size = corpus.iter().filter(|r| r.true_label() == Some(*l)).count();
                let got = t.iter().filter(|r| r.true_label() == Some(*l)).count();
                prop_assert!((got as f64 - frac * size as f64).abs() <= 1.0);
            }
        }

        #[test]
        fn laion_filter_order_independent(caps in proptest::collection::vec("[a-z ]{0,20}", 1..20)) {
            let metas: Vec<LaionMetadata> = caps.iter().map(|c| meta(c, 150, 150)).collect();
            let fwd: Vec<bool> = metas.iter().map(laion_keep).collect();
            let mut rev: Vec<bool> = metas.iter().rev().map(laion_keep).collect();
            rev.reverse();
            prop_assert_eq!(fwd, rev);
        }
    }
}
