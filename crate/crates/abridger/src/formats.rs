//! JSONL records and the conversions between them and core types.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use abridger_core::passage::{Label, PassagePair, PassageUnit};
use abridger_core::review::Side;
use abridger_core::text::{Document, Span};
use abridger_core::{AlignmentRow, ChapterPair};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChapterRecord {
    pub book_id: String,
    pub chapter_id: String,
    pub side: Side,
    pub text: String,
    pub sentence_spans: Vec<[usize; 2]>,
    pub paragraph_spans: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowRecord {
    pub book_id: String,
    pub chapter_id: String,
    pub row_index: usize,
    pub o_start: usize,
    pub o_len: usize,
    pub a_start: usize,
    pub a_len: usize,
    pub score: f64,
    pub flagged: bool,
    pub validated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassageRecord {
    pub chapter_id: String,
    pub unit: PassageUnit,
    pub o_start_char: usize,
    pub o_end_char: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_start_char: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_end_char: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub chapter_id: String,
    pub token_start: usize,
    pub token_end: usize,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextRecord {
    pub chapter_id: String,
    pub text: String,
}

/// One rater's yes/no judgement of one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub item: String,
    pub rater: String,
    #[serde(deserialize_with = "bool_or_int")]
    pub label: bool,
}

fn bool_or_int<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Bool(bool),
        Int(u8),
    }
    match Flag::deserialize(d)? {
        Flag::Bool(b) => Ok(b),
        Flag::Int(0) => Ok(false),
        Flag::Int(1) => Ok(true),
        Flag::Int(n) => Err(serde::de::Error::custom(format!("label must be 0 or 1, got {n}"))),
    }
}

fn spans(spans: &[Span]) -> Vec<[usize; 2]> {
    spans.iter().map(|s| [s.start, s.end]).collect()
}

fn unspans(spans: &[[usize; 2]]) -> Vec<Span> {
    spans.iter().map(|[s, e]| Span::new(*s, *e)).collect()
}

impl ChapterRecord {
    pub fn new(book_id: &str, chapter_id: &str, side: Side, doc: &Document) -> Self {
        ChapterRecord {
            book_id: book_id.into(),
            chapter_id: chapter_id.into(),
            side,
            text: doc.text().into(),
            sentence_spans: spans(doc.sentences()),
            paragraph_spans: spans(doc.paragraphs()),
        }
    }

    pub fn document(&self) -> Result<Document> {
        Ok(Document::from_parts(
            self.chapter_id.clone(),
            self.text.clone(),
            unspans(&self.sentence_spans),
            unspans(&self.paragraph_spans),
        )?)
    }
}

pub fn chapter_records(pairs: &[ChapterPair]) -> Vec<ChapterRecord> {
    pairs
        .iter()
        .flat_map(|p| {
            [
                ChapterRecord::new(&p.book_id, &p.chapter_id, Side::Original, &p.original),
                ChapterRecord::new(&p.book_id, &p.chapter_id, Side::Abridged, &p.abridged),
            ]
        })
        .collect()
}

/// Rebuilds chapter pairs, in the order original chapters appear.
///
/// Chapter ids must be unique across the file.
pub fn chapter_pairs(records: &[ChapterRecord]) -> Result<Vec<ChapterPair>> {
    let mut order = Vec::new();
    let mut sides: BTreeMap<&str, (Option<&ChapterRecord>, Option<&ChapterRecord>)> = BTreeMap::new();
    for r in records {
        let entry = sides.entry(&r.chapter_id).or_default();
        let slot = match r.side {
            Side::Original => &mut entry.0,
            Side::Abridged => &mut entry.1,
        };
        if slot.is_some() {
            return Err(AppError::Data(format!(
                "duplicate {} chapter `{}`",
                r.side, r.chapter_id
            )));
        }
        *slot = Some(r);
        if r.side == Side::Original {
            order.push(r.chapter_id.as_str());
        }
    }
    if let Some((id, _)) = sides.iter().find(|(_, (o, _))| o.is_none()) {
        return Err(AppError::Data(format!("chapter `{id}` has no original side")));
    }
    order
        .into_iter()
        .map(|id| {
            let (o, a) = sides[id];
            let (o, a) = (
                o.expect("checked"),
                a.ok_or_else(|| AppError::Data(format!("chapter `{id}` has no abridged side")))?,
            );
            if o.book_id != a.book_id {
                return Err(AppError::Data(format!(
                    "chapter `{id}` sides belong to different books"
                )));
            }
            Ok(ChapterPair {
                book_id: o.book_id.clone(),
                chapter_id: id.to_string(),
                original: o.document()?,
                abridged: a.document()?,
            })
        })
        .collect()
}

impl RowRecord {
    pub fn new(book_id: &str, chapter_id: &str, row_index: usize, row: &AlignmentRow) -> Self {
        RowRecord {
            book_id: book_id.into(),
            chapter_id: chapter_id.into(),
            row_index,
            o_start: row.o_start,
            o_len: row.o_len,
            a_start: row.a_start,
            a_len: row.a_len,
            score: row.score,
            flagged: row.flagged,
            validated: row.validated,
        }
    }

    pub fn row(&self) -> AlignmentRow {
        AlignmentRow {
            o_start: self.o_start,
            o_len: self.o_len,
            a_start: self.a_start,
            a_len: self.a_len,
            score: self.score,
            flagged: self.flagged,
            validated: self.validated,
        }
    }
}

pub fn row_records(book_id: &str, chapter_id: &str, rows: &[AlignmentRow]) -> Vec<RowRecord> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| RowRecord::new(book_id, chapter_id, i, r))
        .collect()
}

/// Rows of every chapter, keyed by chapter id. Row indices must run 0, 1, 2...
/// within each chapter.
pub fn group_rows(records: &[RowRecord]) -> Result<BTreeMap<String, Vec<AlignmentRow>>> {
    let mut out: BTreeMap<String, Vec<AlignmentRow>> = BTreeMap::new();
    for r in records {
        let rows = out.entry(r.chapter_id.clone()).or_default();
        if r.row_index != rows.len() {
            return Err(AppError::Data(format!(
                "chapter `{}`: row {} found where row {} was expected",
                r.chapter_id,
                r.row_index,
                rows.len()
            )));
        }
        rows.push(r.row());
    }
    Ok(out)
}

impl PassageRecord {
    pub fn new(chapter_id: &str, p: &PassagePair) -> Self {
        PassageRecord {
            chapter_id: chapter_id.into(),
            unit: p.unit,
            o_start_char: p.original.start,
            o_end_char: p.original.end,
            a_start_char: p.abridged.map(|s| s.start),
            a_end_char: p.abridged.map(|s| s.end),
        }
    }
}

/// Labels of every chapter, keyed by chapter id, in file order.
pub fn group_labels(records: &[LabelRecord]) -> Result<BTreeMap<String, Vec<(Span, Label)>>> {
    let mut out: BTreeMap<String, Vec<(Span, Label)>> = BTreeMap::new();
    for r in records {
        let label = Label::from_u8(r.label).ok_or_else(|| {
            AppError::Data(format!(
                "chapter `{}`: label must be 0 or 1, got {}",
                r.chapter_id, r.label
            ))
        })?;
        out.entry(r.chapter_id.clone())
            .or_default()
            .push((Span::new(r.token_start, r.token_end), label));
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_jsonl(&text, path)
}

pub fn parse_jsonl<T: DeserializeOwned>(text: &str, path: &Path) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| AppError::Json {
                path: path.into(),
                line: i + 1,
                source,
            })
        })
        .collect()
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Writes through a temporary file so readers never see a half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(|e| AppError::io(&tmp, e))?;
    file.write_all(contents).map_err(|e| AppError::io(&tmp, e))?;
    file.sync_all().map_err(|e| AppError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| AppError::io(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    write_atomic(path, to_jsonl(items).as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Chapter texts from either `{"chapter_id","text"}` records or chapter
/// records, of which only the given side is kept.
pub fn read_texts(path: &Path, side: Side) -> Result<BTreeMap<String, String>> {
    let values: Vec<serde_json::Value> = read_jsonl(path)?;
    let want = side.to_string();
    let mut out = BTreeMap::new();
    for (i, v) in values.into_iter().enumerate() {
        if let Some(s) = v.get("side") {
            if s.as_str() != Some(want.as_str()) {
                continue;
            }
        }
        let record: TextRecord = serde_json::from_value(v).map_err(|source| AppError::Json {
            path: path.into(),
            line: i + 1,
            source,
        })?;
        if out.insert(record.chapter_id.clone(), record.text).is_some() {
            return Err(AppError::Data(format!(
                "{}: duplicate chapter `{}`",
                path.display(),
                record.chapter_id
            )));
        }
    }
    Ok(out)
}
