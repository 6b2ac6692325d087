//! Alignment rows under review: base rows plus an append-only correction log.
//!
//! The served state is always the base rows with every logged correction
//! replayed in order, so reopening the store reproduces it exactly.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use abridger_core::review::{apply_correction, ChapterTokens, Correction, ReviewConfig};
use abridger_core::text::Document;
use abridger_core::AlignmentRow;
use serde::Serialize;

use crate::error::{AppError, Result};
use crate::formats::{chapter_pairs, group_rows, read_jsonl, row_records, to_jsonl, ChapterRecord, RowRecord};

#[derive(Debug, Clone)]
pub struct ChapterState {
    pub book_id: String,
    pub chapter_id: String,
    pub original: Document,
    pub abridged: Document,
    pub tokens: ChapterTokens,
    pub rows: Vec<AlignmentRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChapterSummary {
    pub chapter_id: String,
    pub book_id: String,
    pub row_count: usize,
    pub flagged_count: usize,
    pub validated_count: usize,
}

impl ChapterState {
    pub fn summary(&self) -> ChapterSummary {
        ChapterSummary {
            chapter_id: self.chapter_id.clone(),
            book_id: self.book_id.clone(),
            row_count: self.rows.len(),
            flagged_count: self.rows.iter().filter(|r| r.flagged).count(),
            validated_count: self.rows.iter().filter(|r| r.validated).count(),
        }
    }

    pub fn records(&self) -> Vec<RowRecord> {
        row_records(&self.book_id, &self.chapter_id, &self.rows)
    }
}

/// An immutable view of every chapter.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    chapters: Vec<Arc<ChapterState>>,
    index: BTreeMap<String, usize>,
}

impl Snapshot {
    pub fn chapters(&self) -> &[Arc<ChapterState>] {
        &self.chapters
    }

    pub fn get(&self, chapter_id: &str) -> Option<&Arc<ChapterState>> {
        self.index.get(chapter_id).map(|&i| &self.chapters[i])
    }

    /// Current rows in rows.jsonl form.
    pub fn export(&self) -> String {
        let records: Vec<RowRecord> = self.chapters.iter().flat_map(|c| c.records()).collect();
        to_jsonl(&records)
    }

    /// Base rows with every logged correction applied in order. Chapters
    /// follow the order their rows appear in; a missing log counts as empty.
    pub fn replay(chapters: &Path, rows: &Path, log_path: &Path, config: &ReviewConfig) -> Result<Snapshot> {
        let chapter_records: Vec<ChapterRecord> = read_jsonl(chapters)?;
        let pairs = chapter_pairs(&chapter_records)?;
        let row_records: Vec<RowRecord> = read_jsonl(rows)?;
        let mut grouped = group_rows(&row_records)?;
        let mut order: Vec<&str> = Vec::new();
        for r in &row_records {
            if !order.contains(&r.chapter_id.as_str()) {
                order.push(&r.chapter_id);
            }
        }
        let mut by_id: BTreeMap<String, _> = pairs.into_iter().map(|p| (p.chapter_id.clone(), p)).collect();
        let mut snapshot = Snapshot::default();
        for id in order {
            let pair = by_id
                .remove(id)
                .ok_or_else(|| AppError::Data(format!("{}: rows for unknown chapter `{id}`", rows.display())))?;
            let rows_of = grouped.remove(id).unwrap_or_default();
            abridger_core::align::validate_rows(
                &rows_of,
                pair.original.sentence_count(),
                pair.abridged.sentence_count(),
            )
            .map_err(|e| AppError::Data(format!("{}: chapter `{id}`: {e}", rows.display())))?;
            snapshot.index.insert(id.to_string(), snapshot.chapters.len());
            snapshot.chapters.push(Arc::new(ChapterState {
                tokens: ChapterTokens::new(&pair.original, &pair.abridged),
                book_id: pair.book_id,
                chapter_id: pair.chapter_id,
                original: pair.original,
                abridged: pair.abridged,
                rows: rows_of,
            }));
        }

        let logged: Vec<Correction> = if log_path.exists() {
            read_jsonl(log_path)?
        } else {
            Vec::new()
        };
        for (i, c) in logged.iter().enumerate() {
            let chapter = snapshot.corrected(c, config).map_err(|e| {
                AppError::Data(format!(
                    "{}:{}: cannot replay correction: {e}",
                    log_path.display(),
                    i + 1
                ))
            })?;
            snapshot = snapshot.with_chapter(chapter);
        }
        Ok(snapshot)
    }

    fn corrected(&self, c: &Correction, config: &ReviewConfig) -> Result<ChapterState> {
        let current = self
            .get(&c.chapter_id)
            .ok_or_else(|| AppError::UnknownChapter(c.chapter_id.clone()))?;
        let rows = apply_correction(&current.rows, c, &current.tokens, config)?;
        Ok(ChapterState {
            rows,
            ..ChapterState::clone(current)
        })
    }

    fn with_chapter(&self, chapter: ChapterState) -> Snapshot {
        let mut next = self.clone();
        let i = self.index[&chapter.chapter_id];
        next.chapters[i] = Arc::new(chapter);
        next
    }
}

#[derive(Debug)]
pub struct RowStore {
    log_path: PathBuf,
    log: File,
    config: ReviewConfig,
    snapshot: Arc<Snapshot>,
}

impl RowStore {
    /// Loads chapters and base rows, then replays the correction log (created
    /// if missing).
    pub fn open(chapters: &Path, rows: &Path, log_path: &Path, config: ReviewConfig) -> Result<Self> {
        let snapshot = Snapshot::replay(chapters, rows, log_path, &config)?;
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(log_path)
            .map_err(|e| AppError::io(log_path, e))?;
        Ok(RowStore {
            log_path: log_path.into(),
            log,
            config,
            snapshot: Arc::new(snapshot),
        })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.snapshot)
    }

    /// Applies a correction, logs it and publishes the new state. A rejected
    /// correction leaves both the log and the state untouched.
    pub fn apply(&mut self, c: &Correction) -> Result<Arc<ChapterState>> {
        let chapter = self.snapshot.corrected(c, &self.config)?;
        let mut line = serde_json::to_string(c).expect("corrections serialize");
        line.push('\n');
        self.log
            .write_all(line.as_bytes())
            .and_then(|_| self.log.sync_data())
            .map_err(|e| AppError::io(&self.log_path, e))?;
        self.snapshot = Arc::new(self.snapshot.with_chapter(chapter));
        Ok(Arc::clone(self.snapshot.get(&c.chapter_id).expect("chapter present")))
    }
}
