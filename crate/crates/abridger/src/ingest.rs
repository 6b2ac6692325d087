//! Book files to paired, segmented chapters.

use std::path::Path;

use abridger_core::chapters::{pair_chapters, split_chapters, Chapter, ChapterBounds};
use abridger_core::text::{Document, Segmenter};
use abridger_core::ChapterPair;
use regex::Regex;

use crate::error::{AppError, Result};

/// Patterns used when no pattern file is given.
pub const DEFAULT_PATTERNS: &str = include_str!("../data/heading_patterns.txt");

/// Chapter heading regexes. Each must match a whole line (surrounding
/// whitespace ignored).
#[derive(Debug, Clone)]
pub struct HeadingPatterns {
    patterns: Vec<Regex>,
}

impl Default for HeadingPatterns {
    fn default() -> Self {
        HeadingPatterns::parse(DEFAULT_PATTERNS).expect("bundled heading patterns compile")
    }
}

impl HeadingPatterns {
    /// One pattern per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let patterns = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|p| {
                Regex::new(&format!("^(?:{p})$")).map_err(|source| AppError::Pattern {
                    pattern: p.to_string(),
                    source,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if patterns.is_empty() {
            return Err(AppError::Data("no heading patterns given".into()));
        }
        Ok(HeadingPatterns { patterns })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        HeadingPatterns::parse(&text)
    }

    pub fn is_heading(&self, line: &str) -> bool {
        let line = line.trim();
        !line.is_empty() && self.patterns.iter().any(|p| p.is_match(line))
    }
}

pub fn detect_chapters(text: &str, patterns: &HeadingPatterns) -> Vec<ChapterBounds> {
    split_chapters(text, |line| patterns.is_heading(line))
}

/// Chapters of one side of a book, segmented.
pub fn chapters_of(text: &str, patterns: &HeadingPatterns, segmenter: &Segmenter) -> Vec<Chapter> {
    let offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).chain([text.len()]).collect();
    detect_chapters(text, patterns)
        .into_iter()
        .map(|c| {
            let body = &text[offsets[c.body.start]..offsets[c.body.end]];
            Chapter {
                document: Document::with_segmenter(c.heading.clone(), body, segmenter),
                heading: c.heading,
            }
        })
        .collect()
}

pub fn ingest_book(
    book_id: &str,
    original: &str,
    abridged: &str,
    patterns: &HeadingPatterns,
    segmenter: &Segmenter,
) -> Result<Vec<ChapterPair>> {
    Ok(pair_chapters(
        book_id,
        chapters_of(original, patterns, segmenter),
        chapters_of(abridged, patterns, segmenter),
    )?)
}
