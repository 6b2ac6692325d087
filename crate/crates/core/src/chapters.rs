//! Chapter boundaries and original/abridged chapter pairing.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::text::{Document, Span};

/// Heading given to the single chapter of a text in which no heading matched.
pub const WHOLE_TEXT_HEADING: &str = "(whole text)";

/// One detected chapter: its heading line and the body that follows it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChapterBounds {
    pub heading: String,
    /// Body range in characters; the heading line itself is excluded.
    pub body: Span,
}

/// Splits `text` into chapters at every line for which `is_heading` holds.
///
/// Lines are passed without their line terminator. Text before the first
/// heading is dropped. Without any heading the whole text forms one chapter
/// headed [`WHOLE_TEXT_HEADING`].
pub fn split_chapters<F>(text: &str, mut is_heading: F) -> Vec<ChapterBounds>
where
    F: FnMut(&str) -> bool,
{
    // (heading text, char offset of the heading line start, char offset after its newline)
    let mut headings: Vec<(String, usize, usize)> = Vec::new();
    let mut offset = 0;
    for raw_line in text.split_inclusive('\n') {
        let line_chars = raw_line.chars().count();
        let line = raw_line.trim_end_matches(['\n', '\r']);
        if is_heading(line) {
            headings.push((line.trim().to_string(), offset, offset + line_chars));
        }
        offset += line_chars;
    }
    let total = offset;

    if headings.is_empty() {
        return alloc::vec![ChapterBounds {
            heading: WHOLE_TEXT_HEADING.to_string(),
            body: Span::new(0, total),
        }];
    }
    let mut chapters = Vec::with_capacity(headings.len());
    for (i, (heading, _, body_start)) in headings.iter().enumerate() {
        let body_end = headings.get(i + 1).map_or(total, |next| next.1);
        chapters.push(ChapterBounds {
            heading: heading.clone(),
            body: Span::new(*body_start, body_end),
        });
    }
    chapters
}

/// The original and abridged versions of one chapter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChapterPair {
    pub book_id: String,
    pub chapter_id: String,
    pub original: Document,
    pub abridged: Document,
}

/// A chapter heading together with its segmented body.
#[derive(Debug, Clone)]
pub struct Chapter {
    pub heading: String,
    pub document: Document,
}

/// Pairs chapters by position; the chapter id comes from the original heading.
///
/// Repeated original headings get a `#n` suffix so ids stay unique in the book.
pub fn pair_chapters(book_id: &str, original: Vec<Chapter>, abridged: Vec<Chapter>) -> Result<Vec<ChapterPair>> {
    if original.len() != abridged.len() {
        let shared = original.len().min(abridged.len());
        let first_unmatched = original
            .get(shared)
            .or_else(|| abridged.get(shared))
            .map(|c| c.heading.clone())
            .unwrap_or_default();
        return Err(Error::ChapterCountMismatch {
            original: original.len(),
            abridged: abridged.len(),
            first_unmatched,
        });
    }
    let mut seen: Vec<String> = Vec::new();
    let mut pairs = Vec::with_capacity(original.len());
    for (o, a) in original.into_iter().zip(abridged) {
        let repeats = seen.iter().filter(|h| **h == o.heading).count();
        seen.push(o.heading.clone());
        let chapter_id = if repeats == 0 {
            o.heading
        } else {
            alloc::format!("{}#{}", o.heading, repeats + 1)
        };
        pairs.push(ChapterPair {
            book_id: book_id.to_string(),
            chapter_id,
            original: o.document,
            abridged: a.document,
        });
    }
    Ok(pairs)
}
