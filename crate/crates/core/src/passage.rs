//! Mapping original passages to their abridged counterparts through shared
//! word runs ("slices"), and preserved/removed token labels.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::align::AlignmentRow;
use crate::error::{Error, Result};
use crate::text::{Document, Span, Token};

/// A run of identical lowercased tokens found in both texts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Slice {
    pub original: Span,
    pub abridged: Span,
    /// Number of tokens in the run.
    pub word_count: usize,
}

/// A common run by token index: `(original start, abridged start, length)`.
pub type Run = (usize, usize, usize);

/// Greedy longest-first common runs between two token sequences.
///
/// Each round takes the longest run made only of tokens not yet claimed on
/// either side (ties: earliest original position, then earliest abridged
/// position). Runs are returned in original order. They are disjoint on
/// both sides but may cross each other, which is how reordering shows up.
pub fn common_runs<T: PartialEq>(original: &[T], abridged: &[T]) -> Vec<Run> {
    let (n, m) = (original.len(), abridged.len());
    let mut used_o = vec![false; n];
    let mut used_a = vec![false; m];
    let mut runs = Vec::new();
    // suffix[i][j]: run length starting at (i, j) over unclaimed tokens.
    let mut suffix = vec![0usize; (n + 1) * (m + 1)];
    loop {
        let mut best: Option<Run> = None;
        for i in (0..n).rev() {
            for j in (0..m).rev() {
                let len = if !used_o[i] && !used_a[j] && original[i] == abridged[j] {
                    suffix[(i + 1) * (m + 1) + j + 1] + 1
                } else {
                    0
                };
                suffix[i * (m + 1) + j] = len;
            }
        }
        for i in 0..n {
            for j in 0..m {
                let len = suffix[i * (m + 1) + j];
                if len > best.map_or(0, |b| b.2) {
                    best = Some((i, j, len));
                }
            }
        }
        let Some((i, j, len)) = best else { break };
        for k in 0..len {
            used_o[i + k] = true;
            used_a[j + k] = true;
        }
        runs.push((i, j, len));
    }
    runs.sort_unstable();
    runs
}

/// Slices between the tokens of an original span and an abridged span.
///
/// Runs come from [`common_runs`]; punctuation at either edge of a run is
/// trimmed so a slice starts and ends on a word, and all-punctuation runs
/// are dropped.
pub fn matching_slices(original: &[Token], abridged: &[Token]) -> Vec<Slice> {
    let o: Vec<&str> = original.iter().map(|t| t.text.as_str()).collect();
    let a: Vec<&str> = abridged.iter().map(|t| t.text.as_str()).collect();
    common_runs(&o, &a)
        .into_iter()
        .filter_map(|(i, j, len)| {
            let run = &original[i..i + len];
            let lead = run.iter().take_while(|t| t.is_punctuation()).count();
            if lead == len {
                return None;
            }
            let trail = run.iter().rev().take_while(|t| t.is_punctuation()).count();
            let (start, end) = (lead, len - trail);
            Some(Slice {
                original: Span::new(original[i + start].span.start, original[i + end - 1].span.end),
                abridged: Span::new(abridged[j + start].span.start, abridged[j + end - 1].span.end),
                word_count: end - start,
            })
        })
        .collect()
}

/// Slices of every row of an aligned chapter, in chapter character coordinates.
pub fn chapter_slices(original: &Document, abridged: &Document, rows: &[AlignmentRow]) -> Vec<Slice> {
    rows.iter()
        .filter(|r| r.a_len > 0)
        .flat_map(|r| {
            let o = original.tokens(original.sentence_range_span(r.o_start, r.o_len));
            let a = abridged.tokens(abridged.sentence_range_span(r.a_start, r.a_len));
            matching_slices(&o, &a)
        })
        .collect()
}

/// Abridged range covering every slice enclosed by the original passage,
/// or `None` when no slice falls inside it.
pub fn passage_abridgement(slices: &[Slice], passage: Span) -> Option<Span> {
    slices
        .iter()
        .filter(|s| passage.encloses(&s.original))
        .map(|s| s.abridged)
        .reduce(|acc, s| Span::new(acc.start.min(s.start), acc.end.max(s.end)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PassageUnit {
    Row,
    Sentence,
    Paragraph,
    Chunk,
}

impl FromStr for PassageUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" => Ok(PassageUnit::Row),
            "sentence" => Ok(PassageUnit::Sentence),
            "paragraph" => Ok(PassageUnit::Paragraph),
            "chunk" => Ok(PassageUnit::Chunk),
            other => Err(Error::UnknownUnit(other.into())),
        }
    }
}

impl fmt::Display for PassageUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PassageUnit::Row => "row",
            PassageUnit::Sentence => "sentence",
            PassageUnit::Paragraph => "paragraph",
            PassageUnit::Chunk => "chunk",
        })
    }
}

/// Largest number of sentences a chunk may hold (unless one paragraph alone exceeds it).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkConfig {
    pub max_sentences: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        ChunkConfig { max_sentences: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassagePair {
    pub unit: PassageUnit,
    pub original: Span,
    /// Original sentences `start..end` covered by the passage.
    pub sentences: (usize, usize),
    pub abridged: Option<Span>,
}

/// Cuts the original chapter into passages of the given unit. The abridged
/// side is left empty; fill it with [`map_passages`].
///
/// `rows` is only consulted for [`PassageUnit::Row`].
pub fn make_passages(
    chapter: &Document,
    unit: PassageUnit,
    chunk: ChunkConfig,
    rows: &[AlignmentRow],
) -> Result<Vec<PassagePair>> {
    if chunk.max_sentences == 0 {
        return Err(Error::InvalidConfig("chunk size must be at least one sentence".into()));
    }
    let ranges: Vec<(usize, usize)> = match unit {
        PassageUnit::Row => rows.iter().map(|r| (r.o_start, r.o_end())).collect(),
        PassageUnit::Sentence => (0..chapter.sentence_count()).map(|i| (i, i + 1)).collect(),
        PassageUnit::Paragraph => paragraph_ranges(chapter),
        PassageUnit::Chunk => {
            let mut chunks = Vec::new();
            let mut current: Option<(usize, usize)> = None;
            for (start, end) in paragraph_ranges(chapter) {
                current = match current {
                    Some((cs, ce)) if ce - cs + (end - start) <= chunk.max_sentences => Some((cs, end)),
                    Some(done) => {
                        chunks.push(done);
                        Some((start, end))
                    }
                    None => Some((start, end)),
                };
            }
            chunks.extend(current);
            chunks
        }
    };
    let count = chapter.sentence_count();
    ranges
        .into_iter()
        .map(|(start, end)| {
            if end > count || start >= end {
                return Err(Error::SentenceOutOfRange {
                    side: "original",
                    index: end.saturating_sub(1),
                    count,
                });
            }
            Ok(PassagePair {
                unit,
                original: chapter.sentence_range_span(start, end - start),
                sentences: (start, end),
                abridged: None,
            })
        })
        .collect()
}

/// Sentence index range of each paragraph.
fn paragraph_ranges(chapter: &Document) -> Vec<(usize, usize)> {
    let sentences = chapter.sentences();
    let mut next = 0;
    chapter
        .paragraphs()
        .iter()
        .map(|p| {
            let start = next;
            while next < sentences.len() && p.encloses(&sentences[next]) {
                next += 1;
            }
            (start, next)
        })
        .filter(|(s, e)| e > s)
        .collect()
}

/// Fills in the abridged range of every passage from chapter slices.
pub fn map_passages(passages: &mut [PassagePair], slices: &[Slice]) {
    for p in passages {
        p.abridged = passage_abridgement(slices, p.original);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Preserved = 0,
    Removed = 1,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Preserved),
            1 => Some(Label::Removed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenLabel {
    pub token: Token,
    pub label: Label,
}

/// Labels each original token preserved when its text occurs anywhere in
/// the abridged tokens, removed otherwise.
pub fn label_tokens(original: &[Token], abridged: &[Token]) -> Vec<TokenLabel> {
    let kept: BTreeSet<&str> = abridged.iter().map(|t| t.text.as_str()).collect();
    original
        .iter()
        .map(|t| TokenLabel {
            token: t.clone(),
            label: if kept.contains(t.text.as_str()) {
                Label::Preserved
            } else {
                Label::Removed
            },
        })
        .collect()
}

/// Gold labels for every token of the original chapter, row by row.
///
/// Whitespace between sentences carries no tokens, so the result covers
/// [`Document::all_tokens`] exactly.
pub fn gold_labels(original: &Document, abridged: &Document, rows: &[AlignmentRow]) -> Vec<TokenLabel> {
    rows.iter()
        .flat_map(|r| {
            let o = original.tokens(original.sentence_range_span(r.o_start, r.o_len));
            let a = abridged.tokens(abridged.sentence_range_span(r.a_start, r.a_len));
            label_tokens(&o, &a)
        })
        .collect()
}

/// Token labels reduced to the form stored in label files.
pub fn label_spans(labels: &[TokenLabel]) -> Vec<(Span, Label)> {
    labels.iter().map(|l| (l.token.span, l.label)).collect()
}
