//! Manual corrections to aligned rows.
//!
//! A correction edits the rows of one chapter. Structural edits keep the
//! rows a monotone partition of both sentence sequences, then rescore every
//! row and re-run the flag rule. A row keeps its `validated` mark only when
//! its spans did not change.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::align::{flag_rows, validate_rows, AlignmentRow, DEFAULT_FLAG_THRESHOLD};
use crate::error::{Error, Result};
use crate::similarity::{span_similarity, SimilarityKind};
use crate::text::Document;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CorrectionKind {
    /// Moves the boundary sentence of `source_row` into the adjacent `target_row`.
    MoveSentence,
    /// Joins `source_row` with the adjacent `target_row`.
    MergeRows,
    /// Cuts `source_row` in two before original sentence `sent_index` and
    /// abridged sentence `a_split`.
    SplitRow,
    Approve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Side {
    Original,
    Abridged,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Original => "original",
            Side::Abridged => "abridged",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Correction {
    pub chapter_id: String,
    pub kind: CorrectionKind,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub side: Option<Side>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub sent_index: Option<usize>,
    pub source_row: usize,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub target_row: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub a_split: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub timestamp: Option<u64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub validator_id: Option<String>,
}

impl Correction {
    fn bare(chapter_id: &str, kind: CorrectionKind, source_row: usize) -> Self {
        Correction {
            chapter_id: chapter_id.into(),
            kind,
            side: None,
            sent_index: None,
            source_row,
            target_row: None,
            a_split: None,
            timestamp: None,
            validator_id: None,
        }
    }

    pub fn approve(chapter_id: &str, row: usize) -> Self {
        Correction::bare(chapter_id, CorrectionKind::Approve, row)
    }

    pub fn move_sentence(
        chapter_id: &str,
        side: Side,
        sent_index: usize,
        source_row: usize,
        target_row: usize,
    ) -> Self {
        Correction {
            side: Some(side),
            sent_index: Some(sent_index),
            target_row: Some(target_row),
            ..Correction::bare(chapter_id, CorrectionKind::MoveSentence, source_row)
        }
    }

    pub fn merge_rows(chapter_id: &str, source_row: usize, target_row: usize) -> Self {
        Correction {
            target_row: Some(target_row),
            ..Correction::bare(chapter_id, CorrectionKind::MergeRows, source_row)
        }
    }

    pub fn split_row(chapter_id: &str, row: usize, sent_index: usize, a_split: Option<usize>) -> Self {
        Correction {
            side: Some(Side::Original),
            sent_index: Some(sent_index),
            a_split,
            ..Correction::bare(chapter_id, CorrectionKind::SplitRow, row)
        }
    }
}

/// Tokenized sentences of a chapter, used to rescore edited rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChapterTokens {
    pub original: Vec<Vec<String>>,
    pub abridged: Vec<Vec<String>>,
}

impl ChapterTokens {
    pub fn new(original: &Document, abridged: &Document) -> Self {
        ChapterTokens {
            original: original.sentence_words(),
            abridged: abridged.sentence_words(),
        }
    }

    /// Unpenalized similarity of a row's spans.
    pub fn score(&self, row: &AlignmentRow, kind: SimilarityKind) -> f64 {
        let o: Vec<&str> = self.original[row.o_start..row.o_end()]
            .iter()
            .flatten()
            .map(String::as_str)
            .collect();
        let a: Vec<&str> = self.abridged[row.a_start..row.a_end()]
            .iter()
            .flatten()
            .map(String::as_str)
            .collect();
        span_similarity(&o, &a, kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReviewConfig {
    pub similarity: SimilarityKind,
    pub threshold: f64,
}

impl Default for ReviewConfig {
    fn default() -> Self {
        ReviewConfig {
            similarity: SimilarityKind::Rouge1p,
            threshold: DEFAULT_FLAG_THRESHOLD,
        }
    }
}

fn reject(reason: impl Into<String>) -> Error {
    Error::Rejected(reason.into())
}

fn adjacent_target(c: &Correction, rows: usize) -> Result<usize> {
    let target = c.target_row.ok_or_else(|| reject("target_row is required"))?;
    if target >= rows {
        return Err(Error::RowNotFound(target));
    }
    if target + 1 != c.source_row && c.source_row + 1 != target {
        return Err(reject(alloc::format!(
            "rows {} and {target} are not adjacent",
            c.source_row
        )));
    }
    Ok(target)
}

/// Applies one correction and returns the chapter's new rows.
pub fn apply_correction(
    rows: &[AlignmentRow],
    c: &Correction,
    tokens: &ChapterTokens,
    config: &ReviewConfig,
) -> Result<Vec<AlignmentRow>> {
    let (n, m) = (tokens.original.len(), tokens.abridged.len());
    validate_rows(rows, n, m)?;
    if c.source_row >= rows.len() {
        return Err(Error::RowNotFound(c.source_row));
    }
    let s = c.source_row;
    let mut edited: Vec<AlignmentRow> = rows.to_vec();
    match c.kind {
        CorrectionKind::Approve => {
            edited[s].validated = true;
            return Ok(edited);
        }
        CorrectionKind::MoveSentence => {
            let t = adjacent_target(c, rows.len())?;
            let side = c.side.ok_or_else(|| reject("side is required"))?;
            let index = c.sent_index.ok_or_else(|| reject("sent_index is required"))?;
            let src = rows[s];
            let (start, len) = match side {
                Side::Original => (src.o_start, src.o_len),
                Side::Abridged => (src.a_start, src.a_len),
            };
            if index < start || index >= start + len {
                return Err(reject(alloc::format!("{side} sentence {index} is not in row {s}")));
            }
            let boundary = if t < s { start } else { start + len - 1 };
            if index != boundary {
                return Err(reject(alloc::format!(
                    "moving {side} sentence {index} from row {s} to row {t} would cross other sentences"
                )));
            }
            let (src, dst) = if t < s {
                let (a, b) = edited.split_at_mut(s);
                (&mut b[0], &mut a[t])
            } else {
                let (a, b) = edited.split_at_mut(t);
                (&mut a[s], &mut b[0])
            };
            let (src_start, src_len, dst_start, dst_len) = match side {
                Side::Original => (&mut src.o_start, &mut src.o_len, &mut dst.o_start, &mut dst.o_len),
                Side::Abridged => (&mut src.a_start, &mut src.a_len, &mut dst.a_start, &mut dst.a_len),
            };
            *src_len -= 1;
            *dst_len += 1;
            if t < s {
                *src_start += 1;
            } else {
                *dst_start -= 1;
            }
        }
        CorrectionKind::MergeRows => {
            let t = adjacent_target(c, rows.len())?;
            let (first, second) = (s.min(t), s.max(t));
            let b = edited.remove(second);
            let a = &mut edited[first];
            a.o_len += b.o_len;
            a.a_len += b.a_len;
        }
        CorrectionKind::SplitRow => {
            let row = rows[s];
            let at = c.sent_index.ok_or_else(|| reject("sent_index is required"))?;
            if at <= row.o_start || at >= row.o_end() {
                return Err(reject(alloc::format!(
                    "original sentence {at} does not split row {s} ({}..{})",
                    row.o_start,
                    row.o_end()
                )));
            }
            let a_at = c.a_split.unwrap_or(row.a_end());
            if a_at < row.a_start || a_at > row.a_end() {
                return Err(reject(alloc::format!("abridged sentence {a_at} is outside row {s}")));
            }
            let first = AlignmentRow {
                o_len: at - row.o_start,
                a_len: a_at - row.a_start,
                ..row
            };
            let second = AlignmentRow {
                o_start: at,
                o_len: row.o_end() - at,
                a_start: a_at,
                a_len: row.a_end() - a_at,
                ..row
            };
            edited.splice(s..=s, [first, second]);
        }
    }
    let mut normal = normalize(edited)?;
    for row in &mut normal {
        row.score = tokens.score(row, config.similarity);
        row.validated = row.validated
            && rows
                .iter()
                .any(|r| (r.o_start, r.o_len, r.a_start, r.a_len) == (row.o_start, row.o_len, row.a_start, row.a_len));
    }
    flag_rows(&mut normal, config.threshold);
    validate_rows(&normal, n, m)?;
    Ok(normal)
}

/// Drops rows emptied on both sides and splits multi-sentence deletions
/// into one row per original sentence.
fn normalize(rows: Vec<AlignmentRow>) -> Result<Vec<AlignmentRow>> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        match (row.o_len, row.a_len) {
            (0, 0) => {}
            (0, _) => {
                return Err(reject(
                    "a row would keep abridged sentences without any original sentence",
                ))
            }
            (k, 0) if k > 1 => out.extend((0..k).map(|i| AlignmentRow {
                o_start: row.o_start + i,
                o_len: 1,
                ..row
            })),
            _ => out.push(row),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{align_sentences, AlignerConfig};
    use alloc::vec;
    use proptest::prelude::*;

    fn chapter() -> (Document, Document) {
        (
            Document::new(
                "o",
                "Alpha beta gamma. Delta epsilon zeta. Eta theta iota. Kappa lambda mu. Nu xi omicron.",
            ),
            Document::new(
                "a",
                "Alpha beta. Delta epsilon zeta and theta. Kappa lambda. Nu xi omicron.",
            ),
        )
    }

    fn aligned() -> (ChapterTokens, Vec<AlignmentRow>) {
        let (o, a) = chapter();
        let t = ChapterTokens::new(&o, &a);
        let mut rows = align_sentences(&t.original, &t.abridged, &AlignerConfig::default())
            .unwrap()
            .rows;
        flag_rows(&mut rows, DEFAULT_FLAG_THRESHOLD);
        (t, rows)
    }

    fn shape(rows: &[AlignmentRow]) -> Vec<(usize, usize, usize, usize)> {
        rows.iter().map(|r| (r.o_start, r.o_len, r.a_start, r.a_len)).collect()
    }

    #[test]
    fn fixture_alignment() {
        let (_, rows) = aligned();
        assert_eq!(
            shape(&rows),
            vec![(0, 1, 0, 1), (1, 1, 1, 1), (2, 1, 2, 0), (3, 1, 2, 1), (4, 1, 3, 1)]
        );
    }

    #[test]
    fn approve_only_marks_row() {
        let (t, rows) = aligned();
        let out = apply_correction(&rows, &Correction::approve("c", 1), &t, &ReviewConfig::default()).unwrap();
        assert!(out[1].validated);
        let mut expect = rows.clone();
        expect[1].validated = true;
        assert_eq!(out, expect);
    }

    #[test]
    fn move_abridged_sentence_back() {
        let (t, rows) = aligned();
        // abridged sentence 2 ("Kappa lambda.") moves from row 3 to the deletion row 2
        let c = Correction::move_sentence("c", Side::Abridged, 2, 3, 2);
        let out = apply_correction(&rows, &c, &t, &ReviewConfig::default()).unwrap();
        assert_eq!(
            shape(&out),
            vec![(0, 1, 0, 1), (1, 1, 1, 1), (2, 1, 2, 1), (3, 1, 3, 0), (4, 1, 3, 1)]
        );
        // only the final "." is shared
        assert_eq!(out[2].score, 1.0 / 3.0);
        assert_eq!(out[3].score, 0.0);
        assert!(out[2].flagged && !out[3].flagged && !out[4].flagged);
        assert_eq!(out[0].score, 1.0);
    }

    #[test]
    fn move_original_sentence_forward() {
        let (t, rows) = aligned();
        // original sentence 1 joins row 2; row 1 keeps abridged sentence 1 alone, which is rejected
        let c = Correction::move_sentence("c", Side::Original, 1, 1, 2);
        assert!(matches!(
            apply_correction(&rows, &c, &t, &ReviewConfig::default()),
            Err(Error::Rejected(_))
        ));
        // moving the deleted sentence 2 back into row 1 is fine
        let c = Correction::move_sentence("c", Side::Original, 2, 2, 1);
        let out = apply_correction(&rows, &c, &t, &ReviewConfig::default()).unwrap();
        assert_eq!(
            shape(&out),
            vec![(0, 1, 0, 1), (1, 2, 1, 1), (3, 1, 2, 1), (4, 1, 3, 1)]
        );
        let o: Vec<&str> = ["delta", "epsilon", "zeta", ".", "eta", "theta", "iota", "."].into();
        let a: Vec<&str> = ["delta", "epsilon", "zeta", "and", "theta", "."].into();
        assert_eq!(out[1].score, span_similarity(&o, &a, SimilarityKind::Rouge1p));
    }

    #[test]
    fn crossing_moves_are_rejected() {
        let (t, rows) = aligned();
        let cfg = ReviewConfig::default();
        let merged = apply_correction(&rows, &Correction::merge_rows("c", 0, 1), &t, &cfg).unwrap();
        assert_eq!(shape(&merged)[0], (0, 2, 0, 2));
        // sentence 0 sits at the front of row 0; it cannot jump forward past sentence 1
        let c = Correction::move_sentence("c", Side::Abridged, 0, 0, 1);
        assert!(matches!(
            apply_correction(&merged, &c, &t, &cfg),
            Err(Error::Rejected(_))
        ));
        let far = Correction::move_sentence("c", Side::Abridged, 3, 4, 2);
        assert!(matches!(
            apply_correction(&rows, &far, &t, &cfg),
            Err(Error::Rejected(_))
        ));
        assert_eq!(
            apply_correction(&rows, &Correction::approve("c", 9), &t, &cfg),
            Err(Error::RowNotFound(9))
        );
    }

    #[test]
    fn split_and_merge_round_trip() {
        let (t, rows) = aligned();
        let cfg = ReviewConfig::default();
        let merged = apply_correction(&rows, &Correction::merge_rows("c", 1, 0), &t, &cfg).unwrap();
        let split = apply_correction(&merged, &Correction::split_row("c", 0, 1, Some(1)), &t, &cfg).unwrap();
        assert_eq!(shape(&split), shape(&rows));
        // without an abridged split point the second half becomes a deletion
        let tail = apply_correction(&merged, &Correction::split_row("c", 0, 1, None), &t, &cfg).unwrap();
        assert_eq!(shape(&tail)[..2], [(0, 1, 0, 2), (1, 1, 2, 0)]);
        let bad = Correction::split_row("c", 0, 0, None);
        assert!(apply_correction(&merged, &bad, &t, &cfg).is_err());
    }

    #[test]
    fn merged_deletions_stay_single() {
        let (t, mut rows) = aligned();
        let cfg = ReviewConfig::default();
        rows = apply_correction(
            &rows,
            &Correction::move_sentence("c", Side::Abridged, 2, 3, 2),
            &t,
            &cfg,
        )
        .unwrap();
        rows = apply_correction(&rows, &Correction::approve("c", 0), &t, &cfg).unwrap();
        let c = Correction::move_sentence("c", Side::Abridged, 1, 1, 0);
        rows = apply_correction(&rows, &c, &t, &cfg).unwrap();
        assert_eq!(shape(&rows)[..2], [(0, 1, 0, 2), (1, 1, 2, 0)]);
        assert!(!rows[0].validated);
    }

    proptest! {
        #[test]
        fn random_corrections_keep_partition(ops in proptest::collection::vec((0u8..4, 0usize..6, any::<bool>(), any::<bool>()), 1..40)) {
            let (t, mut rows) = aligned();
            let cfg = ReviewConfig::default();
            for (kind, row, forward, abridged) in ops {
                let row = row % rows.len();
                let target = if forward { row + 1 } else { row.wrapping_sub(1) };
                let r = rows[row];
                let c = match kind {
                    0 => Correction::approve("c", row),
                    1 => Correction::merge_rows("c", row, target),
                    2 => Correction::split_row("c", row, r.o_start + 1, Some(r.a_start + r.a_len / 2)),
                    _ => {
                        let side = if abridged { Side::Abridged } else { Side::Original };
                        let (start, len) = if abridged { (r.a_start, r.a_len) } else { (r.o_start, r.o_len) };
                        let index = if forward { (start + len).saturating_sub(1) } else { start };
                        Correction::move_sentence("c", side, index, row, target)
                    }
                };
                if let Ok(next) = apply_correction(&rows, &c, &t, &cfg) {
                    rows = next;
                }
                prop_assert!(validate_rows(&rows, t.original.len(), t.abridged.len()).is_ok());
                prop_assert!(rows.iter().all(|r| r.a_len > 0 || r.o_len == 1));
            }
        }
    }
}
