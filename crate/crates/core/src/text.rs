//! Documents, rule-based sentence segmentation and word tokenization.
//!
//! Every offset in this module counts Unicode scalar values (`char`s), not
//! bytes. A [`Document`] keeps the raw text untouched so that whitespace
//! between sentences (paragraph breaks in particular) survives any
//! round trip through sentence spans.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Half-open character range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub const fn len(&self) -> usize {
        self.end - self.start
    }

    pub const fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// True when `other` lies entirely inside `self`.
    pub const fn encloses(&self, other: &Span) -> bool {
        other.start >= self.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// A lowercased word or punctuation token with its position in the owning text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub text: String,
    pub span: Span,
}

impl Token {
    /// Punctuation tokens contain no letter or digit.
    pub fn is_punctuation(&self) -> bool {
        is_punctuation(&self.text)
    }
}

pub(crate) fn is_punctuation(word: &str) -> bool {
    !word.chars().any(char::is_alphanumeric)
}

/// Where paragraph boundaries fall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ParagraphBreak {
    /// Paragraphs are separated by at least one blank line (hard-wrapped book text).
    #[default]
    BlankLine,
    /// Every line break starts a new paragraph (one paragraph per line).
    LineBreak,
}

/// Abbreviations that never end a sentence, lowercased and without the final period.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "messrs", "mme", "mlle", "dr", "st", "prof", "rev", "hon", "capt", "col", "gen", "lieut", "lt",
    "sgt", "maj", "esq", "jr", "sr", "gov", "sen", "rep", "ft", "mt", "vs", "etc", "viz", "cf", "vol", "ch", "pp",
    "e.g", "i.e", "a.m", "p.m", "jan", "feb", "aug", "sept", "oct", "nov", "dec",
];

const TERMINATORS: &[char] = &['.', '!', '?'];
const CLOSERS: &[char] = &['"', '\'', '\u{201d}', '\u{2019}', ')', ']', '}', '\u{bb}'];
const JOINERS: &[char] = &['\'', '\u{2019}', '-', '\u{2010}'];

/// Sentence and paragraph spans of one text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Segmentation {
    pub sentences: Vec<Span>,
    pub paragraphs: Vec<Span>,
}

/// Rule-based sentence splitter.
///
/// A sentence ends at a run of `.`, `!` or `?` (plus any closing quotes or
/// brackets) that is followed by whitespace, unless the period closes a
/// known abbreviation or a single capital initial, or the next word starts
/// with a lowercase letter. A paragraph break always ends a sentence.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: BTreeSet<String>,
    paragraph_break: ParagraphBreak,
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter::new(ParagraphBreak::default())
    }
}

impl Segmenter {
    pub fn new(paragraph_break: ParagraphBreak) -> Self {
        Segmenter {
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
            paragraph_break,
        }
    }

    /// Replaces the abbreviation list. Entries are lowercased and a trailing period is dropped.
    pub fn with_abbreviations<I, S>(mut self, abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.abbreviations = abbreviations
            .into_iter()
            .map(|a| a.as_ref().trim().trim_end_matches('.').to_lowercase())
            .filter(|a| !a.is_empty())
            .collect();
        self
    }

    pub fn paragraph_break(&self) -> ParagraphBreak {
        self.paragraph_break
    }

    pub fn segment(&self, text: &str) -> Segmentation {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Segmentation::default();
        for block in self.paragraph_blocks(&chars) {
            let first = out.sentences.len();
            self.split_block(&chars, block, &mut out.sentences);
            if out.sentences.len() > first {
                out.paragraphs.push(block);
            }
        }
        out
    }

    pub fn sentences(&self, text: &str) -> Vec<Span> {
        self.segment(text).sentences
    }

    /// Trimmed, non-empty regions between paragraph breaks.
    fn paragraph_blocks(&self, chars: &[char]) -> Vec<Span> {
        let needed = match self.paragraph_break {
            ParagraphBreak::BlankLine => 2,
            ParagraphBreak::LineBreak => 1,
        };
        let mut blocks = Vec::new();
        let mut block_start: Option<usize> = None;
        let mut last_content = 0;
        let mut i = 0;
        while i < chars.len() {
            if chars[i].is_whitespace() {
                let run_start = i;
                let mut newlines = 0;
                while i < chars.len() && chars[i].is_whitespace() {
                    if chars[i] == '\n' {
                        newlines += 1;
                    }
                    i += 1;
                }
                if newlines >= needed {
                    if let Some(start) = block_start.take() {
                        blocks.push(Span::new(start, run_start));
                    }
                }
            } else {
                if block_start.is_none() {
                    block_start = Some(i);
                }
                i += 1;
                last_content = i;
            }
        }
        if let Some(start) = block_start {
            blocks.push(Span::new(start, last_content));
        }
        blocks
    }

    fn split_block(&self, chars: &[char], block: Span, out: &mut Vec<Span>) {
        let end = block.end;
        let mut current = block.start;
        let mut i = block.start;
        while i < end {
            if !TERMINATORS.contains(&chars[i]) {
                i += 1;
                continue;
            }
            let mut j = i + 1;
            while j < end && TERMINATORS.contains(&chars[j]) {
                j += 1;
            }
            let single_period = j == i + 1 && chars[i] == '.';
            while j < end && CLOSERS.contains(&chars[j]) {
                j += 1;
            }
            if j >= end {
                break;
            }
            if !chars[j].is_whitespace() {
                i = j;
                continue;
            }
            let mut next = j;
            while next < end && chars[next].is_whitespace() {
                next += 1;
            }
            let abbreviation = single_period && self.ends_with_abbreviation(chars, current, i);
            let continues_lowercase = chars[next].is_lowercase();
            if abbreviation || continues_lowercase {
                i = next;
                continue;
            }
            out.push(Span::new(current, j));
            current = next;
            i = next;
        }
        if current < end {
            out.push(Span::new(current, end));
        }
    }

    fn ends_with_abbreviation(&self, chars: &[char], sentence_start: usize, period: usize) -> bool {
        let mut w = period;
        while w > sentence_start && (chars[w - 1].is_alphabetic() || chars[w - 1] == '.') {
            w -= 1;
        }
        if w == period {
            return false;
        }
        let word = &chars[w..period];
        if word.len() == 1 && word[0].is_uppercase() {
            return true;
        }
        let lowered: String = word.iter().flat_map(|c| c.to_lowercase()).collect();
        self.abbreviations.contains(&lowered)
    }
}

/// Sentence spans of `text` using the default segmenter.
pub fn segment_sentences(text: &str) -> Vec<Span> {
    Segmenter::default().sentences(text)
}

/// Tokenizes `text`; offsets are relative to the start of `text`.
///
/// Tokens are maximal runs of letters and digits, where an apostrophe or
/// hyphen between two alphanumerics stays inside the word (`it's`,
/// `re-established`). Every other non-whitespace character is a token of
/// its own.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        if c.is_alphanumeric() {
            loop {
                if j < chars.len() && chars[j].is_alphanumeric() {
                    j += 1;
                } else if j + 1 < chars.len() && JOINERS.contains(&chars[j]) && chars[j + 1].is_alphanumeric() {
                    j += 2;
                } else {
                    break;
                }
            }
        }
        tokens.push(Token {
            text: chars[i..j].iter().flat_map(|c| c.to_lowercase()).collect(),
            span: Span::new(i, j),
        });
        i = j;
    }
    tokens
}

/// Lowercased token texts of `text`.
pub fn words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

/// A chapter body with its sentence and paragraph index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    id: String,
    text: String,
    /// Byte offset of every char, plus the total byte length.
    byte_offsets: Vec<usize>,
    sentences: Vec<Span>,
    paragraphs: Vec<Span>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document::with_segmenter(id, text, &Segmenter::default())
    }

    pub fn with_segmenter(id: impl Into<String>, text: impl Into<String>, segmenter: &Segmenter) -> Self {
        let text = text.into();
        let seg = segmenter.segment(&text);
        Document {
            id: id.into(),
            byte_offsets: byte_offsets(&text),
            text,
            sentences: seg.sentences,
            paragraphs: seg.paragraphs,
        }
    }

    /// Rebuilds a document from stored spans, checking every invariant.
    pub fn from_parts(
        id: impl Into<String>,
        text: impl Into<String>,
        sentences: Vec<Span>,
        paragraphs: Vec<Span>,
    ) -> Result<Self> {
        let text = text.into();
        let doc = Document {
            id: id.into(),
            byte_offsets: byte_offsets(&text),
            text,
            sentences,
            paragraphs,
        };
        doc.check()?;
        Ok(doc)
    }

    fn check(&self) -> Result<()> {
        let len = self.len_chars();
        let mut prev_end = 0;
        for (i, s) in self.sentences.iter().enumerate() {
            if s.is_empty() || s.end > len {
                return Err(Error::InvalidSpan {
                    start: s.start,
                    end: s.end,
                    len,
                });
            }
            if s.start < prev_end {
                return Err(Error::InvalidDocument(alloc::format!(
                    "sentence {i} overlaps its predecessor"
                )));
            }
            if !self
                .slice(Span::new(prev_end, s.start))
                .chars()
                .all(char::is_whitespace)
            {
                return Err(Error::InvalidDocument(alloc::format!(
                    "non-whitespace text before sentence {i}"
                )));
            }
            prev_end = s.end;
        }
        if !self.slice(Span::new(prev_end, len)).chars().all(char::is_whitespace) {
            return Err(Error::InvalidDocument(
                "non-whitespace text after the last sentence".into(),
            ));
        }
        let mut prev_end = 0;
        for (i, p) in self.paragraphs.iter().enumerate() {
            if p.is_empty() || p.end > len || p.start < prev_end {
                return Err(Error::InvalidDocument(alloc::format!("paragraph {i} is out of order")));
            }
            let starts = self.sentences.iter().any(|s| s.start == p.start);
            let ends = self.sentences.iter().any(|s| s.end == p.end);
            if !starts || !ends {
                return Err(Error::InvalidDocument(alloc::format!(
                    "paragraph {i} does not follow sentence boundaries"
                )));
            }
            prev_end = p.end;
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn len_chars(&self) -> usize {
        self.byte_offsets.len() - 1
    }

    pub fn sentences(&self) -> &[Span] {
        &self.sentences
    }

    pub fn paragraphs(&self) -> &[Span] {
        &self.paragraphs
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    /// Text under a character span. Panics if the span is out of bounds.
    pub fn slice(&self, span: Span) -> &str {
        &self.text[self.byte_offsets[span.start]..self.byte_offsets[span.end]]
    }

    pub fn sentence_text(&self, index: usize) -> &str {
        self.slice(self.sentences[index])
    }

    /// Character span covering sentences `start..start + len`.
    ///
    /// An empty range yields an empty span positioned where sentence `start` begins.
    pub fn sentence_range_span(&self, start: usize, len: usize) -> Span {
        if len == 0 {
            let at = match self.sentences.get(start) {
                Some(s) => s.start,
                None => self.sentences.last().map_or(0, |s| s.end),
            };
            return Span::new(at, at);
        }
        Span::new(self.sentences[start].start, self.sentences[start + len - 1].end)
    }

    pub fn tokens(&self, span: Span) -> Vec<Token> {
        tokenize_words(self, span)
    }

    pub fn all_tokens(&self) -> Vec<Token> {
        self.tokens(Span::new(0, self.len_chars()))
    }

    /// Token texts of each sentence, in order.
    pub fn sentence_words(&self) -> Vec<Vec<String>> {
        self.sentences
            .iter()
            .map(|s| self.tokens(*s).into_iter().map(|t| t.text).collect())
            .collect()
    }

    /// Sentences per paragraph.
    pub fn paragraph_sentence_counts(&self) -> Vec<usize> {
        self.paragraphs
            .iter()
            .map(|p| self.sentences.iter().filter(|s| p.encloses(s)).count())
            .collect()
    }
}

/// Tokens of `document` under `span`, with offsets into the document.
pub fn tokenize_words(document: &Document, span: Span) -> Vec<Token> {
    let mut tokens = tokenize(document.slice(span));
    for t in &mut tokens {
        t.span.start += span.start;
        t.span.end += span.start;
    }
    tokens
}

fn byte_offsets(text: &str) -> Vec<usize> {
    let mut offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
    offsets.push(text.len());
    offsets
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn texts(text: &str, spans: &[Span]) -> Vec<String> {
        let doc = Document::new("t", text);
        spans.iter().map(|s| doc.slice(*s).to_string()).collect()
    }

    #[test]
    fn two_plain_sentences() {
        let text = "It rained. It stopped.";
        let spans = segment_sentences(text);
        assert_eq!(texts(text, &spans), vec!["It rained.", "It stopped."]);
    }

    #[test]
    fn abbreviation_does_not_split() {
        let text = "Mr. Guppy sat down.";
        assert_eq!(segment_sentences(text), vec![Span::new(0, 19)]);
    }

    #[test]
    fn empty_text_has_no_sentences() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences(" \n\n  ").is_empty());
    }

    #[test]
    fn closing_quote_stays_with_sentence() {
        let text = "\"Go away!\" He left. (Quietly.) Done";
        let spans = segment_sentences(text);
        assert_eq!(
            texts(text, &spans),
            vec!["\"Go away!\"", "He left.", "(Quietly.)", "Done"]
        );
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        let text = "\"Is it?\" said he. Yes.";
        let spans = segment_sentences(text);
        assert_eq!(texts(text, &spans), vec!["\"Is it?\" said he.", "Yes."]);
    }

    #[test]
    fn blank_line_forces_boundary_and_paragraph() {
        let text = "First line\nwrapped here\n\nSecond para without stop";
        let seg = Segmenter::default().segment(text);
        assert_eq!(
            texts(text, &seg.sentences),
            vec!["First line\nwrapped here", "Second para without stop"]
        );
        assert_eq!(seg.paragraphs.len(), 2);
    }

    #[test]
    fn line_break_mode_splits_every_line() {
        let text = "One. Two\nThree";
        let seg = Segmenter::new(ParagraphBreak::LineBreak).segment(text);
        assert_eq!(texts(text, &seg.sentences), vec!["One.", "Two", "Three"]);
        assert_eq!(seg.paragraphs, vec![Span::new(0, 8), Span::new(9, 14)]);
    }

    #[test]
    fn custom_abbreviations() {
        let seg = Segmenter::default().with_abbreviations(["Gen."]);
        assert_eq!(seg.sentences("Gen. Lee won. Mr. X.").len(), 3);
    }

    #[test]
    fn tokenizes_table_sentence() {
        let got = words("The letter was not unproductive.");
        assert_eq!(got, vec!["the", "letter", "was", "not", "unproductive", "."]);
    }

    #[test]
    fn tokenizer_edge_cases() {
        assert!(tokenize("").is_empty());
        assert_eq!(words("it's"), vec!["it's"]);
        assert_eq!(words("re-established"), vec!["re-established"]);
        assert_eq!(words("'Yes,' -- no"), vec!["'", "yes", ",", "'", "-", "-", "no"]);
        assert_eq!(words("Mr. Guppy"), vec!["mr", ".", "guppy"]);
    }

    #[test]
    fn offsets_count_chars_not_bytes() {
        let doc = Document::new("t", "Café é. Naïve.");
        let toks = doc.all_tokens();
        assert_eq!(toks[0].text, "café");
        assert_eq!(toks[0].span, Span::new(0, 4));
        assert_eq!(doc.slice(toks[1].span), "é");
        assert_eq!(doc.sentence_text(1), "Naïve.");
    }

    #[test]
    fn from_parts_rejects_bad_spans() {
        let err = Document::from_parts("x", "ab cd", vec![Span::new(0, 2), Span::new(1, 5)], vec![]);
        assert!(err.is_err());
        let err = Document::from_parts("x", "ab cd", vec![Span::new(0, 1)], vec![]);
        assert!(err.is_err());
        let ok = Document::from_parts("x", "ab cd", vec![Span::new(0, 5)], vec![Span::new(0, 5)]);
        assert!(ok.is_ok());
    }

    #[test]
    fn sentence_range_span_handles_empty_ranges() {
        let doc = Document::new("t", "A b. C d.");
        assert_eq!(doc.sentence_range_span(0, 2), Span::new(0, 9));
        assert_eq!(doc.sentence_range_span(1, 0), Span::new(5, 5));
        assert_eq!(doc.sentence_range_span(2, 0), Span::new(9, 9));
    }
}
