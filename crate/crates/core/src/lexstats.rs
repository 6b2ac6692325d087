//! Corpus statistics: sizes, row shapes, score bins, lexical relations
//! between aligned spans, and a coarse function/content word split.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::align::AlignmentRow;
use crate::passage::matching_slices;
use crate::text::{is_punctuation, Document, Token};

/// Word-type relations between one original span and its abridged span.
///
/// Type counts follow set semantics over lowercased words; the `*_tokens`
/// fields count running tokens whose type falls in each class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LexRelation {
    pub o_types: usize,
    pub a_types: usize,
    pub o_rmv: usize,
    pub o_prsv: usize,
    pub a_add: usize,
    pub a_prsv: usize,
    pub o_tokens: usize,
    pub a_tokens: usize,
    pub o_rmv_tokens: usize,
    pub o_prsv_tokens: usize,
    pub a_add_tokens: usize,
    pub a_prsv_tokens: usize,
    pub has_rmv: bool,
    pub has_prsv: bool,
    pub has_add: bool,
    pub has_reord: bool,
}

fn types(tokens: &[Token]) -> BTreeSet<&str> {
    tokens.iter().map(|t| t.text.as_str()).collect()
}

/// Original word types missing from the abridged span.
pub fn removed_types(original: &[Token], abridged: &[Token]) -> BTreeSet<String> {
    let a = types(abridged);
    types(original)
        .into_iter()
        .filter(|w| !a.contains(w))
        .map(ToString::to_string)
        .collect()
}

/// Abridged word types missing from the original span.
pub fn added_types(original: &[Token], abridged: &[Token]) -> BTreeSet<String> {
    removed_types(abridged, original)
}

pub fn lexical_relations(original: &[Token], abridged: &[Token]) -> LexRelation {
    let o = types(original);
    let a = types(abridged);
    let o_prsv = o.intersection(&a).count();
    let o_rmv = o.len() - o_prsv;
    let a_add = a.len() - o_prsv;
    let o_prsv_tokens = original.iter().filter(|t| a.contains(t.text.as_str())).count();
    let a_prsv_tokens = abridged.iter().filter(|t| o.contains(t.text.as_str())).count();
    LexRelation {
        o_types: o.len(),
        a_types: a.len(),
        o_rmv,
        o_prsv,
        a_add,
        a_prsv: o_prsv,
        o_tokens: original.len(),
        a_tokens: abridged.len(),
        o_rmv_tokens: original.len() - o_prsv_tokens,
        o_prsv_tokens,
        a_add_tokens: abridged.len() - a_prsv_tokens,
        a_prsv_tokens,
        has_rmv: o_rmv > 0,
        has_prsv: o_prsv > 0,
        has_add: a_add > 0,
        has_reord: detect_reordering(original, abridged),
    }
}

/// True when two slices appear in the abridged span in a different order
/// than in the original span.
pub fn detect_reordering(original: &[Token], abridged: &[Token]) -> bool {
    let mut slices = matching_slices(original, abridged);
    slices.sort_by_key(|s| s.abridged.start);
    slices.windows(2).any(|w| w[0].original.start >= w[1].original.start)
}

/// Percentages of rows for each lexical relation, plus word-level shares.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LexicalSummary {
    pub rows: usize,
    /// Shares over word types, summed per row.
    pub types: WordShares,
    /// Shares over running tokens.
    pub tokens: WordShares,
    pub pct_rows_rmv: f64,
    pub pct_rows_prsv: f64,
    pub pct_rows_add: f64,
    pub pct_rows_reord: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WordShares {
    pub pct_o_rmv: f64,
    pub pct_o_prsv: f64,
    pub pct_a_add: f64,
    pub pct_a_prsv: f64,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

impl LexicalSummary {
    pub fn from_relations<'a>(relations: impl IntoIterator<Item = &'a LexRelation>) -> Self {
        let mut sum = LexRelation::default();
        let (mut rows, mut rmv, mut prsv, mut add, mut reord) = (0, 0, 0, 0, 0);
        for r in relations {
            rows += 1;
            sum.o_types += r.o_types;
            sum.a_types += r.a_types;
            sum.o_rmv += r.o_rmv;
            sum.o_prsv += r.o_prsv;
            sum.a_add += r.a_add;
            sum.a_prsv += r.a_prsv;
            sum.o_tokens += r.o_tokens;
            sum.a_tokens += r.a_tokens;
            sum.o_rmv_tokens += r.o_rmv_tokens;
            sum.o_prsv_tokens += r.o_prsv_tokens;
            sum.a_add_tokens += r.a_add_tokens;
            sum.a_prsv_tokens += r.a_prsv_tokens;
            rmv += r.has_rmv as usize;
            prsv += r.has_prsv as usize;
            add += r.has_add as usize;
            reord += r.has_reord as usize;
        }
        LexicalSummary {
            rows,
            types: WordShares {
                pct_o_rmv: pct(sum.o_rmv, sum.o_types),
                pct_o_prsv: pct(sum.o_prsv, sum.o_types),
                pct_a_add: pct(sum.a_add, sum.a_types),
                pct_a_prsv: pct(sum.a_prsv, sum.a_types),
            },
            tokens: WordShares {
                pct_o_rmv: pct(sum.o_rmv_tokens, sum.o_tokens),
                pct_o_prsv: pct(sum.o_prsv_tokens, sum.o_tokens),
                pct_a_add: pct(sum.a_add_tokens, sum.a_tokens),
                pct_a_prsv: pct(sum.a_prsv_tokens, sum.a_tokens),
            },
            pct_rows_rmv: pct(rmv, rows),
            pct_rows_prsv: pct(prsv, rows),
            pct_rows_add: pct(add, rows),
            pct_rows_reord: pct(reord, rows),
        }
    }
}

/// Counts over named buckets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    pub labels: &'static [&'static str],
    pub counts: Vec<usize>,
}

impl Distribution {
    fn new(labels: &'static [&'static str]) -> Self {
        Distribution {
            labels,
            counts: vec![0; labels.len()],
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// True when no observation was counted; percentages are then all zero.
    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn percentages(&self) -> Vec<f64> {
        let total = self.total();
        self.counts.iter().map(|c| pct(*c, total)).collect()
    }
}

pub const SCORE_BINS: &[&str] = &["0.0", "(0.0, 0.25]", "(0.25, 0.5]", "(0.5, 0.75]", "(0.75, 1.0)", "1.0"];

/// Bins row scores; exactly 0 and exactly 1 get their own bins.
pub fn score_bins(rows: &[AlignmentRow]) -> Distribution {
    let mut d = Distribution::new(SCORE_BINS);
    for r in rows {
        let s = r.score;
        let bin = if s <= 0.0 {
            0
        } else if s <= 0.25 {
            1
        } else if s <= 0.5 {
            2
        } else if s <= 0.75 {
            3
        } else if s < 1.0 {
            4
        } else {
            5
        };
        d.counts[bin] += 1;
    }
    d
}

/// Row shapes by (original sentences, abridged sentences). The last bucket
/// stays empty for aligner output, which never deletes several sentences in one row.
pub const ROW_SIZES: &[&str] = &["(1, 1)", "(1, 0)", "(2+, 1)", "(1, 2+)", "(2+, 2+)", "(2+, 0)"];

pub fn size_distribution(rows: &[AlignmentRow]) -> Distribution {
    let mut d = Distribution::new(ROW_SIZES);
    for r in rows {
        let bucket = match (r.o_len, r.a_len) {
            (1, 1) => 0,
            (1, 0) => 1,
            (_, 1) => 2,
            (1, _) => 3,
            (_, 0) => 5,
            _ => 4,
        };
        d.counts[bucket] += 1;
    }
    d
}

/// Closed-class English words treated as function words.
pub const CLOSED_CLASS_WORDS: &[&str] = &[
    // pronouns
    "i",
    "me",
    "my",
    "mine",
    "myself",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "we",
    "us",
    "our",
    "ours",
    "ourselves",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
    "who",
    "whom",
    "whose",
    "which",
    "what",
    "whoever",
    "whatever",
    "whichever",
    "this",
    "that",
    "these",
    "those",
    "one",
    "oneself",
    "thee",
    "thou",
    "thy",
    "thine",
    "ye",
    "somebody",
    "someone",
    "something",
    "anybody",
    "anyone",
    "anything",
    "nobody",
    "nothing",
    "everybody",
    "everyone",
    "everything",
    // determiners and quantifiers
    "a",
    "an",
    "the",
    "some",
    "any",
    "no",
    "every",
    "each",
    "either",
    "neither",
    "all",
    "both",
    "few",
    "many",
    "much",
    "more",
    "most",
    "several",
    "such",
    "other",
    "another",
    "own",
    // adpositions
    "of",
    "in",
    "on",
    "at",
    "by",
    "for",
    "with",
    "about",
    "against",
    "between",
    "into",
    "through",
    "during",
    "before",
    "after",
    "above",
    "below",
    "to",
    "from",
    "up",
    "down",
    "out",
    "off",
    "over",
    "under",
    "upon",
    "within",
    "without",
    "across",
    "along",
    "among",
    "around",
    "behind",
    "beside",
    "besides",
    "beyond",
    "near",
    "toward",
    "towards",
    "amid",
    "amidst",
    "unto",
    "till",
    "onto",
    "via",
    "per",
    "like",
    "despite",
    "towards",
    "throughout",
    "underneath",
    "beneath",
    // conjunctions
    "and",
    "but",
    "or",
    "nor",
    "so",
    "yet",
    "if",
    "because",
    "although",
    "though",
    "while",
    "whilst",
    "unless",
    "until",
    "since",
    "whether",
    "as",
    "than",
    "when",
    "where",
    "whereas",
    "lest",
    "once",
    // auxiliaries and modals
    "be",
    "am",
    "is",
    "are",
    "was",
    "were",
    "been",
    "being",
    "have",
    "has",
    "had",
    "having",
    "do",
    "does",
    "did",
    "doing",
    "will",
    "would",
    "shall",
    "should",
    "can",
    "could",
    "may",
    "might",
    "must",
    "ought",
    "'s",
    "'d",
    "'ll",
    "'re",
    "'ve",
    "'m",
    "n't",
    // particles and negation
    "not",
    "there",
    "then",
    "how",
    "why",
    "here",
];

/// Words classified as function words besides punctuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    words: BTreeSet<String>,
}

impl Lexicon {
    pub fn english() -> Self {
        Lexicon::from_words(CLOSED_CLASS_WORDS.iter().copied())
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Lexicon {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_function(&self, word: &str) -> bool {
        is_punctuation(word) || self.words.contains(word)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CategoryShare {
    pub function: usize,
    pub content: usize,
}

impl CategoryShare {
    pub fn total(&self) -> usize {
        self.function + self.content
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn pct_function(&self) -> f64 {
        pct(self.function, self.total())
    }

    pub fn pct_content(&self) -> f64 {
        pct(self.content, self.total())
    }

    fn count(&mut self, lexicon: &Lexicon, word: &str) {
        if lexicon.is_function(word) {
            self.function += 1;
        } else {
            self.content += 1;
        }
    }
}

/// Function/content split of original words, removed words, abridged words
/// and added words, counted over running tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CategoryStats {
    pub original: CategoryShare,
    pub removed: CategoryShare,
    pub abridged: CategoryShare,
    pub added: CategoryShare,
}

pub fn category_stats<'a, I>(rows: I, lexicon: &Lexicon) -> CategoryStats
where
    I: IntoIterator<Item = (&'a [Token], &'a [Token])>,
{
    let mut stats = CategoryStats::default();
    for (original, abridged) in rows {
        let o = types(original);
        let a = types(abridged);
        for t in original {
            stats.original.count(lexicon, &t.text);
            if !a.contains(t.text.as_str()) {
                stats.removed.count(lexicon, &t.text);
            }
        }
        for t in abridged {
            stats.abridged.count(lexicon, &t.text);
            if !o.contains(t.text.as_str()) {
                stats.added.count(lexicon, &t.text);
            }
        }
    }
    stats
}

/// Tokens of the original and abridged span of every row.
pub fn row_tokens(original: &Document, abridged: &Document, rows: &[AlignmentRow]) -> Vec<(Vec<Token>, Vec<Token>)> {
    rows.iter()
        .map(|r| {
            (
                original.tokens(original.sentence_range_span(r.o_start, r.o_len)),
                abridged.tokens(abridged.sentence_range_span(r.a_start, r.a_len)),
            )
        })
        .collect()
}

/// One aligned chapter as seen by the statistics.
#[derive(Debug, Clone, Copy)]
pub struct ChapterView<'a> {
    pub original: &'a Document,
    pub abridged: &'a Document,
    pub rows: &'a [AlignmentRow],
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SizeCounts {
    pub rows: usize,
    pub o_paragraphs: usize,
    pub a_paragraphs: usize,
    pub o_sentences: usize,
    pub a_sentences: usize,
    pub o_words: usize,
    pub a_words: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChapterMeans {
    pub rows: f64,
    pub o_paragraphs: f64,
    pub a_paragraphs: f64,
    pub o_sentences: f64,
    pub a_sentences: f64,
    pub o_words: f64,
    pub a_words: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorpusSummary {
    pub chapters: usize,
    pub totals: SizeCounts,
    pub pct_a_sentences: f64,
    pub pct_a_words: f64,
    pub per_chapter_mean: ChapterMeans,
}

/// Size totals and per-chapter means; words are tokens, punctuation included.
pub fn corpus_summary(chapters: &[ChapterView<'_>]) -> CorpusSummary {
    let mut t = SizeCounts::default();
    for c in chapters {
        t.rows += c.rows.len();
        t.o_paragraphs += c.original.paragraphs().len();
        t.a_paragraphs += c.abridged.paragraphs().len();
        t.o_sentences += c.original.sentence_count();
        t.a_sentences += c.abridged.sentence_count();
        t.o_words += c.original.all_tokens().len();
        t.a_words += c.abridged.all_tokens().len();
    }
    let n = chapters.len();
    let mean = |v: usize| if n == 0 { 0.0 } else { v as f64 / n as f64 };
    CorpusSummary {
        chapters: n,
        totals: t,
        pct_a_sentences: pct(t.a_sentences, t.o_sentences),
        pct_a_words: pct(t.a_words, t.o_words),
        per_chapter_mean: ChapterMeans {
            rows: mean(t.rows),
            o_paragraphs: mean(t.o_paragraphs),
            a_paragraphs: mean(t.a_paragraphs),
            o_sentences: mean(t.o_sentences),
            a_sentences: mean(t.a_sentences),
            o_words: mean(t.o_words),
            a_words: mean(t.a_words),
        },
    }
}
