use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(
        "chapter count mismatch: {original} original vs {abridged} abridged \
         (first unmatched heading: {first_unmatched:?})"
    )]
    ChapterCountMismatch {
        original: usize,
        abridged: usize,
        first_unmatched: String,
    },

    #[error("original chapter has no sentences")]
    EmptyOriginal,

    #[error(
        "no monotone alignment exists: {abridged} abridged sentences cannot be covered by \
         {original} original sentences with at most {a_max} abridged sentences per row"
    )]
    Infeasible {
        original: usize,
        abridged: usize,
        a_max: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid span [{start}, {end}) for text of {len} characters")]
    InvalidSpan { start: usize, end: usize, len: usize },

    #[error("invalid document: {0}")]
    InvalidDocument(String),

    #[error("invalid alignment rows: {0}")]
    InvalidRows(String),

    #[error("sentence index out of range: {side} sentence {index} (chapter has {count})")]
    SentenceOutOfRange {
        side: &'static str,
        index: usize,
        count: usize,
    },

    #[error("annotation for item {item:?} by rater {rater:?} is missing")]
    IncompleteAnnotations { item: String, rater: String },

    #[error("annotation set needs at least {0}")]
    TooFewAnnotations(&'static str),

    #[error("expected agreement is 1 (every label falls in one category); kappa is undefined")]
    DegenerateMarginals,

    #[error("labels do not match chapter tokens at character offset {offset}")]
    LabelMismatch { offset: usize },

    #[error("unknown passage unit {0:?}")]
    UnknownUnit(String),

    #[error("unknown similarity {0:?} (expected rouge1p or rouge2p)")]
    UnknownSimilarity(String),

    #[error("unknown extraction method {0:?}")]
    UnknownMethod(String),

    #[error("row {0} not found")]
    RowNotFound(usize),

    #[error("correction rejected: {0}")]
    Rejected(String),
}
