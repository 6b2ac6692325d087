//! Sentence alignment and abridgement analysis for original/abridged book pairs.
//!
//! Everything here works on in-memory text and needs only `alloc`. File
//! formats, chapter-heading patterns and the review service live in the
//! `abridger` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod abridge;
pub mod align;
pub mod chapters;
pub mod error;
pub mod eval;
pub mod lexstats;
pub mod passage;
pub mod prf;
pub mod review;
pub mod similarity;
pub mod text;

pub use abridge::{abridge, ExtractConfig, ExtractMethod};
pub use align::{
    align_chapter, align_sentences, flag_rows, fleiss_kappa, row_f1, AlignerConfig, Alignment, AlignmentRow,
    AnnotationSet,
};
pub use chapters::{pair_chapters, split_chapters, Chapter, ChapterPair};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalReport};
pub use passage::{Label, PassageUnit, Slice};
pub use prf::Prf;
pub use review::{apply_correction, Correction, CorrectionKind, Side};
pub use similarity::SimilarityKind;
pub use text::{Document, Span, Token};
