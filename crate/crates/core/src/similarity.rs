//! Word-overlap similarity: clipped ROUGE-N precision and LCS-based ROUGE-L F1.

use alloc::collections::BTreeMap;
use alloc::vec;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;

/// Which n-gram precision scores a span pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SimilarityKind {
    #[default]
    Rouge1p,
    Rouge2p,
}

impl SimilarityKind {
    pub fn n(self) -> usize {
        match self {
            SimilarityKind::Rouge1p => 1,
            SimilarityKind::Rouge2p => 2,
        }
    }
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "rouge1p" => Ok(SimilarityKind::Rouge1p),
            "rouge2p" => Ok(SimilarityKind::Rouge2p),
            other => Err(Error::UnknownSimilarity(other.into())),
        }
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilarityKind::Rouge1p => "rouge1p",
            SimilarityKind::Rouge2p => "rouge2p",
        })
    }
}

/// Fraction of hypothesis n-grams found in the reference, with each
/// reference n-gram usable at most as often as it occurs there.
///
/// Returns 0 when the hypothesis is shorter than `n`.
///
/// # Panics
///
/// If `n` is zero.
pub fn rouge_n_precision<T: Ord>(hyp: &[T], reference: &[T], n: usize) -> f64 {
    assert!(n >= 1, "n-gram order must be positive");
    if hyp.len() < n {
        return 0.0;
    }
    let mut available: BTreeMap<&[T], usize> = BTreeMap::new();
    if reference.len() >= n {
        for gram in reference.windows(n) {
            *available.entry(gram).or_insert(0) += 1;
        }
    }
    let total = hyp.len() - n + 1;
    let mut matched = 0usize;
    for gram in hyp.windows(n) {
        if let Some(count) = available.get_mut(gram) {
            if *count > 0 {
                *count -= 1;
                matched += 1;
            }
        }
    }
    matched as f64 / total as f64
}

/// Length of the longest common subsequence, in O(|b|) memory.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0u32; b.len() + 1];
    let mut cur = vec![0u32; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()] as usize
}

/// ROUGE-L F1 over whole token sequences (no stemming, no stopwords).
pub fn rouge_l_f1<T: PartialEq>(pred: &[T], reference: &[T]) -> f64 {
    lcs_f1(lcs_len(pred, reference), pred.len(), reference.len())
}

pub(crate) fn lcs_f1(lcs: usize, pred_len: usize, ref_len: usize) -> f64 {
    if lcs == 0 || pred_len == 0 || ref_len == 0 {
        return 0.0;
    }
    let p = lcs as f64 / pred_len as f64;
    let r = lcs as f64 / ref_len as f64;
    2.0 * p * r / (p + r)
}

/// Similarity of an original span `o` and abridged span `a`: the abridged
/// span is the hypothesis and the original the reference.
pub fn span_similarity<T: Ord>(o: &[T], a: &[T], kind: SimilarityKind) -> f64 {
    rouge_n_precision(a, o, kind.n())
}
