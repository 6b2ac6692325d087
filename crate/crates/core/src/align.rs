//! Monotone sentence-span alignment, review flagging, row-level F1 and
//! inter-rater agreement.
//!
//! The aligner segments both sentence sequences of a chapter into the same
//! number of consecutive spans and pairs them up in order. Each pair
//! `(o, a)` earns `max(0, sim(o, a) - (max(|o|, |a|) - 1) * pn)`, and the
//! segmentation with the largest total wins. The size penalty `pn` keeps
//! rows minimal: two sentences only share a row when merging them gains more
//! similarity than the penalty costs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::chapters::ChapterPair;
use crate::error::{Error, Result};
use crate::prf::Prf;
use crate::similarity::{rouge_n_precision, SimilarityKind};

/// Review threshold below which a suspicious row is flagged.
pub const DEFAULT_FLAG_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlignerConfig {
    /// Longest original span in one row.
    pub o_max: usize,
    /// Longest abridged span in one row.
    pub a_max: usize,
    /// Penalty per sentence beyond the first on the longer side.
    pub pn: f64,
    pub similarity: SimilarityKind,
}

impl Default for AlignerConfig {
    fn default() -> Self {
        AlignerConfig {
            o_max: 3,
            a_max: 5,
            pn: 0.175,
            similarity: SimilarityKind::Rouge1p,
        }
    }
}

impl AlignerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.o_max < 1 {
            return Err(Error::InvalidConfig("o_max must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.pn) {
            return Err(Error::InvalidConfig(alloc::format!(
                "pn must lie in [0, 1], got {}",
                self.pn
            )));
        }
        Ok(())
    }
}

/// One aligned pair of an original span and an abridged span, by sentence index.
///
/// A row with `a_len == 0` deletes its original sentence; its `a_start` is
/// the number of abridged sentences that precede it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlignmentRow {
    pub o_start: usize,
    pub o_len: usize,
    pub a_start: usize,
    pub a_len: usize,
    /// Unpenalized span similarity.
    pub score: f64,
    pub flagged: bool,
    pub validated: bool,
}

impl AlignmentRow {
    pub fn o_end(&self) -> usize {
        self.o_start + self.o_len
    }

    pub fn a_end(&self) -> usize {
        self.a_start + self.a_len
    }
}

/// Score of a span pair after the size penalty.
pub fn pair_score(sim: f64, o_len: usize, a_len: usize, pn: f64) -> f64 {
    let size = o_len.max(a_len);
    let penalized = sim - (size.saturating_sub(1)) as f64 * pn;
    if penalized > 0.0 {
        penalized
    } else {
        0.0
    }
}

/// Rows of an optimal alignment and the total penalized score they earn.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub rows: Vec<AlignmentRow>,
    pub total_score: f64,
}

/// Aligns the two sentence sequences of a chapter.
pub fn align_chapter(pair: &ChapterPair, config: &AlignerConfig) -> Result<Alignment> {
    align_sentences(&pair.original.sentence_words(), &pair.abridged.sentence_words(), config)
}

/// Aligns tokenized sentences.
///
/// Candidate spans ending at each cell are tried in ascending
/// `(o_len, a_len)` order and replace the incumbent only on a strictly
/// greater total, so smaller rows win ties. Deletion rows (`a_len == 0`)
/// always cover exactly one original sentence.
pub fn align_sentences<S: AsRef<str>>(
    original: &[Vec<S>],
    abridged: &[Vec<S>],
    config: &AlignerConfig,
) -> Result<Alignment> {
    config.validate()?;
    let n = original.len();
    let m = abridged.len();
    if n == 0 {
        return Err(Error::EmptyOriginal);
    }
    if m > n * config.a_max {
        return Err(Error::Infeasible {
            original: n,
            abridged: m,
            a_max: config.a_max,
        });
    }

    let mut sim = SpanSimilarity::new(original, abridged, config.similarity);
    let width = m + 1;
    let mut best = vec![f64::NEG_INFINITY; (n + 1) * width];
    let mut back = vec![(0usize, 0usize); (n + 1) * width];
    best[0] = 0.0;

    for i in 1..=n {
        for j in 0..=m {
            let mut cell = f64::NEG_INFINITY;
            let mut choice = (0, 0);
            for ol in 1..=config.o_max.min(i) {
                for al in 0..=config.a_max.min(j) {
                    if al == 0 && ol > 1 {
                        continue;
                    }
                    let prev = best[(i - ol) * width + (j - al)];
                    if prev == f64::NEG_INFINITY {
                        continue;
                    }
                    let s = sim.score(i - ol, ol, j - al, al);
                    let candidate = prev + pair_score(s, ol, al, config.pn);
                    if candidate > cell {
                        cell = candidate;
                        choice = (ol, al);
                    }
                }
            }
            best[i * width + j] = cell;
            back[i * width + j] = choice;
        }
    }

    let total_score = best[n * width + m];
    if total_score == f64::NEG_INFINITY {
        return Err(Error::Infeasible {
            original: n,
            abridged: m,
            a_max: config.a_max,
        });
    }

    let mut rows = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 {
        let (ol, al) = back[i * width + j];
        let o_start = i - ol;
        let a_start = j - al;
        rows.push(AlignmentRow {
            o_start,
            o_len: ol,
            a_start,
            a_len: al,
            score: sim.score(o_start, ol, a_start, al),
            flagged: false,
            validated: false,
        });
        i = o_start;
        j = a_start;
    }
    rows.reverse();
    Ok(Alignment { rows, total_score })
}

/// Span similarity over interned, flattened token ids.
struct SpanSimilarity {
    kind: SimilarityKind,
    original: Vec<u32>,
    o_offsets: Vec<usize>,
    abridged: Vec<u32>,
    a_offsets: Vec<usize>,
    counts: Vec<u32>,
}

impl SpanSimilarity {
    fn new<'a, S: AsRef<str>>(original: &'a [Vec<S>], abridged: &'a [Vec<S>], kind: SimilarityKind) -> Self {
        let mut vocab: BTreeMap<&'a str, u32> = BTreeMap::new();
        let (o_ids, o_offsets) = intern(original, &mut vocab);
        let (a_ids, a_offsets) = intern(abridged, &mut vocab);
        SpanSimilarity {
            kind,
            original: o_ids,
            o_offsets,
            abridged: a_ids,
            a_offsets,
            counts: vec![0; vocab.len()],
        }
    }

    fn score(&mut self, o_start: usize, o_len: usize, a_start: usize, a_len: usize) -> f64 {
        let o = &self.original[self.o_offsets[o_start]..self.o_offsets[o_start + o_len]];
        let a = &self.abridged[self.a_offsets[a_start]..self.a_offsets[a_start + a_len]];
        if self.kind.n() != 1 {
            return rouge_n_precision(a, o, self.kind.n());
        }
        if a.is_empty() {
            return 0.0;
        }
        for &t in o {
            self.counts[t as usize] += 1;
        }
        let mut matched = 0usize;
        for &t in a {
            let c = &mut self.counts[t as usize];
            if *c > 0 {
                *c -= 1;
                matched += 1;
            }
        }
        for &t in o {
            self.counts[t as usize] = 0;
        }
        matched as f64 / a.len() as f64
    }
}

/// Flattened token ids plus the offset where each sentence starts.
fn intern<'a, S: AsRef<str>>(sentences: &'a [Vec<S>], vocab: &mut BTreeMap<&'a str, u32>) -> (Vec<u32>, Vec<usize>) {
    let mut ids = Vec::new();
    let mut offsets = vec![0];
    for sentence in sentences {
        for word in sentence {
            let next = vocab.len() as u32;
            ids.push(*vocab.entry(word.as_ref()).or_insert(next));
        }
        offsets.push(ids.len());
    }
    (ids, offsets)
}

/// Marks rows that deserve human review.
///
/// A row is flagged when its score is below `threshold` and it either has
/// two or more abridged sentences or sits next to a row whose abridged span
/// is empty. Only the `flagged` field changes.
pub fn flag_rows(rows: &mut [AlignmentRow], threshold: f64) {
    let empty: Vec<bool> = rows.iter().map(|r| r.a_len == 0).collect();
    for (k, row) in rows.iter_mut().enumerate() {
        let before = k > 0 && empty[k - 1];
        let after = k + 1 < empty.len() && empty[k + 1];
        row.flagged = row.score < threshold && (row.a_len >= 2 || before || after);
    }
}

/// Checks that rows partition both sentence sequences in order.
pub fn validate_rows(rows: &[AlignmentRow], original_count: usize, abridged_count: usize) -> Result<()> {
    let mut o = 0;
    let mut a = 0;
    for (k, row) in rows.iter().enumerate() {
        if row.o_len == 0 {
            return Err(Error::InvalidRows(alloc::format!("row {k} has an empty original span")));
        }
        if row.o_start != o {
            return Err(Error::InvalidRows(alloc::format!(
                "row {k} starts at original sentence {} but {o} was expected",
                row.o_start
            )));
        }
        if row.a_start != a {
            return Err(Error::InvalidRows(alloc::format!(
                "row {k} starts at abridged sentence {} but {a} was expected",
                row.a_start
            )));
        }
        if !(0.0..=1.0).contains(&row.score) {
            return Err(Error::InvalidRows(alloc::format!(
                "row {k} has score {} outside [0, 1]",
                row.score
            )));
        }
        o += row.o_len;
        a += row.a_len;
    }
    if o != original_count || a != abridged_count {
        return Err(Error::InvalidRows(alloc::format!(
            "rows cover {o}/{original_count} original and {a}/{abridged_count} abridged sentences"
        )));
    }
    Ok(())
}

fn positive_pairs(
    rows: &[AlignmentRow],
    original_count: usize,
    abridged_count: usize,
) -> Result<BTreeSet<(usize, usize)>> {
    let mut pairs = BTreeSet::new();
    for row in rows {
        if row.o_end() > original_count {
            return Err(Error::SentenceOutOfRange {
                side: "original",
                index: row.o_end() - 1,
                count: original_count,
            });
        }
        if row.a_end() > abridged_count {
            return Err(Error::SentenceOutOfRange {
                side: "abridged",
                index: row.a_end() - 1,
                count: abridged_count,
            });
        }
        for i in row.o_start..row.o_end() {
            for j in row.a_start..row.a_end() {
                pairs.insert((i, j));
            }
        }
    }
    Ok(pairs)
}

/// Precision, recall and F1 of predicted rows against gold rows, where a
/// positive is an (original sentence, abridged sentence) pair sharing a row.
pub fn row_f1(
    pred: &[AlignmentRow],
    gold: &[AlignmentRow],
    original_count: usize,
    abridged_count: usize,
) -> Result<Prf> {
    let p = positive_pairs(pred, original_count, abridged_count)?;
    let g = positive_pairs(gold, original_count, abridged_count)?;
    let correct = p.intersection(&g).count();
    Ok(Prf::from_counts(correct, p.len(), g.len()))
}

/// Binary labels given by several raters to the same items.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationSet {
    items: Vec<String>,
    raters: Vec<String>,
    /// Keyed by (item index, rater index).
    labels: BTreeMap<(usize, usize), bool>,
}

impl AnnotationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one label; later labels for the same cell overwrite earlier ones.
    pub fn insert(&mut self, item: &str, rater: &str, label: bool) {
        let i = index_of(&mut self.items, item);
        let r = index_of(&mut self.raters, rater);
        self.labels.insert((i, r), label);
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn raters(&self) -> &[String] {
        &self.raters
    }

    pub fn label(&self, item: usize, rater: usize) -> Option<bool> {
        self.labels.get(&(item, rater)).copied()
    }
}

impl<'a> FromIterator<(&'a str, &'a str, bool)> for AnnotationSet {
    fn from_iter<I: IntoIterator<Item = (&'a str, &'a str, bool)>>(iter: I) -> Self {
        let mut set = AnnotationSet::new();
        for (item, rater, label) in iter {
            set.insert(item, rater, label);
        }
        set
    }
}

fn index_of(ids: &mut Vec<String>, id: &str) -> usize {
    match ids.iter().position(|x| x == id) {
        Some(i) => i,
        None => {
            ids.push(id.into());
            ids.len() - 1
        }
    }
}

/// Fleiss' kappa over two categories.
pub fn fleiss_kappa(annotations: &AnnotationSet) -> Result<f64> {
    let n_items = annotations.items.len();
    let n_raters = annotations.raters.len();
    if n_raters < 2 {
        return Err(Error::TooFewAnnotations("two raters"));
    }
    if n_items == 0 {
        return Err(Error::TooFewAnnotations("one item"));
    }
    let raters = n_raters as f64;
    let mut agreement_sum = 0.0;
    let mut positives_total = 0usize;
    for i in 0..n_items {
        let mut positives = 0usize;
        for r in 0..n_raters {
            match annotations.label(i, r) {
                Some(true) => positives += 1,
                Some(false) => {}
                None => {
                    return Err(Error::IncompleteAnnotations {
                        item: annotations.items[i].clone(),
                        rater: annotations.raters[r].clone(),
                    })
                }
            }
        }
        let pos = positives as f64;
        let neg = (n_raters - positives) as f64;
        agreement_sum += (pos * pos + neg * neg - raters) / (raters * (raters - 1.0));
        positives_total += positives;
    }
    let cells = n_items * n_raters;
    if positives_total == 0 || positives_total == cells {
        return Err(Error::DegenerateMarginals);
    }
    let observed = agreement_sum / n_items as f64;
    let p1 = positives_total as f64 / cells as f64;
    let p0 = 1.0 - p1;
    let expected = p1 * p1 + p0 * p0;
    Ok((observed - expected) / (1.0 - expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{words, Document};
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn sentences(doc: &str) -> Vec<Vec<String>> {
        Document::new("d", doc).sentence_words()
    }

    fn row(o_start: usize, o_len: usize, a_start: usize, a_len: usize, score: f64) -> AlignmentRow {
        AlignmentRow {
            o_start,
            o_len,
            a_start,
            a_len,
            score,
            ..Default::default()
        }
    }

    #[test]
    fn pair_score_examples() {
        assert_eq!(pair_score(0.8, 1, 1, 0.175), 0.8);
        assert!((pair_score(0.8, 3, 1, 0.175) - 0.45).abs() < 1e-12);
        assert_eq!(pair_score(0.1, 2, 3, 0.175), 0.0);
    }

    #[test]
    fn table_row_merges_two_original_sentences() {
        let o = sentences("The letter was not unproductive. It re-established peace and kindness.");
        let a = sentences("The letter re-established peace and kindness.");
        let al = align_sentences(&o, &a, &AlignerConfig::default()).unwrap();
        assert_eq!(al.rows.len(), 1);
        let r = al.rows[0];
        assert_eq!((r.o_start, r.o_len, r.a_start, r.a_len), (0, 2, 0, 1));
        assert_eq!(r.score, 1.0);
        assert!((al.total_score - 0.825).abs() < 1e-12);
    }

    #[test]
    fn empty_abridgement_deletes_every_sentence() {
        let o = sentences("One. Two. Three.");
        let al = align_sentences::<String>(&o, &[], &AlignerConfig::default()).unwrap();
        assert_eq!(al.rows.len(), 3);
        for (k, r) in al.rows.iter().enumerate() {
            assert_eq!((r.o_start, r.o_len, r.a_start, r.a_len), (k, 1, 0, 0));
            assert_eq!(r.score, 0.0);
        }
    }

    #[test]
    fn errors() {
        let a = sentences("One.");
        assert_eq!(
            align_sentences::<String>(&[], &a, &AlignerConfig::default()),
            Err(Error::EmptyOriginal)
        );
        let cfg = AlignerConfig {
            a_max: 1,
            ..Default::default()
        };
        assert!(matches!(
            align_sentences(&sentences("Yes."), &sentences("Yes. No."), &cfg),
            Err(Error::Infeasible { .. })
        ));
        let bad = AlignerConfig {
            pn: 1.5,
            ..Default::default()
        };
        assert!(align_sentences(&a, &a, &bad).is_err());
    }

    #[test]
    fn rouge2_alignment_runs() {
        let cfg = AlignerConfig {
            similarity: SimilarityKind::Rouge2p,
            ..Default::default()
        };
        let o = sentences("The cat sat down. A dog barked loudly.");
        let a = sentences("The cat sat. A dog barked.");
        let al = align_sentences(&o, &a, &cfg).unwrap();
        assert_eq!(al.rows.len(), 2);
        assert_eq!(al.rows[0].score, 2.0 / 3.0);
    }

    #[test]
    fn flagging_cases() {
        let mut rows = vec![
            row(0, 1, 0, 2, 0.85),
            row(1, 1, 2, 3, 0.95),
            row(2, 1, 5, 1, 0.5),
            row(3, 1, 6, 0, 0.0),
            row(4, 1, 6, 1, 1.0),
        ];
        flag_rows(&mut rows, DEFAULT_FLAG_THRESHOLD);
        let flags: Vec<bool> = rows.iter().map(|r| r.flagged).collect();
        assert_eq!(flags, vec![true, false, true, false, false]);
    }

    #[test]
    fn row_f1_examples() {
        let gold = vec![row(0, 2, 0, 1, 1.0)];
        let pred = vec![row(0, 1, 0, 1, 1.0), row(1, 1, 1, 0, 0.0)];
        let prf = row_f1(&pred, &gold, 2, 1).unwrap();
        assert_eq!(prf.precision, 1.0);
        assert_eq!(prf.recall, 0.5);
        assert!((prf.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(row_f1(&gold, &gold, 2, 1).unwrap(), Prf::PERFECT);
        let none = vec![row(0, 1, 0, 0, 0.0), row(1, 1, 0, 1, 0.0)];
        let prf = row_f1(&[row(0, 1, 0, 0, 0.0), row(1, 1, 0, 0, 0.0)], &none, 2, 1).unwrap();
        assert_eq!(prf, Prf::new(0.0, 0.0));
        assert!(row_f1(&[row(0, 3, 0, 1, 0.0)], &gold, 2, 1).is_err());
    }

    #[test]
    fn kappa_examples() {
        let mut set = AnnotationSet::new();
        for item in 0..10 {
            for rater in 0..5 {
                set.insert(&item.to_string(), &rater.to_string(), item % 3 == 0);
            }
        }
        assert_eq!(fleiss_kappa(&set).unwrap(), 1.0);

        let set: AnnotationSet = [
            ("i1", "r1", true),
            ("i1", "r2", true),
            ("i1", "r3", false),
            ("i2", "r1", false),
            ("i2", "r2", false),
            ("i2", "r3", false),
        ]
        .into_iter()
        .collect();
        // Pairwise agreement: item1 agrees on 1 of 3 rater pairs, item2 on 3 of 3,
        // so P = 2/3; label shares 2/6 and 4/6 give Pe = 5/9; kappa = (1/9)/(4/9).
        assert!((fleiss_kappa(&set).unwrap() - 0.25).abs() < 1e-12);

        let set: AnnotationSet = [("i1", "r1", true), ("i1", "r2", true)].into_iter().collect();
        assert_eq!(fleiss_kappa(&set), Err(Error::DegenerateMarginals));

        let set: AnnotationSet = [("i1", "r1", true), ("i1", "r2", false), ("i2", "r1", true)]
            .into_iter()
            .collect();
        assert!(matches!(fleiss_kappa(&set), Err(Error::IncompleteAnnotations { .. })));
    }

    fn arb_sentences(max: usize) -> impl Strategy<Value = Vec<Vec<String>>> {
        proptest::collection::vec(
            proptest::collection::vec((0u8..8).prop_map(|w| words(&alloc::format!("w{w}")).remove(0)), 0..6),
            0..max,
        )
    }

    proptest! {
        #[test]
        fn rows_always_partition(o in arb_sentences(8), a in arb_sentences(8), pn in 0.0f64..0.3) {
            prop_assume!(!o.is_empty() && a.len() <= 5 * o.len());
            let cfg = AlignerConfig { pn, ..Default::default() };
            let al = align_sentences(&o, &a, &cfg).unwrap();
            validate_rows(&al.rows, o.len(), a.len()).unwrap();
            for r in &al.rows {
                prop_assert!(r.o_len <= cfg.o_max && r.a_len <= cfg.a_max);
                prop_assert!(r.a_len > 0 || r.o_len == 1);
            }
            prop_assert_eq!(row_f1(&al.rows, &al.rows, o.len(), a.len()).unwrap(), Prf::PERFECT);
        }

        #[test]
        fn larger_penalty_never_raises_total(o in arb_sentences(6), a in arb_sentences(6), pn in 0.0f64..0.5, extra in 0.0f64..0.5) {
            prop_assume!(!o.is_empty() && a.len() <= 5 * o.len());
            let low = align_sentences(&o, &a, &AlignerConfig { pn, ..Default::default() }).unwrap();
            let high = align_sentences(&o, &a, &AlignerConfig { pn: pn + extra, ..Default::default() }).unwrap();
            prop_assert!(high.total_score <= low.total_score + 1e-12);
        }

        #[test]
        fn flagging_is_idempotent(scores in proptest::collection::vec((0.0f64..=1.0, 0usize..4), 1..12)) {
            let mut a = 0;
            let mut rows: Vec<AlignmentRow> = scores.iter().enumerate().map(|(k, (s, al))| {
                let r = row(k, 1, a, *al, if *al == 0 { 0.0 } else { *s });
                a += al;
                r
            }).collect();
            flag_rows(&mut rows, 0.9);
            let once = rows.clone();
            flag_rows(&mut rows, 0.9);
            prop_assert_eq!(&once, &rows);
            for (k, r) in rows.iter().enumerate() {
                let s = scores[k];
                prop_assert_eq!(r.a_len, s.1);
            }
        }
    }
}
