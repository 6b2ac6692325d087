//! Scoring a predicted abridgement against the reference and the original.
//!
//! Word identity is the lowercased token type. For a text `x` and original
//! type set `O`: `o_prsv(x) = O & x`, `o_rmv(x) = O - x`, `a_add(x) = x - O`.

use alloc::collections::BTreeSet;
use alloc::string::String;

use crate::prf::Prf;
use crate::similarity::lcs_len;
use crate::text::words;

pub type WordSet = BTreeSet<String>;

/// Lowercased word types of a text.
pub fn word_types(text: &str) -> WordSet {
    words(text).into_iter().collect()
}

/// Hits, predicted size and reference size behind one P/R/F triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SetCounts {
    pub correct: usize,
    pub predicted: usize,
    pub reference: usize,
}

impl SetCounts {
    fn of(pred: &WordSet, reference: &WordSet) -> Self {
        SetCounts {
            correct: pred.intersection(reference).count(),
            predicted: pred.len(),
            reference: reference.len(),
        }
    }

    pub fn prf(&self) -> Prf {
        Prf::from_counts(self.correct, self.predicted, self.reference)
    }

    fn add(&mut self, other: &SetCounts) {
        self.correct += other.correct;
        self.predicted += other.predicted;
        self.reference += other.reference;
    }
}

fn preserved(orig: &WordSet, x: &WordSet) -> WordSet {
    orig.intersection(x).cloned().collect()
}

fn removed(orig: &WordSet, x: &WordSet) -> WordSet {
    orig.difference(x).cloned().collect()
}

fn added(orig: &WordSet, x: &WordSet) -> WordSet {
    x.difference(orig).cloned().collect()
}

pub fn prsv_counts(orig: &WordSet, pred: &WordSet, reference: &WordSet) -> SetCounts {
    SetCounts::of(&preserved(orig, pred), &preserved(orig, reference))
}

pub fn rmv_counts(orig: &WordSet, pred: &WordSet, reference: &WordSet) -> SetCounts {
    SetCounts::of(&removed(orig, pred), &removed(orig, reference))
}

pub fn add_counts(orig: &WordSet, pred: &WordSet, reference: &WordSet) -> SetCounts {
    SetCounts::of(&added(orig, pred), &added(orig, reference))
}

pub fn prsv_f1(orig: &WordSet, pred: &WordSet, reference: &WordSet) -> Prf {
    prsv_counts(orig, pred, reference).prf()
}

pub fn rmv_f1(orig: &WordSet, pred: &WordSet, reference: &WordSet) -> Prf {
    rmv_counts(orig, pred, reference).prf()
}

pub fn add_f1(orig: &WordSet, pred: &WordSet, reference: &WordSet) -> Prf {
    add_counts(orig, pred, reference).prf()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalCounts {
    pub lcs: usize,
    pub pred_tokens: usize,
    pub ref_tokens: usize,
    pub prsv: SetCounts,
    pub rmv: SetCounts,
    pub add: SetCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    /// Tokens in the prediction.
    pub token_count: usize,
    pub r_l: f64,
    pub prsv: Prf,
    pub rmv: Prf,
    pub add: Prf,
    pub counts: EvalCounts,
}

pub fn evaluate(original: &str, predicted: &str, reference: &str) -> EvalReport {
    let o = words(original);
    let p = words(predicted);
    let r = words(reference);
    let lcs = lcs_len(&p, &r);
    let (ot, pt, rt): (WordSet, WordSet, WordSet) = (
        o.into_iter().collect(),
        p.iter().cloned().collect(),
        r.iter().cloned().collect(),
    );
    let counts = EvalCounts {
        lcs,
        pred_tokens: p.len(),
        ref_tokens: r.len(),
        prsv: prsv_counts(&ot, &pt, &rt),
        rmv: rmv_counts(&ot, &pt, &rt),
        add: add_counts(&ot, &pt, &rt),
    };
    EvalReport::from_counts(counts)
}

impl EvalReport {
    pub fn from_counts(counts: EvalCounts) -> Self {
        EvalReport {
            token_count: counts.pred_tokens,
            r_l: crate::similarity::lcs_f1(counts.lcs, counts.pred_tokens, counts.ref_tokens),
            prsv: counts.prsv.prf(),
            rmv: counts.rmv.prf(),
            add: counts.add.prf(),
            counts,
        }
    }
}

/// Averages of every score over chapters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeanScores {
    pub token_count: f64,
    pub r_l: f64,
    pub prsv: Prf,
    pub rmv: Prf,
    pub add: Prf,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorpusEval {
    pub chapters: usize,
    /// Unweighted mean of per-chapter scores.
    pub mean: MeanScores,
    /// Scores from counts summed over chapters.
    pub pooled: EvalReport,
}

fn mean_prf(prfs: impl Iterator<Item = Prf>, n: f64) -> Prf {
    let mut sum = Prf::default();
    for p in prfs {
        sum.precision += p.precision;
        sum.recall += p.recall;
        sum.f1 += p.f1;
    }
    Prf {
        precision: sum.precision / n,
        recall: sum.recall / n,
        f1: sum.f1 / n,
    }
}

pub fn aggregate(reports: &[EvalReport]) -> CorpusEval {
    if reports.is_empty() {
        return CorpusEval::default();
    }
    let n = reports.len() as f64;
    let mut counts = EvalCounts::default();
    for r in reports {
        counts.lcs += r.counts.lcs;
        counts.pred_tokens += r.counts.pred_tokens;
        counts.ref_tokens += r.counts.ref_tokens;
        counts.prsv.add(&r.counts.prsv);
        counts.rmv.add(&r.counts.rmv);
        counts.add.add(&r.counts.add);
    }
    CorpusEval {
        chapters: reports.len(),
        mean: MeanScores {
            token_count: reports.iter().map(|r| r.token_count as f64).sum::<f64>() / n,
            r_l: reports.iter().map(|r| r.r_l).sum::<f64>() / n,
            prsv: mean_prf(reports.iter().map(|r| r.prsv), n),
            rmv: mean_prf(reports.iter().map(|r| r.rmv), n),
            add: mean_prf(reports.iter().map(|r| r.add), n),
        },
        pooled: EvalReport::from_counts(counts),
    }
}

/// Word sets from string slices, for tests and small callers.
pub fn set_of<'a>(words: impl IntoIterator<Item = &'a str>) -> WordSet {
    words.into_iter().map(String::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn close(p: Prf, precision: f64, recall: f64, f1: f64) -> bool {
        (p.precision - precision).abs() < 1e-12 && (p.recall - recall).abs() < 1e-12 && (p.f1 - f1).abs() < 1e-12
    }

    #[test]
    fn set_examples() {
        let orig = set_of(["a", "b", "c", "d"]);
        let prsv = prsv_f1(&orig, &set_of(["a", "b", "c"]), &set_of(["a", "b"]));
        assert!(close(prsv, 2.0 / 3.0, 1.0, 0.8));
        let rmv = rmv_f1(&orig, &set_of(["a", "b"]), &set_of(["a", "b", "c"]));
        assert!(close(rmv, 0.5, 1.0, 2.0 / 3.0));
        let add = add_f1(&set_of(["a"]), &set_of(["a", "x", "y"]), &set_of(["a", "x"]));
        assert!(close(add, 0.5, 1.0, 2.0 / 3.0));
        let nothing = prsv_f1(&orig, &set_of(["z"]), &set_of(["a"]));
        assert_eq!(nothing, Prf::new(0.0, 0.0));
    }

    #[test]
    fn identities() {
        let orig = "The letter was not unproductive. It re-established peace and kindness.";
        let reference = "The letter re-established peace and a new kindness.";
        let copy = evaluate(orig, orig, reference);
        assert_eq!(copy.rmv.f1, 0.0);
        assert_eq!(copy.add.f1, 0.0);
        let same = evaluate(orig, reference, reference);
        assert_eq!(same.r_l, 1.0);
        assert_eq!((same.prsv.f1, same.rmv.f1, same.add.f1), (1.0, 1.0, 1.0));
        assert_eq!(same.token_count, 9);
        // a reference that removes nothing and adds nothing
        let trivial = evaluate(orig, orig, orig);
        assert_eq!((trivial.rmv.f1, trivial.add.f1), (1.0, 1.0));
    }

    #[test]
    fn extractive_prediction_adds_nothing() {
        let orig = "Alpha beta gamma. Delta epsilon.";
        let r = evaluate(orig, "alpha gamma", "alpha novel gamma");
        assert_eq!(r.add, Prf::new(0.0, 0.0));
        assert!(r.counts.add.predicted == 0);
    }

    #[test]
    fn aggregation() {
        let a = evaluate("a b c", "a b", "a b");
        let b = evaluate("a b c d", "a", "a b");
        let c = aggregate(&[a, b]);
        assert_eq!(c.chapters, 2);
        assert!((c.mean.r_l - (a.r_l + b.r_l) / 2.0).abs() < 1e-15);
        assert_eq!(c.pooled.counts.lcs, 3);
        assert_eq!(c.mean.token_count, 1.5);
        assert_eq!(aggregate(&[]).chapters, 0);
    }

    fn text() -> impl Strategy<Value = String> {
        proptest::collection::vec(0u8..8, 0..12)
            .prop_map(|v| v.iter().map(|w| alloc::format!("w{w}")).collect::<Vec<_>>().join(" "))
    }

    proptest! {
        #[test]
        fn scores_are_bounded(o in text(), p in text(), r in text()) {
            let rep = evaluate(&o, &p, &r);
            for prf in [rep.prsv, rep.rmv, rep.add] {
                for v in [prf.precision, prf.recall, prf.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
                prop_assert!(prf.f1 <= prf.precision.max(prf.recall) + 1e-15);
            }
            let (ot, pt) = (word_types(&o), word_types(&p));
            let (keep, gone) = (preserved(&ot, &pt), removed(&ot, &pt));
            prop_assert!(keep.is_disjoint(&gone));
            prop_assert_eq!(keep.len() + gone.len(), ot.len());
            let spaced = p.replace(' ', "   ");
            prop_assert_eq!(evaluate(&o, &spaced, &r), rep);
        }
    }
}
