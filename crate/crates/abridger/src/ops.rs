//! The work behind each command, on loaded data.

use std::collections::BTreeMap;
use std::path::Path;

use abridger_core::abridge::{abridge, ExtractConfig, ExtractMethod};
use abridger_core::align::{align_chapter, flag_rows, fleiss_kappa, row_f1, validate_rows, AnnotationSet};
use abridger_core::eval::{aggregate, evaluate, EvalReport};
use abridger_core::lexstats::{
    category_stats, corpus_summary, lexical_relations, row_tokens, score_bins, size_distribution, CategoryShare,
    CategoryStats, ChapterView, CorpusSummary, Distribution, LexRelation, LexicalSummary, Lexicon,
};
use abridger_core::passage::{
    chapter_slices, gold_labels, label_spans, make_passages, map_passages, ChunkConfig, Label,
};
use abridger_core::text::Span;
use abridger_core::{AlignerConfig, AlignmentRow, ChapterPair, PassageUnit, Prf};
use serde::Serialize;

use crate::error::{AppError, Result};
use crate::formats::{row_records, AnnotationRecord, LabelRecord, PassageRecord, RowRecord, TextRecord};

pub type RowMap = BTreeMap<String, Vec<AlignmentRow>>;
pub type LabelMap = BTreeMap<String, Vec<(Span, Label)>>;

/// Aligns and flags every chapter.
pub fn align_pairs(pairs: &[ChapterPair], config: &AlignerConfig, threshold: f64) -> Result<Vec<RowRecord>> {
    let mut out = Vec::new();
    for pair in pairs {
        let mut rows = align_chapter(pair, config)
            .map_err(|e| AppError::Data(format!("chapter `{}`: {e}", pair.chapter_id)))?
            .rows;
        flag_rows(&mut rows, threshold);
        out.extend(row_records(&pair.book_id, &pair.chapter_id, &rows));
    }
    Ok(out)
}

pub fn reflag(records: &mut [RowRecord], threshold: f64) -> Result<()> {
    let flagged: BTreeMap<String, Vec<bool>> = crate::formats::group_rows(records)?
        .into_iter()
        .map(|(id, mut rows)| {
            flag_rows(&mut rows, threshold);
            (id, rows.iter().map(|r| r.flagged).collect())
        })
        .collect();
    for r in records.iter_mut() {
        r.flagged = flagged[&r.chapter_id][r.row_index];
    }
    Ok(())
}

/// Rows for a chapter, checked against its sentence counts.
pub fn chapter_rows<'a>(rows: &'a RowMap, pair: &ChapterPair) -> Result<&'a [AlignmentRow]> {
    let r = rows
        .get(&pair.chapter_id)
        .ok_or_else(|| AppError::Data(format!("no rows for chapter `{}`", pair.chapter_id)))?;
    validate_rows(r, pair.original.sentence_count(), pair.abridged.sentence_count())
        .map_err(|e| AppError::Data(format!("chapter `{}`: {e}", pair.chapter_id)))?;
    Ok(r)
}

pub fn passages(
    pairs: &[ChapterPair],
    rows: &RowMap,
    unit: PassageUnit,
    chunk: ChunkConfig,
) -> Result<Vec<PassageRecord>> {
    let mut out = Vec::new();
    for pair in pairs {
        let r = chapter_rows(rows, pair)?;
        let slices = chapter_slices(&pair.original, &pair.abridged, r);
        let mut ps = make_passages(&pair.original, unit, chunk, r)?;
        map_passages(&mut ps, &slices);
        out.extend(ps.iter().map(|p| PassageRecord::new(&pair.chapter_id, p)));
    }
    Ok(out)
}

pub fn labels(pairs: &[ChapterPair], rows: &RowMap) -> Result<Vec<LabelRecord>> {
    let mut out = Vec::new();
    for pair in pairs {
        let r = chapter_rows(rows, pair)?;
        for (span, label) in label_spans(&gold_labels(&pair.original, &pair.abridged, r)) {
            out.push(LabelRecord {
                chapter_id: pair.chapter_id.clone(),
                token_start: span.start,
                token_end: span.end,
                label: label.as_u8(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub labels: Vec<&'static str>,
    pub counts: Vec<usize>,
    pub percentages: Vec<f64>,
}

impl From<&Distribution> for DistributionReport {
    fn from(d: &Distribution) -> Self {
        DistributionReport {
            labels: d.labels.to_vec(),
            counts: d.counts.clone(),
            percentages: d.percentages(),
        }
    }
}

/// A function/content split; percentages are absent when nothing was counted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareReport {
    pub empty: bool,
    pub function: usize,
    pub content: usize,
    pub pct_function: Option<f64>,
    pub pct_content: Option<f64>,
}

impl From<CategoryShare> for ShareReport {
    fn from(s: CategoryShare) -> Self {
        ShareReport {
            empty: s.is_empty(),
            function: s.function,
            content: s.content,
            pct_function: (!s.is_empty()).then(|| s.pct_function()),
            pct_content: (!s.is_empty()).then(|| s.pct_content()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryReport {
    pub original: ShareReport,
    pub removed: ShareReport,
    pub abridged: ShareReport,
    pub added: ShareReport,
}

impl From<CategoryStats> for CategoryReport {
    fn from(c: CategoryStats) -> Self {
        CategoryReport {
            original: c.original.into(),
            removed: c.removed.into(),
            abridged: c.abridged.into(),
            added: c.added.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub summary: CorpusSummary,
    pub row_sizes: DistributionReport,
    pub score_bins: DistributionReport,
    pub lexical_relations: LexicalSummary,
    pub categories: CategoryReport,
}

pub fn stats(pairs: &[ChapterPair], rows: &RowMap, lexicon: &Lexicon) -> Result<StatsReport> {
    let mut views = Vec::new();
    let mut all_rows = Vec::new();
    let mut tokens = Vec::new();
    for pair in pairs {
        let r = chapter_rows(rows, pair)?;
        views.push(ChapterView {
            original: &pair.original,
            abridged: &pair.abridged,
            rows: r,
        });
        all_rows.extend_from_slice(r);
        tokens.extend(row_tokens(&pair.original, &pair.abridged, r));
    }
    let relations: Vec<LexRelation> = tokens.iter().map(|(o, a)| lexical_relations(o, a)).collect();
    let categories = category_stats(tokens.iter().map(|(o, a)| (o.as_slice(), a.as_slice())), lexicon);
    Ok(StatsReport {
        summary: corpus_summary(&views),
        row_sizes: (&size_distribution(&all_rows)).into(),
        score_bins: (&score_bins(&all_rows)).into(),
        lexical_relations: LexicalSummary::from_relations(&relations),
        categories: categories.into(),
    })
}

pub fn load_lexicon(path: Option<&Path>) -> Result<Lexicon> {
    match path {
        None => Ok(Lexicon::english()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| AppError::io(p, e))?;
            Ok(Lexicon::from_words(
                text.lines().filter(|l| !l.trim_start().starts_with('#')),
            ))
        }
    }
}

/// Runs an abridger over every chapter. Perfect token extraction derives
/// gold labels from `rows`; the other label-driven methods read `labels`.
pub fn extract(
    pairs: &[ChapterPair],
    config: &ExtractConfig,
    labels: Option<&LabelMap>,
    rows: Option<&RowMap>,
) -> Result<Vec<TextRecord>> {
    config.validate()?;
    let mut out = Vec::new();
    for pair in pairs {
        let chapter_labels: Option<Vec<(Span, Label)>> = match config.method {
            ExtractMethod::PerfectExtToks => {
                let rows = rows.ok_or_else(|| AppError::Data("perfect_ext_toks needs aligned rows".into()))?;
                let r = chapter_rows(rows, pair)?;
                Some(label_spans(&gold_labels(&pair.original, &pair.abridged, r)))
            }
            ExtractMethod::ExtToks | ExtractMethod::ExtSents => {
                let labels = labels.ok_or_else(|| AppError::Data(format!("{} needs a labels file", config.method)))?;
                Some(
                    labels
                        .get(&pair.chapter_id)
                        .cloned()
                        .ok_or_else(|| AppError::Data(format!("no labels for chapter `{}`", pair.chapter_id)))?,
                )
            }
            _ => None,
        };
        let text = abridge(&pair.original, chapter_labels.as_deref(), config)
            .map_err(|e| AppError::Data(format!("chapter `{}`: {e}", pair.chapter_id)))?;
        out.push(TextRecord {
            chapter_id: pair.chapter_id.clone(),
            text,
        });
    }
    Ok(out)
}

/// One line of an evaluation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreLine {
    pub toks: f64,
    pub r_l: f64,
    pub prsv_p: f64,
    pub prsv_r: f64,
    pub prsv: f64,
    pub rmv_p: f64,
    pub rmv_r: f64,
    pub rmv: f64,
    pub add_p: f64,
    pub add_r: f64,
    pub add: f64,
}

impl ScoreLine {
    fn new(toks: f64, r_l: f64, prsv: Prf, rmv: Prf, add: Prf) -> Self {
        ScoreLine {
            toks,
            r_l,
            prsv_p: prsv.precision,
            prsv_r: prsv.recall,
            prsv: prsv.f1,
            rmv_p: rmv.precision,
            rmv_r: rmv.recall,
            rmv: rmv.f1,
            add_p: add.precision,
            add_r: add.recall,
            add: add.f1,
        }
    }

    pub fn of(r: &EvalReport) -> Self {
        ScoreLine::new(r.token_count as f64, r.r_l, r.prsv, r.rmv, r.add)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChapterScore {
    pub chapter_id: String,
    #[serde(flatten)]
    pub scores: ScoreLine,
}

/// Evaluation output: per-chapter means at the top level, pooled counts and
/// per-chapter lines below.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalFile {
    pub name: String,
    pub chapters: usize,
    #[serde(flatten)]
    pub mean: ScoreLine,
    pub pooled: ScoreLine,
    pub per_chapter: Vec<ChapterScore>,
}

pub fn evaluate_texts(
    name: &str,
    original: &BTreeMap<String, String>,
    predicted: &BTreeMap<String, String>,
    reference: &BTreeMap<String, String>,
) -> Result<EvalFile> {
    if predicted.is_empty() {
        return Err(AppError::Data("no predicted chapters".into()));
    }
    let mut reports = Vec::new();
    let mut per_chapter = Vec::new();
    for (id, pred) in predicted {
        let missing = |side: &str| AppError::Data(format!("chapter `{id}` has no {side} text"));
        let o = original.get(id).ok_or_else(|| missing("original"))?;
        let r = reference.get(id).ok_or_else(|| missing("reference"))?;
        let report = evaluate(o, pred, r);
        per_chapter.push(ChapterScore {
            chapter_id: id.clone(),
            scores: ScoreLine::of(&report),
        });
        reports.push(report);
    }
    let corpus = aggregate(&reports);
    let m = corpus.mean;
    Ok(EvalFile {
        name: name.into(),
        chapters: corpus.chapters,
        mean: ScoreLine::new(m.token_count, m.r_l, m.prsv, m.rmv, m.add),
        pooled: ScoreLine::of(&corpus.pooled),
        per_chapter,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowF1Line {
    pub chapter_id: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowF1Report {
    pub chapters: Vec<RowF1Line>,
    pub mean: Prf,
}

/// Row-level F1 of predicted rows against gold rows, chapter by chapter.
/// Sentence counts come from the gold rows.
pub fn row_f1_report(pred: &RowMap, gold: &RowMap) -> Result<RowF1Report> {
    let mut chapters = Vec::new();
    for (id, g) in gold {
        let p = pred
            .get(id)
            .ok_or_else(|| AppError::Data(format!("no predicted rows for chapter `{id}`")))?;
        let n = g.last().map_or(0, AlignmentRow::o_end);
        let m = g.last().map_or(0, AlignmentRow::a_end);
        let prf = row_f1(p, g, n, m).map_err(|e| AppError::Data(format!("chapter `{id}`: {e}")))?;
        chapters.push(RowF1Line {
            chapter_id: id.clone(),
            precision: prf.precision,
            recall: prf.recall,
            f1: prf.f1,
        });
    }
    let k = chapters.len().max(1) as f64;
    let mean = Prf {
        precision: chapters.iter().map(|c| c.precision).sum::<f64>() / k,
        recall: chapters.iter().map(|c| c.recall).sum::<f64>() / k,
        f1: chapters.iter().map(|c| c.f1).sum::<f64>() / k,
    };
    Ok(RowF1Report { chapters, mean })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaReport {
    pub items: usize,
    pub raters: usize,
    pub kappa: f64,
}

pub fn kappa(records: &[AnnotationRecord]) -> Result<KappaReport> {
    let set: AnnotationSet = records
        .iter()
        .map(|r| (r.item.as_str(), r.rater.as_str(), r.label))
        .collect();
    Ok(KappaReport {
        items: set.items().len(),
        raters: set.raters().len(),
        kappa: fleiss_kappa(&set)?,
    })
}
