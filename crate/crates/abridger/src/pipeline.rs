//! End-to-end run driven by a TOML file.
//!
//! Each stage declares its inputs and outputs. A stage is skipped when every
//! output exists and none is older than any input; the config file counts as
//! an input of every stage.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use abridger_core::abridge::{ExtractConfig, ExtractMethod};
use abridger_core::passage::ChunkConfig;
use abridger_core::review::{ReviewConfig, Side};
use abridger_core::text::{ParagraphBreak, Segmenter};
use abridger_core::{AlignerConfig, PassageUnit, SimilarityKind};
use serde::Deserialize;

use crate::error::{AppError, Result};
use crate::formats::{
    chapter_pairs, chapter_records, group_labels, group_rows, read_jsonl, read_texts, write_json, write_jsonl,
    ChapterRecord, LabelRecord, RowRecord,
};
use crate::ingest::{ingest_book, HeadingPatterns};
use crate::ops::{align_pairs, evaluate_texts, extract, labels, load_lexicon, passages, stats};
use crate::store::Snapshot;

pub const CHAPTERS: &str = "chapters.jsonl";
pub const ROWS: &str = "rows.jsonl";
pub const CORRECTIONS: &str = "corrections.jsonl";
pub const REVIEWED: &str = "rows.reviewed.jsonl";
pub const PASSAGES: &str = "passages.jsonl";
pub const LABELS: &str = "labels.jsonl";
pub const STATS: &str = "stats.json";
pub const PRED: &str = "pred.jsonl";
pub const REPORT: &str = "report.json";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub book_id: String,
    pub original: PathBuf,
    pub abridged: PathBuf,
    pub patterns: Option<PathBuf>,
    #[serde(default)]
    pub paragraph_break: ParagraphBreak,
    pub out_dir: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub align: AlignSection,
    #[serde(default)]
    pub passages: PassageSection,
    #[serde(default)]
    pub extract: ExtractSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignSection {
    pub o_max: usize,
    pub a_max: usize,
    pub pn: f64,
    pub similarity: SimilarityKind,
    pub threshold: f64,
}

impl Default for AlignSection {
    fn default() -> Self {
        let a = AlignerConfig::default();
        AlignSection {
            o_max: a.o_max,
            a_max: a.a_max,
            pn: a.pn,
            similarity: a.similarity,
            threshold: abridger_core::align::DEFAULT_FLAG_THRESHOLD,
        }
    }
}

impl AlignSection {
    pub fn aligner(&self) -> AlignerConfig {
        AlignerConfig {
            o_max: self.o_max,
            a_max: self.a_max,
            pn: self.pn,
            similarity: self.similarity,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PassageSection {
    pub unit: PassageUnit,
    pub chunk_sents: usize,
}

impl Default for PassageSection {
    fn default() -> Self {
        PassageSection {
            unit: PassageUnit::Sentence,
            chunk_sents: ChunkConfig::default().max_sentences,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractSection {
    pub method: ExtractMethod,
    pub t: f64,
    pub p: f64,
    pub seed: Option<u64>,
    /// Token labels for the label-driven methods; the gold labels stage output when absent.
    pub labels: Option<PathBuf>,
}

impl Default for ExtractSection {
    fn default() -> Self {
        let e = ExtractConfig::default();
        ExtractSection {
            method: ExtractMethod::Copy,
            t: e.t,
            p: e.p,
            seed: None,
            labels: None,
        }
    }
}

impl PipelineConfig {
    /// Reads a config and resolves its paths against the file's directory.
    /// `default_out` is used when the file names no `out_dir`.
    pub fn load(path: &Path, default_out: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|source| AppError::Toml {
            path: path.into(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| *p = base.join(&*p);
        resolve(&mut cfg.original);
        resolve(&mut cfg.abridged);
        cfg.patterns.as_mut().map(resolve);
        cfg.lexicon.as_mut().map(resolve);
        cfg.extract.labels.as_mut().map(resolve);
        match cfg.out_dir.as_mut() {
            Some(p) => resolve(p),
            None => cfg.out_dir = Some(default_out.into()),
        }
        Ok(cfg)
    }

    pub fn out_dir(&self) -> &Path {
        self.out_dir.as_deref().unwrap_or(Path::new("."))
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir().join(name)
    }

    pub fn extract_config(&self) -> ExtractConfig {
        ExtractConfig {
            method: self.extract.method,
            t: self.extract.t,
            p: self.extract.p,
            seed: self.extract.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ran,
    Skipped,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Ran => "ran",
            Outcome::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub stage: &'static str,
    pub outcome: Outcome,
}

fn modified(path: &Path) -> Option<SystemTime> {
    std::fs::metadata(path).and_then(|m| m.modified()).ok()
}

/// True when some output is missing or older than the newest existing input.
pub fn is_stale<P: AsRef<Path>, Q: AsRef<Path>>(inputs: &[P], outputs: &[Q]) -> bool {
    let newest_input = inputs.iter().filter_map(|p| modified(p.as_ref())).max();
    outputs.iter().any(|o| match (modified(o.as_ref()), newest_input) {
        (None, _) => true,
        (Some(out), Some(input)) => out < input,
        (Some(_), None) => false,
    })
}

struct Runner<'a> {
    config_path: &'a Path,
    force: bool,
    report: Vec<StageReport>,
}

impl Runner<'_> {
    fn stage(
        &mut self,
        stage: &'static str,
        inputs: &[&Path],
        outputs: &[&Path],
        run: impl FnOnce() -> Result<()>,
    ) -> Result<()> {
        let mut inputs = inputs.to_vec();
        inputs.push(self.config_path);
        let outcome = if self.force || is_stale(&inputs, outputs) {
            run().map_err(|e| AppError::Stage {
                stage,
                source: Box::new(e),
            })?;
            Outcome::Ran
        } else {
            Outcome::Skipped
        };
        self.report.push(StageReport { stage, outcome });
        Ok(())
    }
}

fn load_pairs(path: &Path) -> Result<Vec<abridger_core::ChapterPair>> {
    chapter_pairs(&read_jsonl::<ChapterRecord>(path)?)
}

fn load_rows(path: &Path) -> Result<BTreeMap<String, Vec<abridger_core::AlignmentRow>>> {
    group_rows(&read_jsonl::<RowRecord>(path)?)
}

/// Runs ingest, align, review, passages, labels, stats, extract and evaluate
/// in order. The review stage folds `corrections.jsonl` (written by the
/// review service) into the rows the later stages read.
pub fn run(config_path: &Path, cfg: &PipelineConfig, force: bool) -> Result<Vec<StageReport>> {
    let out_dir = cfg.out_dir();
    std::fs::create_dir_all(out_dir).map_err(|e| AppError::io(out_dir, e))?;
    let mut runner = Runner {
        config_path,
        force,
        report: Vec::new(),
    };
    let (chapters, rows, corrections, reviewed) = (
        cfg.out(CHAPTERS),
        cfg.out(ROWS),
        cfg.out(CORRECTIONS),
        cfg.out(REVIEWED),
    );

    let mut ingest_inputs = vec![cfg.original.as_path(), cfg.abridged.as_path()];
    ingest_inputs.extend(cfg.patterns.as_deref());
    runner.stage("ingest", &ingest_inputs, &[&chapters], || {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| AppError::io(p, e));
        let patterns = match &cfg.patterns {
            Some(p) => HeadingPatterns::load(p)?,
            None => HeadingPatterns::default(),
        };
        let segmenter = Segmenter::new(cfg.paragraph_break);
        let pairs = ingest_book(
            &cfg.book_id,
            &read(&cfg.original)?,
            &read(&cfg.abridged)?,
            &patterns,
            &segmenter,
        )?;
        write_jsonl(&chapters, &chapter_records(&pairs))
    })?;

    runner.stage("align", &[&chapters], &[&rows], || {
        let aligner = cfg.align.aligner();
        aligner.validate()?;
        write_jsonl(
            &rows,
            &align_pairs(&load_pairs(&chapters)?, &aligner, cfg.align.threshold)?,
        )
    })?;

    runner.stage("review", &[&chapters, &rows, &corrections], &[&reviewed], || {
        let review = ReviewConfig {
            similarity: cfg.align.similarity,
            threshold: cfg.align.threshold,
        };
        let snapshot = Snapshot::replay(&chapters, &rows, &corrections, &review)?;
        crate::formats::write_atomic(&reviewed, snapshot.export().as_bytes())
    })?;

    let passage_file = cfg.out(PASSAGES);
    runner.stage("passages", &[&chapters, &reviewed], &[&passage_file], || {
        let chunk = ChunkConfig {
            max_sentences: cfg.passages.chunk_sents,
        };
        let out = passages(
            &load_pairs(&chapters)?,
            &load_rows(&reviewed)?,
            cfg.passages.unit,
            chunk,
        )?;
        write_jsonl(&passage_file, &out)
    })?;

    let label_file = cfg.out(LABELS);
    runner.stage("labels", &[&chapters, &reviewed], &[&label_file], || {
        write_jsonl(&label_file, &labels(&load_pairs(&chapters)?, &load_rows(&reviewed)?)?)
    })?;

    let stats_file = cfg.out(STATS);
    let mut stats_inputs = vec![chapters.as_path(), reviewed.as_path()];
    stats_inputs.extend(cfg.lexicon.as_deref());
    runner.stage("stats", &stats_inputs, &[&stats_file], || {
        let lexicon = load_lexicon(cfg.lexicon.as_deref())?;
        write_json(
            &stats_file,
            &stats(&load_pairs(&chapters)?, &load_rows(&reviewed)?, &lexicon)?,
        )
    })?;

    let pred = cfg.out(PRED);
    let extract_labels = cfg.extract.labels.clone().unwrap_or_else(|| label_file.clone());
    runner.stage("extract", &[&chapters, &reviewed, &extract_labels], &[&pred], || {
        let config = cfg.extract_config();
        let label_map = if config.method.needs_labels() && config.method != ExtractMethod::PerfectExtToks {
            Some(group_labels(&read_jsonl::<LabelRecord>(&extract_labels)?)?)
        } else {
            None
        };
        let row_map = load_rows(&reviewed)?;
        let out = extract(&load_pairs(&chapters)?, &config, label_map.as_ref(), Some(&row_map))?;
        write_jsonl(&pred, &out)
    })?;

    let report = cfg.out(REPORT);
    runner.stage("evaluate", &[&chapters, &pred], &[&report], || {
        let file = evaluate_texts(
            cfg.extract.method.name(),
            &read_texts(&chapters, Side::Original)?,
            &read_texts(&pred, Side::Original)?,
            &read_texts(&chapters, Side::Abridged)?,
        )?;
        write_json(&report, &file)
    })?;

    Ok(runner.report)
}
