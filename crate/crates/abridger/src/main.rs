use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abridger::error::{AppError, Result};
use abridger::formats::{
    chapter_pairs, chapter_records, group_labels, group_rows, read_jsonl, read_texts, write_json, write_jsonl,
    AnnotationRecord, ChapterRecord, LabelRecord, RowRecord,
};
use abridger::ingest::{ingest_book, HeadingPatterns};
use abridger::ops::{self, RowMap};
use abridger::pipeline::{self, PipelineConfig};
use abridger::service::{self, AppState};
use abridger::store::RowStore;
use abridger_core::abridge::{ExtractConfig, ExtractMethod};
use abridger_core::align::DEFAULT_FLAG_THRESHOLD;
use abridger_core::passage::ChunkConfig;
use abridger_core::review::{ReviewConfig, Side};
use abridger_core::text::{ParagraphBreak, Segmenter};
use abridger_core::{AlignerConfig, ChapterPair, PassageUnit, SimilarityKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "abridger", version, about = "Align, review and evaluate abridged texts")]
struct Cli {
    /// Pipeline config (TOML). Its out_dir becomes the default output directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for default input and output files [default: .]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for randomized abridgers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split both books into chapters and write chapters.jsonl.
    Ingest(IngestArgs),
    /// Align every chapter and write rows.jsonl.
    Align(AlignArgs),
    /// Recompute review flags in a rows file.
    Flag {
        #[arg(long)]
        rows: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FLAG_THRESHOLD)]
        threshold: f64,
        /// Output file [default: overwrite --rows]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive token labels (0 preserved, 1 removed) from rows.
    Labels {
        #[arg(long)]
        rows: Option<PathBuf>,
        #[arg(long)]
        chapters: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive passage pairs from rows.
    Passages {
        #[arg(long)]
        rows: Option<PathBuf>,
        #[arg(long)]
        chapters: Option<PathBuf>,
        #[arg(long, default_value = "sentence")]
        unit: PassageUnit,
        #[arg(long, default_value_t = ChunkConfig::default().max_sentences)]
        chunk_sents: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus statistics over aligned rows.
    Stats {
        #[arg(long)]
        rows: Option<PathBuf>,
        #[arg(long)]
        chapters: Option<PathBuf>,
        /// Closed-class word list, one per line [default: built-in English list]
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Produce an abridgement of every chapter.
    Extract(ExtractArgs),
    /// Score predicted abridgements against references.
    Evaluate {
        /// Original texts (chapters.jsonl)
        #[arg(long)]
        orig: Option<PathBuf>,
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Reference abridgements [default: abridged side of --orig]
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Row-level F1 of predicted rows against gold rows.
    Rowf1 {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
    /// Fleiss' kappa over binary annotations.
    Kappa {
        #[arg(long)]
        annotations: PathBuf,
    },
    /// Serve the review API (and UI assets) over the rows.
    Serve(ServeArgs),
    /// Run every stage from a config file, skipping up-to-date stages.
    Pipeline {
        /// Rerun every stage.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Paragraphs {
    BlankLine,
    LineBreak,
}

impl From<Paragraphs> for ParagraphBreak {
    fn from(p: Paragraphs) -> Self {
        match p {
            Paragraphs::BlankLine => ParagraphBreak::BlankLine,
            Paragraphs::LineBreak => ParagraphBreak::LineBreak,
        }
    }
}

#[derive(Debug, Args)]
struct TextArgs {
    #[arg(long, default_value = "book")]
    book_id: String,
    /// Heading patterns, one regex per line [default: bundled patterns]
    #[arg(long)]
    patterns: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "blank-line")]
    paragraphs: Paragraphs,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    abridged: PathBuf,
    #[command(flatten)]
    text: TextArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AlignArgs {
    #[arg(long, conflicts_with_all = ["original", "abridged"])]
    chapters: Option<PathBuf>,
    /// Original book text; ingested on the fly together with --abridged.
    #[arg(long, requires = "abridged")]
    original: Option<PathBuf>,
    #[arg(long, requires = "original")]
    abridged: Option<PathBuf>,
    #[command(flatten)]
    text: TextArgs,
    #[arg(long = "on", default_value_t = 3)]
    o_max: usize,
    #[arg(long = "am", default_value_t = 5)]
    a_max: usize,
    #[arg(long, default_value_t = 0.175)]
    pn: f64,
    #[arg(long, default_value = "rouge1p")]
    sim: SimilarityKind,
    #[arg(long, default_value_t = DEFAULT_FLAG_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// copy, rand, tokens, perfect or sents
    #[arg(long, default_value = "copy")]
    method: ExtractMethod,
    #[arg(long)]
    chapters: Option<PathBuf>,
    /// Token labels for tokens and sents [default: labels.jsonl in the output directory]
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Aligned rows, read by perfect [default: rows.jsonl in the output directory]
    #[arg(long)]
    rows: Option<PathBuf>,
    #[arg(long, default_value_t = ExtractConfig::default().t)]
    t: f64,
    #[arg(long, default_value_t = ExtractConfig::default().p)]
    p: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Listening port; ABRIDGER_PORT takes precedence.
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Static files served outside /api.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
    #[arg(long)]
    rows: Option<PathBuf>,
    #[arg(long)]
    chapters: Option<PathBuf>,
    /// Correction log [default: corrections.jsonl in the output directory]
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_FLAG_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value = "rouge1p")]
    sim: SimilarityKind,
}

struct Ctx {
    out_dir: PathBuf,
    config: Option<(PathBuf, PipelineConfig)>,
    seed: Option<u64>,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self> {
        let fallback = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        let config = match &cli.config {
            Some(path) => Some((path.clone(), PipelineConfig::load(path, &fallback)?)),
            None => None,
        };
        let out_dir = match (&cli.out_dir, &config) {
            (Some(dir), _) => dir.clone(),
            (None, Some((_, cfg))) => cfg.out_dir().into(),
            (None, None) => fallback,
        };
        Ok(Ctx {
            out_dir,
            config,
            seed: cli.seed,
        })
    }

    fn path(&self, given: &Option<PathBuf>, default: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.out_dir.join(default))
    }

    /// Output path, with its directory created.
    fn out(&self, given: &Option<PathBuf>, default: &str) -> Result<PathBuf> {
        let path = self.path(given, default);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        }
        Ok(path)
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

fn ingest_texts(original: &Path, abridged: &Path, args: &TextArgs) -> Result<Vec<ChapterPair>> {
    let patterns = match &args.patterns {
        Some(p) => HeadingPatterns::load(p)?,
        None => HeadingPatterns::default(),
    };
    let segmenter = Segmenter::new(args.paragraphs.into());
    ingest_book(
        &args.book_id,
        &read_text(original)?,
        &read_text(abridged)?,
        &patterns,
        &segmenter,
    )
}

fn load_pairs(path: &Path) -> Result<Vec<ChapterPair>> {
    chapter_pairs(&read_jsonl::<ChapterRecord>(path)?)
}

fn load_rows(path: &Path) -> Result<RowMap> {
    group_rows(&read_jsonl::<RowRecord>(path)?)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx::new(&cli)?;
    match cli.command {
        Command::Ingest(args) => {
            let pairs = ingest_texts(&args.original, &args.abridged, &args.text)?;
            let out = ctx.out(&args.out, pipeline::CHAPTERS)?;
            write_jsonl(&out, &chapter_records(&pairs))?;
            println!("{} chapters -> {}", pairs.len(), out.display());
        }
        Command::Align(args) => {
            let pairs = match (&args.original, &args.abridged) {
                (Some(o), Some(a)) => ingest_texts(o, a, &args.text)?,
                _ => load_pairs(&ctx.path(&args.chapters, pipeline::CHAPTERS))?,
            };
            let aligner = AlignerConfig {
                o_max: args.o_max,
                a_max: args.a_max,
                pn: args.pn,
                similarity: args.sim,
            };
            aligner.validate()?;
            let rows = ops::align_pairs(&pairs, &aligner, args.threshold)?;
            let out = ctx.out(&args.out, pipeline::ROWS)?;
            write_jsonl(&out, &rows)?;
            let flagged = rows.iter().filter(|r| r.flagged).count();
            println!("{} rows ({flagged} flagged) -> {}", rows.len(), out.display());
        }
        Command::Flag { rows, threshold, out } => {
            let input = ctx.path(&rows, pipeline::ROWS);
            let mut records: Vec<RowRecord> = read_jsonl(&input)?;
            ops::reflag(&mut records, threshold)?;
            let out = out.unwrap_or(input);
            write_jsonl(&out, &records)?;
            let flagged = records.iter().filter(|r| r.flagged).count();
            println!("{flagged} of {} rows flagged -> {}", records.len(), out.display());
        }
        Command::Labels { rows, chapters, out } => {
            let pairs = load_pairs(&ctx.path(&chapters, pipeline::CHAPTERS))?;
            let labels = ops::labels(&pairs, &load_rows(&ctx.path(&rows, pipeline::ROWS))?)?;
            let out = ctx.out(&out, pipeline::LABELS)?;
            write_jsonl(&out, &labels)?;
            println!("{} label spans -> {}", labels.len(), out.display());
        }
        Command::Passages {
            rows,
            chapters,
            unit,
            chunk_sents,
            out,
        } => {
            let pairs = load_pairs(&ctx.path(&chapters, pipeline::CHAPTERS))?;
            let rows = load_rows(&ctx.path(&rows, pipeline::ROWS))?;
            let chunk = ChunkConfig {
                max_sentences: chunk_sents,
            };
            let passages = ops::passages(&pairs, &rows, unit, chunk)?;
            let out = ctx.out(&out, pipeline::PASSAGES)?;
            write_jsonl(&out, &passages)?;
            println!("{} passages -> {}", passages.len(), out.display());
        }
        Command::Stats {
            rows,
            chapters,
            lexicon,
            out,
        } => {
            let pairs = load_pairs(&ctx.path(&chapters, pipeline::CHAPTERS))?;
            let rows = load_rows(&ctx.path(&rows, pipeline::ROWS))?;
            let report = ops::stats(&pairs, &rows, &ops::load_lexicon(lexicon.as_deref())?)?;
            let out = ctx.out(&out, pipeline::STATS)?;
            write_json(&out, &report)?;
            println!("stats for {} chapters -> {}", report.summary.chapters, out.display());
        }
        Command::Extract(args) => {
            let config = ExtractConfig {
                method: args.method,
                t: args.t,
                p: args.p,
                seed: args.seed.or(ctx.seed),
            };
            config.validate()?;
            let pairs = load_pairs(&ctx.path(&args.chapters, pipeline::CHAPTERS))?;
            let labels = match config.method {
                ExtractMethod::ExtToks | ExtractMethod::ExtSents => Some(group_labels(&read_jsonl::<LabelRecord>(
                    &ctx.path(&args.labels, pipeline::LABELS),
                )?)?),
                _ => None,
            };
            let rows = match config.method {
                ExtractMethod::PerfectExtToks => Some(load_rows(&ctx.path(&args.rows, pipeline::ROWS))?),
                _ => None,
            };
            let texts = ops::extract(&pairs, &config, labels.as_ref(), rows.as_ref())?;
            let out = ctx.out(&args.out, pipeline::PRED)?;
            write_jsonl(&out, &texts)?;
            println!("{} abridgements ({}) -> {}", texts.len(), config.method, out.display());
        }
        Command::Evaluate {
            orig,
            pred,
            reference,
            name,
            out,
        } => {
            let orig = ctx.path(&orig, pipeline::CHAPTERS);
            let pred = ctx.path(&pred, pipeline::PRED);
            let reference = reference.unwrap_or_else(|| orig.clone());
            let name = name.unwrap_or_else(|| pred.file_stem().map_or("pred".into(), |s| s.to_string_lossy().into()));
            let report = ops::evaluate_texts(
                &name,
                &read_texts(&orig, Side::Original)?,
                &read_texts(&pred, Side::Original)?,
                &read_texts(&reference, Side::Abridged)?,
            )?;
            let out = ctx.out(&out, pipeline::REPORT)?;
            write_json(&out, &report)?;
            print_json(&serde_json::json!({
                "name": report.name,
                "toks": report.mean.toks,
                "r_l": report.mean.r_l,
                "prsv": report.mean.prsv,
                "rmv": report.mean.rmv,
                "add": report.mean.add,
            }));
        }
        Command::Rowf1 { pred, gold } => print_json(&ops::row_f1_report(&load_rows(&pred)?, &load_rows(&gold)?)?),
        Command::Kappa { annotations } => print_json(&ops::kappa(&read_jsonl::<AnnotationRecord>(&annotations)?)?),
        Command::Serve(args) => serve(&ctx, args)?,
        Command::Pipeline { force } => {
            let (path, mut cfg) = ctx
                .config
                .ok_or_else(|| AppError::Data("pipeline needs --config".into()))?;
            if ctx.seed.is_some() {
                cfg.extract.seed = ctx.seed;
            }
            for stage in pipeline::run(&path, &cfg, force)? {
                println!("{:<9} {}", stage.stage, stage.outcome);
            }
        }
    }
    Ok(())
}

fn serve(ctx: &Ctx, args: ServeArgs) -> Result<()> {
    let port = match std::env::var("ABRIDGER_PORT") {
        Ok(v) => v
            .parse()
            .map_err(|_| AppError::Data(format!("ABRIDGER_PORT must be a port number, got `{v}`")))?,
        Err(_) => args.port,
    };
    // A pipeline run leaves its rows in the output directory; serve those by default.
    let rows = ctx.path(&args.rows, pipeline::ROWS);
    let chapters = ctx.path(&args.chapters, pipeline::CHAPTERS);
    let log = ctx.path(&args.log, pipeline::CORRECTIONS);
    let review = ReviewConfig {
        similarity: args.sim,
        threshold: args.threshold,
    };
    let store = RowStore::open(&chapters, &rows, &log, review)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| AppError::Data(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async {
        let listener = service::bind(port).await?;
        eprintln!("serving {} on http://127.0.0.1:{port}", rows.display());
        service::serve(listener, service::router(AppState::new(store), args.ui_dir)).await
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
