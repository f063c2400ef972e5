mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use noisyner::alignment::{align_and_transfer, flag_entity_ocr_errors, WindowConfig};
use noisyner::conll::{
    convert_scheme, corpus_stats, downsample, map_tagset, split_corpus, write_conll, ColumnSpec, ConllReader,
    Separator, TagMapping,
};
use noisyner::corruption::{corrupt_corpus, Alphabet, CorruptionConfig, CorruptionOp};
use noisyner::evaluation::{evaluate, evaluate_subset, significance_test};
use noisyner::ocr::{external_ocr, simulate_ocr, ExternalPipelineConfig, OcrNoiseConfig, SubstitutionTable};
use noisyner::{seed, Corpus, TagScheme};

use config::Config;

#[derive(Parser)]
#[command(name = "noisyner", version, about = "Noise, align and evaluate NER corpora for OCR'd text")]
struct Cli {
    /// Flat key = value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed; each stage derives its own seed from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(flatten)]
    input: InputOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputOpts {
    /// Input tag scheme (IO, IOB1, IOB2); inferred when omitted.
    #[arg(long, global = true)]
    scheme: Option<TagScheme>,
    /// Coerce invalid label sequences instead of failing.
    #[arg(long, global = true)]
    repair: bool,
    /// Zero-based token column.
    #[arg(long, global = true)]
    token_col: Option<usize>,
    /// Zero-based label column.
    #[arg(long, global = true)]
    label_col: Option<usize>,
    /// Columns are tab-separated.
    #[arg(long, global = true)]
    tab: bool,
    /// Language code (fr, nl).
    #[arg(long, global = true)]
    language: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between IO, IOB1 and IOB2.
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value = "IOB1")]
        to: TagScheme,
    },
    /// Remap or drop entity types (default: drop MISC).
    MapTags {
        input: PathBuf,
        output: PathBuf,
        /// Comma-separated FROM=TO pairs; TO may be `drop`.
        #[arg(long)]
        mapping: Option<String>,
    },
    /// Contiguous train/dev/test split into OUT_DIR/{train,dev,test}.txt.
    Split {
        input: PathBuf,
        out_dir: PathBuf,
        #[arg(long)]
        ratios: Option<String>,
    },
    /// Sentence-wise random sampling down to a token budget.
    Downsample {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        target_tokens: Option<usize>,
    },
    /// Single-character corruptions of a fraction of words.
    Corrupt {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        rate: Option<f64>,
        /// Comma-separated subset of insert,remove,transpose.
        #[arg(long)]
        ops: Option<String>,
        /// Insertion alphabet file, one character per line.
        #[arg(long)]
        alphabet: Option<PathBuf>,
    },
    /// Produce OCR-like raw text, built-in channel or external command.
    Synocr(SynocrArgs),
    /// Align noisy raw text to a clean corpus and transfer labels.
    AlignTransfer {
        clean: PathBuf,
        noisy: PathBuf,
        output: PathBuf,
        /// Write the alignment path here.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long)]
        initial_window: Option<usize>,
        #[arg(long)]
        cost_threshold: Option<f64>,
        #[arg(long)]
        growth_factor: Option<f64>,
        #[arg(long)]
        max_window: Option<usize>,
    },
    /// Exact-match chunk evaluation.
    Eval {
        gold: PathBuf,
        pred: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Print the conlleval-style table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Evaluation restricted to gold entities containing OCR errors. The gold
    /// file needs a flag column after the label column.
    EvalOcrSubset {
        gold: PathBuf,
        pred: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        table: bool,
    },
    /// Approximate randomization test between two systems.
    Sigtest {
        gold: PathBuf,
        pred_a: PathBuf,
        pred_b: PathBuf,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Token, sentence and entity counts.
    Stats { input: PathBuf },
}

#[derive(Args)]
struct SynocrArgs {
    input: PathBuf,
    output: PathBuf,
    /// Confusion table, lines of source<TAB>replacement<TAB>weight.
    #[arg(long, conflicts_with = "external")]
    table: Option<PathBuf>,
    #[arg(long)]
    p_substitute: Option<f64>,
    #[arg(long)]
    p_delete: Option<f64>,
    #[arg(long)]
    p_insert: Option<f64>,
    #[arg(long)]
    p_space_split: Option<f64>,
    #[arg(long)]
    p_space_merge: Option<f64>,
    #[arg(long)]
    p_illegible_line: Option<f64>,
    /// External render+recognize command (run via sh -c; text on stdin and stdout).
    #[arg(long)]
    external: Option<String>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    timeout_secs: Option<f64>,
}

enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn data(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Data(e.into()))
    }
}

struct Ctx {
    config: Config,
    seed: u64,
    columns: ColumnSpec,
    scheme: Option<TagScheme>,
    repair: bool,
    language: String,
}

impl Ctx {
    fn read(&self, path: &Path) -> Result<Corpus, Failure> {
        self.read_with(path, self.columns)
    }

    fn read_with(&self, path: &Path, columns: ColumnSpec) -> Result<Corpus, Failure> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .data()?;
        let (corpus, stats) = ConllReader::new(columns)
            .scheme(self.scheme)
            .repair(self.repair)
            .language(self.language.clone())
            .parse(&text)
            .with_context(|| format!("parsing {}", path.display()))
            .data()?;
        if stats.labels > 0 {
            log::warn!(
                "{}: repaired {} labels in {} sentences",
                path.display(),
                stats.labels,
                stats.sentences
            );
        }
        Ok(corpus)
    }

    fn write(&self, path: &Path, corpus: &Corpus, columns: ColumnSpec) -> Result<(), Failure> {
        fs::write(path, write_conll(corpus, &columns))
            .with_context(|| format!("writing {}", path.display()))
            .data()
    }

    fn stage_seed(&self, stage: &str) -> u64 {
        seed::stage(self.seed, stage)
    }
}

fn parse_ratios(s: &str) -> anyhow::Result<(f64, f64, f64)> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow!("invalid ratios {s:?}: {e}"))?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(anyhow!("expected three comma-separated ratios, got {s:?}")),
    }
}

fn write_report(output: Option<&Path>, body: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, body)
            .with_context(|| format!("writing {}", p.display()))
            .data(),
        None => {
            print!("{body}");
            if !body.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<Value, Failure> {
    let config = match &cli.config {
        Some(p) => Config::load(p).usage()?,
        None => Config::default(),
    };
    let base = ColumnSpec::default();
    let columns = ColumnSpec {
        token_column: config.get(cli.input.token_col, "token-col", base.token_column).usage()?,
        label_column: config.get(cli.input.label_col, "label-col", base.label_column).usage()?,
        flag_column: None,
        separator: if cli.input.tab || config.get(None, "tab", false).usage()? {
            Separator::Tab
        } else {
            Separator::Whitespace
        },
    };
    let ctx = Ctx {
        seed: config.get(cli.seed, "seed", 0).usage()?,
        scheme: config.resolve(cli.input.scheme, "scheme").usage()?,
        repair: cli.input.repair || config.get(None, "repair", false).usage()?,
        language: config.get(cli.input.language.clone(), "language", "fr".to_string()).usage()?,
        columns,
        config,
    };
    let cfg = &ctx.config;

    match cli.command {
        Command::Convert { input, output, to } => {
            let corpus = ctx.read(&input)?;
            let out = convert_scheme(&corpus, to);
            ctx.write(&output, &out, ctx.columns)?;
            Ok(json!({"command": "convert", "from": corpus.scheme.to_string(), "to": to.to_string(),
                      "sentences": out.len(), "tokens": out.token_count()}))
        }
        Command::MapTags { input, output, mapping } => {
            let mapping = match cfg.resolve(mapping, "mapping").usage()? {
                Some(spec) => TagMapping::parse(&spec).map_err(|e| anyhow!(e)).usage()?,
                None => TagMapping::europeana(),
            };
            let corpus = ctx.read(&input)?;
            let out = map_tagset(&corpus, &mapping);
            ctx.write(&output, &out, ctx.columns)?;
            Ok(json!({"command": "map-tags", "entities_before": corpus_stats(&corpus).entity_counts,
                      "entities_after": corpus_stats(&out).entity_counts}))
        }
        Command::Split { input, out_dir, ratios } => {
            let ratios = parse_ratios(&cfg.get(ratios, "ratios", "0.8,0.1,0.1".to_string()).usage()?).usage()?;
            let corpus = ctx.read(&input)?;
            let (train, dev, test) = split_corpus(&corpus, ratios).usage()?;
            fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))
                .data()?;
            let mut sizes = serde_json::Map::new();
            for (name, part) in [("train", &train), ("dev", &dev), ("test", &test)] {
                ctx.write(&out_dir.join(format!("{name}.txt")), part, ctx.columns)?;
                sizes.insert(
                    name.to_string(),
                    json!({"sentences": part.len(), "tokens": part.token_count()}),
                );
            }
            Ok(json!({"command": "split", "parts": sizes}))
        }
        Command::Downsample { input, output, target_tokens } => {
            let target = cfg.get(target_tokens, "target-tokens", 525_000).usage()?;
            let corpus = ctx.read(&input)?;
            let out = downsample(&corpus, target, ctx.stage_seed("downsample"));
            ctx.write(&output, &out, ctx.columns)?;
            Ok(json!({"command": "downsample", "input_tokens": corpus.token_count(),
                      "output_tokens": out.token_count(), "sentences": out.len()}))
        }
        Command::Corrupt { input, output, rate, ops, alphabet } => {
            let alphabet = match cfg.resolve(alphabet, "alphabet").usage()? {
                Some(p) => {
                    let text = fs::read_to_string(&p)
                        .with_context(|| format!("reading {}", p.display()))
                        .usage()?;
                    Alphabet::parse(&text).usage()?
                }
                None => Alphabet::for_language(&ctx.language).usage()?,
            };
            let mut config = CorruptionConfig::new(alphabet, ctx.stage_seed("corrupt"));
            config.rate = cfg.get(rate, "rate", config.rate).usage()?;
            if let Some(ops) = cfg.resolve(ops, "ops").usage()? {
                config.operations = ops
                    .split(',')
                    .map(|o| o.trim().parse::<CorruptionOp>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| anyhow!(e))
                    .usage()?;
            }
            config.validate().usage()?;
            let corpus = ctx.read(&input)?;
            let out = corrupt_corpus(&corpus, &config).usage()?;
            ctx.write(&output, &out, ctx.columns)?;
            let changed = out.sentences.iter().flat_map(|s| &s.tokens).filter(|t| t.ocr_error).count();
            Ok(json!({"command": "corrupt", "tokens": out.token_count(), "corrupted": changed}))
        }
        Command::Synocr(args) => synocr(&ctx, args),
        Command::AlignTransfer { clean, noisy, output, dump, initial_window, cost_threshold, growth_factor, max_window } => {
            let d = WindowConfig::default();
            let window = WindowConfig {
                initial_window: cfg.get(initial_window, "initial-window", d.initial_window).usage()?,
                cost_threshold: cfg.get(cost_threshold, "cost-threshold", d.cost_threshold).usage()?,
                growth_factor: cfg.get(growth_factor, "growth-factor", d.growth_factor).usage()?,
                max_window: cfg.get(max_window, "max-window", d.max_window).usage()?,
            };
            window.validate().usage()?;
            let corpus = ctx.read(&clean)?;
            let noisy_text = fs::read_to_string(&noisy)
                .with_context(|| format!("reading {}", noisy.display()))
                .data()?;
            let (labeled, alignment) = align_and_transfer(&corpus, &noisy_text, &window).data()?;
            ctx.write(&output, &labeled, ctx.columns.with_flags())?;
            if let Some(p) = dump {
                fs::write(&p, alignment.path.dump())
                    .with_context(|| format!("writing {}", p.display()))
                    .data()?;
            }
            let flags = flag_entity_ocr_errors(&labeled);
            let low: Vec<Value> = alignment
                .low_quality
                .iter()
                .map(|r| json!({"clean": [r.clean.start, r.clean.end], "noisy": [r.noisy.start, r.noisy.end]}))
                .collect();
            Ok(json!({"command": "align-transfer", "cost": alignment.path.total_cost,
                      "sentences": labeled.len(), "tokens": labeled.token_count(),
                      "ocr_error_tokens": labeled.sentences.iter().flat_map(|s| &s.tokens).filter(|t| t.ocr_error).count(),
                      "entities": flags.len(), "ocr_error_entities": flags.values().filter(|f| **f).count(),
                      "windows": alignment.windows, "growth_events": alignment.growth_events,
                      "low_quality": low}))
        }
        Command::Eval { gold, pred, output, table } => {
            let g = ctx.read(&gold)?;
            let p = ctx.read(&pred)?;
            let report = evaluate(&g, &p).data()?;
            let body = if table { report.to_table() } else { report.to_json() };
            write_report(output.as_deref(), &body)?;
            Ok(json!({"command": "eval", "precision": report.overall.precision,
                      "recall": report.overall.recall, "f1": report.overall.f1}))
        }
        Command::EvalOcrSubset { gold, pred, output, table } => {
            let g = ctx.read_with(&gold, ctx.columns.with_flags())?;
            let p = ctx.read(&pred)?;
            let flags = flag_entity_ocr_errors(&g);
            let report = evaluate_subset(&g, &p, &flags).data()?;
            let body = if table { report.to_table() } else { report.to_json() };
            write_report(output.as_deref(), &body)?;
            Ok(json!({"command": "eval-ocr-subset", "flagged_entities": flags.values().filter(|f| **f).count(),
                      "entities": flags.len(), "f1": report.overall.f1}))
        }
        Command::Sigtest { gold, pred_a, pred_b, iterations } => {
            let iterations = cfg.get(iterations, "iterations", 1000).usage()?;
            let g = ctx.read(&gold)?;
            let a = ctx.read(&pred_a)?;
            let b = ctx.read(&pred_b)?;
            let r = significance_test(&g, &a, &b, iterations, ctx.stage_seed("sigtest")).data()?;
            Ok(json!({"command": "sigtest", "observed_diff": r.observed_diff, "p": r.p_value,
                      "iterations": r.iterations, "seed": r.seed, "significant": r.p_value < 0.05}))
        }
        Command::Stats { input } => {
            let corpus = ctx.read(&input)?;
            let s = corpus_stats(&corpus);
            Ok(json!({"command": "stats", "scheme": corpus.scheme.to_string(), "tokens": s.token_count,
                      "sentences": s.sentence_count, "entities": s.entity_counts}))
        }
    }
}

fn synocr(ctx: &Ctx, args: SynocrArgs) -> Result<Value, Failure> {
    let cfg = &ctx.config;
    let corpus = ctx.read(&args.input)?;
    if let Some(command) = cfg.resolve(args.external, "external").usage()? {
        let mut config = ExternalPipelineConfig::new(command);
        config.batch_size_sentences = cfg.get(args.batch_size, "batch-size", config.batch_size_sentences).usage()?;
        if let Some(secs) = cfg.resolve(args.timeout_secs, "timeout-secs").usage()? {
            config.timeout = Duration::try_from_secs_f64(secs).usage()?;
        }
        let out = external_ocr(&corpus, &config).data()?;
        fs::write(&args.output, &out.text)
            .with_context(|| format!("writing {}", args.output.display()))
            .data()?;
        return Ok(json!({"command": "synocr", "channel": "external", "invocations": out.invocations,
                         "empty_batches": out.empty_batches, "lines": out.text.lines().count()}));
    }

    let d = OcrNoiseConfig::default();
    let mut config = OcrNoiseConfig {
        p_substitute: cfg.get(args.p_substitute, "p-substitute", d.p_substitute).usage()?,
        p_delete: cfg.get(args.p_delete, "p-delete", d.p_delete).usage()?,
        p_insert: cfg.get(args.p_insert, "p-insert", d.p_insert).usage()?,
        p_space_split: cfg.get(args.p_space_split, "p-space-split", d.p_space_split).usage()?,
        p_space_merge: cfg.get(args.p_space_merge, "p-space-merge", d.p_space_merge).usage()?,
        p_illegible_line: cfg.get(args.p_illegible_line, "p-illegible-line", d.p_illegible_line).usage()?,
        seed: ctx.stage_seed("synocr"),
        ..d
    };
    if let Some(p) = cfg.resolve(args.table, "table").usage()? {
        let text = fs::read_to_string(&p)
            .with_context(|| format!("reading {}", p.display()))
            .usage()?;
        config.substitution_table = SubstitutionTable::parse(&text).usage()?;
    }
    config.validate().usage()?;
    let text = simulate_ocr(&corpus, &config).data()?;
    fs::write(&args.output, &text)
        .with_context(|| format!("writing {}", args.output.display()))
        .data()?;
    Ok(json!({"command": "synocr", "channel": "builtin", "lines": corpus.len(),
              "clean_chars": corpus.plain_text().chars().count(), "noisy_chars": text.chars().count()}))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
