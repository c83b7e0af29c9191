use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use vidialog::corpus::{generate_corpus, read_corpus, read_manifest, write_corpus, Corpus, CorpusError, RunConfig};
use vidialog::eval::stats::corpus_statistics;
use vidialog::eval::{self, baselines, EvalError, Prediction};
use vidialog::program::ExecOptions;

const WORKERS_ENV: &str = "VIDIALOG_WORKERS";

#[derive(Parser)]
#[command(name = "vidialog", version, about = "Synthetic video-grounded dialogue benchmark tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus of scenes and dialogues.
    Generate {
        /// TOML run configuration; defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed from the configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write corpus statistics as stats.json and stats.csv.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a baseline or a prediction file.
    Eval(EvalArgs),
    /// Print one dialogue turn by turn.
    Inspect {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        dialogue: String,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct Source {
    /// answer_prior, qtype_random, qtype_freq, tfidf, oracle, recycle or constant
    #[arg(long)]
    baseline: Option<String>,
    /// JSON lines with dialogue_id, turn, answer and optional state, interval, ranking.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    source: Source,
    /// Report path; a CSV with the same stem is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "test")]
    split: String,
    /// Seed of the qtype_random baseline.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Corpus(CorpusError::Config(_)) | CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Replay options from the corpus manifest, or defaults when there is none.
fn exec_options(dir: &Path) -> ExecOptions {
    read_manifest(dir).map(|m| m.config.dialogue.exec_options()).unwrap_or_default()
}

fn generate(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p).map_err(|e| match e {
            CorpusError::Io { path, source } => CliError::Config(format!("cannot read {}: {source}", path.display())),
            e => e.into(),
        })?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (corpus, report) = generate_corpus(&cfg)?;
    let manifest = write_corpus(out, &cfg, &corpus, &report)?;
    for split in &corpus.splits {
        println!("{}: {} scenes, {} dialogues", split.name, split.scenes.len(), split.dialogues.len());
    }
    if !report.skipped_scenes.is_empty() {
        println!("skipped scenes: {}", report.skipped_scenes.len());
    }
    println!("config sha256 {}", manifest.config_sha256);
    Ok(())
}

fn stats(corpus_dir: &Path, out: &Path) -> Result<(), CliError> {
    let corpus = read_corpus(corpus_dir)?;
    let report = corpus_statistics(&corpus, exec_options(corpus_dir));
    write(&out.join("stats.json"), &serde_json::to_vec_pretty(&report).expect("report serializes"))?;
    write(&out.join("stats.csv"), report.to_csv().as_bytes())?;
    let s = &report.summary;
    println!(
        "{} dialogues, {} turns, tokens {:.2}, program size {:.2}, compositional {:.3}, unique {:.3}",
        report.dialogues, report.turns, s.mean_tokens, s.mean_program_size, s.compositional_share, s.unique_question_share
    );
    Ok(())
}

fn baseline(corpus: &Corpus, name: &str, split: &str, seed: u64) -> Result<Vec<Prediction>, CliError> {
    let train = corpus.split("train").map(|s| s.dialogues.as_slice()).unwrap_or_default();
    let test = &corpus.split(split).ok_or_else(|| CliError::Data(format!("split {split} is not in the corpus")))?.dialogues;
    Ok(match name {
        "answer_prior" => baselines::answer_prior(train, test)?,
        "qtype_random" => baselines::qtype_random(train, test, seed)?,
        "qtype_freq" => baselines::qtype_freq(train, test)?,
        "tfidf" => baselines::tfidf(train, test)?,
        "oracle" => eval::oracle(test),
        "recycle" => eval::recycle(test),
        "constant" => eval::constant(test, "10"),
        other => return Err(CliError::Config(format!("unknown baseline {other}"))),
    })
}

fn evaluate(a: &EvalArgs) -> Result<(), CliError> {
    let corpus = read_corpus(&a.corpus)?;
    let split = corpus
        .split(&a.split)
        .ok_or_else(|| CliError::Data(format!("split {} is not in the corpus", a.split)))?;
    let preds = match (&a.source.baseline, &a.source.predictions) {
        (Some(name), _) => baseline(&corpus, name, &a.split, a.seed)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            eval::parse_predictions(&text)?
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let report = eval::evaluate(&preds, split, exec_options(&a.corpus))?;
    write(&a.out, &serde_json::to_vec_pretty(&report).expect("report serializes"))?;
    write(&a.out.with_extension("csv"), report.to_csv().as_bytes())?;
    print!("accuracy {:.4} over {} turns", report.overall_accuracy, report.turns);
    match report.transferability {
        Some(t) => println!(", transferability {t:.4}"),
        None => println!(),
    }
    Ok(())
}

fn inspect(corpus_dir: &Path, id: &str) -> Result<(), CliError> {
    let corpus = read_corpus(corpus_dir)?;
    let d = corpus
        .dialogues()
        .find(|d| d.dialogue_id == id)
        .ok_or_else(|| CliError::Data(format!("dialogue {id} not found")))?;
    let mut out = format!("{} on {}\n", d.dialogue_id, d.video_id);
    for t in &d.turns {
        let _ = writeln!(out, "\nturn {} (cutoff {}) {}", t.turn, t.cutoff, t.question);
        let _ = writeln!(out, "  answer    {}", t.answer);
        let _ = writeln!(out, "  template  {} [{}, {}]", t.template, t.question_type.as_str(), t.interval_type.as_str());
        let _ = writeln!(out, "  program   {}", t.program);
        let _ = writeln!(out, "  interval  {}", t.interval);
        let mut rel = Vec::new();
        if let Some(r) = t.relations.tr {
            rel.push(format!("TR {}", r.as_str()));
        }
        for o in &t.relations.or {
            rel.push(format!("OR obj {} at distance {}", o.object, o.distance));
        }
        if let Some(k) = t.relations.tt {
            rel.push(format!("TT {}", k.as_str()));
        }
        let _ = writeln!(out, "  relations {}", if rel.is_empty() { "-".into() } else { rel.join("; ") });
        let objs: Vec<String> = t
            .state
            .objects
            .iter()
            .map(|o| {
                let known: Vec<&str> = o.known_values().iter().map(|v| v.as_str()).collect();
                format!("#{} [{}]", o.id, known.join(" "))
            })
            .collect();
        let _ = writeln!(out, "  state     {}", if objs.is_empty() { "-".into() } else { objs.join(", ") });
    }
    print!("{out}");
    Ok(())
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_workers()?;
    match cli.command {
        Command::Generate { config, seed, out } => generate(config.as_deref(), seed, &out),
        Command::Stats { corpus, out } => stats(&corpus, &out),
        Command::Eval(a) => evaluate(&a),
        Command::Inspect { corpus, dialogue } => inspect(&corpus, &dialogue),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
