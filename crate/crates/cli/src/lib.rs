//! The `bloomtax` command line: corpus synthesis and inspection, stratified
//! splitting, seeded training, evaluation, single-question prediction, and
//! comparative reporting.
//!
//! Results go to standard output, diagnostics to standard error. Exit codes:
//! 0 success, 1 validation error, 2 I/O error. Every run is reproducible
//! byte-for-byte from its command line and input files.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use bloomtax::corpus::{
    class_distribution, generate_synthetic_corpus, parse_corpus, split_train_test, write_corpus,
    CognitiveLabel, CorpusDataset, CorpusFormat, DistributionTable, KnowledgeLabel, Task,
};
use bloomtax::evalreport::{comparative_report, evaluate, ReportBasis};
use bloomtax::persist::{load_history, load_model, save_history, save_model};
use bloomtax::train::{fit_with_progress, predict, TrainingConfig};
use bloomtax::{Error, Result};

#[derive(Parser)]
#[command(
    name = "bloomtax",
    version,
    about = "Classify exam questions into cognitive processes and knowledge dimensions",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus with exact class counts
    Synth(SynthArgs),
    /// Print the class distribution of a corpus
    Inspect(InspectArgs),
    /// Split a corpus into stratified train and test files
    Split(SplitArgs),
    /// Train a CNN or LSTM classifier on a labeled corpus
    Train(TrainArgs),
    /// Evaluate a saved model against a labeled corpus
    Evaluate(EvaluateArgs),
    /// Classify a single question with a saved model
    Predict(PredictArgs),
    /// Render the comparative results table from training histories
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Class counts: the builtin alias `table1`, or a CSV file with header
    /// `label,count` covering all six cognitive and three knowledge labels
    #[arg(long)]
    counts: String,
    /// Seed for cell allocation and template choices
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output corpus path
    #[arg(long)]
    out: PathBuf,
    /// Corpus format: csv or jsonl (default: inferred from the extension)
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct InspectArgs {
    /// Corpus path (csv or jsonl, by extension)
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    /// Corpus path (csv or jsonl, by extension)
    #[arg(long)]
    corpus: PathBuf,
    /// Train fraction in (0, 1); train size is round(N * ratio)
    #[arg(long, default_value_t = 0.7)]
    ratio: f64,
    /// Seed for per-class shuffling
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Label axis to stratify by: cognitive or knowledge
    #[arg(long, default_value = "cognitive")]
    stratify: String,
    /// Output path for the training split
    #[arg(long)]
    out_train: PathBuf,
    /// Output path for the test split
    #[arg(long)]
    out_test: PathBuf,
}

fn train_defaults_help() -> String {
    format!(
        "Default configuration (overridden by --config values, then by flags):\n{}",
        TrainingConfig::default().to_key_values()
    )
}

#[derive(Args)]
#[command(after_help = train_defaults_help())]
struct TrainArgs {
    /// Training corpus path
    #[arg(long)]
    train: PathBuf,
    /// Test corpus path
    #[arg(long)]
    test: PathBuf,
    /// Optional key=value config file; flags below override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Architecture: cnn or lstm
    #[arg(long)]
    arch: Option<String>,
    /// Label task: cognitive or knowledge
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Optimizer: adam or sgd
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    spatial_dropout: Option<f64>,
    #[arg(long)]
    lstm_dropout: Option<f64>,
    #[arg(long)]
    lstm_recurrent_dropout: Option<f64>,
    #[arg(long)]
    emb_dim: Option<usize>,
    #[arg(long)]
    num_words: Option<usize>,
    #[arg(long)]
    maxlen: Option<usize>,
    #[arg(long)]
    kernel_width: Option<usize>,
    #[arg(long)]
    num_filters: Option<usize>,
    #[arg(long)]
    lstm_units: Option<usize>,
    /// CNN head activation: softmax (default) or sigmoid
    #[arg(long)]
    cnn_output: Option<String>,
    /// Fit the vocabulary on train+test instead of the training split only
    #[arg(long)]
    fit_on_all: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the trained model
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Where to write the per-epoch history file
    #[arg(long)]
    history_out: Option<PathBuf>,
    /// Where to write the fitted vocabulary on its own
    #[arg(long)]
    vocab_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Saved model path
    #[arg(long)]
    model: PathBuf,
    /// Labeled corpus to evaluate against
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Saved model path
    #[arg(long)]
    model: PathBuf,
    /// The question text to classify
    #[arg(long)]
    question: String,
}

#[derive(Args)]
struct ReportArgs {
    /// History files, one per (architecture, task) cell
    #[arg(long, num_args = 1.., required = true)]
    histories: Vec<PathBuf>,
    /// Use each history's best-test-accuracy epoch instead of the final one
    #[arg(long)]
    best_epoch: bool,
    /// Emit CSV instead of the aligned text table
    #[arg(long)]
    csv: bool,
}

/// Parse arguments and run one command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    let _ = e.print();
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Inspect(args) => cmd_inspect(args),
        Command::Split(args) => cmd_split(args),
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}

fn format_for(path: &Path, explicit: Option<&str>) -> Result<CorpusFormat> {
    match explicit {
        Some(s) => s.parse(),
        None => Ok(CorpusFormat::from_path(path)),
    }
}

fn load_corpus(path: &Path) -> Result<CorpusDataset> {
    parse_corpus(path, CorpusFormat::from_path(path))
}

/// Counts CSV: header `label,count`, one row per label, all nine labels
/// exactly once.
fn parse_counts(spec: &str) -> Result<DistributionTable> {
    if spec.eq_ignore_ascii_case("table1") {
        return Ok(DistributionTable::table1());
    }
    let path = Path::new(spec);
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = content.lines();
    match lines.next().map(str::trim) {
        Some("label,count") => {}
        other => {
            return Err(Error::file_format(
                path,
                format!("expected header \"label,count\", got {other:?}"),
            ))
        }
    }
    let mut cognitive = [None::<usize>; CognitiveLabel::COUNT];
    let mut knowledge = [None::<usize>; KnowledgeLabel::COUNT];
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (label, count) = line.split_once(',').ok_or_else(|| {
            Error::file_format(path, format!("row {}: expected label,count", lineno + 1))
        })?;
        let count: usize = count.trim().parse().map_err(|_| {
            Error::file_format(path, format!("row {}: bad count {count:?}", lineno + 1))
        })?;
        let slot = if let Ok(l) = label.parse::<CognitiveLabel>() {
            &mut cognitive[l.index()]
        } else if let Ok(l) = label.parse::<KnowledgeLabel>() {
            &mut knowledge[l.index()]
        } else {
            return Err(Error::file_format(
                path,
                format!("row {}: unknown label {label:?}", lineno + 1),
            ));
        };
        if slot.replace(count).is_some() {
            return Err(Error::file_format(
                path,
                format!("row {}: duplicate label {label:?}", lineno + 1),
            ));
        }
    }
    let missing_cog = CognitiveLabel::ALL
        .iter()
        .find(|l| cognitive[l.index()].is_none());
    let missing_know = KnowledgeLabel::ALL
        .iter()
        .find(|l| knowledge[l.index()].is_none());
    if let Some(l) = missing_cog {
        return Err(Error::file_format(path, format!("missing count for {l}")));
    }
    if let Some(l) = missing_know {
        return Err(Error::file_format(path, format!("missing count for {l}")));
    }
    DistributionTable::new(cognitive.map(Option::unwrap), knowledge.map(Option::unwrap))
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let dist = parse_counts(&args.counts)?;
    let ds = generate_synthetic_corpus(&dist, args.seed)?;
    let format = format_for(&args.out, args.format.as_deref())?;
    write_corpus(&ds, &args.out, format)?;
    eprintln!(
        "wrote {} questions to {} ({format})",
        ds.len(),
        args.out.display()
    );
    Ok(())
}

fn render_distribution(dist: &DistributionTable) -> String {
    let mut out = String::new();
    out.push_str("Cognitive process      Count\n");
    for label in CognitiveLabel::ALL {
        out.push_str(&format!(
            "  {:<19}{:>6}\n",
            label.as_str(),
            dist.cognitive_count(label)
        ));
    }
    out.push_str("Knowledge dimension    Count\n");
    for label in KnowledgeLabel::ALL {
        out.push_str(&format!(
            "  {:<19}{:>6}\n",
            label.as_str(),
            dist.knowledge_count(label)
        ));
    }
    out.push_str(&format!("{:<21}{:>6}\n", "Total", dist.total()));
    out
}

fn cmd_inspect(args: InspectArgs) -> Result<()> {
    let ds = load_corpus(&args.corpus)?;
    let dist = class_distribution(&ds);
    print!("{}", render_distribution(&dist));
    Ok(())
}

fn cmd_split(args: SplitArgs) -> Result<()> {
    let ds = load_corpus(&args.corpus)?;
    let stratify: Task = args.stratify.parse()?;
    let (train, test) = split_train_test(&ds, args.ratio, args.seed, stratify)?;
    write_corpus(&train, &args.out_train, CorpusFormat::from_path(&args.out_train))?;
    write_corpus(&test, &args.out_test, CorpusFormat::from_path(&args.out_test))?;
    println!(
        "train: {} questions -> {}\ntest:  {} questions -> {}",
        train.len(),
        args.out_train.display(),
        test.len(),
        args.out_test.display()
    );
    Ok(())
}

fn build_config(args: &TrainArgs) -> Result<TrainingConfig> {
    let mut config = TrainingConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        config
            .apply_key_values(&text)
            .map_err(|e| Error::file_format(path, e.to_string()))?;
    }
    if let Some(v) = &args.arch {
        config.arch = v.parse()?;
    }
    if let Some(v) = &args.task {
        config.task = v.parse()?;
    }
    if let Some(v) = args.epochs {
        config.epochs = v;
    }
    if let Some(v) = args.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = args.learning_rate {
        config.learning_rate = v;
    }
    if let Some(v) = &args.optimizer {
        config.optimizer = v.parse()?;
    }
    if let Some(v) = args.beta1 {
        config.beta1 = v;
    }
    if let Some(v) = args.beta2 {
        config.beta2 = v;
    }
    if let Some(v) = args.epsilon {
        config.epsilon = v;
    }
    if let Some(v) = args.spatial_dropout {
        config.spatial_dropout = v;
    }
    if let Some(v) = args.lstm_dropout {
        config.lstm_dropout = v;
    }
    if let Some(v) = args.lstm_recurrent_dropout {
        config.lstm_recurrent_dropout = v;
    }
    if let Some(v) = args.emb_dim {
        config.emb_dim = v;
    }
    if let Some(v) = args.num_words {
        config.num_words = v;
    }
    if let Some(v) = args.maxlen {
        config.maxlen = v;
    }
    if let Some(v) = args.kernel_width {
        config.kernel_width = v;
    }
    if let Some(v) = args.num_filters {
        config.num_filters = v;
    }
    if let Some(v) = args.lstm_units {
        config.lstm_units = v;
    }
    if let Some(v) = &args.cnn_output {
        config.cnn_output = v.parse()?;
    }
    if args.fit_on_all {
        config.fit_on_all = true;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let config = build_config(&args)?;
    let train_ds = load_corpus(&args.train)?;
    let test_ds = load_corpus(&args.test)?;
    eprintln!(
        "training {} / {} on {} train + {} test questions (seed {})",
        config.arch,
        config.task,
        train_ds.len(),
        test_ds.len(),
        config.seed
    );
    let (history, model) = fit_with_progress::<f64, _>(&train_ds, &test_ds, &config, |m| {
        println!(
            "epoch {:>3}/{}: train_acc {:.4} train_loss {:.4} test_acc {:.4} test_loss {:.4}",
            m.epoch, config.epochs, m.train_accuracy, m.train_loss, m.test_accuracy, m.test_loss
        );
    })?;

    if let Some(path) = &args.model_out {
        save_model(&model, path)?;
        eprintln!("wrote model to {}", path.display());
    }
    if let Some(path) = &args.history_out {
        save_history(&history, path)?;
        eprintln!("wrote history to {}", path.display());
    }
    if let Some(path) = &args.vocab_out {
        model.vocab.save(path)?;
        eprintln!("wrote vocabulary to {}", path.display());
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let model = load_model::<f64>(&args.model)?;
    let ds = load_corpus(&args.corpus)?;
    let result = evaluate(&model, &ds)?;
    println!(
        "model: {} / {} ({} questions evaluated)",
        model.config.arch,
        model.config.task,
        ds.len()
    );
    println!("accuracy:  {:.4}", result.accuracy);
    println!("mean loss: {:.4}", result.mean_loss);
    println!();
    print!("{}", result.confusion.render_text());
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    if args.question.trim().is_empty() {
        return Err(Error::invalid("empty question"));
    }
    let model = load_model::<f64>(&args.model)?;
    let prediction = predict(&model, &args.question)?;
    println!("label: {}", prediction.label);
    println!("confidence: {:.4}", prediction.confidence);
    let task = model.config.task;
    let per_class: Vec<String> = prediction
        .probabilities
        .iter()
        .enumerate()
        .map(|(i, p)| format!("{}={:.4}", task.class_name(i), p))
        .collect();
    println!("probabilities: {}", per_class.join(" "));
    if prediction.all_padding {
        println!("note: no question token is in the model vocabulary (all-padding input)");
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let mut histories = Vec::with_capacity(args.histories.len());
    for path in &args.histories {
        histories.push(load_history(path)?);
    }
    let basis = if args.best_epoch {
        ReportBasis::BestTestAccuracy
    } else {
        ReportBasis::FinalEpoch
    };
    let report = comparative_report(&histories, basis)?;
    if args.csv {
        print!("{}", report.render_csv());
    } else {
        print!("{}", report.render_text());
    }
    Ok(())
}
