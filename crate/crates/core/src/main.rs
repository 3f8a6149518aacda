use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use msi_tree::bench::{self, BlobSweepConfig, ExperimentReport, MIN_LEAF_GRID};
use msi_tree::data::load_features_csv;
use msi_tree::{
    build_greedy_tree, build_tree, load_csv, CombinerKind, CompressorKind, Error, GreedyConfig,
    LabelColumn, Model, MsiConfig, SplitRatio,
};

#[derive(Parser)]
#[command(
    name = "msi",
    version,
    about = "Compression-regularized decision trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tree on a labeled CSV and write the model file.
    Train(TrainArgs),
    /// Write one predicted label per row of a CSV.
    Predict(PredictArgs),
    /// Print accuracy and confusion counts of a model on a labeled CSV.
    Eval(EvalArgs),
    /// Run a benchmark study and write its reports.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CsvArgs {
    /// Input CSV file.
    #[arg(long)]
    data: PathBuf,
    /// The CSV has no header row.
    #[arg(long)]
    no_header: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Msi,
    Greedy,
}

#[derive(Args)]
struct MsiArgs {
    /// bz2, zlib or lzma [msi only; default bz2]
    #[arg(long)]
    compressor: Option<CompressorKind>,
    /// harmonic, arithmetic, geometric, euclidean, sum or product [msi only; default harmonic]
    #[arg(long)]
    combiner: Option<CombinerKind>,
}

#[derive(Args)]
struct GreedyArgs {
    /// [greedy only; default 5]
    #[arg(long)]
    min_samples_split: Option<usize>,
    /// [greedy only; default 1]
    #[arg(long)]
    min_samples_leaf: Option<usize>,
    /// [greedy only; default unlimited]
    #[arg(long)]
    max_depth: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    csv: CsvArgs,
    /// Label column: header name or 0-based index.
    #[arg(long)]
    label: String,
    #[arg(long, value_enum, default_value = "msi")]
    algo: Algo,
    #[command(flatten)]
    msi: MsiArgs,
    #[command(flatten)]
    greedy: GreedyArgs,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write the growth trace as CSV [msi only].
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    /// Column to ignore, e.g. a label column present in the file.
    #[arg(long)]
    label: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    #[arg(long)]
    label: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Study {
    ErrorPoint,
    Blobs,
    Combiners,
    Compressors,
    Csv,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    study: Study,
    /// Directory for the report files.
    #[arg(long)]
    out: PathBuf,
    /// Base seed; error-point uses seeds 0..seeds instead.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of error-point datasets.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 2.5)]
    std_start: f64,
    #[arg(long, default_value_t = 4.5)]
    std_end: f64,
    #[arg(long, default_value_t = 0.25)]
    std_step: f64,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 50)]
    points_per_blob: usize,
    /// Use a 0.01 step and 100 trials per standard deviation.
    #[arg(long)]
    full_scale: bool,
    /// CSV file for the csv study.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    no_header: bool,
    #[arg(long)]
    label: Option<String>,
    #[arg(long, default_value_t = 100)]
    repetitions: usize,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    #[command(flatten)]
    msi: MsiArgs,
    #[command(flatten)]
    greedy: GreedyArgs,
}

/// Failure with the process exit code it maps to.
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn label_column(s: &str) -> LabelColumn {
    LabelColumn::from(s)
}

impl MsiArgs {
    fn config(&self) -> MsiConfig {
        MsiConfig {
            compressor: self.compressor.unwrap_or_default(),
            combiner: self.combiner.unwrap_or_default(),
        }
    }

    fn given(&self) -> Option<&'static str> {
        if self.compressor.is_some() {
            Some("--compressor")
        } else if self.combiner.is_some() {
            Some("--combiner")
        } else {
            None
        }
    }
}

impl GreedyArgs {
    fn config(&self) -> GreedyConfig {
        let d = GreedyConfig::default();
        GreedyConfig {
            min_samples_split: self.min_samples_split.unwrap_or(d.min_samples_split),
            min_samples_leaf: self.min_samples_leaf.unwrap_or(d.min_samples_leaf),
            max_depth: self.max_depth,
        }
    }

    fn given(&self) -> Option<&'static str> {
        if self.min_samples_split.is_some() {
            Some("--min-samples-split")
        } else if self.min_samples_leaf.is_some() {
            Some("--min-samples-leaf")
        } else if self.max_depth.is_some() {
            Some("--max-depth")
        } else {
            None
        }
    }
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    std::fs::write(path, body).map_err(|e| {
        Failure::Runtime(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn train(args: TrainArgs) -> CliResult<()> {
    match args.algo {
        Algo::Msi => {
            if let Some(flag) = args.greedy.given() {
                return Err(Failure::Usage(format!(
                    "{flag} applies to --algo greedy only; msi has no hyperparameters"
                )));
            }
        }
        Algo::Greedy => {
            if let Some(flag) = args.msi.given() {
                return Err(Failure::Usage(format!("{flag} applies to --algo msi only")));
            }
            if args.trace.is_some() {
                return Err(Failure::Usage("--trace applies to --algo msi only".into()));
            }
        }
    }
    let data = load_csv(
        &args.csv.data,
        &label_column(&args.label),
        !args.csv.no_header,
    )?;
    let (tree, extra) = match args.algo {
        Algo::Msi => {
            let (tree, trace) = build_tree(&data, args.msi.config())?;
            if let Some(path) = &args.trace {
                write_file(path, &trace.to_csv_string())?;
            }
            let c = trace.final_cost();
            let extra = format!(
                " steps={} inaccuracy={} surfeit={} cost={}",
                trace.steps.len(),
                c.inaccuracy,
                c.surfeit,
                c.combined
            );
            (tree, extra)
        }
        Algo::Greedy => (
            build_greedy_tree(&data, args.greedy.config())?,
            String::new(),
        ),
    };
    let accuracy = tree.accuracy(&data)?;
    let model = Model::new(tree, data.n_classes());
    model.write(&args.out)?;
    println!(
        "algo={} nodes={} internal={} depth={} train_accuracy={}{}",
        match args.algo {
            Algo::Msi => "msi",
            Algo::Greedy => "greedy",
        },
        model.tree.node_count(),
        model.tree.internal_count(),
        model.tree.max_depth(),
        accuracy,
        extra
    );
    Ok(())
}

fn predict(args: PredictArgs) -> CliResult<()> {
    let mut model = Model::read(&args.model)?;
    let drop = args.label.as_deref().map(label_column);
    let (values, width) = load_features_csv(&args.csv.data, drop.as_ref(), !args.csv.no_header)?;
    model.fit_width(width)?;
    let mut out = String::from("prediction\n");
    for row in values.chunks(width.max(1)) {
        out.push_str(&model.tree.predict(row)?.to_string());
        out.push('\n');
    }
    match &args.out {
        Some(path) => write_file(path, &out),
        None => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            Ok(())
        }
    }
}

fn eval(args: EvalArgs) -> CliResult<()> {
    let mut model = Model::read(&args.model)?;
    let data = load_csv(
        &args.csv.data,
        &label_column(&args.label),
        !args.csv.no_header,
    )?;
    model.fit_width(data.n_features())?;
    let k = data.n_classes().max(model.n_classes);
    let mut confusion = vec![vec![0usize; k]; k];
    for (i, row) in data.rows().enumerate() {
        let p = model.tree.predict(row)?;
        confusion[data.label(i)][p.min(k - 1)] += 1;
    }
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    println!(
        "accuracy={} correct={} n={}",
        correct as f64 / data.n_rows() as f64,
        correct,
        data.n_rows()
    );
    for (actual, row) in confusion.iter().enumerate() {
        for (predicted, &count) in row.iter().enumerate() {
            println!("confusion actual={actual} predicted={predicted} count={count}");
        }
    }
    Ok(())
}

fn print_summary(report: &ExperimentReport) {
    for r in report.overall_rows() {
        println!(
            "study={} algorithm={} variant={} trials={} accuracy={:.4} centered={:.4} nodes={:.2} nodes_sd={:.2} depth={:.2}",
            report.study,
            r.algorithm,
            r.variant,
            r.trials,
            r.mean_accuracy,
            r.centered_accuracy,
            r.mean_nodes,
            r.std_nodes,
            r.mean_depth
        );
    }
}

fn bench(args: BenchArgs) -> CliResult<()> {
    let sweep = if args.full_scale {
        BlobSweepConfig {
            base_seed: args.seed,
            points_per_blob: args.points_per_blob,
            ..BlobSweepConfig::full_scale()
        }
    } else {
        BlobSweepConfig {
            std_start: args.std_start,
            std_end: args.std_end,
            std_step: args.std_step,
            trials_per_std: args.trials,
            points_per_blob: args.points_per_blob,
            base_seed: args.seed,
        }
    };
    let msi = args.msi.config();
    let ablating = |flag: Option<&'static str>, what: &str| match flag {
        Some(f) => Err(Failure::Usage(format!(
            "{f} is not used by the {what} study"
        ))),
        None => Ok(()),
    };
    let report = match args.study {
        Study::ErrorPoint => {
            let seeds: Vec<u64> = (0..args.seeds).collect();
            bench::run_error_point_study(&seeds, msi, args.greedy.config())?
        }
        Study::Blobs => {
            let mut greedy = args.greedy.config();
            let mut tuning = None;
            if args.greedy.min_samples_leaf.is_none() {
                let (best, scores) = bench::tune_greedy_min_leaf(&sweep, greedy, &MIN_LEAF_GRID)?;
                greedy.min_samples_leaf = best;
                tuning = Some(scores);
            }
            let mut r = bench::run_blob_sweep(&sweep, msi, greedy)?;
            if let Some(scores) = tuning {
                let s: Vec<String> = scores.iter().map(|(l, a)| format!("{l}:{a}")).collect();
                r.manifest.push(("min_leaf_tuning".into(), s.join(",")));
            }
            r
        }
        Study::Combiners => {
            ablating(args.msi.combiner.map(|_| "--combiner"), "combiners")?;
            ablating(args.greedy.given(), "combiners")?;
            bench::run_combiner_ablation(&sweep, msi)?
        }
        Study::Compressors => {
            ablating(args.msi.compressor.map(|_| "--compressor"), "compressors")?;
            ablating(args.greedy.given(), "compressors")?;
            bench::run_compressor_ablation(&sweep, msi)?
        }
        Study::Csv => {
            let (Some(data), Some(label)) = (&args.data, &args.label) else {
                return Err(Failure::Usage(
                    "the csv study needs --data and --label".into(),
                ));
            };
            let ratio = SplitRatio::new(args.train_fraction, args.seed)?;
            bench::run_csv_study(
                data,
                &label_column(label),
                !args.no_header,
                args.repetitions,
                ratio,
                msi,
                args.greedy.config(),
            )?
        }
    };
    for p in report.write(&args.out)? {
        eprintln!("wrote {}", p.display());
    }
    print_summary(&report);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
