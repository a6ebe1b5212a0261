use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fairkc::harness::{
    ingest_csv, run_experiment, summary_path, synth_generate, Algorithm, ExperimentSpec, LowerBoundKind, Schema,
    SynthKind, SynthSpec,
};
use fairkc::MetricKind;

#[derive(Parser)]
#[command(name = "fairkc", version, about = "Fair k-center experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a dataset and print a JSON summary of it.
    Ingest(IngestArgs),
    /// Write a reproducible synthetic dataset as CSV.
    Synth(SynthArgs),
    /// Run one algorithm over a dataset with checkpoints.
    Run(RunArgs),
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// l1, l2 or kendall.
    #[arg(long, default_value = "l2")]
    metric: MetricKind,
    #[arg(long, default_value = "group")]
    group_column: String,
}

impl DatasetArgs {
    fn schema(&self) -> Schema {
        Schema {
            metric: self.metric,
            group_column: self.group_column.clone(),
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    data: DatasetArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 2)]
    groups: usize,
    /// uniform_cube or clustered.
    #[arg(long, default_value = "uniform_cube")]
    kind: SynthKind,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Comma-separated, in group order.
    #[arg(long, value_delimiter = ',', required = true)]
    capacities: Vec<usize>,
    #[arg(long, default_value = "one_pass")]
    algo: Algorithm,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long)]
    coreset_size: Option<usize>,
    #[arg(long)]
    processors: Option<usize>,
    #[arg(long)]
    window: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 2500)]
    stride: u64,
    /// gonzalez or oracle.
    #[arg(long, default_value = "gonzalez")]
    lower_bound: LowerBoundKind,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Run MapReduce processors one after another.
    #[arg(long)]
    sequential: bool,
    #[arg(long, default_value = "report.jsonl")]
    out: PathBuf,
}

fn run(cli: Cli) -> fairkc::Result<()> {
    match cli.command {
        Command::Ingest(args) => {
            let ds = ingest_csv(&args.data.dataset, &args.data.schema())?;
            let mut sizes = vec![0usize; ds.m()];
            for p in &ds.points {
                sizes[p.group] += 1;
            }
            let summary = serde_json::json!({
                "points": ds.points.len(),
                "dimension": ds.metric.dimension,
                "groups": ds.group_names,
                "group_sizes": sizes,
            });
            println!("{summary}");
        }
        Command::Synth(args) => {
            let csv = synth_generate(&SynthSpec {
                n: args.n,
                dim: args.dim,
                m: args.groups,
                seed: args.seed,
                kind: args.kind,
                clusters: args.clusters,
            })?;
            match args.out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Run(args) => {
            let spec = ExperimentSpec {
                dataset: args.data.dataset.clone(),
                schema: args.data.schema(),
                capacities: args.capacities,
                algorithm: args.algo,
                epsilon: args.eps,
                coreset_size: args.coreset_size,
                processors: args.processors,
                window: args.window,
                lambda: args.lambda,
                stride: args.stride,
                lower_bound: args.lower_bound,
                out: Some(args.out.clone()),
                seed: args.seed,
                parallel: !args.sequential,
            };
            let records = run_experiment(&spec)?;
            eprintln!(
                "{} records written to {} and {}",
                records.len(),
                args.out.display(),
                summary_path(&args.out).display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FAIRKC_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
