use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vnsclust::harness::battery::{BatteryOutcome, BestKnownSource};
use vnsclust::harness::{
    aggregate, emit_table, generate_gaussian_mixture, load_csv, run_battery, summarize, write_csv, AggregateRow,
    AlgorithmConfig, AlgorithmKind, BatteryOptions, CsvOptions, ExperimentSpec, MixtureSpec, TableFormat,
};
use vnsclust::{big_vns_clust, kmeans_full, BigVnsParams, DataMatrix, Error, LloydParams, Result};

#[derive(Parser, Debug)]
#[command(name = "vnsclust", version, about = "Sampled VNS clustering and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cluster one dataset and report the full-data objective.
    Cluster(ClusterArgs),
    /// Run an experiment battery and write run records and aggregate tables.
    Bench(BenchArgs),
    /// Generate a Gaussian-mixture dataset as CSV.
    Gen(GenArgs),
    /// Run a battery once per p_max value and summarize by p_max.
    SweepPmax(SweepArgs),
}

#[derive(Args, Debug)]
struct ClusterArgs {
    /// CSV file with one point per row.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    data: Option<PathBuf>,
    #[arg(long, requires = "data")]
    skip_header: bool,
    /// Built-in mixture name (x1) or mixture spec file.
    #[arg(long)]
    synthetic: Option<String>,
    /// Generator seed for --synthetic.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    #[arg(long, default_value = "bigvns")]
    algo: AlgorithmKind,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    sample_size: usize,
    /// Largest shaking power (default min(3, k)).
    #[arg(long)]
    p_max: Option<usize>,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 1.0)]
    time_limit: f64,
    /// Stop after this many iterations even if time remains.
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write centroids to this CSV file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one label per line to this file.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Experiment spec file.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Built-in mixture name (x1) or mixture spec file.
    #[arg(long)]
    spec: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    p_max_values: Vec<usize>,
    #[command(flatten)]
    bench: BenchArgs,
}

fn time_limit(secs: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(secs)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| Error::Usage(format!("time limit must be a positive number of seconds, got {secs}")))
}

fn cluster(args: ClusterArgs) -> Result<()> {
    let data = match (&args.data, &args.synthetic) {
        (Some(path), _) => load_csv(
            path,
            CsvOptions {
                skip_header: args.skip_header,
                ..CsvOptions::default()
            },
        )?,
        (None, Some(name)) => generate_gaussian_mixture(&MixtureSpec::resolve(name)?, args.data_seed)?,
        (None, None) => unreachable!("clap requires a data source"),
    };
    log::info!("loaded {} points in {} dimensions", data.rows(), data.cols());

    let start = Instant::now();
    let result = match args.algo {
        AlgorithmKind::Kmeans => kmeans_full(&data, args.k, &LloydParams::default(), &mut ChaCha8Rng::seed_from_u64(args.seed))?,
        kind => {
            let mut params = BigVnsParams::new(args.k, args.sample_size);
            if let Some(p) = args.p_max {
                params.p_max = p;
            }
            params.time_limit = time_limit(args.time_limit)?;
            params.max_iterations = args.max_iterations;
            params.seed = args.seed;
            params.baseline_mode = kind == AlgorithmKind::BigMeans;
            big_vns_clust(&data, &params)?
        }
    };
    let elapsed = start.elapsed().as_secs_f64();

    println!("algorithm  {}", args.algo.name());
    println!("objective  {}", result.objective.value());
    println!("iterations {}", result.iterations);
    println!("time_s     {elapsed:.3}");

    if let Some(path) = &args.out {
        let points = result.centroids.to_points().ok_or_else(|| Error::ClusteringFailure("degenerate centroid in result".into()))?;
        write_csv(path, &DataMatrix::from_rows(&points)?)?;
    }
    if let Some(path) = &args.labels {
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        for l in result.labels.labels() {
            writeln!(w, "{l}")?;
        }
        w.flush()?;
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let spec = MixtureSpec::resolve(&args.spec)?;
    let data = generate_gaussian_mixture(&spec, args.seed)?;
    write_csv(&args.out, &data)?;
    log::info!("wrote {} points to {}", data.rows(), args.out.display());
    Ok(())
}

fn write_best_known(path: &Path, outcome: &BatteryOutcome) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["dataset", "k", "f_star", "source"])?;
    for b in &outcome.best_known {
        let source = match b.source {
            BestKnownSource::Given => "given",
            BestKnownSource::Local => "local",
        };
        w.write_record([b.dataset.clone(), b.k.to_string(), b.value.to_string(), source.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the battery, writes runs/best-known/aggregate files and returns the aggregate rows.
fn bench_into(spec: &ExperimentSpec, args: &BenchArgs) -> Result<(BatteryOutcome, Vec<AggregateRow>)> {
    fs::create_dir_all(&args.out_dir)?;
    let options = BatteryOptions {
        jobs: args.jobs,
        runs_csv: Some(args.out_dir.join("runs.csv")),
    };
    let outcome = run_battery(spec, &options)?;
    write_best_known(&args.out_dir.join("best_known.csv"), &outcome)?;
    let rows = aggregate(&outcome.records, &spec.k_values)?;
    fs::write(args.out_dir.join("aggregate.csv"), emit_table(&rows, TableFormat::Csv)?)?;
    Ok((outcome, rows))
}

fn failed_runs(outcome: &BatteryOutcome) -> Result<()> {
    let failed = outcome.records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(Error::ClusteringFailure(format!("{failed} of {} runs failed", outcome.records.len())));
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let spec = ExperimentSpec::from_file(&args.spec)?;
    let (outcome, rows) = bench_into(&spec, &args)?;
    print!("{}", emit_table(&rows, TableFormat::Text)?);
    failed_runs(&outcome)
}

fn sweep_pmax(args: SweepArgs) -> Result<()> {
    let mut spec = ExperimentSpec::from_file(&args.bench.spec)?;
    if args.p_max_values.contains(&0) {
        return Err(Error::Usage("p_max values must be positive".into()));
    }
    spec.algorithms = args
        .p_max_values
        .iter()
        .map(|&p| AlgorithmConfig {
            label: format!("bigvns-p{p}"),
            kind: AlgorithmKind::BigVns,
            p_max: p,
        })
        .collect();
    let (outcome, rows) = bench_into(&spec, &args.bench)?;
    let summary = summarize(&rows);
    fs::write(args.bench.out_dir.join("summary.csv"), emit_table(&summary, TableFormat::Csv)?)?;
    print!("{}", emit_table(&summary, TableFormat::Text)?);
    failed_runs(&outcome)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Cluster(a) => cluster(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
        Command::SweepPmax(a) => sweep_pmax(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
