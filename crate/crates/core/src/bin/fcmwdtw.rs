use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use fcmwdtw::{
    evaluate, generate, run_bench, run_grid, score_series, AnomalyKind, BenchOptions, ConfigLayer,
    Error, FcmModel, MultivariateSeries, Result, RunConfig, ScoreSeries, SynthConfig,
};

#[derive(Parser)]
#[command(
    name = "fcmwdtw",
    version,
    about = "Fuzzy clustering of multivariate time series with a learned warped distance, plus reconstruction-based anomaly scoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a series and write it to disk
    Fit(FitArgs),
    /// Score a series against a fitted model and write a score CSV
    Score(ScoreArgs),
    /// Compute ranking metrics from a labeled score CSV
    Evaluate(EvaluateArgs),
    /// Fit, score, and evaluate every cell of a parameter grid
    Grid(GridArgs),
    /// Measure per-iteration fit time across window lengths
    Bench(BenchArgs),
    /// Generate a labeled synthetic series
    Synth(SynthArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Input series CSV (header row; optional trailing label column)
    #[arg(long)]
    input: Option<PathBuf>,
    /// TOML settings file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    window_length: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// Relative loss improvement treated as converged
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// How overlapping window scores combine: mean or max
    #[arg(long)]
    aggregation: Option<String>,
    /// Skip per-dimension min-max normalization
    #[arg(long)]
    no_normalize: bool,
}

impl CommonArgs {
    fn resolve(&self, extra: ConfigLayer) -> Result<RunConfig> {
        let file = self
            .config
            .as_deref()
            .map(ConfigLayer::from_toml_path)
            .transpose()?;
        let flags = ConfigLayer {
            input: self.input.clone().or(extra.input),
            window_length: self.window_length.or(extra.window_length),
            stride: self.stride.or(extra.stride),
            epsilon: self.epsilon.or(extra.epsilon),
            max_iters: self.max_iters.or(extra.max_iters),
            seed: self.seed.or(extra.seed),
            aggregation: self.aggregation.clone().or(extra.aggregation),
            normalize: self.no_normalize.then_some(false).or(extra.normalize),
            ..extra
        };
        RunConfig::resolve(file, flags)
    }
}

fn load_input(config: &RunConfig) -> Result<MultivariateSeries> {
    let path = config
        .input
        .as_deref()
        .ok_or(Error::EmptyInput("no input file given"))?;
    MultivariateSeries::from_csv_path(path)
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    clusters: Option<usize>,
    /// Membership softness m, in (1, 2]
    #[arg(long)]
    fuzziness: Option<f64>,
    /// Dimension weight exponent q, outside [0, 1]
    #[arg(long)]
    weight_exponent: Option<f64>,
    /// Where to write the fitted model
    #[arg(long)]
    model_out: Option<PathBuf>,
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let config = args.common.resolve(ConfigLayer {
        clusters: args.clusters,
        fuzziness: args.fuzziness,
        weight_exponent: args.weight_exponent,
        model_out: args.model_out.clone(),
        ..ConfigLayer::default()
    })?;
    let series = load_input(&config)?;
    let started = Instant::now();
    let (model, state) = fcmwdtw::fit_series(&series, &config, &config.params(), config.seed)?;
    let elapsed = started.elapsed();
    model.save(&config.model_out)?;

    println!(
        "observations={} dims={} windows={} window_length={} stride={}",
        series.len(),
        series.dims(),
        state.data().len(),
        config.window_length,
        config.stride
    );
    println!(
        "clusters={} fuzziness={} weight_exponent={} seed={} normalize={}",
        config.clusters, config.fuzziness, config.weight_exponent, config.seed, config.normalize
    );
    println!(
        "iterations={} reinits={} final_loss={}",
        state.iterations(),
        state.reinits(),
        model.final_loss
    );
    for (d, lambda) in model.lambdas.iter().enumerate() {
        println!("lambda[{d}]={lambda}");
    }
    let history: Vec<String> = state.loss_history().iter().map(f64::to_string).collect();
    println!("loss_history={}", history.join(" "));
    println!("elapsed_ms={}", elapsed.as_millis());
    println!("model={}", config.model_out.display());
    Ok(())
}

#[derive(Args)]
struct ScoreArgs {
    /// Fitted model file
    #[arg(long)]
    model: PathBuf,
    /// Series CSV to score
    #[arg(long)]
    input: PathBuf,
    /// mean or max (default mean)
    #[arg(long)]
    aggregation: Option<String>,
    /// Where to write the score CSV
    #[arg(long, default_value = "scores.csv")]
    scores_out: PathBuf,
}

fn cmd_score(args: &ScoreArgs) -> Result<()> {
    let model = FcmModel::load(&args.model)?;
    let series = MultivariateSeries::from_csv_path(&args.input)?;
    let aggregation = args
        .aggregation
        .as_deref()
        .map_or(Ok(Default::default()), str::parse)?;
    let scored = score_series(&model, &series, aggregation)?;
    scored.to_csv_path(&args.scores_out)?;
    let covered = scored.scores.iter().filter(|s| s.is_some()).count();
    println!(
        "observations={} covered={} uncovered={} windows={}",
        scored.len(),
        covered,
        scored.len() - covered,
        scored.window_scores.len()
    );
    println!("scores={}", args.scores_out.display());
    Ok(())
}

#[derive(Args)]
struct EvaluateArgs {
    /// Score CSV with a label column
    #[arg(long)]
    scores: PathBuf,
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let scored = ScoreSeries::from_csv_path(&args.scores)?;
    let (scores, labels) = fcmwdtw::labeled_scores(&scored)?;
    let result = evaluate(&scores, &labels)?;
    println!(
        "scored={} positives={} negatives={}",
        scores.len(),
        result.positives,
        result.negatives
    );
    println!("roc_auc={}", result.roc_auc);
    println!("pr_auc={}", result.pr_auc);
    Ok(())
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Cluster counts to try, comma separated
    #[arg(long, value_delimiter = ',')]
    c_grid: Option<Vec<usize>>,
    /// Fuzziness values to try, comma separated
    #[arg(long, value_delimiter = ',')]
    m_grid: Option<Vec<f64>>,
    /// Weight exponents to try, comma separated; values in [0, 1] are dropped
    #[arg(long, value_delimiter = ',')]
    q_grid: Option<Vec<f64>>,
}

fn cmd_grid(args: &GridArgs) -> Result<()> {
    let config = args.common.resolve(ConfigLayer {
        c_grid: args.c_grid.clone(),
        m_grid: args.m_grid.clone(),
        q_grid: args.q_grid.clone(),
        ..ConfigLayer::default()
    })?;
    let series = load_input(&config)?;
    let report = run_grid(&series, &config)?;
    println!("cells={}", report.cells.len());
    println!("  clusters fuzziness weight_exponent seed roc_auc pr_auc final_loss iterations");
    for (index, cell) in report.cells.iter().enumerate() {
        let marker = if index == 0 { "*" } else { " " };
        println!(
            "{} {} {} {} {} {} {} {} {}",
            marker,
            cell.clusters,
            cell.fuzziness,
            cell.weight_exponent,
            cell.seed,
            cell.roc_auc,
            cell.pr_auc,
            cell.final_loss,
            cell.iterations
        );
    }
    let best = report.best();
    println!(
        "best: clusters={} fuzziness={} weight_exponent={} roc_auc={} pr_auc={}",
        best.clusters, best.fuzziness, best.weight_exponent, best.roc_auc, best.pr_auc
    );
    Ok(())
}

#[derive(Args)]
struct BenchArgs {
    /// Window lengths to measure, comma separated
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    sizes: Vec<usize>,
    /// Windows fitted at every length
    #[arg(long, default_value_t = 60)]
    windows: usize,
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    /// Fixed iterations per fit
    #[arg(long, default_value_t = 5)]
    iters: usize,
    /// Repeats per length; the fastest is kept
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let report = run_bench(&BenchOptions {
        sizes: args.sizes.clone(),
        windows: args.windows,
        clusters: args.clusters,
        dims: args.dims,
        iters: args.iters,
        repeats: args.repeats,
        seed: args.seed,
    })?;
    println!("window_length windows per_iter_seconds");
    for row in &report.rows {
        println!(
            "{} {} {:.6}",
            row.window_length, row.windows, row.per_iter_seconds
        );
    }
    match report.slope {
        Some(slope) => println!("loglog_slope={slope:.3}"),
        None => println!("loglog_slope=n/a"),
    }
    Ok(())
}

#[derive(Args)]
struct SynthArgs {
    /// Where to write the generated CSV
    #[arg(long, default_value = "synth.csv")]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    length: usize,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    /// Observations per sine cycle
    #[arg(long, default_value_t = 50.0)]
    period: f64,
    /// Additive Gaussian noise level
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 5)]
    anomalies: usize,
    #[arg(long, default_value_t = 24)]
    anomaly_length: usize,
    /// amplitude, pattern-shift, or dimension-flip
    #[arg(long, default_value = "dimension-flip")]
    kind: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let kind: AnomalyKind = args.kind.parse()?;
    let series = generate(&SynthConfig {
        length: args.length,
        dims: args.dims,
        period: args.period,
        noise: args.noise,
        anomalies: args.anomalies,
        anomaly_length: args.anomaly_length,
        kind,
        seed: args.seed,
    })?;
    series.to_csv_path(&args.out)?;
    let positives = series
        .labels()
        .map_or(0, |l| l.iter().filter(|&&v| v == 1).count());
    println!(
        "observations={} dims={} anomalous={}",
        series.len(),
        series.dims(),
        positives
    );
    println!("series={}", args.out.display());
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Score(args) => cmd_score(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Grid(args) => cmd_grid(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Synth(args) => cmd_synth(&args),
    }
}

fn main() {
    let code = match std::panic::catch_unwind(run) {
        Ok(Ok(())) => 0,
        Ok(Err(error)) => {
            eprintln!("error: {error}");
            error.exit_code()
        }
        Err(_) => 1,
    };
    std::process::exit(code);
}
