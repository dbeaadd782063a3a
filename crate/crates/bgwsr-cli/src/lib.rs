//! Command line dispatch for the spatial regression toolkit.
//!
//! Subcommands: `simulate` writes synthetic scenario datasets, `fit` runs one
//! model on a dataset, `predict` evaluates a fitted model at new sites, and
//! `benchmark` reproduces the replication study. Every output directory gets
//! a manifest recording the resolved configuration, seed, code version and
//! input digests, so artifacts are reproducible from the manifest alone.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use bgwsr::baselines::{bgwr_run_chain, gwr_fit, gwr_fit_at};
use bgwsr::error::Error as BgwsrError;
use bgwsr::eval::{run_benchmark, Method};
use bgwsr::io::{self, ConfigFile};
use bgwsr::prediction::{predict_all, PredictionRequest, Summary};
use bgwsr::rng::RngStream;
use bgwsr::sampler::{run_chain, FitConfig, PosteriorDraws};
use bgwsr::scenario::{generate, scenario_spec};
use bgwsr::spatial::KernelFamily;

mod manifest;
pub use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "bgwsr",
    version,
    about = "Geographically weighted sparse regression: simulate, fit, predict, benchmark"
)]
struct Cli {
    /// Cap the worker pool at this many threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario dataset.
    Simulate(SimulateArgs),
    /// Fit a model to a dataset CSV.
    Fit(FitArgs),
    /// Predict at new sites from a fitted model directory.
    Predict(PredictArgs),
    /// Run the replication benchmark.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario number, 1 through 5.
    #[arg(long)]
    scenario: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replication index feeding the random stream.
    #[arg(long, default_value_t = 0)]
    replication: u64,
    #[arg(long)]
    out: PathBuf,
    /// Optional config file overriding pool sizes.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// One of bgwsr, bgwsr-ae, bgwr, gwr.
    #[arg(long)]
    method: String,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Directory written by `fit`.
    #[arg(long)]
    fit: PathBuf,
    /// CSV of prediction sites with columns s1,s2,x1..xp.
    #[arg(long)]
    sites: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Divide predicted coefficients by the total weight.
    #[arg(long, default_value_t = false)]
    normalize: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Comma-separated scenario numbers, e.g. 1,3,4.
    #[arg(long)]
    scenarios: String,
    /// Comma-separated methods, e.g. bgwsr-ae,gwr.
    #[arg(long)]
    methods: String,
    /// Replications per scenario.
    #[arg(long)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Runs the CLI against an argument vector and returns the process exit code.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/usage; version and help requests are
            // successful exits
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        // ignore failure: the global pool may already be initialised
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Fit(args) => fit(args),
        Command::Predict(args) => predict(args),
        Command::Benchmark(args) => benchmark(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Usage(_) => 1,
        CliError::Lib(err) if err.is_data_error() => 2,
        CliError::Lib(_) => 3,
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(BgwsrError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<BgwsrError> for CliError {
    fn from(e: BgwsrError) -> Self {
        CliError::Lib(e)
    }
}

type CliResult = Result<(), CliError>;

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile, CliError> {
    match path {
        Some(p) => Ok(ConfigFile::load(p)?),
        None => Ok(ConfigFile::default()),
    }
}

fn prepare_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Lib(e.into()))
}

fn simulate(args: SimulateArgs) -> CliResult {
    let mut manifest = RunManifest::start("simulate", args.seed);
    let config = load_config(&args.config)?;
    if let Some(path) = &args.config {
        manifest.record_input(path)?;
    }
    let bench = config.benchmark_config()?;
    let mut spec = scenario_spec(args.scenario, args.seed)?;
    spec.n_pool = bench.n_pool;
    spec.n_obs = bench.n_obs;
    spec.n_pred = bench.n_pred;
    let data = generate(&spec, RngStream::new(args.seed, args.replication))?;

    prepare_out_dir(&args.out)?;
    io::save_dataset(&args.out.join("observed.csv"), &data.observed)?;
    let mut pred_rows = String::from("s1,s2,y");
    for k in 1..=data.observed.p() {
        pred_rows.push_str(&format!(",x{k}"));
    }
    pred_rows.push('\n');
    for (i, loc) in data.prediction_sites.iter().enumerate() {
        pred_rows.push_str(&format!(
            "{},{},{}",
            io::format_float(loc.s1),
            io::format_float(loc.s2),
            io::format_float(data.prediction_y[i])
        ));
        for k in 0..data.observed.p() {
            pred_rows.push_str(&format!(",{}", io::format_float(data.prediction_x[(i, k)])));
        }
        pred_rows.push('\n');
    }
    std::fs::write(args.out.join("prediction.csv"), pred_rows)
        .map_err(|e| CliError::Lib(e.into()))?;
    io::save_truth(&args.out.join("truth.csv"), &data)?;

    manifest.insert_config("scenario", &args.scenario.to_string());
    manifest.insert_config("replication", &args.replication.to_string());
    manifest.insert_config_json("spec", &spec).map_err(CliError::Lib)?;
    manifest.finish(&args.out).map_err(CliError::Lib)?;
    Ok(())
}

/// Summaries of per-site coefficient draws at the observed sites.
fn coefficient_summaries(draws: &PosteriorDraws) -> Vec<Vec<Summary>> {
    let n = draws.draws[0].beta.nrows();
    let p = draws.draws[0].beta.ncols();
    (0..n)
        .map(|i| {
            (0..p)
                .map(|k| {
                    let mut values: Vec<f64> =
                        draws.draws.iter().map(|d| d.beta[(i, k)]).collect();
                    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    let mean = values.iter().sum::<f64>() / values.len() as f64;
                    Summary {
                        mean,
                        median: bgwsr::prediction::quantile(&values, 0.5),
                        lo95: bgwsr::prediction::quantile(&values, 0.025),
                        hi95: bgwsr::prediction::quantile(&values, 0.975),
                    }
                })
                .collect()
        })
        .collect()
}

fn fit(args: FitArgs) -> CliResult {
    let config_file = load_config(&args.config)?;
    let data = io::load_dataset(&args.data)?;
    let fit_config = config_file.fit_config()?;
    let mut manifest = RunManifest::start("fit", fit_config.seed);
    manifest.record_input(&args.data)?;
    if let Some(path) = &args.config {
        manifest.record_input(path)?;
    }
    manifest.insert_config("method", &args.method);

    prepare_out_dir(&args.out)?;
    // keep a copy of the training data so `predict` is self-contained
    io::save_dataset(&args.out.join("data.csv"), &data)?;

    let stream = RngStream::new(fit_config.seed, 0);
    match args.method.as_str() {
        "bgwsr" | "bgwsr-ae" => {
            let fit_config = FitConfig {
                adaptive_bandwidth: args.method == "bgwsr-ae",
                ..fit_config
            };
            manifest.insert_config_json("fit_config", &fit_config).map_err(CliError::Lib)?;
            let draws = run_chain(&data, &fit_config, stream)?;
            io::save_trace(&args.out.join("trace.csv"), &draws)?;
            io::save_coefficient_summaries(
                &args.out.join("coefficients.csv"),
                data.locations(),
                &coefficient_summaries(&draws),
            )?;
            let mean_acceptance = draws.acceptance_rates.iter().sum::<f64>()
                / draws.acceptance_rates.len() as f64;
            write_fit_summary(
                &args.out,
                &args.method,
                fit_config.kernel_family,
                None,
                Some(mean_acceptance),
            )?;
        }
        "bgwr" => {
            let bgwr_config = config_file.bgwr_config()?;
            manifest.insert_config_json("bgwr_config", &bgwr_config).map_err(CliError::Lib)?;
            let draws = bgwr_run_chain(&data, &bgwr_config, stream)?;
            io::save_trace(&args.out.join("trace.csv"), &draws)?;
            io::save_coefficient_summaries(
                &args.out.join("coefficients.csv"),
                data.locations(),
                &coefficient_summaries(&draws),
            )?;
            write_fit_summary(
                &args.out,
                &args.method,
                bgwr_config.kernel_family,
                None,
                Some(draws.acceptance_rates[0]),
            )?;
        }
        "gwr" => {
            let gwr_config = config_file.gwr_config()?;
            manifest.insert_config_json("gwr_config", &gwr_config).map_err(CliError::Lib)?;
            let fit = gwr_fit(&data, &gwr_config, stream)?;
            let summaries: Vec<Vec<Summary>> = (0..data.n())
                .map(|i| {
                    (0..data.p())
                        .map(|k| {
                            let v = fit.beta[(i, k)];
                            Summary { mean: v, median: v, lo95: v, hi95: v }
                        })
                        .collect()
                })
                .collect();
            io::save_coefficient_summaries(
                &args.out.join("coefficients.csv"),
                data.locations(),
                &summaries,
            )?;
            write_fit_summary(
                &args.out,
                &args.method,
                gwr_config.kernel_family,
                Some(fit.bandwidth),
                None,
            )?;
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown method `{other}` (expected bgwsr, bgwsr-ae, bgwr or gwr)"
            )));
        }
    }
    manifest.finish(&args.out).map_err(CliError::Lib)?;
    Ok(())
}

#[derive(serde::Serialize, serde::Deserialize)]
struct FitSummary {
    method: String,
    kernel_family: KernelFamily,
    bandwidth: Option<f64>,
    mean_acceptance_rate: Option<f64>,
}

fn write_fit_summary(
    out: &Path,
    method: &str,
    kernel_family: KernelFamily,
    bandwidth: Option<f64>,
    mean_acceptance_rate: Option<f64>,
) -> Result<(), CliError> {
    let summary = FitSummary {
        method: method.to_string(),
        kernel_family,
        bandwidth,
        mean_acceptance_rate,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Lib(BgwsrError::invalid(e.to_string())))?;
    std::fs::write(out.join("fit.json"), json + "\n").map_err(|e| CliError::Lib(e.into()))?;
    Ok(())
}

fn predict(args: PredictArgs) -> CliResult {
    let summary_text = std::fs::read_to_string(args.fit.join("fit.json"))
        .map_err(|e| CliError::Lib(e.into()))?;
    let summary: FitSummary = serde_json::from_str(&summary_text)
        .map_err(|e| CliError::Lib(BgwsrError::invalid(format!("fit.json: {e}"))))?;
    let data = io::load_dataset(&args.fit.join("data.csv"))?;
    let (sites, x_star) = io::load_prediction_sites(&args.sites)?;
    if x_star.ncols() != data.p() {
        return Err(CliError::Lib(BgwsrError::invalid(format!(
            "sites file has {} covariates but the fit used {}",
            x_star.ncols(),
            data.p()
        ))));
    }
    let mut manifest = RunManifest::start("predict", 0);
    manifest.record_input(&args.sites)?;
    manifest.insert_config("fit_dir", &args.fit.display().to_string());
    manifest.insert_config("method", &summary.method);
    manifest.insert_config("normalize", &args.normalize.to_string());

    prepare_out_dir(&args.out)?;
    match summary.method.as_str() {
        "gwr" => {
            let bandwidth = summary.bandwidth.ok_or_else(|| {
                CliError::Lib(BgwsrError::invalid("gwr fit summary lacks a bandwidth"))
            })?;
            let mut out = String::from("s1,s2");
            for k in 1..=data.p() {
                out.push_str(&format!(
                    ",beta{k}_mean,beta{k}_median,beta{k}_lo95,beta{k}_hi95"
                ));
            }
            out.push_str(",y_mean,y_median,y_lo95,y_hi95,isolated_draws\n");
            for (i, &site) in sites.iter().enumerate() {
                let beta = gwr_fit_at(site, &data, bandwidth, summary.kernel_family)?;
                out.push_str(&format!(
                    "{},{}",
                    io::format_float(site.s1),
                    io::format_float(site.s2)
                ));
                let mut y_hat = 0.0;
                for k in 0..data.p() {
                    let v = beta[k];
                    y_hat += x_star[(i, k)] * v;
                    let cell = io::format_float(v);
                    out.push_str(&format!(",{cell},{cell},{cell},{cell}"));
                }
                let cell = io::format_float(y_hat);
                out.push_str(&format!(",{cell},{cell},{cell},{cell},0\n"));
            }
            std::fs::write(args.out.join("predictions.csv"), out)
                .map_err(|e| CliError::Lib(e.into()))?;
        }
        _ => {
            let draws = io::load_trace(&args.fit.join("trace.csv"))?;
            let request = PredictionRequest::new(sites, x_star, args.normalize)?;
            let result = predict_all(&draws, &request, &data, summary.kernel_family)?;
            io::save_predictions(&args.out.join("predictions.csv"), &result, data.p())?;
        }
    }
    manifest.finish(&args.out).map_err(CliError::Lib)?;
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> CliResult {
    let scenarios: Vec<u8> = args
        .scenarios
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u8>()
                .map_err(|_| CliError::Usage(format!("invalid scenario `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    let methods: Vec<Method> = args
        .methods
        .split(',')
        .map(|s| s.trim().parse::<Method>().map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".to_string()));
    }

    let config_file = load_config(&args.config)?;
    let mut config = config_file.benchmark_config()?;
    config.seed = args.seed;
    config.fit.seed = args.seed;
    config.bgwr.seed = args.seed;

    let mut manifest = RunManifest::start("benchmark", args.seed);
    if let Some(path) = &args.config {
        manifest.record_input(path)?;
    }
    manifest.insert_config("scenarios", &args.scenarios);
    manifest.insert_config("methods", &args.methods);
    manifest.insert_config("replications", &args.reps.to_string());
    manifest.insert_config_json("benchmark_config", &config).map_err(CliError::Lib)?;

    let report = run_benchmark(&scenarios, &methods, args.reps, &config)?;

    prepare_out_dir(&args.out)?;
    io::save_report_csv(&args.out.join("report.csv"), &report)?;
    io::save_report_json(&args.out.join("report.json"), &report)?;
    io::save_raw_csv(&args.out.join("raw.csv"), &report)?;
    io::save_timings_csv(&args.out.join("timings.csv"), &report)?;
    manifest.finish(&args.out).map_err(CliError::Lib)?;
    for failure in &report.failures {
        eprintln!(
            "warning: {} failed on scenario {} replication {}: {}",
            failure.method, failure.scenario, failure.replication, failure.message
        );
    }
    Ok(())
}
