//! Scoring metrics and the replication benchmark harness.
//!
//! One benchmark cell is a (scenario, replication) pair: the data for the
//! cell is generated once from the stream `(seed, replication)` and every
//! requested method is fitted to exactly that dataset. Per-method metrics
//! are aggregated across replications by the median; the raw per-replication
//! values are kept so other aggregates stay recoverable.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::baselines::{bgwr_run_chain, gwr_fit, gwr_fit_at, ols, BgwrConfig, GwrConfig};
use crate::error::{Error, Result};
use crate::prediction::{predict_all, PredictionRequest};
use crate::rng::RngStream;
use crate::sampler::{run_chain, FitConfig, PosteriorDraws};
use crate::scenario::{generate, scenario_spec, SyntheticDataset};

/// Mean squared deviation between estimates and truths.
pub fn mse(estimates: &[f64], truths: &[f64]) -> Result<f64> {
    if estimates.len() != truths.len() || estimates.is_empty() {
        return Err(Error::invalid(format!(
            "mse needs equal non-empty lengths, got {} and {}",
            estimates.len(),
            truths.len()
        )));
    }
    let n = estimates.len() as f64;
    Ok(estimates.iter().zip(truths).map(|(e, t)| (e - t) * (e - t)).sum::<f64>() / n)
}

/// Fraction of truths inside their interval (inclusive) and the mean width.
pub fn coverage_and_width(intervals: &[(f64, f64)], truths: &[f64]) -> Result<(f64, f64)> {
    if intervals.len() != truths.len() || intervals.is_empty() {
        return Err(Error::invalid("coverage needs equal non-empty lengths"));
    }
    if intervals.iter().any(|&(lo, hi)| lo > hi) {
        return Err(Error::invalid("interval with lower bound above upper bound"));
    }
    let n = truths.len() as f64;
    let covered = intervals
        .iter()
        .zip(truths)
        .filter(|(&(lo, hi), &t)| lo <= t && t <= hi)
        .count() as f64;
    let width = intervals.iter().map(|&(lo, hi)| hi - lo).sum::<f64>() / n;
    Ok((covered / n, width))
}

/// Interpolated median of a non-empty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// The fitted models under comparison. `Oracle` returns the true
/// coefficients and exists to validate the scoring plumbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BgwsrAe,
    Bgwsr,
    Bgwr,
    Gwr,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::BgwsrAe => "bgwsr-ae",
            Method::Bgwsr => "bgwsr",
            Method::Bgwr => "bgwr",
            Method::Gwr => "gwr",
            Method::Oracle => "oracle",
        }
    }

    fn stream_offset(self) -> u64 {
        let idx = match self {
            Method::BgwsrAe => 1,
            Method::Bgwsr => 2,
            Method::Bgwr => 3,
            Method::Gwr => 4,
            Method::Oracle => 5,
        };
        idx << 32
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bgwsr-ae" => Ok(Method::BgwsrAe),
            "bgwsr" => Ok(Method::Bgwsr),
            "bgwr" => Ok(Method::Bgwr),
            "gwr" => Ok(Method::Gwr),
            "oracle" => Ok(Method::Oracle),
            other => Err(Error::invalid(format!(
                "unknown method `{other}` (expected bgwsr-ae, bgwsr, bgwr, gwr or oracle)"
            ))),
        }
    }
}

/// Everything a benchmark run needs.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BenchmarkConfig {
    /// Sampler settings shared by the sparse variants; the adaptive flag is
    /// overridden per method.
    pub fit: FitConfig,
    pub bgwr: BgwrConfig,
    pub gwr: GwrConfig,
    pub n_pool: usize,
    pub n_obs: usize,
    pub n_pred: usize,
    /// Normalise prediction weights when scoring the Bayesian methods.
    pub normalize_prediction: bool,
    /// Score prediction-site responses against the noise-free signal rather
    /// than the noisy realisation.
    pub score_against_signal: bool,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            fit: FitConfig::default(),
            bgwr: BgwrConfig::default(),
            gwr: GwrConfig::default(),
            n_pool: 1000,
            n_obs: 100,
            n_pred: 50,
            normalize_prediction: true,
            score_against_signal: true,
            seed: 0,
        }
    }
}

/// Metrics for one method on one replication.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ReplicationScore {
    pub scenario: u8,
    pub method: Method,
    pub replication: usize,
    /// Per-covariate coefficient error at observed sites.
    pub mse_beta_obs: Vec<f64>,
    pub mse_y_obs: f64,
    /// Per-covariate coefficient error at prediction sites.
    pub mse_beta_pred: Vec<f64>,
    pub mse_y_pred: f64,
    /// Mean width of the central 95% response interval at prediction sites.
    pub interval_width: Option<f64>,
    /// Fraction of prediction-site truths inside the 95% interval.
    pub coverage: Option<f64>,
    pub runtime_secs: f64,
}

/// Median metrics for one (scenario, method) pair.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ReportRow {
    pub scenario: u8,
    pub method: Method,
    pub completed: usize,
    pub mse_beta_obs: Vec<f64>,
    pub mse_y_obs: f64,
    pub mse_beta_pred: Vec<f64>,
    pub mse_y_pred: f64,
    pub interval_width: Option<f64>,
    pub coverage: Option<f64>,
}

/// A method failure on one replication, recorded rather than fatal.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FailureRecord {
    pub scenario: u8,
    pub method: Method,
    pub replication: usize,
    pub message: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EvalReport {
    pub scenarios: Vec<u8>,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub rows: Vec<ReportRow>,
    pub raw: Vec<ReplicationScore>,
    pub failures: Vec<FailureRecord>,
}

fn column(m: &DMatrix<f64>, k: usize) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, k)]).collect()
}

fn fitted_response(data_x: &DMatrix<f64>, beta: &DMatrix<f64>) -> Vec<f64> {
    (0..data_x.nrows())
        .map(|i| (0..data_x.ncols()).map(|k| data_x[(i, k)] * beta[(i, k)]).sum())
        .collect()
}

/// Scores a Bayesian fit (retained draws) on one dataset.
///
/// A prediction site isolated under every draw has no kernel support at all;
/// the harness falls back to the nearest observed site's coefficient draws,
/// the limit of the normalised prediction as the support shrinks to one
/// neighbour.
fn score_draws(
    draws: &PosteriorDraws,
    data: &SyntheticDataset,
    config: &BenchmarkConfig,
    kernel: crate::spatial::KernelFamily,
) -> Result<(Vec<f64>, f64, Vec<f64>, f64, f64, f64)> {
    let p = data.observed.p();
    let beta_hat = draws.posterior_mean_beta();
    let mse_beta_obs: Vec<f64> = (0..p)
        .map(|k| mse(&column(&beta_hat, k), &column(&data.observed_true_beta, k)))
        .collect::<Result<_>>()?;
    let y_hat_obs = fitted_response(data.observed.covariates(), &beta_hat);
    let mse_y_obs = mse(&y_hat_obs, data.observed.response().as_slice())?;

    let request = PredictionRequest::new(
        data.prediction_sites.clone(),
        data.prediction_x.clone(),
        config.normalize_prediction,
    )?;
    let result = predict_all(draws, &request, &data.observed, kernel)?;

    let nearest: Vec<usize> = data
        .prediction_sites
        .iter()
        .map(|&site| {
            let mut best = (0usize, f64::INFINITY);
            for (j, &obs) in data.observed.locations().iter().enumerate() {
                let d = crate::spatial::distance(site, obs);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best.0
        })
        .collect();

    let mut beta_pred_mean = DMatrix::zeros(data.prediction_sites.len(), p);
    let mut y_est = Vec::with_capacity(data.prediction_sites.len());
    let mut intervals = Vec::with_capacity(data.prediction_sites.len());
    for (s, site) in result.sites.iter().enumerate() {
        match site.y {
            Some(summary) => {
                y_est.push(summary.mean);
                intervals.push((summary.lo95, summary.hi95));
                for k in 0..p {
                    beta_pred_mean[(s, k)] =
                        site.beta[k].expect("beta summary present with y summary").mean;
                }
            }
            None => {
                let j = nearest[s];
                let mut ys: Vec<f64> = draws
                    .draws
                    .iter()
                    .map(|d| {
                        (0..p).map(|k| data.prediction_x[(s, k)] * d.beta[(j, k)]).sum::<f64>()
                    })
                    .collect();
                ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mean = ys.iter().sum::<f64>() / ys.len() as f64;
                y_est.push(mean);
                intervals.push((
                    crate::prediction::quantile(&ys, 0.025),
                    crate::prediction::quantile(&ys, 0.975),
                ));
                for k in 0..p {
                    let mean_k = draws.draws.iter().map(|d| d.beta[(j, k)]).sum::<f64>()
                        / draws.len() as f64;
                    beta_pred_mean[(s, k)] = mean_k;
                }
            }
        }
    }

    let mut mse_beta_pred = Vec::with_capacity(p);
    for k in 0..p {
        mse_beta_pred
            .push(mse(&column(&beta_pred_mean, k), &column(&data.prediction_true_beta, k))?);
    }
    let truth: Vec<f64> = if config.score_against_signal {
        data.prediction_signal().iter().copied().collect()
    } else {
        data.prediction_y.iter().copied().collect()
    };
    let mse_y_pred = mse(&y_est, &truth)?;
    let (coverage, width) = coverage_and_width(&intervals, &truth)?;
    Ok((mse_beta_obs, mse_y_obs, mse_beta_pred, mse_y_pred, width, coverage))
}

fn score_point_estimates(
    beta_obs: &DMatrix<f64>,
    beta_pred: &DMatrix<f64>,
    data: &SyntheticDataset,
    config: &BenchmarkConfig,
) -> Result<(Vec<f64>, f64, Vec<f64>, f64)> {
    let p = data.observed.p();
    let mse_beta_obs: Vec<f64> = (0..p)
        .map(|k| mse(&column(beta_obs, k), &column(&data.observed_true_beta, k)))
        .collect::<Result<_>>()?;
    let y_hat_obs = fitted_response(data.observed.covariates(), beta_obs);
    let mse_y_obs = mse(&y_hat_obs, data.observed.response().as_slice())?;
    let mse_beta_pred: Vec<f64> = (0..p)
        .map(|k| mse(&column(beta_pred, k), &column(&data.prediction_true_beta, k)))
        .collect::<Result<_>>()?;
    let y_hat_pred = fitted_response(&data.prediction_x, beta_pred);
    let truth: Vec<f64> = if config.score_against_signal {
        data.prediction_signal().iter().copied().collect()
    } else {
        data.prediction_y.iter().copied().collect()
    };
    let mse_y_pred = mse(&y_hat_pred, &truth)?;
    Ok((mse_beta_obs, mse_y_obs, mse_beta_pred, mse_y_pred))
}

/// Fits and scores one method on one generated dataset.
pub fn score_method(
    method: Method,
    data: &SyntheticDataset,
    config: &BenchmarkConfig,
    scenario: u8,
    replication: usize,
) -> Result<ReplicationScore> {
    let start = Instant::now();
    let stream = RngStream::new(config.seed, method.stream_offset() | replication as u64);
    let (mse_beta_obs, mse_y_obs, mse_beta_pred, mse_y_pred, width, coverage) = match method {
        Method::BgwsrAe | Method::Bgwsr => {
            let fit_config = FitConfig {
                adaptive_bandwidth: method == Method::BgwsrAe,
                ..config.fit.clone()
            };
            let draws = run_chain(&data.observed, &fit_config, stream)?;
            let (a, b, c, d, w, cov) =
                score_draws(&draws, data, config, fit_config.kernel_family)?;
            (a, b, c, d, Some(w), Some(cov))
        }
        Method::Bgwr => {
            let draws = bgwr_run_chain(&data.observed, &config.bgwr, stream)?;
            let (a, b, c, d, w, cov) =
                score_draws(&draws, data, config, config.bgwr.kernel_family)?;
            (a, b, c, d, Some(w), Some(cov))
        }
        Method::Gwr => {
            let fit = gwr_fit(&data.observed, &config.gwr, stream)?;
            // local fits at the prediction sites; a singular local problem
            // falls back to the global solution
            let fallback = ols(&data.observed)?;
            let p = data.observed.p();
            let beta_pred = DMatrix::from_fn(data.prediction_sites.len(), p, |i, k| {
                match gwr_fit_at(
                    data.prediction_sites[i],
                    &data.observed,
                    fit.bandwidth,
                    config.gwr.kernel_family,
                ) {
                    Ok(local) => local[k],
                    Err(_) => fallback[k],
                }
            });
            let (a, b, c, d) = score_point_estimates(&fit.beta, &beta_pred, data, config)?;
            (a, b, c, d, None, None)
        }
        Method::Oracle => {
            let (a, b, c, d) = score_point_estimates(
                &data.observed_true_beta,
                &data.prediction_true_beta,
                data,
                config,
            )?;
            (a, b, c, d, None, None)
        }
    };
    Ok(ReplicationScore {
        scenario,
        method,
        replication,
        mse_beta_obs,
        mse_y_obs,
        mse_beta_pred,
        mse_y_pred,
        interval_width: width,
        coverage,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Runs every (scenario, replication, method) cell and aggregates medians.
///
/// Cells run on the rayon pool; results are collected in a fixed order and
/// each cell derives its own random streams, so the report is identical
/// regardless of thread count.
pub fn run_benchmark(
    scenarios: &[u8],
    methods: &[Method],
    replications: usize,
    config: &BenchmarkConfig,
) -> Result<EvalReport> {
    if scenarios.is_empty() || methods.is_empty() || replications == 0 {
        return Err(Error::invalid("benchmark needs scenarios, methods and replications"));
    }
    let cells: Vec<(u8, usize)> = scenarios
        .iter()
        .flat_map(|&s| (0..replications).map(move |r| (s, r)))
        .collect();

    let cell_results: Vec<Vec<std::result::Result<ReplicationScore, FailureRecord>>> = cells
        .par_iter()
        .map(|&(scenario, replication)| {
            let mut out = Vec::with_capacity(methods.len());
            let mut spec = match scenario_spec(scenario, config.seed) {
                Ok(s) => s,
                Err(e) => {
                    return methods
                        .iter()
                        .map(|&m| {
                            Err(FailureRecord {
                                scenario,
                                method: m,
                                replication,
                                message: e.to_string(),
                            })
                        })
                        .collect();
                }
            };
            spec.n_pool = config.n_pool;
            spec.n_obs = config.n_obs;
            spec.n_pred = config.n_pred;
            let data = match generate(&spec, RngStream::new(config.seed, replication as u64)) {
                Ok(d) => d,
                Err(e) => {
                    return methods
                        .iter()
                        .map(|&m| {
                            Err(FailureRecord {
                                scenario,
                                method: m,
                                replication,
                                message: e.to_string(),
                            })
                        })
                        .collect();
                }
            };
            for &method in methods {
                out.push(
                    score_method(method, &data, config, scenario, replication).map_err(|e| {
                        FailureRecord {
                            scenario,
                            method,
                            replication,
                            message: e.to_string(),
                        }
                    }),
                );
            }
            out
        })
        .collect();

    let mut raw = Vec::new();
    let mut failures = Vec::new();
    for cell in cell_results {
        for item in cell {
            match item {
                Ok(score) => raw.push(score),
                Err(failure) => failures.push(failure),
            }
        }
    }

    let mut rows = Vec::new();
    for &scenario in scenarios {
        for &method in methods {
            let scores: Vec<&ReplicationScore> = raw
                .iter()
                .filter(|s| s.scenario == scenario && s.method == method)
                .collect();
            if scores.is_empty() {
                continue;
            }
            let p = scores[0].mse_beta_obs.len();
            let med_vec = |f: &dyn Fn(&ReplicationScore) -> f64| -> f64 {
                median(&scores.iter().map(|s| f(s)).collect::<Vec<_>>())
            };
            rows.push(ReportRow {
                scenario,
                method,
                completed: scores.len(),
                mse_beta_obs: (0..p)
                    .map(|k| median(&scores.iter().map(|s| s.mse_beta_obs[k]).collect::<Vec<_>>()))
                    .collect(),
                mse_y_obs: med_vec(&|s| s.mse_y_obs),
                mse_beta_pred: (0..p)
                    .map(|k| {
                        median(&scores.iter().map(|s| s.mse_beta_pred[k]).collect::<Vec<_>>())
                    })
                    .collect(),
                mse_y_pred: med_vec(&|s| s.mse_y_pred),
                interval_width: if scores.iter().all(|s| s.interval_width.is_some()) {
                    Some(median(
                        &scores.iter().map(|s| s.interval_width.unwrap()).collect::<Vec<_>>(),
                    ))
                } else {
                    None
                },
                coverage: if scores.iter().all(|s| s.coverage.is_some()) {
                    Some(median(&scores.iter().map(|s| s.coverage.unwrap()).collect::<Vec<_>>()))
                } else {
                    None
                },
            });
        }
    }
    Ok(EvalReport {
        scenarios: scenarios.to_vec(),
        methods: methods.to_vec(),
        replications,
        rows,
        raw,
        failures,
    })
}
