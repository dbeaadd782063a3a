//! File formats: dataset CSVs, chain traces, prediction tables, benchmark
//! reports and the flat key-value configuration file.
//!
//! All floating point values are serialised with 17 significant digits, so
//! every file round-trips bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::baselines::{BgwrConfig, GwrConfig};
use crate::error::{Error, Result};
use crate::eval::{BenchmarkConfig, EvalReport};
use crate::prediction::{PredictionResult, Summary};
use crate::sampler::{FitConfig, PosteriorDraws, RetainedDraw};
use crate::scenario::SyntheticDataset;
use crate::spatial::{Location, SpatialDataset};

/// Formats a float with 17 significant digits; parsing the result recovers
/// the exact bit pattern.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_float(path: &str, row: usize, field: &str, raw: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_string(),
        row,
        message: format!("cannot parse `{raw}` in column {field} as a number"),
    })
}

struct CsvTable {
    path: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>(),
        None => {
            return Err(Error::Schema { path: display, message: "file is empty".to_string() })
        }
    };
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if fields.len() != header.len() || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                path: display,
                row: idx + 1,
                message: format!(
                    "expected {} fields, found {} (missing fields are rejected)",
                    header.len(),
                    fields.len()
                ),
            });
        }
        rows.push(fields);
    }
    Ok(CsvTable { path: display, header, rows })
}

fn required_column(table: &CsvTable, name: &str) -> Result<usize> {
    table.header.iter().position(|h| h == name).ok_or_else(|| Error::Schema {
        path: table.path.clone(),
        message: format!("missing required column `{name}`"),
    })
}

/// Covariate columns: every remaining `x`-prefixed column, in file order.
fn covariate_columns(table: &CsvTable, allow_y: bool) -> Result<Vec<usize>> {
    let mut cols = Vec::new();
    for (idx, name) in table.header.iter().enumerate() {
        match name.as_str() {
            "s1" | "s2" => {}
            "y" if allow_y => {}
            other if other.starts_with('x') => cols.push(idx),
            other => {
                return Err(Error::Schema {
                    path: table.path.clone(),
                    message: format!("unexpected column `{other}`"),
                });
            }
        }
    }
    if cols.is_empty() {
        return Err(Error::Schema {
            path: table.path.clone(),
            message: "no covariate columns (expected x1, x2, ...)".to_string(),
        });
    }
    Ok(cols)
}

/// Loads a dataset CSV with columns `s1,s2,y` and covariates `x1..xp`.
pub fn load_dataset(path: &Path) -> Result<SpatialDataset> {
    let table = read_csv(path)?;
    let s1 = required_column(&table, "s1")?;
    let s2 = required_column(&table, "s2")?;
    let yc = required_column(&table, "y")?;
    let xc = covariate_columns(&table, true)?;
    if table.rows.len() < 2 {
        return Err(Error::Schema {
            path: table.path,
            message: format!("need at least 2 data rows, found {}", table.rows.len()),
        });
    }
    let n = table.rows.len();
    let p = xc.len();
    let mut locations = Vec::with_capacity(n);
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    for (r, fields) in table.rows.iter().enumerate() {
        let row_no = r + 2; // 1-based, after the header
        locations.push(Location::new(
            parse_float(&table.path, row_no, "s1", &fields[s1])?,
            parse_float(&table.path, row_no, "s2", &fields[s2])?,
        ));
        y[r] = parse_float(&table.path, row_no, "y", &fields[yc])?;
        for (k, &c) in xc.iter().enumerate() {
            x[(r, k)] = parse_float(&table.path, row_no, &table.header[c], &fields[c])?;
        }
    }
    SpatialDataset::new(locations, x, y)
}

/// Writes a dataset in the `load_dataset` schema.
pub fn save_dataset(path: &Path, data: &SpatialDataset) -> Result<()> {
    let mut out = String::from("s1,s2,y");
    for k in 1..=data.p() {
        write!(out, ",x{k}").unwrap();
    }
    out.push('\n');
    for i in 0..data.n() {
        let loc = data.locations()[i];
        write!(
            out,
            "{},{},{}",
            format_float(loc.s1),
            format_float(loc.s2),
            format_float(data.response()[i])
        )
        .unwrap();
        for k in 0..data.p() {
            write!(out, ",{}", format_float(data.covariates()[(i, k)])).unwrap();
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Loads prediction sites: columns `s1,s2` plus covariates `x1..xp`; a `y`
/// column, if present, is ignored.
pub fn load_prediction_sites(path: &Path) -> Result<(Vec<Location>, DMatrix<f64>)> {
    let table = read_csv(path)?;
    let s1 = required_column(&table, "s1")?;
    let s2 = required_column(&table, "s2")?;
    let xc = covariate_columns(&table, true)?;
    if table.rows.is_empty() {
        return Err(Error::Schema {
            path: table.path,
            message: "no prediction sites".to_string(),
        });
    }
    let n = table.rows.len();
    let mut locations = Vec::with_capacity(n);
    let mut x = DMatrix::zeros(n, xc.len());
    for (r, fields) in table.rows.iter().enumerate() {
        let row_no = r + 2;
        locations.push(Location::new(
            parse_float(&table.path, row_no, "s1", &fields[s1])?,
            parse_float(&table.path, row_no, "s2", &fields[s2])?,
        ));
        for (k, &c) in xc.iter().enumerate() {
            x[(r, k)] = parse_float(&table.path, row_no, &table.header[c], &fields[c])?;
        }
    }
    Ok((locations, x))
}

/// Writes the synthetic-truth table: coordinates, role (`obs`/`pred`) and the
/// true coefficient surface per site.
pub fn save_truth(path: &Path, data: &SyntheticDataset) -> Result<()> {
    let p = data.observed.p();
    let mut out = String::from("s1,s2,role");
    for k in 1..=p {
        write!(out, ",beta{k}").unwrap();
    }
    out.push('\n');
    for i in 0..data.observed.n() {
        let loc = data.observed.locations()[i];
        write!(out, "{},{},obs", format_float(loc.s1), format_float(loc.s2)).unwrap();
        for k in 0..p {
            write!(out, ",{}", format_float(data.observed_true_beta[(i, k)])).unwrap();
        }
        out.push('\n');
    }
    for (i, loc) in data.prediction_sites.iter().enumerate() {
        write!(out, "{},{},pred", format_float(loc.s1), format_float(loc.s2)).unwrap();
        for k in 0..p {
            write!(out, ",{}", format_float(data.prediction_true_beta[(i, k)])).unwrap();
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes the chain trace: one row per retained draw with the fixed column
/// order `iter, sigma_sq, lambda1_sq_k.., lambda2_sq_k.., h_i.., beta_k_i..`.
pub fn save_trace(path: &Path, draws: &PosteriorDraws) -> Result<()> {
    if draws.is_empty() {
        return Err(Error::invalid("cannot write an empty trace"));
    }
    let first = &draws.draws[0];
    let n = first.beta.nrows();
    let p = first.beta.ncols();
    let n_lambda = first.lambda1_sq.len();

    let mut out = String::from("iter,sigma_sq");
    for k in 1..=n_lambda {
        write!(out, ",lambda1_sq_{k}").unwrap();
    }
    for k in 1..=n_lambda {
        write!(out, ",lambda2_sq_{k}").unwrap();
    }
    for i in 1..=n {
        write!(out, ",h_{i}").unwrap();
    }
    for k in 1..=p {
        for i in 1..=n {
            write!(out, ",beta_{k}_{i}").unwrap();
        }
    }
    out.push('\n');
    for d in &draws.draws {
        write!(out, "{},{}", d.iter, format_float(d.sigma_sq)).unwrap();
        for v in &d.lambda1_sq {
            write!(out, ",{}", format_float(*v)).unwrap();
        }
        for v in &d.lambda2_sq {
            write!(out, ",{}", format_float(*v)).unwrap();
        }
        for v in &d.h {
            write!(out, ",{}", format_float(*v)).unwrap();
        }
        for k in 0..p {
            for i in 0..n {
                write!(out, ",{}", format_float(d.beta[(i, k)])).unwrap();
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a trace back into retained draws. Acceptance rates are not part of
/// the trace and come back empty.
pub fn load_trace(path: &Path) -> Result<PosteriorDraws> {
    let table = read_csv(path)?;
    let lambda_count = table.header.iter().filter(|h| h.starts_with("lambda1_sq_")).count();
    let n = table.header.iter().filter(|h| h.starts_with("h_")).count();
    let beta_count = table.header.iter().filter(|h| h.starts_with("beta_")).count();
    if n == 0 || beta_count == 0 || beta_count % n != 0 {
        return Err(Error::Schema {
            path: table.path,
            message: "trace header is not in the expected layout".to_string(),
        });
    }
    let p = beta_count / n;
    let expected = 2 + 2 * lambda_count + n + p * n;
    if table.header.len() != expected {
        return Err(Error::Schema {
            path: table.path,
            message: format!(
                "trace header has {} columns, expected {expected}",
                table.header.len()
            ),
        });
    }
    let mut draws = Vec::with_capacity(table.rows.len());
    for (r, fields) in table.rows.iter().enumerate() {
        let row_no = r + 2;
        let iter = fields[0].parse::<usize>().map_err(|_| Error::Parse {
            path: table.path.clone(),
            row: row_no,
            message: format!("cannot parse iteration index `{}`", fields[0]),
        })?;
        let mut cursor = 1;
        let take = |count: usize, what: &str, cursor: &mut usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(count);
            for c in *cursor..*cursor + count {
                out.push(parse_float(&table.path, row_no, what, &fields[c])?);
            }
            *cursor += count;
            Ok(out)
        };
        let sigma_sq = take(1, "sigma_sq", &mut cursor)?[0];
        let lambda1_sq = take(lambda_count, "lambda1_sq", &mut cursor)?;
        let lambda2_sq = take(lambda_count, "lambda2_sq", &mut cursor)?;
        let h = take(n, "h", &mut cursor)?;
        let mut beta = DMatrix::zeros(n, p);
        for k in 0..p {
            let col = take(n, "beta", &mut cursor)?;
            for i in 0..n {
                beta[(i, k)] = col[i];
            }
        }
        draws.push(RetainedDraw { iter, beta, sigma_sq, lambda1_sq, lambda2_sq, h });
    }
    if draws.is_empty() {
        return Err(Error::Schema {
            path: table.path,
            message: "trace has no draws".to_string(),
        });
    }
    Ok(PosteriorDraws { draws, acceptance_rates: Vec::new() })
}

fn write_summary(out: &mut String, summary: Option<Summary>) {
    match summary {
        Some(s) => write!(
            out,
            ",{},{},{},{}",
            format_float(s.mean),
            format_float(s.median),
            format_float(s.lo95),
            format_float(s.hi95)
        )
        .unwrap(),
        None => out.push_str(",NA,NA,NA,NA"),
    }
}

/// Writes per-site prediction summaries: coordinates, then
/// mean/median/lo95/hi95 per coefficient and for the response.
pub fn save_predictions(path: &Path, result: &PredictionResult, p: usize) -> Result<()> {
    let mut out = String::from("s1,s2");
    for k in 1..=p {
        write!(out, ",beta{k}_mean,beta{k}_median,beta{k}_lo95,beta{k}_hi95").unwrap();
    }
    out.push_str(",y_mean,y_median,y_lo95,y_hi95,isolated_draws\n");
    for site in &result.sites {
        write!(out, "{},{}", format_float(site.site.s1), format_float(site.site.s2)).unwrap();
        for k in 0..p {
            write_summary(&mut out, site.beta[k]);
        }
        write_summary(&mut out, site.y);
        write!(out, ",{}", site.isolated_draws).unwrap();
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes per-site coefficient summaries for a fitted model at the observed
/// sites. Point estimates (no draws) produce degenerate summaries.
pub fn save_coefficient_summaries(
    path: &Path,
    locations: &[Location],
    summaries: &[Vec<Summary>],
) -> Result<()> {
    let p = summaries.first().map_or(0, |s| s.len());
    let mut out = String::from("s1,s2");
    for k in 1..=p {
        write!(out, ",beta{k}_mean,beta{k}_median,beta{k}_lo95,beta{k}_hi95").unwrap();
    }
    out.push('\n');
    for (loc, row) in locations.iter().zip(summaries) {
        write!(out, "{},{}", format_float(loc.s1), format_float(loc.s2)).unwrap();
        for s in row {
            write_summary(&mut out, Some(*s));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn option_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), format_float)
}

/// Writes the aggregated report rows: one row per (scenario, method) with
/// the median metrics in the `methods x {beta_k, y} x {obs, pred}` layout.
pub fn save_report_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let p = report.rows.first().map_or(0, |r| r.mse_beta_obs.len());
    let mut out = String::from("scenario,method,completed");
    for k in 1..=p {
        write!(out, ",mse_beta{k}_obs").unwrap();
    }
    out.push_str(",mse_y_obs");
    for k in 1..=p {
        write!(out, ",mse_beta{k}_pred").unwrap();
    }
    out.push_str(",mse_y_pred,interval_width_pred,coverage_pred\n");
    for row in &report.rows {
        write!(out, "{},{},{}", row.scenario, row.method, row.completed).unwrap();
        for v in &row.mse_beta_obs {
            write!(out, ",{}", format_float(*v)).unwrap();
        }
        write!(out, ",{}", format_float(row.mse_y_obs)).unwrap();
        for v in &row.mse_beta_pred {
            write!(out, ",{}", format_float(*v)).unwrap();
        }
        write!(
            out,
            ",{},{},{}",
            format_float(row.mse_y_pred),
            option_cell(row.interval_width),
            option_cell(row.coverage)
        )
        .unwrap();
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes the per-replication raw metric rows.
pub fn save_raw_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let p = report.raw.first().map_or(0, |r| r.mse_beta_obs.len());
    let mut out = String::from("scenario,method,replication");
    for k in 1..=p {
        write!(out, ",mse_beta{k}_obs").unwrap();
    }
    out.push_str(",mse_y_obs");
    for k in 1..=p {
        write!(out, ",mse_beta{k}_pred").unwrap();
    }
    out.push_str(",mse_y_pred,interval_width_pred,coverage_pred\n");
    for row in &report.raw {
        write!(out, "{},{},{}", row.scenario, row.method, row.replication).unwrap();
        for v in &row.mse_beta_obs {
            write!(out, ",{}", format_float(*v)).unwrap();
        }
        write!(out, ",{}", format_float(row.mse_y_obs)).unwrap();
        for v in &row.mse_beta_pred {
            write!(out, ",{}", format_float(*v)).unwrap();
        }
        write!(
            out,
            ",{},{},{}",
            format_float(row.mse_y_pred),
            option_cell(row.interval_width),
            option_cell(row.coverage)
        )
        .unwrap();
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes wall-clock runtimes per cell. Kept apart from the report files,
/// which must be bitwise reproducible across reruns.
pub fn save_timings_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let mut out = String::from("scenario,method,replication,runtime_secs\n");
    for row in &report.raw {
        writeln!(
            out,
            "{},{},{},{:.3}",
            row.scenario, row.method, row.replication, row.runtime_secs
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes the full report (rows, raw metrics, failures) as JSON. Runtimes
/// are excluded to keep the file reproducible.
pub fn save_report_json(path: &Path, report: &EvalReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::invalid(format!("report serialisation failed: {e}")))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

/// A flat `key = value` configuration file. `#` starts a comment; keys
/// mirror the config struct fields.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_string(),
                row: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            Some(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::invalid(format!("config key {key}: `{raw}` is not a number"))),
            None => Ok(None),
        }
    }

    fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.entries.get(key) {
            Some(raw) => raw.parse::<usize>().map(Some).map_err(|_| {
                Error::invalid(format!("config key {key}: `{raw}` is not a non-negative integer"))
            }),
            None => Ok(None),
        }
    }

    fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.entries.get(key).map(String::as_str) {
            Some("true") => Ok(Some(true)),
            Some("false") => Ok(Some(false)),
            Some(raw) => {
                Err(Error::invalid(format!("config key {key}: `{raw}` is not true/false")))
            }
            None => Ok(None),
        }
    }

    const KNOWN_KEYS: &'static [&'static str] = &[
        "r",
        "q",
        "r1",
        "q1",
        "r2",
        "q2",
        "a",
        "sigma_h_sq",
        "t_max",
        "burn_in",
        "thin",
        "seed",
        "adaptive_bandwidth",
        "kernel_family",
        "bgwr_epsilon",
        "gwr_grid_start",
        "gwr_grid_step",
        "gwr_grid_stop",
        "gwr_folds",
        "normalize_prediction",
        "score_against_signal",
        "n_pool",
        "n_obs",
        "n_pred",
    ];

    pub fn reject_unknown_keys(&self) -> Result<()> {
        for key in self.entries.keys() {
            if !Self::KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::invalid(format!("unknown config key `{key}`")));
            }
        }
        Ok(())
    }

    /// Builds a sampler configuration, starting from the defaults. When `a`
    /// is given without `sigma_h_sq`, the proposal standard deviation
    /// defaults to a tenth of `a`.
    pub fn fit_config(&self) -> Result<FitConfig> {
        self.reject_unknown_keys()?;
        let mut config = FitConfig::default();
        if let Some(a) = self.get_f64("a")? {
            config.a = a;
            config.sigma_h_sq = (0.1 * a) * (0.1 * a);
        }
        if let Some(v) = self.get_f64("r")? {
            config.r = v;
        }
        if let Some(v) = self.get_f64("q")? {
            config.q = v;
        }
        if let Some(v) = self.get_f64("r1")? {
            config.r1 = v;
        }
        if let Some(v) = self.get_f64("q1")? {
            config.q1 = v;
        }
        if let Some(v) = self.get_f64("r2")? {
            config.r2 = v;
        }
        if let Some(v) = self.get_f64("q2")? {
            config.q2 = v;
        }
        if let Some(v) = self.get_f64("sigma_h_sq")? {
            config.sigma_h_sq = v;
        }
        if let Some(v) = self.get_usize("t_max")? {
            config.t_max = v;
        }
        if let Some(v) = self.get_usize("burn_in")? {
            config.burn_in = v;
        }
        if let Some(v) = self.get_usize("thin")? {
            config.thin = v;
        }
        if let Some(v) = self.get_usize("seed")? {
            config.seed = v as u64;
        }
        if let Some(v) = self.get_bool("adaptive_bandwidth")? {
            config.adaptive_bandwidth = v;
        }
        if let Some(raw) = self.entries.get("kernel_family") {
            config.kernel_family = raw.parse()?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Derives the Bayesian-baseline configuration from the same keys.
    pub fn bgwr_config(&self) -> Result<BgwrConfig> {
        let fit = self.fit_config()?;
        let mut config = BgwrConfig {
            r: fit.r,
            q: fit.q,
            bandwidth_upper: fit.a,
            sigma_h_sq: fit.sigma_h_sq,
            t_max: fit.t_max,
            burn_in: fit.burn_in,
            thin: fit.thin,
            seed: fit.seed,
            kernel_family: fit.kernel_family,
            ..BgwrConfig::default()
        };
        if let Some(v) = self.get_f64("bgwr_epsilon")? {
            config.coefficient_prior_precision = v;
        }
        config.validate()?;
        Ok(config)
    }

    /// Derives the GWR cross-validation configuration.
    pub fn gwr_config(&self) -> Result<GwrConfig> {
        let mut config = GwrConfig::default();
        let start = self.get_f64("gwr_grid_start")?;
        let step = self.get_f64("gwr_grid_step")?;
        let stop = self.get_f64("gwr_grid_stop")?;
        if start.is_some() || step.is_some() || stop.is_some() {
            let (start, step, stop) = (
                start.ok_or_else(|| Error::invalid("gwr_grid_start missing"))?,
                step.ok_or_else(|| Error::invalid("gwr_grid_step missing"))?,
                stop.ok_or_else(|| Error::invalid("gwr_grid_stop missing"))?,
            );
            if !(step > 0.0) || !(start > 0.0) || stop < start {
                return Err(Error::invalid("gwr grid must satisfy 0 < start <= stop, step > 0"));
            }
            let mut grid = Vec::new();
            let mut i = 0usize;
            loop {
                let h = start + step * i as f64;
                if h > stop + 1e-12 {
                    break;
                }
                grid.push(h);
                i += 1;
            }
            config.bandwidth_grid = grid;
        }
        if let Some(v) = self.get_usize("gwr_folds")? {
            config.folds = v;
        }
        if let Some(raw) = self.entries.get("kernel_family") {
            config.kernel_family = raw.parse()?;
        }
        Ok(config)
    }

    /// Full benchmark configuration.
    pub fn benchmark_config(&self) -> Result<BenchmarkConfig> {
        let mut config = BenchmarkConfig {
            fit: self.fit_config()?,
            bgwr: self.bgwr_config()?,
            gwr: self.gwr_config()?,
            ..BenchmarkConfig::default()
        };
        config.seed = config.fit.seed;
        if let Some(v) = self.get_bool("normalize_prediction")? {
            config.normalize_prediction = v;
        }
        if let Some(v) = self.get_bool("score_against_signal")? {
            config.score_against_signal = v;
        }
        if let Some(v) = self.get_usize("n_pool")? {
            config.n_pool = v;
        }
        if let Some(v) = self.get_usize("n_obs")? {
            config.n_obs = v;
        }
        if let Some(v) = self.get_usize("n_pred")? {
            config.n_pred = v;
        }
        Ok(config)
    }
}
