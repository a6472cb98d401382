//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation tolerance missed (`gauss-validate`),
//! 2 configuration or usage error, 3 I/O error, 4 malformed input,
//! 5 infeasible search, 6 numeric/domain error. Failures also print a
//! one-line JSON object on stderr.

use std::collections::{HashMap, HashSet};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::abstain::{
    abstain_at_threshold, coverage_curve, curve_csv, load_predictions, CoverageOrder,
};
use crate::dataset::{split, Dataset, LabelSet, PointFormat, PointSet};
use crate::error::{Error, Result};
use crate::gaussmix::{self, GaussMixModel, SoftLabelMode};
use crate::geometry::Metric;
use crate::pipeline::{alpha_sweep, evaluate_region, repeated_trials, sweep_csv, TRAIN_FRACTION};
use crate::search::{SearchOptions, SearchParams, Searcher};
use crate::uncertainty::{lu_csv, lu_stats, Histogram};

pub const FORMAT_VERSION: &str = "luconc-report/1";

/// Exit code when `gauss-validate` misses a tolerance.
pub const EXIT_VALIDATION_FAILED: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "luconc",
    version,
    about = "Label-uncertainty constrained concentration estimates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repeated split/search/evaluate trials; writes a JSON report.
    Estimate(EstimateArgs),
    /// Repeated trials over a grid of alpha values; writes a CSV.
    Sweep(SweepArgs),
    /// Label-uncertainty histogram and per-example scores.
    LuStats(LuStatsArgs),
    /// Accuracy after abstaining on high label-uncertainty examples.
    Abstain(AbstainArgs),
    /// Compare the greedy estimate with the closed form on a Gaussian mixture.
    GaussValidate(GaussValidateArgs),
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|e| format!("bad numerator: {e}"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|e| format!("bad denominator: {e}"))?;
            num / den
        }
        None => s.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not a finite number"))
    }
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    s.parse::<Metric>().map_err(|e| e.to_string())
}

/// Comma list of reals or a `start:stop:step` range.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        parse_grid(s).map(Grid)
    }
}

/// `a,b,c` or `start:stop:step`.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let start = parse_real(parts[0])?;
        let stop = parse_real(parts[1])?;
        let step = parse_real(parts[2])?;
        if !(step > 0.0) || stop < start {
            return Err(format!("bad range `{s}`"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect());
    }
    s.split(',').map(parse_real).collect()
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Point file (`.csv` for CSV, anything else for the binary format).
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub softlabels: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long, value_parser = parse_metric, default_value = "l2")]
    pub metric: Metric,
    /// Decimal or fraction literal such as `8/255`.
    #[arg(long, value_parser = parse_real)]
    pub epsilon: f64,
    #[arg(long, value_parser = parse_real, default_value = "0.05")]
    pub alpha: f64,
    #[arg(long, value_parser = parse_real, default_value = "0")]
    pub gamma: f64,
    /// Number of balls.
    #[arg(long = "T", default_value_t = 5)]
    #[serde(rename = "T")]
    pub balls: usize,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Trial i splits with seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "mem-cap-mb", default_value_t = 512)]
    pub mem_cap_mb: usize,
}

/// Flags that only affect how work is executed; never echoed into reports.
#[derive(Debug, Clone, Args)]
pub struct ExecArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Comma list or `start:stop:step`.
    #[arg(long, default_value = "0.01:0.15:0.01")]
    pub alphas: Grid,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct LuStatsArgs {
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub softlabels: PathBuf,
    /// Number of equal-width bins over [0, 2].
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Also write the per-example `id,lu` CSV here.
    #[arg(long = "per-example")]
    pub per_example: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AbstainArgs {
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub softlabels: PathBuf,
    /// CSV `id,clean_correct,robust_correct`.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Abstain on examples with label uncertainty above this value.
    #[arg(long, value_parser = parse_real, default_value = "0.7")]
    pub tau: f64,
    #[arg(long, default_value = "lowest_first")]
    pub order: String,
    #[arg(long, default_value = "0.1:1:0.1")]
    pub grid: Grid,
    /// Also write the coverage curve CSV here.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GaussValidateArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Length of theta, which points along the first axis.
    #[arg(long = "theta-norm", value_parser = parse_real, default_value = "1")]
    pub theta_norm: f64,
    #[arg(long, value_parser = parse_real, default_value = "1")]
    pub sigma: f64,
    #[arg(long, value_parser = parse_real, default_value = "0.05")]
    pub alpha: f64,
    #[arg(long, value_parser = parse_real, default_value = "0.5")]
    pub epsilon: f64,
    /// Samples for the greedy search (split 50/50).
    #[arg(long, default_value_t = 4000)]
    pub samples: usize,
    /// Samples for the Monte-Carlo halfspace check.
    #[arg(long = "mc-samples", default_value_t = 100_000)]
    pub mc_samples: usize,
    #[arg(long = "T", default_value_t = 1)]
    #[serde(rename = "T")]
    pub balls: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "mem-cap-mb", default_value_t = 512)]
    pub mem_cap_mb: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let payload = serde_json::json!({
                "error": e.kind(),
                "exit_code": e.exit_code(),
                "message": e.to_string(),
            });
            eprintln!("{payload}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Estimate(a) => with_threads(a.exec.threads, || cmd_estimate(&a)),
        Command::Sweep(a) => with_threads(a.exec.threads, || cmd_sweep(&a)),
        Command::LuStats(a) => cmd_lu_stats(&a),
        Command::Abstain(a) => cmd_abstain(&a),
        Command::GaussValidate(a) => with_threads(a.threads, || cmd_gauss_validate(&a)),
    }
}

fn with_threads<F: FnOnce() -> Result<i32> + Send>(threads: usize, f: F) -> Result<i32> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn search_params(s: &SearchArgs) -> Result<SearchParams> {
    let p = SearchParams {
        alpha: s.alpha,
        gamma: s.gamma,
        epsilon: s.epsilon,
        balls: s.balls,
        metric: s.metric,
    };
    p.validate()?;
    if s.trials == 0 {
        return Err(Error::Config("--trials must be at least 1".into()));
    }
    Ok(p)
}

fn load_data(d: &DataArgs, gamma: f64) -> Result<Dataset> {
    if gamma > 0.0 && d.softlabels.is_none() {
        return Err(Error::Config(format!(
            "--gamma {gamma} requires --softlabels"
        )));
    }
    Dataset::load(
        &d.points,
        PointFormat::from_path(&d.points),
        &d.labels,
        d.softlabels.as_deref(),
    )
}

fn options(mem_cap_mb: usize) -> SearchOptions {
    SearchOptions {
        mem_cap_bytes: Some(mem_cap_mb.saturating_mul(1 << 20)),
    }
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    format_version: &'static str,
    command: &'static str,
    config: &'a C,
    #[serde(flatten)]
    result: &'a R,
}

#[derive(Serialize)]
struct EstimateConfig<'a> {
    #[serde(flatten)]
    data: &'a DataArgs,
    #[serde(flatten)]
    search: &'a SearchArgs,
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<i32> {
    let params = search_params(&a.search)?;
    let data = load_data(&a.data, params.gamma)?;
    let report = repeated_trials(
        &data,
        params,
        a.search.trials,
        a.search.seed,
        options(a.search.mem_cap_mb),
    )?;
    let env = Envelope {
        format_version: FORMAT_VERSION,
        command: "estimate",
        config: &EstimateConfig {
            data: &a.data,
            search: &a.search,
        },
        result: &report,
    };
    emit(a.exec.out.as_deref(), &to_json(&env)?)?;
    Ok(0)
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let params = search_params(&a.search)?;
    let data = load_data(&a.data, params.gamma)?;
    let entries = alpha_sweep(
        &data,
        params,
        &a.alphas.0,
        a.search.trials,
        a.search.seed,
        options(a.search.mem_cap_mb),
    );
    emit(a.exec.out.as_deref(), &sweep_csv(&entries, params.gamma))?;
    Ok(0)
}

/// Labels and soft labels without coordinates; the points are a
/// placeholder column that nothing downstream reads.
fn load_labeled(labels: &Path, soft: &Path) -> Result<Dataset> {
    let (ids, labels) = crate::dataset::load_labels(labels)?;
    let (soft_ids, soft) = crate::dataset::load_soft_labels(soft)?;
    let points = PointSet::new(ids.len().max(1), 1, vec![0.0; ids.len().max(1)])?;
    let labels = LabelSet::new(
        labels.as_slice().to_vec(),
        soft.classes().max(labels.classes()),
    )?;
    let soft = if soft_ids == ids {
        soft
    } else {
        let index: HashMap<&str, usize> = soft_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut rows = Vec::with_capacity(ids.len() * soft.classes());
        for id in &ids {
            let j = index
                .get(id.as_str())
                .ok_or_else(|| Error::format("soft labels", format!("no row for id `{id}`")))?;
            rows.extend_from_slice(soft.row(*j));
        }
        crate::dataset::SoftLabelSet::new(soft.classes(), rows)?
    };
    Dataset::new(points, labels, Some(soft), ids)
}

pub fn cmd_lu_stats(a: &LuStatsArgs) -> Result<i32> {
    let d = load_labeled(&a.labels, &a.softlabels)?;
    let edges = Histogram::uniform(0.0, 2.0, a.bins, &[])?.bin_edges;
    let stats = lu_stats(&d, edges)?;
    if let Some(p) = &a.per_example {
        emit(Some(p), &lu_csv(&stats.rows))?;
    }
    let env = Envelope {
        format_version: FORMAT_VERSION,
        command: "lu-stats",
        config: a,
        result: &stats,
    };
    emit(a.out.as_deref(), &to_json(&env)?)?;
    Ok(0)
}

pub fn cmd_abstain(a: &AbstainArgs) -> Result<i32> {
    let order: CoverageOrder = a.order.parse()?;
    let d = load_labeled(&a.labels, &a.softlabels)?;
    let stats = lu_stats(&d, vec![0.0, 2.0])?;
    let known: HashSet<&str> = d.ids().iter().map(String::as_str).collect();
    let records = load_predictions(&a.predictions, &known)?;
    let lu: HashMap<String, f64> = stats.rows.into_iter().collect();
    let report = abstain_at_threshold(&records, &lu, a.tau)?;
    let curve = coverage_curve(&records, &lu, order, &a.grid.0)?;
    if let Some(p) = &a.curve {
        emit(Some(p), &curve_csv(&curve))?;
    }
    #[derive(Serialize)]
    struct Out<'a> {
        report: &'a crate::abstain::AbstainReport,
        curve: &'a [crate::abstain::CurvePoint],
    }
    let env = Envelope {
        format_version: FORMAT_VERSION,
        command: "abstain",
        config: a,
        result: &Out {
            report: &report,
            curve: &curve,
        },
    };
    emit(a.out.as_deref(), &to_json(&env)?)?;
    Ok(0)
}

/// Tolerance between the closed form and the Monte-Carlo halfspace measure.
pub const MONTE_CARLO_TOLERANCE: f64 = 0.01;

#[derive(Debug, Serialize)]
pub struct GaussValidation {
    pub analytic: f64,
    pub halfspace_offset: f64,
    pub monte_carlo: f64,
    pub monte_carlo_error: f64,
    pub monte_carlo_tolerance: f64,
    pub monte_carlo_ok: bool,
    pub greedy_train_risk: f64,
    pub greedy_train_expansion: f64,
    pub greedy_test_expansion: f64,
    /// `analytic - 3 sqrt(h (1 - h) / m_test)`.
    pub greedy_lower_bound: f64,
    pub greedy_ok: bool,
    pub passed: bool,
}

pub fn gauss_validation(a: &GaussValidateArgs) -> Result<GaussValidation> {
    if a.dim == 0 {
        return Err(Error::Config("--dim must be at least 1".into()));
    }
    let mut theta = vec![0.0; a.dim];
    theta[0] = a.theta_norm;
    let model = GaussMixModel::new(theta, a.sigma)?;
    let analytic = gaussmix::analytic_concentration(&model, a.alpha, a.epsilon)?;
    let halfspace = gaussmix::optimal_halfspace(&model, a.alpha)?;

    let mc = gaussmix::sample(&model, a.mc_samples, a.seed ^ 0x6d63, SoftLabelMode::OneHot)?;
    let monte_carlo =
        gaussmix::empirical_halfspace_expansion(&model, halfspace, mc.points(), a.epsilon);
    let monte_carlo_error = (monte_carlo - analytic).abs();

    let data = gaussmix::sample(&model, a.samples, a.seed, SoftLabelMode::OneHot)?;
    let (train, test) = split(&data, TRAIN_FRACTION, a.seed)?;
    let params = SearchParams {
        alpha: a.alpha,
        gamma: 0.0,
        epsilon: a.epsilon,
        balls: a.balls,
        metric: Metric::L2,
    };
    let outcome = Searcher::new(&train, params, options(a.mem_cap_mb))?.run()?;
    let on_train = evaluate_region(&outcome.region, &train, a.epsilon)?;
    let on_test = evaluate_region(&outcome.region, &test, a.epsilon)?;
    let greedy_lower_bound =
        analytic - 3.0 * (analytic * (1.0 - analytic) / test.len() as f64).sqrt();
    let monte_carlo_ok = monte_carlo_error <= MONTE_CARLO_TOLERANCE;
    let greedy_ok = on_test.adv_risk >= greedy_lower_bound;
    Ok(GaussValidation {
        analytic,
        halfspace_offset: halfspace.offset,
        monte_carlo,
        monte_carlo_error,
        monte_carlo_tolerance: MONTE_CARLO_TOLERANCE,
        monte_carlo_ok,
        greedy_train_risk: on_train.risk,
        greedy_train_expansion: on_train.adv_risk,
        greedy_test_expansion: on_test.adv_risk,
        greedy_lower_bound,
        greedy_ok,
        passed: monte_carlo_ok && greedy_ok,
    })
}

pub fn cmd_gauss_validate(a: &GaussValidateArgs) -> Result<i32> {
    let v = gauss_validation(a)?;
    let env = Envelope {
        format_version: FORMAT_VERSION,
        command: "gauss-validate",
        config: a,
        result: &v,
    };
    emit(a.out.as_deref(), &to_json(&env)?)?;
    Ok(if v.passed { 0 } else { EXIT_VALIDATION_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_literals() {
        assert_eq!(parse_real("8/255").unwrap(), 8.0 / 255.0);
        assert_eq!(parse_real("0.5").unwrap(), 0.5);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("abc").is_err());
    }

    #[test]
    fn alpha_grid() {
        let g = parse_grid("0.01:0.15:0.01").unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[14], 0.15);
        assert_eq!(g[6], 0.07);
        assert_eq!(parse_grid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["luconc", "estimate"]), 2);
        assert_eq!(run(["luconc", "nonsense"]), 2);
    }
}
