//! The `fakebm` command line: JSON config plus flag overrides, one
//! subcommand per experiment, deterministic artifacts in `output_dir`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analysis::{
    convex_order_check, coupling_experiment, empirical_cdf_points, flux_estimate, grid, ks_marginal_test,
    martingale_bin_test, CouplingParams, FluxParams, KSReport, Status,
};
use crate::continuous_sim::{exp_driver, sample_many, Driver, QuerySample};
use crate::densities::MarginalFamily;
use crate::discrete_chain::{verify_marginals, Mode};
use crate::error::{Error, Result};
use crate::intervals::{parse_pairs, IntervalSystem};
use crate::output::{write_csv, write_json, Cell};
use crate::scalar::Backend;

#[derive(Debug, Parser)]
#[command(name = "fakebm", version, about = "Fake Brownian motion: exact discrete checks and Monte Carlo experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the exact law of the discrete chain and compare to the lazy walk.
    VerifyDiscrete(Overrides),
    /// Sample fake paths at query times.
    Simulate(Overrides),
    /// KS test of simulated marginals against N(0, 1 + t).
    Marginals(Overrides),
    /// Quantile-binned test of E[X_t - X_s | X_s] = 0.
    Martingale(Overrides),
    /// Coupling experiment showing the strong Markov property fails.
    StrongMarkov(Overrides),
    /// Jump rates across a gap against the boundary densities.
    Flux(Overrides),
    /// Potential-function check of the convex order premise.
    ConvexOrder(Overrides),
    /// The exponential variant on a checked window.
    ExpVariant(Overrides),
}

/// Flags shared by all subcommands; each overrides the same key in `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Interval list as JSON, e.g. '[[0.1,0.4],[0.6,0.9]]'.
    #[arg(long)]
    pub intervals: Option<String>,
    #[arg(long)]
    pub cantor_depth: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub backend: Option<Backend>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Comma-separated query times.
    #[arg(long, value_delimiter = ',')]
    pub t_queries: Option<Vec<f64>>,
    #[arg(long)]
    pub n_paths: Option<u64>,
    #[arg(long)]
    pub n_pairs: Option<u64>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub t_offset: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub n_bins: Option<usize>,
    #[arg(long)]
    pub drift: Option<f64>,
    #[arg(long)]
    pub window: Option<f64>,
}

impl Overrides {
    fn merged(&self) -> Result<Value> {
        let mut map = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                match serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))? {
                    Value::Object(m) => m,
                    _ => return Err(Error::Config("config must be a JSON object".into())),
                }
            }
            None => Map::new(),
        };
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        put("seed", self.seed.map(Value::from));
        put("output_dir", self.output_dir.as_ref().map(|p| Value::from(p.to_string_lossy().into_owned())));
        if let Some(text) = &self.intervals {
            let v: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("--intervals: {e}")))?;
            put("intervals", Some(v));
        }
        put("cantor_depth", self.cantor_depth.map(Value::from));
        put("m", self.m.map(Value::from));
        put("steps", self.steps.map(Value::from));
        put("backend", self.backend.map(|b| Value::from(b.to_string())));
        put("dt", self.dt.map(Value::from));
        put("t_queries", self.t_queries.clone().map(Value::from));
        put("n_paths", self.n_paths.map(Value::from));
        put("n_pairs", self.n_pairs.map(Value::from));
        put("depth", self.depth.map(Value::from));
        put("t_offset", self.t_offset.map(Value::from));
        put("horizon", self.horizon.map(Value::from));
        put("s", self.s.map(Value::from));
        put("t", self.t.map(Value::from));
        put("n_bins", self.n_bins.map(Value::from));
        put("drift", self.drift.map(Value::from));
        put("window", self.window.map(Value::from));
        Ok(Value::Object(map))
    }

    fn parse<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.merged()?).map_err(|e| Error::Config(e.to_string()))
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("fakebm-out")
}

/// Interval system from an explicit list or a fat Cantor depth, on `domain`
/// (default `(0, 1)`).
fn build_system(intervals: &Option<Value>, cantor_depth: Option<u32>, domain: Option<(f64, f64)>) -> Result<IntervalSystem> {
    let (lo, hi) = domain.unwrap_or((0.0, 1.0));
    match (intervals, cantor_depth) {
        (Some(_), Some(_)) => Err(Error::Config("give either intervals or cantor_depth, not both".into())),
        (Some(v), None) => IntervalSystem::with_domain(lo, hi, &parse_pairs(v)?),
        (None, Some(d)) => IntervalSystem::fat_cantor_in(lo, hi, d),
        (None, None) => Err(Error::Config("missing intervals or cantor_depth".into())),
    }
}

/// The Gaussian switch law needs lazy sites in `[-1, 1]`.
fn check_lazy_range(system: &IntervalSystem) -> Result<()> {
    let (lo, hi) = system.domain();
    if lo < -1.0 || hi > 1.0 {
        return Err(Error::Config(format!("domain ({lo}, {hi}) must lie in [-1, 1] for the Gaussian switch law")));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {x}")))
    }
}

fn at_least(name: &str, n: u64, min: u64) -> Result<()> {
    if n >= min {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be at least {min}, got {n}")))
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Lazy => "lazy",
        Mode::Busy => "busy",
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyDiscreteConfig {
    intervals: Option<Value>,
    cantor_depth: Option<u32>,
    domain: Option<(f64, f64)>,
    m: u32,
    steps: u64,
    #[serde(default = "rational")]
    backend: Backend,
    seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

fn rational() -> Backend {
    Backend::Rational
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathsConfig {
    intervals: Option<Value>,
    cantor_depth: Option<u32>,
    domain: Option<(f64, f64)>,
    #[serde(default = "default_dt")]
    dt: f64,
    t_queries: Option<Vec<f64>>,
    n_paths: u64,
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    /// KS acceptance threshold; defaults to the 5% critical value.
    ks_threshold: Option<f64>,
}

fn default_dt() -> f64 {
    1e-4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MartingaleConfig {
    intervals: Option<Value>,
    cantor_depth: Option<u32>,
    domain: Option<(f64, f64)>,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "half")]
    s: f64,
    #[serde(default = "one")]
    t: f64,
    #[serde(default = "twenty")]
    n_bins: usize,
    n_paths: u64,
    seed: u64,
    /// Added drift `drift · t`, for negative controls.
    #[serde(default)]
    drift: f64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn twenty() -> usize {
    20
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrongMarkovConfig {
    #[serde(default = "six")]
    depth: u32,
    #[serde(default = "tenth")]
    t_offset: f64,
    n_pairs: u64,
    seed: u64,
    #[serde(default = "coupling_dt")]
    dt: f64,
    #[serde(default = "coupling_horizon")]
    horizon: f64,
    #[serde(default = "min_per_class")]
    min_per_class: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

fn six() -> u32 {
    6
}
fn tenth() -> f64 {
    0.1
}
pub const COUPLING_DT: f64 = 1e-3;
pub const COUPLING_HORIZON: f64 = 5.0;
fn coupling_dt() -> f64 {
    COUPLING_DT
}
fn coupling_horizon() -> f64 {
    COUPLING_HORIZON
}
fn min_per_class() -> u64 {
    200
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FluxConfig {
    intervals: Option<Value>,
    cantor_depth: Option<u32>,
    domain: Option<(f64, f64)>,
    /// Index of the gap among the gaps between bounded intervals (0-based).
    #[serde(default)]
    gap: usize,
    #[serde(default = "one")]
    t: f64,
    #[serde(default = "tenth")]
    window: f64,
    #[serde(default = "default_dt")]
    dt: f64,
    n_paths: u64,
    seed: u64,
    #[serde(default = "flux_tol")]
    tolerance: f64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

fn flux_tol() -> f64 {
    0.15
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvexOrderConfig {
    #[serde(default = "three")]
    depth: u32,
    #[serde(default = "default_t_grid")]
    t_grid: Vec<f64>,
    #[serde(default = "x_lo")]
    x_min: f64,
    #[serde(default = "x_hi")]
    x_max: f64,
    #[serde(default = "x_step")]
    x_step: f64,
    seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

fn three() -> u32 {
    3
}
fn default_t_grid() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0]
}
fn x_lo() -> f64 {
    -4.0
}
fn x_hi() -> f64 {
    4.0
}
fn x_step() -> f64 {
    0.05
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpVariantConfig {
    /// `[a, b, t1, t2]`.
    exp_window: (f64, f64, f64, f64),
    intervals: Value,
    #[serde(default = "exp_dt")]
    dt: f64,
    t_queries: Option<Vec<f64>>,
    n_paths: u64,
    seed: u64,
    ks_threshold: Option<f64>,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

fn exp_dt() -> f64 {
    1e-3
}

/// Outcome of a subcommand, mapped to the exit code by `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail | Outcome::Inconclusive => 1,
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    status: &'a str,
    config: Value,
    #[serde(flatten)]
    body: T,
}

fn status_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "fail",
        Outcome::Inconclusive => "inconclusive",
    }
}

fn emit<T: Serialize>(dir: &Path, command: &str, outcome: Outcome, config: Value, body: T) -> Result<Outcome> {
    let env = Envelope { command, status: status_name(outcome), config, body };
    write_json(&dir.join("report.json"), &env)?;
    Ok(outcome)
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Run one parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::VerifyDiscrete(o) => verify_discrete(o),
        Command::Simulate(o) => simulate(o),
        Command::Marginals(o) => marginals(o),
        Command::Martingale(o) => martingale(o),
        Command::StrongMarkov(o) => strong_markov(o),
        Command::Flux(o) => flux(o),
        Command::ConvexOrder(o) => convex_order(o),
        Command::ExpVariant(o) => exp_variant(o),
    }
}

fn verify_discrete(o: &Overrides) -> Result<Outcome> {
    let cfg: VerifyDiscreteConfig = o.parse()?;
    let _ = cfg.seed;
    if cfg.m == 0 {
        return Err(Error::Config("m must be positive".into()));
    }
    let system = build_system(&cfg.intervals, cfg.cantor_depth, cfg.domain)?;
    // a window of m + steps sites holds every reachable state
    let lattice = system.lattice(cfg.m, cfg.m as i64 + cfg.steps as i64)?;
    prepare(&cfg.output_dir)?;
    let report = match cfg.backend {
        Backend::Rational => verify_marginals::<BigRational>(&lattice, system.len(), cfg.steps),
        Backend::Float => verify_marginals::<f64>(&lattice, system.len(), cfg.steps),
    };
    let outcome = Outcome::from_pass(report.pass);
    emit(&cfg.output_dir, "verify-discrete", outcome, o.merged()?, report)
}

fn queries_or(q: &Option<Vec<f64>>, default: &[f64]) -> Result<Vec<f64>> {
    let mut q = q.clone().unwrap_or_else(|| default.to_vec());
    if q.is_empty() {
        return Err(Error::Config("t_queries is empty".into()));
    }
    if q.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Config("query times must be non-negative".into()));
    }
    q.sort_by(f64::total_cmp);
    q.dedup();
    Ok(q)
}

fn gaussian_paths(cfg: &PathsConfig, default_q: &[f64]) -> Result<(IntervalSystem, Vec<f64>, Vec<QuerySample>)> {
    positive("dt", cfg.dt)?;
    at_least("n_paths", cfg.n_paths, 1)?;
    let system = build_system(&cfg.intervals, cfg.cantor_depth, cfg.domain)?;
    check_lazy_range(&system)?;
    let q = queries_or(&cfg.t_queries, default_q)?;
    let samples = sample_many(&system, Driver::Brownian, cfg.dt, cfg.seed, cfg.n_paths, &q)?;
    Ok((system, q, samples))
}

#[derive(Serialize)]
struct QuerySummary {
    t_query: f64,
    mean: f64,
    variance: f64,
    lazy_fraction: f64,
}

fn summarize(q: &[f64], samples: &[QuerySample]) -> Vec<QuerySummary> {
    let n = samples.len() as f64;
    q.iter()
        .enumerate()
        .map(|(i, &t)| {
            let mean = samples.iter().map(|s| s.values[i]).sum::<f64>() / n;
            let var = samples.iter().map(|s| (s.values[i] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let lazy = samples.iter().filter(|s| s.modes[i] == Mode::Lazy).count() as f64 / n;
            QuerySummary { t_query: t, mean, variance: var, lazy_fraction: lazy }
        })
        .collect()
}

/// Paths whose driver ran past `3 (1 + t)` for the last query `t`, where a
/// stored path of that length would have exhausted its clock.
fn extension_count(samples: &[QuerySample], q: &[f64], dt: f64) -> u64 {
    let last = q.last().copied().unwrap_or(0.0);
    let nominal = (3.0 * (1.0 + last) / dt).round() as u64;
    samples.iter().filter(|s| s.driver_steps > nominal).count() as u64
}

fn simulate(o: &Overrides) -> Result<Outcome> {
    let cfg: PathsConfig = o.parse()?;
    let (_, q, samples) = gaussian_paths(&cfg, &[1.0])?;
    prepare(&cfg.output_dir)?;
    let rows = samples.iter().enumerate().flat_map(|(id, s)| {
        q.iter().enumerate().map(move |(i, &t)| {
            vec![Cell::from(id), Cell::from(t), Cell::from(s.values[i]), Cell::from(mode_name(s.modes[i]))]
        })
    });
    write_csv(&cfg.output_dir.join("simulate.csv"), &["path_id", "t_query", "X_value", "mode_at_t"], rows)?;
    #[derive(Serialize)]
    struct Body {
        n_paths: u64,
        dt: f64,
        paths_extended: u64,
        queries: Vec<QuerySummary>,
    }
    let body = Body {
        n_paths: cfg.n_paths,
        dt: cfg.dt,
        paths_extended: extension_count(&samples, &q, cfg.dt),
        queries: summarize(&q, &samples),
    };
    emit(&cfg.output_dir, "simulate", Outcome::Pass, o.merged()?, body)
}

fn cdf_file(dir: &Path, k: usize, single: bool) -> PathBuf {
    if single {
        dir.join("empirical_cdf.csv")
    } else {
        dir.join(format!("empirical_cdf_{k}.csv"))
    }
}

fn write_cdf(path: &Path, values: &[f64], t: f64, family: MarginalFamily) -> Result<()> {
    let pts = empirical_cdf_points(values, t, family, 200);
    write_csv(
        path,
        &["x", "empirical", "theoretical"],
        pts.into_iter().map(|(x, e, f)| vec![x.into(), e.into(), f.into()]),
    )
}

fn ks_verdict(tests: &mut [KSReport], threshold: Option<f64>) -> bool {
    let mut all = true;
    for r in tests.iter_mut() {
        if let Some(th) = threshold {
            r.pass = r.ks_statistic <= th;
        }
        all &= r.pass;
    }
    all
}

fn marginals(o: &Overrides) -> Result<Outcome> {
    let cfg: PathsConfig = o.parse()?;
    let (_, q, samples) = gaussian_paths(&cfg, &[0.5, 1.0])?;
    prepare(&cfg.output_dir)?;
    let mut tests = Vec::with_capacity(q.len());
    for (i, &t) in q.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s.values[i]).collect();
        tests.push(ks_marginal_test(&xs, t, MarginalFamily::Gaussian)?);
        write_cdf(&cdf_file(&cfg.output_dir, i, q.len() == 1), &xs, t, MarginalFamily::Gaussian)?;
    }
    let pass = ks_verdict(&mut tests, cfg.ks_threshold);
    let warning = tests.iter().find_map(|r| r.warning.clone());
    #[derive(Serialize)]
    struct Body {
        n_paths: u64,
        dt: f64,
        paths_extended: u64,
        #[serde(skip_serializing_if = "Option::is_none")]
        warning: Option<String>,
        tests: Vec<KSReport>,
    }
    let body = Body {
        n_paths: cfg.n_paths,
        dt: cfg.dt,
        paths_extended: extension_count(&samples, &q, cfg.dt),
        warning,
        tests,
    };
    emit(&cfg.output_dir, "marginals", Outcome::from_pass(pass), o.merged()?, body)
}

fn martingale(o: &Overrides) -> Result<Outcome> {
    let cfg: MartingaleConfig = o.parse()?;
    positive("dt", cfg.dt)?;
    if !(cfg.t > cfg.s && cfg.s >= 0.0) {
        return Err(Error::Config(format!("need 0 <= s < t, got s = {}, t = {}", cfg.s, cfg.t)));
    }
    at_least("n_paths", cfg.n_paths, 1)?;
    let system = build_system(&cfg.intervals, cfg.cantor_depth, cfg.domain)?;
    check_lazy_range(&system)?;
    let samples = sample_many(&system, Driver::Brownian, cfg.dt, cfg.seed, cfg.n_paths, &[cfg.s, cfg.t])?;
    let pairs: Vec<(f64, f64)> = samples
        .iter()
        .map(|p| (p.values[0] + cfg.drift * cfg.s, p.values[1] + cfg.drift * cfg.t))
        .collect();
    let report = martingale_bin_test(&pairs, cfg.s, cfg.t, cfg.n_bins)?;
    prepare(&cfg.output_dir)?;
    write_csv(
        &cfg.output_dir.join("martingale_bins.csv"),
        &["bin_lo", "bin_hi", "mean_increment", "stderr", "n"],
        report
            .bins
            .iter()
            .map(|b| vec![b.bin_lo.into(), b.bin_hi.into(), b.mean_increment.into(), b.stderr.into(), b.n.into()]),
    )?;
    emit(&cfg.output_dir, "martingale", Outcome::from_pass(report.pass), o.merged()?, report)
}

fn strong_markov(o: &Overrides) -> Result<Outcome> {
    let cfg: StrongMarkovConfig = o.parse()?;
    positive("dt", cfg.dt)?;
    positive("horizon", cfg.horizon)?;
    if !(cfg.t_offset >= 0.0) {
        return Err(Error::Config("t_offset must be non-negative".into()));
    }
    let report = coupling_experiment(CouplingParams {
        depth: cfg.depth,
        t_offset: cfg.t_offset,
        n_pairs: cfg.n_pairs,
        seed: cfg.seed,
        dt: cfg.dt,
        horizon: cfg.horizon,
        min_per_class: cfg.min_per_class,
    })?;
    prepare(&cfg.output_dir)?;
    write_csv(
        &cfg.output_dir.join("coupling.csv"),
        &["class", "n", "p_hat", "ci_lo", "ci_hi"],
        [
            vec!["A".into(), report.n_a.into(), report.p_hat_a.into(), report.wilson_ci_a.0.into(), report.wilson_ci_a.1.into()],
            vec!["B".into(), report.n_b.into(), report.p_hat_b.into(), report.wilson_ci_b.0.into(), report.wilson_ci_b.1.into()],
        ],
    )?;
    let outcome = match report.status {
        Status::Pass => Outcome::Pass,
        Status::Fail => Outcome::Fail,
        Status::Inconclusive => Outcome::Inconclusive,
    };
    emit(&cfg.output_dir, "strong-markov", outcome, o.merged()?, report)
}

fn flux(o: &Overrides) -> Result<Outcome> {
    let cfg: FluxConfig = o.parse()?;
    positive("dt", cfg.dt)?;
    positive("window", cfg.window)?;
    at_least("n_paths", cfg.n_paths, 1)?;
    let system = build_system(&cfg.intervals, cfg.cantor_depth, cfg.domain)?;
    check_lazy_range(&system)?;
    let gaps = system.gaps();
    let inner = &gaps[1..gaps.len() - 1];
    let gap = *inner.get(cfg.gap).ok_or_else(|| {
        Error::Config(format!("gap index {} out of range: the system has {} inner gaps", cfg.gap, inner.len()))
    })?;
    let report = flux_estimate(&system, gap, FluxParams { t: cfg.t, window: cfg.window, dt: cfg.dt, n_paths: cfg.n_paths, seed: cfg.seed })?;
    let pass = report.rel_err_in <= cfg.tolerance && report.rel_err_out <= cfg.tolerance;
    prepare(&cfg.output_dir)?;
    emit(&cfg.output_dir, "flux", Outcome::from_pass(pass), o.merged()?, report)
}

fn convex_order(o: &Overrides) -> Result<Outcome> {
    let cfg: ConvexOrderConfig = o.parse()?;
    let _ = cfg.seed;
    positive("x_step", cfg.x_step)?;
    if cfg.x_max < cfg.x_min {
        return Err(Error::Config("x_max must not be below x_min".into()));
    }
    let report = convex_order_check(cfg.depth, &cfg.t_grid, &grid(cfg.x_min, cfg.x_max, cfg.x_step))?;
    prepare(&cfg.output_dir)?;
    emit(&cfg.output_dir, "convex-order", Outcome::from_pass(report.pass), o.merged()?, report)
}

fn exp_variant(o: &Overrides) -> Result<Outcome> {
    let cfg: ExpVariantConfig = o.parse()?;
    positive("dt", cfg.dt)?;
    at_least("n_paths", cfg.n_paths, 1)?;
    let (a, b, t1, t2) = cfg.exp_window;
    let system = IntervalSystem::with_domain(a, b, &parse_pairs(&cfg.intervals)?)?;
    let driver = exp_driver(cfg.exp_window, &system)?;
    let q = queries_or(&cfg.t_queries, &[0.5 * (t1 + t2), t2])?;
    if q.iter().any(|&t| t < t1 || t > t2) {
        return Err(Error::Config(format!("query times must lie in [{t1}, {t2}]")));
    }
    let samples = sample_many(&system, driver, cfg.dt, cfg.seed, cfg.n_paths, &q)?;
    prepare(&cfg.output_dir)?;
    let mut tests = Vec::with_capacity(q.len());
    let mut means = Vec::with_capacity(q.len());
    let mut mean_ok = true;
    for (i, &t) in q.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s.values[i]).collect();
        tests.push(ks_marginal_test(&xs, t, MarginalFamily::Lognormal)?);
        write_cdf(&cdf_file(&cfg.output_dir, i, q.len() == 1), &xs, t, MarginalFamily::Lognormal)?;
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0) / n).sqrt();
        mean_ok &= (mean - 1.0).abs() <= 5.0 * se;
        means.push((t, mean, se));
    }
    let pass = ks_verdict(&mut tests, cfg.ks_threshold) && mean_ok;
    #[derive(Serialize)]
    struct Body {
        n_paths: u64,
        dt: f64,
        all_positive: bool,
        means: Vec<(f64, f64, f64)>,
        tests: Vec<KSReport>,
    }
    let all_positive = samples.iter().all(|s| s.values.iter().all(|&x| x > 0.0));
    let body = Body { n_paths: cfg.n_paths, dt: cfg.dt, all_positive, means, tests };
    emit(&cfg.output_dir, "exp-variant", Outcome::from_pass(pass && all_positive), o.merged()?, body)
}
