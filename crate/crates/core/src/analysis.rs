//! Statistical diagnostics for simulated fake paths.

use rayon::prelude::*;
use serde::Serialize;

use crate::continuous_sim::{Driver, FakeCursor};
use crate::densities::{big_phi, gaussian_density, phi, MarginalFamily};
use crate::discrete_chain::Mode;
use crate::error::{domain, Error, Result};
use crate::intervals::{Interval, IntervalSystem};
use crate::rng::PathSeed;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

/// Below this sample size a KS run is flagged as low power.
pub const KS_LOW_POWER_N: usize = 1000;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct KSReport {
    pub t_query: f64,
    pub n_samples: usize,
    pub ks_statistic: f64,
    pub critical_value_5pct: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Two-sided Kolmogorov–Smirnov test of `samples` against `family` at time `t`.
pub fn ks_marginal_test(samples: &[f64], t: f64, family: MarginalFamily) -> Result<KSReport> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        // values outside the support (e.g. x <= 0 for the lognormal) have cdf 0
        let f = family.cdf(x, t).unwrap_or(0.0);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    let critical = 1.36 / nf.sqrt();
    let warning = (n < KS_LOW_POWER_N)
        .then(|| format!("low power: n = {n} < {KS_LOW_POWER_N}; the 1.36/sqrt(n) critical value is asymptotic"));
    Ok(KSReport { t_query: t, n_samples: n, ks_statistic: d, critical_value_5pct: critical, pass: d <= critical, warning })
}

/// `(x, empirical cdf, theoretical cdf)` at `points` evenly spaced sample quantiles.
pub fn empirical_cdf_points(samples: &[f64], t: f64, family: MarginalFamily, points: usize) -> Vec<(f64, f64, f64)> {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 || points == 0 {
        return Vec::new();
    }
    (0..points)
        .map(|i| {
            let k = ((i as f64 + 0.5) / points as f64 * n as f64) as usize;
            let k = k.min(n - 1);
            let x = xs[k];
            let emp = xs.partition_point(|&y| y <= x) as f64 / n as f64;
            (x, emp, family.cdf(x, t).unwrap_or(0.0))
        })
        .collect()
}

/// Minimum bin size for the martingale test.
pub const MIN_BIN: usize = 30;

#[derive(Debug, Clone, Serialize)]
pub struct BinStat {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub mean_increment: f64,
    pub stderr: f64,
    pub n: usize,
    pub excluded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleReport {
    pub s: f64,
    pub t: f64,
    pub n_samples: usize,
    pub n_bins: usize,
    pub bins: Vec<BinStat>,
    pub excluded_bins: usize,
    pub max_abs_z: f64,
    pub pooled_mean_increment: f64,
    pub pooled_stderr: f64,
    pub pass: bool,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Bin `(X_s, X_t)` pairs by quantiles of `X_s` and test `E[X_t - X_s | bin] = 0`.
///
/// Passes when every bin with at least [`MIN_BIN`] samples, and the pooled
/// increment, lie within four standard errors of zero.
pub fn martingale_bin_test(pairs: &[(f64, f64)], s: f64, t: f64, n_bins: usize) -> Result<MartingaleReport> {
    if pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(t > s) {
        return domain(format!("need t > s, got s = {s}, t = {t}"));
    }
    if n_bins == 0 {
        return domain("need at least one bin");
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let mut bins = Vec::with_capacity(n_bins);
    let mut max_abs_z: f64 = 0.0;
    let mut ok = true;
    for b in 0..n_bins {
        let lo = b * n / n_bins;
        let hi = (b + 1) * n / n_bins;
        let chunk = &sorted[lo..hi];
        if chunk.is_empty() {
            continue;
        }
        let incs: Vec<f64> = chunk.iter().map(|(x, y)| y - x).collect();
        let (mean, se) = mean_and_stderr(&incs);
        let excluded = chunk.len() < MIN_BIN;
        if !excluded {
            let z = if se > 0.0 { mean.abs() / se } else if mean == 0.0 { 0.0 } else { f64::INFINITY };
            max_abs_z = max_abs_z.max(z);
            ok &= z <= 4.0;
        }
        bins.push(BinStat {
            bin_lo: chunk[0].0,
            bin_hi: chunk[chunk.len() - 1].0,
            mean_increment: mean,
            stderr: se,
            n: chunk.len(),
            excluded,
        });
    }
    let incs: Vec<f64> = sorted.iter().map(|(x, y)| y - x).collect();
    let (pooled, pooled_se) = mean_and_stderr(&incs);
    ok &= pooled.abs() <= 4.0 * pooled_se;
    let excluded_bins = bins.iter().filter(|b| b.excluded).count();
    Ok(MartingaleReport {
        s,
        t,
        n_samples: n,
        n_bins,
        bins,
        excluded_bins,
        max_abs_z,
        pooled_mean_increment: pooled,
        pooled_stderr: pooled_se,
        pass: ok && excluded_bins < n_bins,
    })
}

/// `(1, 0)` for a busy jump `left → right` across the gap, `(0, 1)` for the
/// reverse, `(0, 0)` otherwise.
fn crossing(prev: (f64, Mode), next: (f64, Mode), left: f64, right: f64) -> (u64, u64) {
    if prev.1 != Mode::Busy || next.1 != Mode::Busy {
        return (0, 0);
    }
    if prev.0 <= left && next.0 >= right {
        (1, 0)
    } else if prev.0 >= right && next.0 <= left {
        (0, 1)
    } else {
        (0, 0)
    }
}

/// Jumps of a busy path across the gap `(left, right)` on one grid step:
/// `(left → right, right → left)`.
pub fn count_gap_crossings(values: &[f64], modes: &[Mode], left: f64, right: f64) -> (u64, u64) {
    (1..values.len()).fold((0, 0), |acc, k| {
        let c = crossing((values[k - 1], modes[k - 1]), (values[k], modes[k]), left, right);
        (acc.0 + c.0, acc.1 + c.1)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxReport {
    /// Left end of the gap (right end of the interval on its left).
    pub left: f64,
    /// Right end of the gap (left end of the interval on its right).
    pub right: f64,
    pub t: f64,
    pub window: f64,
    pub n_paths: u64,
    pub count_in: u64,
    pub count_out: u64,
    pub rate_in: f64,
    pub rate_out: f64,
    /// Window averages of `p(left, s) / (2 (right - left))` and `p(right, s) / (2 (right - left))`.
    pub expected_in: f64,
    pub expected_out: f64,
    pub ci_in: (f64, f64),
    pub ci_out: (f64, f64),
    pub rel_err_in: f64,
    pub rel_err_out: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Average of `f` over `[a, b]` by composite Simpson.
fn window_average(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let n = 64;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0 / (b - a)
}

/// Settings for [`flux_estimate`].
#[derive(Debug, Clone, Copy)]
pub struct FluxParams {
    pub t: f64,
    pub window: f64,
    pub dt: f64,
    pub n_paths: u64,
    pub seed: u64,
}

/// Rates of busy jumps across `gap` during `[t, t + window]`, per unit time.
pub fn flux_estimate(system: &IntervalSystem, gap: Interval, params: FluxParams) -> Result<FluxReport> {
    let FluxParams { t, window, dt, n_paths, seed } = params;
    if !(window >= 10.0 * dt) {
        return domain(format!("flux window {window} must be much longer than dt = {dt}"));
    }
    if n_paths == 0 {
        return Err(Error::EmptySample);
    }
    let k0 = (t / dt).round() as u64;
    let k1 = ((t + window) / dt).round() as u64;
    let counts: Vec<(u64, u64)> = (0..n_paths)
        .into_par_iter()
        .map(|i| -> Result<(u64, u64)> {
            let mut cur = FakeCursor::new(system, Driver::Brownian, dt, PathSeed::new(seed, i))?;
            let mut prev = cur.at(k0);
            let mut c = (0, 0);
            for k in k0 + 1..=k1 {
                let next = cur.at(k);
                let d = crossing(prev, next, gap.lo, gap.hi);
                c = (c.0 + d.0, c.1 + d.1);
                prev = next;
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let (count_in, count_out) = counts.iter().fold((0, 0), |a, c| (a.0 + c.0, a.1 + c.1));
    let exposure = n_paths as f64 * (k1 - k0) as f64 * dt;
    let width = gap.len();
    let expected = |x: f64| window_average(|s| gaussian_density(x, s).unwrap_or(0.0) / (2.0 * width), t, t + window);
    let (expected_in, expected_out) = (expected(gap.lo), expected(gap.hi));
    // Poisson-ish counts: normal interval on the count
    let ci = |c: u64| {
        let c = c as f64;
        (((c - Z99 * c.sqrt()).max(0.0)) / exposure, (c + Z99 * c.sqrt().max(1.0)) / exposure)
    };
    let rate_in = count_in as f64 / exposure;
    let rate_out = count_out as f64 / exposure;
    let warning = (count_in == 0 || count_out == 0).then(|| "no jumps observed on one side; rates are unreliable".to_string());
    Ok(FluxReport {
        left: gap.lo,
        right: gap.hi,
        t,
        window,
        n_paths,
        count_in,
        count_out,
        rate_in,
        rate_out,
        expected_in,
        expected_out,
        ci_in: ci(count_in),
        ci_out: ci(count_out),
        rel_err_in: (rate_in - expected_in).abs() / expected_in,
        rel_err_out: (rate_out - expected_out).abs() / expected_out,
        warning,
    })
}

/// Settings for [`coupling_experiment`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CouplingParams {
    pub depth: u32,
    pub t_offset: f64,
    pub n_pairs: u64,
    pub seed: u64,
    pub dt: f64,
    /// Pairs that have not crossed by this time are tallied as unmet.
    pub horizon: f64,
    /// Classified meetings required in each class for a verdict.
    pub min_per_class: u64,
}

/// Smallest pair count the experiment accepts.
pub const MIN_PAIRS: u64 = 10_000;
/// Separation level for the two conditional probabilities.
pub const COUPLING_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingReport {
    pub params: CouplingParams,
    pub n_pairs: u64,
    pub n_meetings: u64,
    #[serde(rename = "n_A")]
    pub n_a: u64,
    #[serde(rename = "n_B")]
    pub n_b: u64,
    /// Pairs in which both processes were busy before any crossing.
    pub n_both_busy: u64,
    pub n_both_lazy: u64,
    /// Pairs with a lazy member that did not cross before the horizon.
    pub n_unmet: u64,
    #[serde(rename = "hits_A")]
    pub hits_a: u64,
    #[serde(rename = "hits_B")]
    pub hits_b: u64,
    #[serde(rename = "p_hat_A")]
    pub p_hat_a: f64,
    #[serde(rename = "p_hat_B")]
    pub p_hat_b: f64,
    #[serde(rename = "wilson_ci_A")]
    pub wilson_ci_a: (f64, f64),
    #[serde(rename = "wilson_ci_B")]
    pub wilson_ci_b: (f64, f64),
    /// `|n_A - n_B| / sqrt(n_A + n_B)`.
    pub symmetry_z: f64,
    /// Carried by the report envelope.
    #[serde(skip)]
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    A(bool),
    B(bool),
    BothBusy,
    BothLazy,
    Unmet,
}

fn run_pair(system: &IntervalSystem, p: &CouplingParams, i: u64) -> Result<Outcome> {
    let mut x = FakeCursor::new(system, Driver::Brownian, p.dt, PathSeed::new(p.seed, 2 * i))?;
    let mut y = FakeCursor::new(system, Driver::Brownian, p.dt, PathSeed::new(p.seed, 2 * i + 1))?;
    let steps = (p.horizon / p.dt).round() as u64;
    let offset = (p.t_offset / p.dt).round() as u64;
    let (x0, mx0) = x.at(0);
    let (y0, my0) = y.at(0);
    if mx0 == Mode::Busy && my0 == Mode::Busy {
        return Ok(Outcome::BothBusy);
    }
    let mut side = (x0 - y0).signum();
    for k in 1..=steps {
        let (xv, mx) = x.at(k);
        let (yv, my) = y.at(k);
        let now = (xv - yv).signum();
        let met = xv == yv || now != side;
        side = now;
        if !met {
            if mx == Mode::Busy && my == Mode::Busy {
                return Ok(Outcome::BothBusy);
            }
            continue;
        }
        return Ok(match (mx, my) {
            (Mode::Busy, Mode::Busy) => Outcome::BothBusy,
            (Mode::Lazy, Mode::Lazy) => Outcome::BothLazy,
            (Mode::Busy, Mode::Lazy) => {
                // with no offset the meeting point is the lazy partner's position
                let later = if offset == 0 { yv } else { x.at(k + offset).0 };
                Outcome::A(system.contains_c(later))
            }
            (Mode::Lazy, Mode::Busy) => {
                let later = if offset == 0 { xv } else { x.at(k + offset).0 };
                Outcome::B(system.contains_c(later))
            }
        });
    }
    Ok(Outcome::Unmet)
}

/// Independent pairs on the depth-`d` fat Cantor system, classified at their
/// first crossing by which member is busy, then scored by whether the first
/// member sits in `C` a time `t_offset` later.
pub fn coupling_experiment(params: CouplingParams) -> Result<CouplingReport> {
    if !(params.dt > 0.0 && params.horizon > params.dt && params.t_offset >= 0.0) {
        return domain("coupling needs dt > 0, horizon > dt and t_offset >= 0");
    }
    let system = IntervalSystem::fat_cantor(params.depth)?;
    let outcomes: Vec<Outcome> = (0..params.n_pairs)
        .into_par_iter()
        .map(|i| run_pair(&system, &params, i))
        .collect::<Result<_>>()?;
    let mut r = CouplingReport {
        params,
        n_pairs: params.n_pairs,
        n_meetings: 0,
        n_a: 0,
        n_b: 0,
        n_both_busy: 0,
        n_both_lazy: 0,
        n_unmet: 0,
        hits_a: 0,
        hits_b: 0,
        p_hat_a: f64::NAN,
        p_hat_b: f64::NAN,
        wilson_ci_a: (0.0, 1.0),
        wilson_ci_b: (0.0, 1.0),
        symmetry_z: 0.0,
        status: Status::Inconclusive,
        reason: None,
    };
    for o in outcomes {
        match o {
            Outcome::A(hit) => {
                r.n_a += 1;
                r.hits_a += hit as u64;
            }
            Outcome::B(hit) => {
                r.n_b += 1;
                r.hits_b += hit as u64;
            }
            Outcome::BothBusy => r.n_both_busy += 1,
            Outcome::BothLazy => r.n_both_lazy += 1,
            Outcome::Unmet => r.n_unmet += 1,
        }
    }
    r.n_meetings = r.n_a + r.n_b + r.n_both_lazy;
    if r.n_a > 0 {
        r.p_hat_a = r.hits_a as f64 / r.n_a as f64;
    }
    if r.n_b > 0 {
        r.p_hat_b = r.hits_b as f64 / r.n_b as f64;
    }
    r.wilson_ci_a = wilson_interval(r.hits_a, r.n_a, Z99);
    r.wilson_ci_b = wilson_interval(r.hits_b, r.n_b, Z99);
    let classified = r.n_a + r.n_b;
    if classified > 0 {
        r.symmetry_z = (r.n_a as f64 - r.n_b as f64).abs() / (classified as f64).sqrt();
    }
    if params.n_pairs < MIN_PAIRS {
        r.reason = Some(format!("n_pairs = {} is below the minimum {MIN_PAIRS}", params.n_pairs));
    } else if r.n_a < params.min_per_class || r.n_b < params.min_per_class {
        r.reason = Some(format!(
            "too few classified meetings: n_A = {}, n_B = {}, need {} each",
            r.n_a, r.n_b, params.min_per_class
        ));
    } else {
        let separated = r.wilson_ci_a.1 <= COUPLING_THRESHOLD
            && r.wilson_ci_b.0 >= COUPLING_THRESHOLD
            && r.wilson_ci_a.1 < r.wilson_ci_b.0;
        r.status = if separated { Status::Pass } else { Status::Fail };
    }
    Ok(r)
}

/// The symmetric set `{x : |x| ∈ G}` of a system on `(0, 1)` (first) and its
/// complement `{x : |x| ∈ C}` (second), as closed pieces on `ℝ`.
pub fn symmetric_split(system: &IntervalSystem) -> (Vec<Interval>, Vec<Interval>) {
    let (lo, hi) = system.domain();
    let mut a: Vec<Interval> = vec![
        Interval { lo: f64::NEG_INFINITY, hi: -hi },
        Interval { lo: hi, hi: f64::INFINITY },
    ];
    for iv in system.intervals() {
        a.push(*iv);
        a.push(Interval { lo: -iv.hi, hi: -iv.lo });
    }
    let mut b = Vec::new();
    for g in system.gaps() {
        b.push(Interval { lo: g.lo.max(lo), hi: g.hi });
        b.push(Interval { lo: -g.hi, hi: -g.lo.max(lo) });
    }
    a.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    b.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    (a, b)
}

fn guarded_phi(z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else {
        phi(z)
    }
}

/// `∫_lo^hi |x - s y| φ(y) dy` in closed form; `lo`, `hi` may be infinite.
fn abs_moment(x: f64, s: f64, lo: f64, hi: f64) -> f64 {
    // ∫ (x - s y) φ = x [Φ] + s [φ]
    let below = |l: f64, h: f64| x * (big_phi(h) - big_phi(l)) + s * (guarded_phi(h) - guarded_phi(l));
    let pivot = x / s;
    if pivot <= lo {
        -below(lo, hi)
    } else if pivot >= hi {
        below(lo, hi)
    } else {
        below(lo, pivot) - below(pivot, hi)
    }
}

/// `E|x - √t U|` with `U` standard normal conditioned on `pieces`.
pub fn potential(pieces: &[Interval], t: f64, x: f64) -> f64 {
    if t == 0.0 {
        return x.abs();
    }
    let s = t.sqrt();
    let mass: f64 = pieces.iter().map(|p| big_phi(p.hi) - big_phi(p.lo)).sum();
    let total: f64 = pieces.iter().map(|p| abs_moment(x, s, p.lo, p.hi)).sum();
    total / mass
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexOrderReport {
    pub depth: u32,
    pub t_grid: Vec<f64>,
    pub n_x: usize,
    pub tolerance: f64,
    /// `max (u_{t_i}(x) - u_{t_{i+1}}(x))` over the grid, for `U` then `V`.
    pub max_decrease_u: f64,
    pub max_decrease_v: f64,
    pub pass: bool,
}

pub const CONVEX_TOL: f64 = 1e-9;

/// Check that `t ↦ E|x - √t U|` and `t ↦ E|x - √t V|` are non-decreasing on
/// the grid, for `U`, `V` standard normals conditioned on the symmetric set
/// built from the depth-`d` fat Cantor system and on its complement.
pub fn convex_order_check(depth: u32, t_grid: &[f64], x_grid: &[f64]) -> Result<ConvexOrderReport> {
    if t_grid.iter().any(|&t| !(t >= 0.0)) {
        return domain("times must be non-negative");
    }
    let system = IntervalSystem::fat_cantor(depth)?;
    let (a, b) = symmetric_split(&system);
    let mut ts = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    let worst = |pieces: &[Interval]| {
        let mut w = f64::NEG_INFINITY;
        for &x in x_grid {
            for pair in ts.windows(2) {
                w = w.max(potential(pieces, pair[0], x) - potential(pieces, pair[1], x));
            }
        }
        w
    };
    let (du, dv) = (worst(&a), worst(&b));
    Ok(ConvexOrderReport {
        depth,
        t_grid: ts,
        n_x: x_grid.len(),
        tolerance: CONVEX_TOL,
        max_decrease_u: du,
        max_decrease_v: dv,
        pass: du <= CONVEX_TOL && dv <= CONVEX_TOL,
    })
}

/// `x` from `lo` to `hi` in steps of `step`, endpoints included.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}
